//! LLM prompting: template rendering, chat client, output parsing and
//! transcript-backed batch runs.

mod client;
mod parse;
mod runner;
mod templates;

pub use client::{
    query_llm, ChatBackend, HttpChat, LlmConfig, OfflineBackend, ReplayBackend, DEFAULT_CHAT_ENDPOINT,
};
pub use parse::{parse_code_list, parse_trace_tag, parse_yes_no, ParsedPrediction};
pub use runner::{
    plan_prompts, requests_per_requirement, retrieve_topk, run_prompt_strategy, ItemFailure, ItemKey,
    PromptInputs, PromptItem, PromptRun, Transcript, TranscriptRecord, DEFAULT_P1_K, NO_CODE,
};
pub use templates::{
    build_p1_prompt, build_p2_prompt, build_p3_prompt, build_rice_prompt, catalog_lines, load_examples,
    FewShotExample, PromptVariant, ELSE_LINE, FEW_SHOT_COUNT,
};
