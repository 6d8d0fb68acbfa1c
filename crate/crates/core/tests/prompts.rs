//! Prompt templates against checked-in golden files, output parsing, and
//! prompt runs over scripted backends.
//!
//! Regenerate the golden files with `UPDATE_GOLDEN=1 cargo test --test prompts`.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use common::{chat_reply, fixture, StubServer};
use lextrace::corpus::Corpus;
use lextrace::prompting::{
    build_p1_prompt, build_p2_prompt, build_p3_prompt, build_rice_prompt, load_examples, parse_code_list,
    plan_prompts, run_prompt_strategy, ChatBackend, HttpChat, LlmConfig, OfflineBackend, PromptInputs,
    PromptVariant, ReplayBackend, Transcript,
};
use lextrace::Result;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn corpus() -> Corpus {
    Corpus::load(fixture("corpus.json")).unwrap()
}

fn rendered(variant: PromptVariant, corpus: &Corpus) -> String {
    let req = corpus.requirement("PM-1").unwrap();
    let sec = corpus.provision("SEC").unwrap();
    match variant {
        PromptVariant::Rice => {
            let examples = load_examples(fixture("examples.json")).unwrap();
            build_rice_prompt(corpus.catalog(), &examples, req).unwrap()
        }
        PromptVariant::P1 => build_p1_prompt(req, sec).unwrap(),
        PromptVariant::P2 => build_p2_prompt(req, corpus.catalog()).unwrap(),
        v => build_p3_prompt(v, req, sec).unwrap(),
    }
}

#[test]
fn templates_match_golden_files() {
    let corpus = corpus();
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for variant in PromptVariant::ALL {
        let path = golden_path(&format!("{variant}.txt"));
        let text = rendered(variant, &corpus);
        if update {
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(&path, &text).unwrap();
        }
        let golden = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(text, golden, "{variant} differs from {}", path.display());
    }
}

#[test]
fn golden_files_carry_the_fixed_phrasing() {
    let read = |v: &str| std::fs::read_to_string(golden_path(&format!("{v}.txt"))).unwrap();
    assert!(read("rice").contains("prioritizing recall over precision"));
    assert!(read("rice").contains("Choose at least one regulation for each requirement."));
    assert!(read("rice").contains("\nELSE: No trace link"));
    assert!(read("p1").contains("Is there a traceability link"));
    assert!(read("p1").contains("<trace> </trace>"));
    assert!(read("p2").contains("Act as a requirements engineering domain expert"));
    assert!(read("p3_1").contains("Let's think step by step"));
    assert!(read("p3_2").contains("Answer with Yes or No"));
    for v in PromptVariant::ALL {
        assert!(read(v.as_str()).contains("If a key file is required to unlock the database"));
    }
}

#[test]
fn rice_prompt_lists_every_provision_then_else() {
    let text = rendered(PromptVariant::Rice, &corpus());
    let lines: Vec<&str> = text.lines().collect();
    let first = lines.iter().position(|l| l.starts_with("ACC: Right to access: ")).unwrap();
    assert!(lines[first + 25].starts_with("NTF: Data breach notification content: "));
    assert!(lines[first + 26].starts_with("ELSE: "));
    assert_eq!(text.matches("trace links: [").count(), 5);
    assert!(text.ends_with("Requirement: If a key file is required to unlock the database, the database does not open unless the key file is present."));
}

const KEY_FILE_OUTPUT: &str = "REQ: If a key file is required to unlock the database, the database does not open unless the key file is present.
Trace links: [ACC, CNF, SEC]
Rationale:
- ACC: opening the database depends on holding the key file.
- CNF: only holders of the key file can read the stored entries.
- SEC: the key file is an additional authentication factor.";

#[test]
fn parser_recovers_the_key_file_example() {
    let codes = corpus().provision_codes();
    let parsed = parse_code_list(KEY_FILE_OUTPUT, &codes).unwrap();
    let expected: BTreeSet<String> = ["ACC", "CNF", "SEC"].map(String::from).into();
    assert_eq!(parsed.codes, expected);
    assert!(parsed.unknown_codes.is_empty());
}

struct Scripted<F: Fn(&str) -> String + Sync> {
    reply: F,
    calls: AtomicUsize,
}

impl<F: Fn(&str) -> String + Sync> ChatBackend for Scripted<F> {
    fn complete(&self, prompt: &str) -> Result<String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        Ok((self.reply)(prompt))
    }
}

fn scripted<F: Fn(&str) -> String + Sync>(reply: F) -> Scripted<F> {
    Scripted {
        reply,
        calls: AtomicUsize::new(0),
    }
}

fn inputs<'a>(corpus: &'a Corpus, examples: &'a [lextrace::prompting::FewShotExample]) -> PromptInputs<'a> {
    PromptInputs {
        corpus,
        examples,
        req_embeddings: None,
        prov_embeddings: None,
        k: 26,
    }
}

#[test]
fn else_answer_predicts_nothing() {
    let corpus = corpus();
    let examples = load_examples(fixture("examples.json")).unwrap();
    let backend = scripted(|_| "Trace links: [ELSE]\nThe requirement concerns the user interface only.".into());
    let ids = vec!["PM-4".to_owned()];
    let mut transcript = Transcript::in_memory();
    let run = run_prompt_strategy(
        PromptVariant::Rice,
        &inputs(&corpus, &examples),
        &ids,
        &backend,
        &serde_json::json!({}),
        &mut transcript,
        1,
    )
    .unwrap();
    assert!(run.failures.is_empty());
    assert_eq!(run.predictions.codes_for("PM-4").map(BTreeSet::len), Some(0));
    assert_eq!(run.requests_sent, 1);
}

#[test]
fn p3_2_yes_for_one_pair_gives_a_singleton() {
    let corpus = corpus();
    let backend = scripted(|p: &str| {
        if p.contains("'''Ensuring security: ") {
            "Yes".into()
        } else {
            "No.".into()
        }
    });
    let ids = vec!["PM-1".to_owned()];
    let mut transcript = Transcript::in_memory();
    let run = run_prompt_strategy(
        PromptVariant::P3_2,
        &inputs(&corpus, &[]),
        &ids,
        &backend,
        &serde_json::json!({}),
        &mut transcript,
        4,
    )
    .unwrap();
    assert_eq!(backend.calls.load(Ordering::SeqCst), 26);
    let expected: BTreeSet<String> = BTreeSet::from(["SEC".to_owned()]);
    assert_eq!(run.predictions.codes_for("PM-1"), Some(&expected));
    assert_eq!(transcript.records().len(), 26);
}

#[test]
fn unparseable_answers_are_recorded_per_item() {
    let corpus = corpus();
    let backend = scripted(|p: &str| {
        if p.contains("'''Consent: ") {
            "I cannot decide.".into()
        } else {
            "No".into()
        }
    });
    let ids = vec!["SH-1".to_owned()];
    let mut transcript = Transcript::in_memory();
    let run = run_prompt_strategy(
        PromptVariant::P3_2,
        &inputs(&corpus, &[]),
        &ids,
        &backend,
        &serde_json::json!({}),
        &mut transcript,
        1,
    )
    .unwrap();
    assert_eq!(run.failures.len(), 1);
    assert_eq!(run.failures[0].key.code, "CON");
    assert_eq!(run.predictions.num_links(), 0);
}

#[test]
fn transcript_resumes_and_replays_without_new_requests() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("transcript.jsonl");
    let corpus = corpus();
    let ids: Vec<String> = vec!["PM-1".into(), "SN-1".into()];
    let reply = |p: &str| {
        if p.contains("delete their account") {
            "Trace links: [ERS]".to_owned()
        } else {
            "Trace links: [SEC]".to_owned()
        }
    };
    let first = {
        let backend = scripted(reply);
        let mut t = Transcript::open(&path).unwrap();
        let run = run_prompt_strategy(PromptVariant::P2, &inputs(&corpus, &[]), &ids, &backend, &serde_json::json!({"model": "m"}), &mut t, 1).unwrap();
        assert_eq!(run.requests_sent, 2);
        run.predictions
    };

    // reopening the same transcript answers everything from disk
    let backend = scripted(reply);
    let mut t = Transcript::open(&path).unwrap();
    assert_eq!(t.records().len(), 2);
    let resumed = run_prompt_strategy(PromptVariant::P2, &inputs(&corpus, &[]), &ids, &backend, &serde_json::json!({}), &mut t, 1).unwrap();
    assert_eq!(resumed.requests_sent, 0);
    assert_eq!(backend.calls.load(Ordering::SeqCst), 0);
    assert_eq!(resumed.predictions, first);

    // a replay backend built from the transcript reproduces the run
    let replay = Transcript::open(&path).unwrap().replay_backend();
    let mut fresh = Transcript::in_memory();
    let replayed = run_prompt_strategy(PromptVariant::P2, &inputs(&corpus, &[]), &ids, &replay, &serde_json::json!({}), &mut fresh, 1).unwrap();
    assert_eq!(replayed.predictions, first);
    assert!(replayed.failures.is_empty());
    assert!(ReplayBackend::new(HashMap::new()).complete("unseen").is_err());
}

#[test]
fn http_backend_drives_a_whole_run() {
    let server = StubServer::start(|_, body| {
        let prompt = body["messages"][0]["content"].as_str().unwrap_or_default();
        let answer = if prompt.contains("'''Ensuring security: ") {
            "The key file protects access. <trace>yes</trace>"
        } else {
            "Unrelated. <trace>no</trace>"
        };
        (200, chat_reply(answer))
    });
    let corpus = corpus();
    let hash = lextrace::embeddings::HashProvider::new(64, 16);
    use lextrace::embeddings::EmbeddingProvider;
    let reqs = hash
        .embed(&corpus.requirements().map(|r| (r.id.clone(), r.text.clone())).collect::<Vec<_>>())
        .unwrap();
    let provs = hash
        .embed(&corpus.catalog().iter().map(|p| (p.code.clone(), p.text())).collect::<Vec<_>>())
        .unwrap();
    let inputs = PromptInputs {
        corpus: &corpus,
        examples: &[],
        req_embeddings: Some(&reqs),
        prov_embeddings: Some(&provs),
        k: 26,
    };
    let config = LlmConfig {
        endpoint_url: server.url.clone(),
        backoff_base_ms: 1,
        ..LlmConfig::default()
    };
    let chat = HttpChat::with_api_key(config, Some("k".into())).unwrap();
    let ids = vec!["PM-1".to_owned()];
    let mut t = Transcript::in_memory();
    let run = run_prompt_strategy(PromptVariant::P1, &inputs, &ids, &chat, &serde_json::json!({}), &mut t, 3).unwrap();
    assert_eq!(server.requests().len(), 26);
    assert_eq!(run.predictions.codes_for("PM-1"), Some(&BTreeSet::from(["SEC".to_owned()])));
}

#[test]
fn dry_run_planning_needs_no_backend() {
    let corpus = corpus();
    let examples = load_examples(fixture("examples.json")).unwrap();
    let ids: Vec<String> = corpus.requirements().map(|r| r.id.clone()).collect();
    let items = plan_prompts(PromptVariant::Rice, &inputs(&corpus, &examples), &ids).unwrap();
    assert_eq!(items.len(), ids.len());
    assert!(OfflineBackend.complete(&items[0].prompt).is_err());
}
