// Renders the RICE prompt for one requirement, parses a model answer, and
// runs a pairwise prompt strategy against an offline scripted backend with
// a transcript.

use lextrace::corpus::Corpus;
use lextrace::prompting::{
    build_rice_prompt, load_examples, parse_code_list, run_prompt_strategy, ChatBackend, PromptInputs, PromptVariant,
    Transcript,
};

/// Says yes exactly when the prompt mentions the security provision.
struct KeywordBackend;

impl ChatBackend for KeywordBackend {
    fn complete(&self, prompt: &str) -> lextrace::Result<String> {
        Ok(if prompt.contains("'''Ensuring security: ") { "Yes" } else { "No" }.to_owned())
    }
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let corpus = Corpus::load(format!("{dir}/corpus.json"))?;
    let examples = load_examples(format!("{dir}/examples.json"))?;
    let req = corpus.requirement("PM-2").ok_or("PM-2 missing")?;

    let prompt = build_rice_prompt(corpus.catalog(), &examples, req)?;
    println!("RICE prompt: {} lines, ends with:\n{}", prompt.lines().count(), prompt.lines().last().unwrap_or(""));

    let answer = "Trace links: [SEC, CNF]\nRationale: the master password encrypts the stored entries.";
    let parsed = parse_code_list(answer, &corpus.provision_codes())?;
    println!("parsed codes: {:?}", parsed.codes);

    let inputs = PromptInputs { corpus: &corpus, examples: &examples, req_embeddings: None, prov_embeddings: None, k: 26 };
    let ids = vec![req.id.clone()];
    let mut transcript = Transcript::in_memory();
    let run = run_prompt_strategy(
        PromptVariant::P3_2,
        &inputs,
        &ids,
        &KeywordBackend,
        &serde_json::json!({"backend": "keyword"}),
        &mut transcript,
        4,
    )?;
    println!(
        "P3_2: {} requests, predicted {:?}",
        run.requests_sent,
        run.predictions.codes_for(&req.id)
    );
    if run.requests_sent != corpus.catalog().len() || transcript.records().len() != run.requests_sent {
        return Err("pairwise prompting sends one request per provision".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
