// Leave-one-out evaluation over documents: every strategy predicts each
// document after learning from the rest, and per-document metrics are
// summarized with undefined scores counted as zero.

use std::collections::BTreeSet;

use lextrace::baselines::BaselineKind;
use lextrace::corpus::Corpus;
use lextrace::embeddings::{EmbeddingProvider, HashProvider};
use lextrace::pipeline::{run_loo, EmbeddingInputs, LooConfig, Strategy, StrategyConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = Corpus::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/loo_corpus.json"))?;
    let provider = HashProvider::new(256, 16);
    let reqs = provider.embed(&corpus.requirements().map(|r| (r.id.clone(), r.text.clone())).collect::<Vec<_>>())?;
    let provs = provider.embed(&corpus.catalog().iter().map(|p| (p.code.clone(), p.text())).collect::<Vec<_>>())?;

    let config = LooConfig {
        strategies: vec![Strategy::Constant, Strategy::Tuned, Strategy::Baseline(BaselineKind::Indicator)],
        excluded_docs: BTreeSet::from(["H10".to_owned()]),
        strategy: StrategyConfig::default(),
    };
    let outcome = run_loo(&corpus, Some(EmbeddingInputs { requirements: &reqs, provisions: &provs }), &config)?;
    println!("{}", outcome.summary());
    let tuned = &outcome.reports["tuned"];
    println!("{}", tuned.to_table());
    if tuned.documents.len() != 9 {
        return Err(format!("expected 9 held-out documents, got {}", tuned.documents.len()).into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
