// Fits the TF-IDF, LSI, LDA and indicator-term baselines and compares how
// well each ranks the true provisions of every requirement.

use std::collections::BTreeSet;

use lextrace::baselines::{fit_baseline, BaselineKind, BaselineOptions, LdaConfig};
use lextrace::corpus::Corpus;
use lextrace::evaluation::{map_score, pooled_pairs, roc_auc, AucMode};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = Corpus::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/loo_corpus.json"))?;
    let all_docs: BTreeSet<String> = corpus.doc_ids().into_iter().collect();
    let req_ids: Vec<String> = corpus.requirements().map(|r| r.id.clone()).collect();
    let options = BaselineOptions {
        lsi_k: 20,
        lda: LdaConfig { topics: 17, iterations: 100, averaged_sweeps: 20, ..LdaConfig::default() },
        max_df: None,
    };
    for kind in [BaselineKind::Tfidf, BaselineKind::Lsi, BaselineKind::Lda, BaselineKind::Indicator] {
        let fitted = fit_baseline(kind, &corpus, &all_docs, &options)?;
        let matrix = fitted.similarity_matrix(&corpus, &req_ids)?;
        let map = map_score(&matrix, corpus.ground_truth())?;
        let (scores, labels) = pooled_pairs(&matrix, corpus.ground_truth());
        let auc = roc_auc(&scores, &labels, AucMode::Full)?;
        println!("{:<10} MAP {:.3}  AUC {:.3}", kind.as_str(), map, auc);
        if !(0.0..=1.0).contains(&map) {
            return Err(format!("{} MAP out of range", kind.as_str()).into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
