// Loads a corpus file, walks its documents and ground truth, and shows the
// text normalization used by the classic baselines.

use std::collections::BTreeSet;

use lextrace::corpus::{preprocess, split_sentences, Corpus, PreprocessConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = Corpus::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus.json"))?;
    println!(
        "{} documents, {} requirements, {} provisions, {} links",
        corpus.documents().len(),
        corpus.num_requirements(),
        corpus.catalog().len(),
        corpus.ground_truth().len()
    );
    for doc in corpus.documents() {
        println!("{} ({})", doc.id, doc.name);
        for r in &doc.requirements {
            let codes: Vec<String> = corpus.ground_truth().links_for(&r.id).into_iter().collect();
            println!("  {:<5} [{}] {}", r.id, codes.join(", "), r.text);
        }
    }

    let text = &corpus.requirement("PM-2").ok_or("PM-2 missing")?.text;
    println!("sentences: {:?}", split_sentences(text));
    println!("vsm tokens: {:?}", preprocess(text, &PreprocessConfig::without_stopwords()));
    println!("lda tokens: {:?}", preprocess(text, &PreprocessConfig::full()));

    let unlinked: BTreeSet<&str> = corpus
        .requirements()
        .filter(|r| corpus.ground_truth().links_for(&r.id).is_empty())
        .map(|r| r.id.as_str())
        .collect();
    if unlinked != BTreeSet::from(["PM-4"]) {
        return Err(format!("unexpected unlinked requirements {unlinked:?}").into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
