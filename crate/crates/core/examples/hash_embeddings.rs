// Embeds a corpus with the deterministic feature-hashing provider, builds
// the requirement-by-provision cosine matrix and ranks two embedding
// widths by micro ROC-AUC.

use lextrace::corpus::Corpus;
use lextrace::embeddings::{build_similarity_matrix, EmbeddingProvider, HashProvider};
use lextrace::evaluation::{rank_models, rank_row, ModelEmbeddings};

fn embed(corpus: &Corpus, dim: usize) -> lextrace::Result<ModelEmbeddings> {
    let provider = HashProvider::new(dim, 16);
    let reqs: Vec<(String, String)> = corpus.requirements().map(|r| (r.id.clone(), r.text.clone())).collect();
    let provs: Vec<(String, String)> = corpus.catalog().iter().map(|p| (p.code.clone(), p.text())).collect();
    Ok(ModelEmbeddings {
        tag: provider.tag(),
        requirements: provider.embed(&reqs)?,
        provisions: provider.embed(&provs)?,
    })
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = Corpus::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/loo_corpus.json"))?;
    let model = embed(&corpus, 256)?;
    let req_ids: Vec<String> = corpus.requirements().map(|r| r.id.clone()).collect();
    let codes = corpus.provision_codes();
    let matrix = build_similarity_matrix(&model.requirements, &req_ids, &model.provisions, &codes)?;

    let first = &req_ids[0];
    let ranked = rank_row(matrix.row(0), &codes);
    println!("{first}: {}", corpus.requirement(first).ok_or("missing")?.text);
    for &j in ranked.iter().take(3) {
        println!("  {:<5} {:.3}", codes[j], matrix.get(0, j));
    }

    let again = embed(&corpus, 256)?;
    if again.requirements.to_json() != model.requirements.to_json() {
        return Err("hash embeddings are not deterministic".into());
    }

    let ranking = rank_models(&[embed(&corpus, 16)?, model], &corpus)?;
    for m in &ranking {
        println!("#{} {:<20} AUC {:.3}", m.rank, m.tag, m.auc);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
