// Link-level and requirement-level metrics on a small hand-made prediction,
// plus Fisher's exact test on a 2x2 table.

use lextrace::corpus::Corpus;
use lextrace::evaluation::{
    confusion, fisher_exact, percent, requirement_level_report, roc_auc, AucMode, ContingencyTable2x2, MatchMode,
};
use lextrace::linker::PredictionSet;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = Corpus::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus.json"))?;
    let req_ids: Vec<String> = corpus.requirements().map(|r| r.id.clone()).collect();
    let codes = corpus.provision_codes();

    let mut pred = PredictionSet::empty("hand-made", &req_ids);
    for (r, c) in [("PM-1", "SEC"), ("PM-1", "CNF"), ("PM-2", "SEC"), ("SN-1", "ERS"), ("SH-1", "COK"), ("SH-2", "TIM")] {
        pred.insert(r, c);
    }
    let counts = confusion(&pred, corpus.ground_truth(), &req_ids, &codes)?;
    println!(
        "tp {} fp {} fn {} tn {}  P {}  R {}  F2 {}",
        counts.tp,
        counts.fp,
        counts.fn_,
        counts.tn,
        percent(counts.precision()),
        percent(counts.recall()),
        percent(counts.f2())
    );

    for mode in [MatchMode::Superset, MatchMode::Overlap] {
        let r = requirement_level_report(&pred, corpus.ground_truth(), &req_ids, codes.len(), mode)?;
        println!(
            "{mode:?}: exact {} partial {} success {:.1}% macro recall {:.1}% cost {:.1}%",
            r.exact_match,
            r.partial_match,
            100.0 * r.success_rate,
            100.0 * r.macro_recall,
            100.0 * r.cost
        );
    }

    let scores = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2];
    let labels = [true, true, false, true, false, false, true, false];
    let full = roc_auc(&scores, &labels, AucMode::Full)?;
    let swept = roc_auc(&scores, &labels, AucMode::ThresholdSweep { lo: 0.1, hi: 0.9, step: 0.05 })?;
    println!("AUC full {full:.4}, threshold sweep {swept:.4}");
    if (full - 0.75).abs() > 1e-12 {
        return Err(format!("expected AUC 0.75, got {full}").into());
    }

    let p = fisher_exact(&ContingencyTable2x2::new(8, 2, 1, 5));
    println!("Fisher exact p = {p:.6}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
