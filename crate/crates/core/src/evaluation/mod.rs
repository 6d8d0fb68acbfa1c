//! Metrics, requirement-level outcomes, significance testing and the
//! experiment harnesses built on them.

mod experiments;
mod fisher;
mod metrics;
mod report;
mod requirement;

pub use experiments::{
    loo_splits, model_auc, rank_models, LooSplit, ModelEmbeddings, RankedModel, RANKING_AUC,
};
pub use fisher::{fisher_exact, hypergeometric_support, ContingencyTable2x2};
pub use metrics::{
    average_precision, confusion, f_beta, f_beta_from, map_score, mean_undefined_as_zero, pooled_pairs,
    rank_row, roc_auc, roc_curve, roc_point, std_undefined_as_zero, sweep_thresholds_between, AucMode,
    ConfusionCounts,
};
pub use report::{link_metrics, percent, roc_csv, DocumentRow, LinkMetrics, MetricsReport, Spread, TextTable};
pub use requirement::{
    classify, requirement_level_report, requirement_recall, MatchMode, MatchOutcome, RequirementLevelReport,
};
