//! Leave-one-out evaluation of threshold strategies and baselines over a
//! corpus.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::baselines::{fit_baseline, BaselineKind, BaselineOptions, FittedBaseline};
use crate::corpus::{sentence_units, Corpus};
use crate::embeddings::{build_similarity_matrix, EmbeddingSet, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::evaluation::{
    link_metrics, loo_splits, requirement_level_report, AucMode, DocumentRow, MatchMode, MetricsReport,
};
use crate::linker::{
    predict_constant, predict_delta, predict_dynamic, tune_threshold, NegativeExampleBank, PredictionSet,
    ThresholdCurve, DEFAULT_NEGATIVE_SAMPLE, DEFAULT_THETA,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    Constant,
    Dynamic,
    Delta,
    Tuned,
    Baseline(BaselineKind),
}

impl Strategy {
    pub const EMBEDDING: [Strategy; 4] = [Self::Constant, Self::Dynamic, Self::Delta, Self::Tuned];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Dynamic => "dynamic",
            Self::Delta => "delta",
            Self::Tuned => "tuned",
            Self::Baseline(b) => b.as_str(),
        }
    }

    pub fn needs_embeddings(&self) -> bool {
        !matches!(self, Self::Baseline(_))
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.name().to_owned()
    }
}

impl TryFrom<String> for Strategy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "dynamic" => Ok(Self::Dynamic),
            "delta" => Ok(Self::Delta),
            "tuned" => Ok(Self::Tuned),
            other => other
                .parse::<BaselineKind>()
                .map(Self::Baseline)
                .map_err(|_| Error::invalid("strategy", format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub theta: f64,
    pub negative_sample: usize,
    pub seed: u64,
    pub baselines: BaselineOptions,
    /// Score each sentence separately and union predictions per requirement.
    pub sentence_level: bool,
    pub match_mode: MatchMode,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            negative_sample: DEFAULT_NEGATIVE_SAMPLE,
            seed: 16,
            baselines: BaselineOptions::default(),
            sentence_level: false,
            match_mode: MatchMode::Superset,
        }
    }
}

/// Embedding inputs of the similarity strategies. With sentence-level
/// scoring `requirements` must also hold one vector per sentence unit.
pub struct EmbeddingInputs<'a> {
    pub requirements: &'a EmbeddingSet,
    pub provisions: &'a EmbeddingSet,
}

/// Predictions for `test_ids` under `strategy`, with thresholds learned from
/// `train_ids` where the strategy learns any. Also returns the
/// requirement-level score matrix of the test requirements.
pub struct StrategyRunner<'a> {
    corpus: &'a Corpus,
    embeddings: Option<EmbeddingInputs<'a>>,
    config: &'a StrategyConfig,
    fitted: HashMap<BaselineKind, FittedBaseline>,
    parents: HashMap<String, String>,
    units_of: BTreeMap<String, Vec<String>>,
    last_curve: Option<ThresholdCurve>,
}

impl<'a> StrategyRunner<'a> {
    pub fn new(corpus: &'a Corpus, embeddings: Option<EmbeddingInputs<'a>>, config: &'a StrategyConfig) -> Self {
        let mut parents = HashMap::new();
        let mut units_of: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for u in sentence_units(corpus.requirements()) {
            parents.insert(u.unit_id.clone(), u.parent_id.clone());
            units_of.entry(u.parent_id).or_default().push(u.unit_id);
        }
        Self {
            corpus,
            embeddings,
            config,
            fitted: HashMap::new(),
            parents,
            units_of,
            last_curve: None,
        }
    }

    fn embedding_inputs(&self) -> Result<&EmbeddingInputs<'a>> {
        self.embeddings
            .as_ref()
            .ok_or_else(|| Error::invalid("embeddings", "similarity strategies need embeddings"))
    }

    /// Requirement-level cosine matrix for `ids`.
    fn embedding_matrix(&self, ids: &[String]) -> Result<SimilarityMatrix> {
        let e = self.embedding_inputs()?;
        build_similarity_matrix(e.requirements, ids, e.provisions, &self.corpus.provision_codes())
    }

    fn unit_ids(&self, ids: &[String]) -> Vec<String> {
        ids.iter().flat_map(|id| self.units_of.get(id).cloned().unwrap_or_default()).collect()
    }

    /// Matrix whose rows are what the strategy classifies: sentence units or
    /// whole requirements.
    fn scoring_rows(&self, ids: &[String]) -> Result<SimilarityMatrix> {
        if self.config.sentence_level {
            self.embedding_matrix(&self.unit_ids(ids))
        } else {
            self.embedding_matrix(ids)
        }
    }

    fn to_requirements(&self, pred: PredictionSet, ids: &[String]) -> Result<PredictionSet> {
        if !self.config.sentence_level {
            return Ok(pred);
        }
        let mut merged = PredictionSet::empty(pred.strategy_tag(), ids);
        for (r, codes) in pred.union_into_parents(&self.parents)?.predictions() {
            merged.set(r, codes.clone());
        }
        Ok(merged)
    }

    fn ranking_matrix(&self, ids: &[String]) -> Result<SimilarityMatrix> {
        if self.config.sentence_level {
            self.embedding_matrix(&self.unit_ids(ids))?.max_pool(&self.parents)
        } else {
            self.embedding_matrix(ids)
        }
    }

    fn baseline(&mut self, kind: BaselineKind, train_docs: &BTreeSet<String>) -> Result<&FittedBaseline> {
        // the indicator model depends on the training split; the others do not
        if kind == BaselineKind::Indicator || !self.fitted.contains_key(&kind) {
            let fitted = fit_baseline(kind, self.corpus, train_docs, &self.config.baselines)?;
            self.fitted.insert(kind, fitted);
        }
        Ok(&self.fitted[&kind])
    }

    /// Tuning curve of the most recent `run` of a strategy that learns its
    /// threshold.
    pub fn last_curve(&self) -> Option<&ThresholdCurve> {
        self.last_curve.as_ref()
    }

    pub fn run(
        &mut self,
        strategy: Strategy,
        train_docs: &BTreeSet<String>,
        test_ids: &[String],
    ) -> Result<(PredictionSet, SimilarityMatrix)> {
        let corpus = self.corpus;
        let train_ids: Vec<String> = corpus.requirements_in(train_docs).iter().map(|r| r.id.clone()).collect();
        let gt = corpus.ground_truth();
        self.last_curve = None;
        let pred = match strategy {
            Strategy::Constant => {
                let rows = self.scoring_rows(test_ids)?;
                self.to_requirements(predict_constant(&rows, self.config.theta)?, test_ids)?
            }
            Strategy::Delta => {
                let rows = self.scoring_rows(test_ids)?;
                self.to_requirements(predict_delta(&rows)?, test_ids)?
            }
            Strategy::Dynamic => {
                let bank = NegativeExampleBank::from_ground_truth(
                    &train_ids,
                    &self.corpus.provision_codes(),
                    gt,
                    self.config.negative_sample,
                    self.config.seed,
                )?;
                let rows = self.scoring_rows(test_ids)?;
                let e = self.embedding_inputs()?;
                self.to_requirements(predict_dynamic(e.requirements, &rows, &bank)?, test_ids)?
            }
            Strategy::Tuned => {
                let curve = tune_threshold(&self.ranking_matrix(&train_ids)?, gt)?;
                let rows = self.scoring_rows(test_ids)?;
                let mut p = self.to_requirements(predict_constant(&rows, curve.best_theta)?, test_ids)?;
                test_ids.iter().for_each(|r| p.set_threshold(r, curve.best_theta));
                self.last_curve = Some(curve);
                p
            }
            Strategy::Baseline(kind) => {
                let fitted = self.baseline(kind, train_docs)?;
                let curve = tune_threshold(&fitted.similarity_matrix(corpus, &train_ids)?, gt)?;
                let test = fitted.similarity_matrix(corpus, test_ids)?;
                let mut p = predict_constant(&test, curve.best_theta)?;
                test_ids.iter().for_each(|r| p.set_threshold(r, curve.best_theta));
                self.last_curve = Some(curve);
                return Ok((retag(p, kind.as_str()), test));
            }
        };
        Ok((retag(pred, strategy.name()), self.ranking_matrix(test_ids)?))
    }
}

fn retag(pred: PredictionSet, tag: &str) -> PredictionSet {
    let mut out = PredictionSet::empty(tag, std::iter::empty());
    for (r, codes) in pred.predictions() {
        out.set(r, codes.clone());
    }
    for (r, t) in pred.thresholds_used() {
        out.set_threshold(r, *t);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooConfig {
    pub strategies: Vec<Strategy>,
    pub excluded_docs: BTreeSet<String>,
    pub strategy: StrategyConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooOutcome {
    pub reports: BTreeMap<String, MetricsReport>,
    /// Union of the held-out predictions of every split.
    pub predictions: BTreeMap<String, PredictionSet>,
}

impl LooOutcome {
    /// One line per strategy: pooled counts and mean F2.
    pub fn summary(&self) -> String {
        self.reports
            .values()
            .map(|r| {
                format!(
                    "{:<10} tp={} fp={} fn={} meanF2={}",
                    r.strategy,
                    r.pooled.counts.tp,
                    r.pooled.counts.fp,
                    r.pooled.counts.fn_,
                    crate::evaluation::percent(r.f2.mean)
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Each retained document is predicted by every strategy after learning from
/// the others.
pub fn run_loo(corpus: &Corpus, embeddings: Option<EmbeddingInputs<'_>>, config: &LooConfig) -> Result<LooOutcome> {
    if config.strategies.is_empty() {
        return Err(Error::invalid("strategies", "nothing to evaluate"));
    }
    let splits = loo_splits(corpus, &config.excluded_docs)?;
    let mut runner = StrategyRunner::new(corpus, embeddings, &config.strategy);
    let mut reports = BTreeMap::new();
    let mut predictions = BTreeMap::new();
    for strategy in &config.strategies {
        let mut rows = Vec::new();
        let mut all = PredictionSet::empty(strategy.name(), std::iter::empty());
        let mut evaluated = Vec::new();
        for split in &splits {
            let train: BTreeSet<String> = split.train.iter().cloned().collect();
            let test_ids: Vec<String> = corpus
                .requirements_in(&BTreeSet::from([split.test.clone()]))
                .iter()
                .map(|r| r.id.clone())
                .collect();
            let (pred, matrix) = runner.run(*strategy, &train, &test_ids)?;
            let metrics = link_metrics(&pred, corpus.ground_truth(), &matrix, AucMode::Full)?;
            rows.push(DocumentRow {
                doc_id: split.test.clone(),
                metrics,
            });
            for (r, codes) in pred.predictions() {
                all.set(r, codes.clone());
            }
            for (r, t) in pred.thresholds_used() {
                all.set_threshold(r, *t);
            }
            evaluated.extend(test_ids);
        }
        let mut report = MetricsReport::from_documents(strategy.name(), rows);
        report.requirement_level = Some(requirement_level_report(
            &all,
            corpus.ground_truth(),
            &evaluated,
            corpus.catalog().len(),
            config.strategy.match_mode,
        )?);
        reports.insert(strategy.name().to_owned(), report);
        predictions.insert(strategy.name().to_owned(), all);
    }
    Ok(LooOutcome { reports, predictions })
}
