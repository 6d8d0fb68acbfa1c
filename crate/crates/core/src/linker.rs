//! Threshold strategies that turn a [`SimilarityMatrix`] into predicted
//! trace links.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TraceLinkSet;
use crate::embeddings::{cosine_ids, EmbeddingSet, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::evaluation::{confusion, pooled_pairs, rank_row, ConfusionCounts};

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_NEGATIVE_SAMPLE: usize = 10;

/// Predicted links for a set of requirements together with the thresholds
/// that produced them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet {
    predictions: BTreeMap<String, BTreeSet<String>>,
    strategy_tag: String,
    thresholds_used: BTreeMap<String, f64>,
    pair_thresholds: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdSidecar {
    strategy: String,
    thresholds: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pair_thresholds: BTreeMap<String, BTreeMap<String, f64>>,
}

impl PredictionSet {
    /// Every requirement in `req_ids` gets an entry, possibly empty.
    pub fn empty<'a>(strategy_tag: impl Into<String>, req_ids: impl IntoIterator<Item = &'a String>) -> Self {
        Self {
            predictions: req_ids.into_iter().map(|r| (r.clone(), BTreeSet::new())).collect(),
            strategy_tag: strategy_tag.into(),
            ..Self::default()
        }
    }

    pub fn insert(&mut self, req_id: &str, code: &str) {
        self.predictions
            .entry(req_id.to_owned())
            .or_default()
            .insert(code.to_owned());
    }

    /// Replaces the prediction of `req_id` (creating its entry).
    pub fn set(&mut self, req_id: &str, codes: BTreeSet<String>) {
        self.predictions.insert(req_id.to_owned(), codes);
    }

    pub fn set_threshold(&mut self, req_id: &str, theta: f64) {
        self.thresholds_used.insert(req_id.to_owned(), theta);
    }

    pub fn strategy_tag(&self) -> &str {
        &self.strategy_tag
    }

    pub fn predictions(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.predictions
    }

    pub fn thresholds_used(&self) -> &BTreeMap<String, f64> {
        &self.thresholds_used
    }

    /// Per-pair thresholds of the dynamic strategy, keyed requirement then code.
    pub fn pair_thresholds(&self) -> &BTreeMap<String, BTreeMap<String, f64>> {
        &self.pair_thresholds
    }

    pub fn codes_for(&self, req_id: &str) -> Option<&BTreeSet<String>> {
        self.predictions.get(req_id)
    }

    pub fn contains(&self, req_id: &str, code: &str) -> bool {
        self.predictions.get(req_id).is_some_and(|c| c.contains(code))
    }

    pub fn req_ids(&self) -> impl Iterator<Item = &str> {
        self.predictions.keys().map(String::as_str)
    }

    pub fn links(&self) -> impl Iterator<Item = (&str, &str)> {
        self.predictions
            .iter()
            .flat_map(|(r, cs)| cs.iter().map(move |c| (r.as_str(), c.as_str())))
    }

    pub fn num_links(&self) -> usize {
        self.predictions.values().map(BTreeSet::len).sum()
    }

    pub fn to_link_set(&self) -> TraceLinkSet {
        self.links().map(|(r, c)| (r.to_owned(), c.to_owned())).collect()
    }

    /// Only the requirements in `req_ids`.
    pub fn restrict<'a>(&self, req_ids: impl IntoIterator<Item = &'a str>) -> Self {
        let keep: BTreeSet<&str> = req_ids.into_iter().collect();
        let filter = |r: &String| keep.contains(r.as_str());
        Self {
            predictions: self.predictions.iter().filter(|(r, _)| filter(r)).map(|(r, c)| (r.clone(), c.clone())).collect(),
            strategy_tag: self.strategy_tag.clone(),
            thresholds_used: self.thresholds_used.iter().filter(|(r, _)| filter(r)).map(|(r, t)| (r.clone(), *t)).collect(),
            pair_thresholds: self.pair_thresholds.iter().filter(|(r, _)| filter(r)).map(|(r, t)| (r.clone(), t.clone())).collect(),
        }
    }

    /// Collapses sentence-level predictions onto parent requirements by
    /// union. Per-unit thresholds do not carry over.
    pub fn union_into_parents(&self, parents: &HashMap<String, String>) -> Result<Self> {
        let mut out = Self {
            strategy_tag: self.strategy_tag.clone(),
            ..Self::default()
        };
        for (unit, codes) in &self.predictions {
            let parent = parents.get(unit).ok_or_else(|| Error::UnknownId {
                kind: "sentence unit",
                id: unit.clone(),
            })?;
            out.predictions.entry(parent.clone()).or_default().extend(codes.iter().cloned());
        }
        Ok(out)
    }

    /// `{requirement id: [codes]}` with sorted keys and codes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.predictions).expect("predictions serialize")
    }

    pub fn thresholds_json(&self) -> String {
        serde_json::to_string_pretty(&ThresholdSidecar {
            strategy: self.strategy_tag.clone(),
            thresholds: self.thresholds_used.clone(),
            pair_thresholds: self.pair_thresholds.clone(),
        })
        .expect("thresholds serialize")
    }

    /// `foo.json` pairs with `foo.thresholds.json`.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("predictions");
        path.with_file_name(format!("{stem}.thresholds.json"))
    }

    /// Writes the predictions file and its thresholds sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))?;
        let side = Self::sidecar_path(path);
        std::fs::write(&side, self.thresholds_json() + "\n").map_err(|e| Error::io(&side, e))
    }

    /// Reads a predictions file; the sidecar is optional.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let predictions = serde_json::from_str(&text)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        let mut set = Self {
            predictions,
            ..Self::default()
        };
        let side = Self::sidecar_path(path);
        if side.exists() {
            let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
            let sidecar: ThresholdSidecar = serde_json::from_str(&text)
                .map_err(|e| Error::json(side.display().to_string(), e))?;
            set.strategy_tag = sidecar.strategy;
            set.thresholds_used = sidecar.thresholds;
            set.pair_thresholds = sidecar.pair_thresholds;
        }
        Ok(set)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid("theta", format!("{theta} is outside [0, 1]")));
    }
    Ok(())
}

/// Links every pair scoring strictly above `theta`.
pub fn predict_constant(matrix: &SimilarityMatrix, theta: f64) -> Result<PredictionSet> {
    check_theta(theta)?;
    let mut set = PredictionSet::empty(format!("constant:theta={theta}"), matrix.req_ids());
    for (i, req_id) in matrix.req_ids().iter().enumerate() {
        for (j, code) in matrix.prov_codes().iter().enumerate() {
            if matrix.get(i, j) > theta {
                set.insert(req_id, code);
            }
        }
        set.set_threshold(req_id, theta);
    }
    Ok(set)
}

/// Requirements known not to trace to each provision, sampled once per run.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeExampleBank {
    per_provision: BTreeMap<String, Vec<String>>,
    sample_size: usize,
    seed: u64,
}

impl NegativeExampleBank {
    /// Checks every listed requirement against `gt`.
    pub fn new(
        per_provision: BTreeMap<String, Vec<String>>,
        sample_size: usize,
        seed: u64,
        gt: &TraceLinkSet,
    ) -> Result<Self> {
        if sample_size == 0 {
            return Err(Error::invalid("sample_size", "must be at least 1"));
        }
        for (code, reqs) in &per_provision {
            if let Some(r) = reqs.iter().find(|r| gt.contains(r, code)) {
                return Err(Error::invalid(
                    format!("negatives.{code}"),
                    format!("requirement {r} is a ground-truth link of {code}"),
                ));
            }
        }
        Ok(Self {
            per_provision,
            sample_size,
            seed,
        })
    }

    /// Pools, for each code, every training requirement without a link to it.
    pub fn from_ground_truth(
        train_req_ids: &[String],
        codes: &[String],
        gt: &TraceLinkSet,
        sample_size: usize,
        seed: u64,
    ) -> Result<Self> {
        let per_provision = codes
            .iter()
            .map(|c| {
                let pool = train_req_ids.iter().filter(|r| !gt.contains(r, c)).cloned().collect();
                (c.clone(), pool)
            })
            .collect();
        Self::new(per_provision, sample_size, seed, gt)
    }

    pub fn pool(&self, code: &str) -> Option<&[String]> {
        self.per_provision.get(code).map(Vec::as_slice)
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Up to `sample_size` pool members drawn without replacement, in pool
    /// order. The draw depends only on the seed, the code and the pool.
    pub fn sample(&self, code: &str) -> Result<Vec<String>> {
        let pool = self.per_provision.get(code).ok_or_else(|| Error::UnknownId {
            kind: "provision in negative example bank",
            id: code.to_owned(),
        })?;
        if pool.is_empty() {
            return Err(Error::Undefined(format!(
                "provision {code} has no negative examples"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ code_hash(code));
        let amount = self.sample_size.min(pool.len());
        let mut picked = sample(&mut rng, pool.len(), amount).into_vec();
        picked.sort_unstable();
        Ok(picked.into_iter().map(|i| pool[i].clone()).collect())
    }
}

fn code_hash(code: &str) -> u64 {
    code.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Per pair, the threshold is the mean cosine between the requirement and
/// the sampled negatives of the provision.
pub fn predict_dynamic(
    req_embeddings: &EmbeddingSet,
    matrix: &SimilarityMatrix,
    bank: &NegativeExampleBank,
) -> Result<PredictionSet> {
    let negatives: Vec<Vec<String>> = matrix
        .prov_codes()
        .iter()
        .map(|c| bank.sample(c))
        .collect::<Result<_>>()?;
    let mut set = PredictionSet::empty(
        format!("dynamic:sample={},seed={}", bank.sample_size, bank.seed),
        matrix.req_ids(),
    );
    for (i, req_id) in matrix.req_ids().iter().enumerate() {
        let u = req_embeddings.require(req_id)?;
        let mut row_thresholds = BTreeMap::new();
        for (j, code) in matrix.prov_codes().iter().enumerate() {
            let mut sum = 0.0;
            for neg in &negatives[j] {
                let v = req_embeddings.require(neg)?;
                sum += cosine_ids(u, req_id, v, neg)?;
            }
            let theta = sum / negatives[j].len() as f64;
            if matrix.get(i, j) > theta {
                set.insert(req_id, code);
            }
            row_thresholds.insert(code.clone(), theta);
        }
        set.pair_thresholds.insert(req_id.clone(), row_thresholds);
    }
    Ok(set)
}

/// Threshold of one row under the largest-gap rule.
///
/// Scores are ranked descending (ties by code); the threshold is the lower
/// score of the adjacent pair with the largest gap, the topmost such pair on
/// ties. When every gap is zero the returned threshold admits only the top
/// entry, signalled by `None`.
pub fn delta_threshold(row: &[f64], codes: &[String]) -> Result<(Vec<usize>, Option<f64>)> {
    if row.len() < 2 {
        return Err(Error::Undefined(
            "largest-gap threshold needs at least two provisions".into(),
        ));
    }
    let order = rank_row(row, codes);
    let mut best: Option<(usize, f64)> = None;
    for k in 0..order.len() - 1 {
        let gap = row[order[k]] - row[order[k + 1]];
        if gap > 0.0 && best.map_or(true, |(_, g)| gap > g) {
            best = Some((k, gap));
        }
    }
    Ok((order.clone(), best.map(|(k, _)| row[order[k + 1]])))
}

pub fn predict_delta(matrix: &SimilarityMatrix) -> Result<PredictionSet> {
    let codes = matrix.prov_codes();
    let mut set = PredictionSet::empty("delta", matrix.req_ids());
    for (i, req_id) in matrix.req_ids().iter().enumerate() {
        let row = matrix.row(i);
        let (order, theta) = delta_threshold(row, codes)?;
        match theta {
            Some(theta) => {
                for (j, code) in codes.iter().enumerate() {
                    if row[j] > theta {
                        set.insert(req_id, code);
                    }
                }
                set.set_threshold(req_id, theta);
            }
            None => {
                set.insert(req_id, &codes[order[0]]);
                set.set_threshold(req_id, row[order[0]]);
            }
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub theta: f64,
    /// Undefined F2 is stored as 0.
    pub f2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub points: Vec<CurvePoint>,
    pub best_theta: f64,
}

impl ThresholdCurve {
    /// First point with the highest F2, so ties resolve to the smallest θ.
    fn from_points(points: Vec<CurvePoint>) -> Self {
        let best = points
            .iter()
            .fold(None::<&CurvePoint>, |best, p| match best {
                Some(b) if b.f2 >= p.f2 => Some(b),
                _ => Some(p),
            })
            .expect("curve has points");
        Self {
            best_theta: best.theta,
            points,
        }
    }

    pub fn best_f2(&self) -> f64 {
        self.points
            .iter()
            .find(|p| p.theta == self.best_theta)
            .map_or(0.0, |p| p.f2)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,f2\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.theta, p.f2));
        }
        out
    }
}

fn counts_at(scores: &[f64], labels: &[bool], theta: f64) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (s, l) in scores.iter().zip(labels) {
        match (*s > theta, *l) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

/// F2 of `predict_constant(matrix, θ)` for every θ, counted over the pooled
/// cells of the matrix.
fn curve(matrix: &SimilarityMatrix, gt: &TraceLinkSet, thetas: impl Iterator<Item = f64>) -> Result<ThresholdCurve> {
    let gt = gt.restrict(matrix.req_ids().iter().map(String::as_str));
    let nothing = PredictionSet::empty("", std::iter::empty());
    confusion(&nothing, &gt, matrix.req_ids(), matrix.prov_codes())?;
    let (scores, labels) = pooled_pairs(matrix, &gt);
    let points = thetas
        .map(|theta| {
            check_theta(theta)?;
            Ok(CurvePoint {
                theta,
                f2: counts_at(&scores, &labels, theta).f2().unwrap_or(0.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdCurve::from_points(points))
}

/// Grid `k / 100` for `k = 1..=99`.
pub fn tuning_grid() -> impl Iterator<Item = f64> {
    (1..=99).map(|k| k as f64 / 100.0)
}

/// Picks the grid threshold maximizing F2 on training data. Ground-truth
/// links of requirements outside the matrix are ignored.
pub fn tune_threshold(matrix: &SimilarityMatrix, gt: &TraceLinkSet) -> Result<ThresholdCurve> {
    let in_matrix = gt.restrict(matrix.req_ids().iter().map(String::as_str));
    if in_matrix.is_empty() {
        return Err(Error::Undefined(
            "threshold tuning needs at least one training link".into(),
        ));
    }
    curve(matrix, &in_matrix, tuning_grid())
}

/// F2 at `n_points` thresholds evenly spaced over `[0, 1]`.
pub fn sweep_thresholds(matrix: &SimilarityMatrix, gt: &TraceLinkSet, n_points: usize) -> Result<ThresholdCurve> {
    if n_points < 2 {
        return Err(Error::invalid("n_points", "must be at least 2"));
    }
    let last = (n_points - 1) as f64;
    curve(matrix, gt, (0..n_points).map(|i| i as f64 / last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn codes(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("C{i}")).collect()
    }

    fn matrix(rows: Vec<Vec<f64>>) -> SimilarityMatrix {
        let n = rows[0].len();
        let ids = (0..rows.len()).map(|i| format!("R{i}")).collect();
        SimilarityMatrix::new(ids, codes(n), rows).unwrap()
    }

    #[test]
    fn constant_is_strict() {
        let m = matrix(vec![vec![0.5, 0.51, 0.0]]);
        let p = predict_constant(&m, 0.5).unwrap();
        assert_eq!(p.codes_for("R0").unwrap(), &BTreeSet::from(["C2".to_owned()]));
        let z = predict_constant(&matrix(vec![vec![0.0; 3]; 2]), 0.5).unwrap();
        assert_eq!(z.num_links(), 0);
        assert!(predict_constant(&m, 1.5).is_err());
    }

    #[test]
    fn delta_worked_example() {
        let m = matrix(vec![vec![0.98, 0.1, 0.3, 0.7]]);
        let (_, theta) = delta_threshold(m.row(0), m.prov_codes()).unwrap();
        assert_eq!(theta, Some(0.3));
        let p = predict_delta(&m).unwrap();
        assert_eq!(
            p.codes_for("R0").unwrap(),
            &BTreeSet::from(["C1".to_owned(), "C4".to_owned()])
        );
        assert_eq!(p.thresholds_used()["R0"], 0.3);
    }

    #[test]
    fn delta_degenerate_rows() {
        let p = predict_delta(&matrix(vec![vec![0.4; 3]])).unwrap();
        assert_eq!(p.codes_for("R0").unwrap(), &BTreeSet::from(["C1".to_owned()]));
        assert!(predict_delta(&matrix(vec![vec![0.4]])).is_err());
        // two equal largest gaps: the upper one wins
        let p = predict_delta(&matrix(vec![vec![0.9, 0.6, 0.3]])).unwrap();
        assert_eq!(p.codes_for("R0").unwrap().len(), 1);
    }

    fn embeddings(pairs: &[(&str, Vec<f64>)]) -> EmbeddingSet {
        let mut set = EmbeddingSet::new(pairs[0].1.len(), "test").unwrap();
        for (id, v) in pairs {
            set.insert((*id).to_owned(), v.clone()).unwrap();
        }
        set
    }

    #[test]
    fn dynamic_threshold_is_mean_negative_cosine() {
        // cos(r, n1) = 0.2, cos(r, n2) = 0.4
        let unit = |c: f64| vec![c, (1.0 - c * c).sqrt()];
        let e = embeddings(&[("R0", vec![1.0, 0.0]), ("N1", unit(0.2)), ("N2", unit(0.4))]);
        let gt = TraceLinkSet::new();
        let bank = NegativeExampleBank::new(
            BTreeMap::from([("C1".to_owned(), vec!["N1".to_owned(), "N2".to_owned()]), ("C2".to_owned(), vec!["N1".to_owned(), "N2".to_owned()])]),
            10,
            7,
            &gt,
        )
        .unwrap();
        let m = SimilarityMatrix::new(vec!["R0".into()], codes(2), vec![vec![0.8, 0.25]]).unwrap();
        let p = predict_dynamic(&e, &m, &bank).unwrap();
        assert_eq!(p.codes_for("R0").unwrap(), &BTreeSet::from(["C1".to_owned()]));
        assert!((p.pair_thresholds()["R0"]["C1"] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn bank_rejects_positives_and_empty_pools() {
        let gt: TraceLinkSet = [("R1".to_owned(), "C1".to_owned())].into_iter().collect();
        let bad = BTreeMap::from([("C1".to_owned(), vec!["R1".to_owned()])]);
        assert!(NegativeExampleBank::new(bad, 3, 0, &gt).is_err());
        let empty = NegativeExampleBank::new(BTreeMap::from([("C1".to_owned(), vec![])]), 3, 0, &gt).unwrap();
        assert!(matches!(empty.sample("C1"), Err(Error::Undefined(_))));
    }

    #[test]
    fn bank_sampling_is_seeded() {
        let reqs: Vec<String> = (0..30).map(|i| format!("R{i}")).collect();
        let gt = TraceLinkSet::new();
        let a = NegativeExampleBank::from_ground_truth(&reqs, &codes(2), &gt, 10, 5).unwrap();
        let b = NegativeExampleBank::from_ground_truth(&reqs, &codes(2), &gt, 10, 5).unwrap();
        assert_eq!(a.sample("C1").unwrap(), b.sample("C1").unwrap());
        assert_eq!(a.sample("C1").unwrap().len(), 10);
        let c = NegativeExampleBank::from_ground_truth(&reqs, &codes(2), &gt, 10, 6).unwrap();
        assert_ne!(a.sample("C1").unwrap(), c.sample("C1").unwrap());
    }

    #[test]
    fn tuning_on_separable_scores() {
        let m = matrix(vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
        let gt: TraceLinkSet = [("R0", "C1"), ("R1", "C2")]
            .into_iter()
            .map(|(r, c)| (r.to_owned(), c.to_owned()))
            .collect();
        let curve = tune_threshold(&m, &gt).unwrap();
        assert_eq!(curve.points.len(), 99);
        assert_eq!(curve.best_theta, 0.1);
        assert_eq!(curve.best_f2(), 1.0);
        assert!(tune_threshold(&m, &TraceLinkSet::new()).is_err());

        let sweep = sweep_thresholds(&m, &gt, 2).unwrap();
        assert_eq!(sweep.points.iter().map(|p| p.theta).collect::<Vec<_>>(), vec![0.0, 1.0]);
    }

    #[test]
    fn prediction_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pred.json");
        let p = predict_delta(&matrix(vec![vec![0.98, 0.1, 0.3, 0.7]])).unwrap();
        p.save(&path).unwrap();
        assert!(dir.path().join("pred.thresholds.json").exists());
        assert_eq!(PredictionSet::load(&path).unwrap(), p);
    }

    #[test]
    fn sentence_union() {
        let mut p = PredictionSet::empty("delta", &[]);
        p.insert("R1#0", "ACC");
        p.insert("R1#1", "SEC");
        p.insert("R2#0", "ACC");
        let parents = HashMap::from([
            ("R1#0".to_owned(), "R1".to_owned()),
            ("R1#1".to_owned(), "R1".to_owned()),
            ("R2#0".to_owned(), "R2".to_owned()),
        ]);
        let u = p.union_into_parents(&parents).unwrap();
        assert_eq!(u.codes_for("R1").unwrap().len(), 2);
        assert_eq!(u.num_links(), 3);
    }

    fn row_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((0u32..=20).prop_map(|k| k as f64 / 20.0), n)
    }

    proptest! {
        #[test]
        fn constant_is_monotone(rows in prop::collection::vec(row_strategy(5), 1..6), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let m = matrix(rows);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let low = predict_constant(&m, lo).unwrap();
            let high = predict_constant(&m, hi).unwrap();
            for (r, c) in high.links() {
                prop_assert!(low.contains(r, c));
            }
        }

        #[test]
        fn strategies_ignore_column_order(rows in prop::collection::vec(row_strategy(5), 1..5), seed in any::<u64>()) {
            let m = matrix(rows.clone());
            let mut perm: Vec<usize> = (0..5).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            let permuted = SimilarityMatrix::new(
                m.req_ids().to_vec(),
                perm.iter().map(|&j| m.prov_codes()[j].clone()).collect(),
                rows.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect(),
            ).unwrap();
            prop_assert_eq!(predict_delta(&m).unwrap(), predict_delta(&permuted).unwrap());
            prop_assert_eq!(predict_constant(&m, 0.5).unwrap(), predict_constant(&permuted, 0.5).unwrap());
        }

        #[test]
        fn delta_predicts_at_least_one(rows in prop::collection::vec(row_strategy(6), 1..5)) {
            let p = predict_delta(&matrix(rows)).unwrap();
            prop_assert!(p.predictions().values().all(|c| !c.is_empty()));
        }
    }
}
