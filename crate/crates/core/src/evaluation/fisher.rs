//! Two-tailed Fisher's exact test for 2x2 contingency tables.

use serde::{Deserialize, Serialize};

/// `[[a, b], [c, d]]`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

const RELATIVE_SLACK: f64 = 1e-12;

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut table = Vec::with_capacity(n as usize + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Every table sharing the margins of `table`, as `(a, probability)` in
/// increasing `a`.
pub fn hypergeometric_support(table: &ContingencyTable2x2) -> Vec<(u64, f64)> {
    let row1 = table.a + table.b;
    let row2 = table.c + table.d;
    let col1 = table.a + table.c;
    let n = table.total();
    let lf = ln_factorials(n);
    let ln_fixed = lf[row1 as usize] + lf[row2 as usize] + lf[col1 as usize] + lf[(n - col1) as usize] - lf[n as usize];
    let lo = col1.saturating_sub(row2);
    let hi = row1.min(col1);
    (lo..=hi)
        .map(|a| {
            let (b, c) = (row1 - a, col1 - a);
            let d = row2 - c;
            let ln_p = ln_fixed - lf[a as usize] - lf[b as usize] - lf[c as usize] - lf[d as usize];
            (a, ln_p.exp())
        })
        .collect()
}

/// Sum of the probabilities of all margin-preserving tables no more likely
/// than the observed one.
pub fn fisher_exact(table: &ContingencyTable2x2) -> f64 {
    let support = hypergeometric_support(table);
    let observed = support
        .iter()
        .find(|(a, _)| *a == table.a)
        .map(|(_, p)| *p)
        .expect("observed table lies in its own support");
    let cutoff = observed * (1.0 + RELATIVE_SLACK);
    support
        .iter()
        .filter(|(_, p)| *p <= cutoff)
        .map(|(_, p)| p)
        .sum::<f64>()
        .min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_null_tables() {
        let t = ContingencyTable2x2::new(5, 0, 0, 5);
        assert_eq!(fisher_exact(&t), fisher_exact(&t.transpose()));
        assert!((fisher_exact(&t) - 2.0 / 252.0).abs() < 1e-12);
        assert!((fisher_exact(&ContingencyTable2x2::new(3, 4, 3, 4)) - 1.0).abs() < 1e-12);
        assert_eq!(fisher_exact(&ContingencyTable2x2::new(0, 0, 0, 0)), 1.0);
    }

    #[test]
    fn support_sums_to_one() {
        let total: f64 = hypergeometric_support(&ContingencyTable2x2::new(8, 2, 1, 5))
            .iter()
            .map(|(_, p)| p)
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
