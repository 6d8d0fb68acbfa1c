//! Thin singular value decomposition by one-sided (Hestenes) Jacobi
//! rotations.

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 1000;
pub const TOLERANCE: f64 = 1e-10;

/// `A = U diag(s) V^T` for an `m x n` input, with `r = min(m, n)` columns in
/// `U` (`m x r`) and `V` (`n x r`). Singular values are non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

/// Row-major input. Rotations act on the columns of `A` or `A^T`, whichever
/// has fewer, so the implicit Gram matrix is the smaller one.
pub fn svd(a: &[Vec<f64>]) -> Result<Svd> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return Err(Error::invalid("matrix", "must have at least one row and column"));
    }
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("matrix", "rows differ in length"));
    }
    if a.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix", "non-finite entry"));
    }
    if n <= m {
        // columns of A
        let cols: Vec<Vec<f64>> = (0..n).map(|j| a.iter().map(|r| r[j]).collect()).collect();
        let (u, s, v) = jacobi(cols)?;
        Ok(Svd { u: to_rows(&u, m), singular_values: s, v: to_rows(&v, n) })
    } else {
        // columns of A^T are the rows of A
        let (v, s, u) = jacobi(a.to_vec())?;
        Ok(Svd { u: to_rows(&u, m), singular_values: s, v: to_rows(&v, n) })
    }
}

/// Orthogonalizes `q` columns of length `p` (`q <= p`). Returns the left
/// singular vectors, singular values and right singular vectors, all as
/// column lists sorted by decreasing singular value.
fn jacobi(mut b: Vec<Vec<f64>>) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>)> {
    let q = b.len();
    let mut v: Vec<Vec<f64>> = (0..q)
        .map(|i| (0..q).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..q {
            for j in i + 1..q {
                let alpha: f64 = b[i].iter().map(|x| x * x).sum();
                let beta: f64 = b[j].iter().map(|x| x * x).sum();
                let gamma: f64 = b[i].iter().zip(&b[j]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= TOLERANCE * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut b, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { sweeps: MAX_SWEEPS });
    }
    let norms: Vec<f64> = b.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = Vec::with_capacity(q);
    let mut s = Vec::with_capacity(q);
    let mut vs = Vec::with_capacity(q);
    for k in order {
        let sigma = norms[k];
        u.push(if sigma > 0.0 {
            b[k].iter().map(|x| x / sigma).collect()
        } else {
            vec![0.0; b[k].len()]
        });
        s.push(sigma);
        vs.push(std::mem::take(&mut v[k]));
    }
    Ok((u, s, vs))
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(j);
    for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

fn to_rows(cols: &[Vec<f64>], len: usize) -> Vec<Vec<f64>> {
    (0..len).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reconstruct(d: &Svd) -> Vec<Vec<f64>> {
        d.u.iter()
            .map(|urow| {
                (0..d.v.len())
                    .map(|j| (0..d.singular_values.len()).map(|k| urow[k] * d.singular_values[k] * d.v[j][k]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn diagonal_input() {
        let a = vec![vec![0.0, 0.0, 0.0], vec![0.0, -3.0, 0.0], vec![0.0, 0.0, 2.0]];
        let d = svd(&a).unwrap();
        assert_eq!(d.singular_values, vec![3.0, 2.0, 0.0]);
    }

    proptest! {
        #[test]
        fn reconstructs_input(rows in 1usize..7, cols in 1usize..7, seed in prop::collection::vec(-1.0f64..1.0, 49)) {
            let a: Vec<Vec<f64>> = (0..rows).map(|i| (0..cols).map(|j| seed[i * 7 + j]).collect()).collect();
            let d = svd(&a).unwrap();
            prop_assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
            let r = reconstruct(&d);
            let err: f64 = a.iter().flatten().zip(r.iter().flatten()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-9 * norm.max(1.0));
        }
    }
}
