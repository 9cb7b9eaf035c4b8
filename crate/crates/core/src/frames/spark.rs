use nalgebra::DMatrix;

use super::Frame;
use crate::error::{Error, Result};
use crate::numerics::C64;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Upper bound on `C(N, d)` before enumeration is refused.
pub const DEFAULT_SPARK_BUDGET: u128 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparkReport {
    /// Size of the smallest dependent subset, `N + 1` if none.
    pub spark: usize,
    /// Lexicographically first dependent subset of that size.
    pub witness: Vec<usize>,
    pub full_spark: bool,
}

pub fn spark(frame: &Frame, tol_rank: f64) -> Result<SparkReport> {
    spark_with_budget(frame, tol_rank, DEFAULT_SPARK_BUDGET)
}

/// Brute-force spark: subsets of increasing size, rank judged by the ratio of
/// extreme singular values.
pub fn spark_with_budget(frame: &Frame, tol_rank: f64, budget: u128) -> Result<SparkReport> {
    let (d, n) = (frame.dim(), frame.len());
    let needed = binomial(n, d.min(n));
    if needed > budget {
        return Err(Error::TooLarge { needed, budget });
    }
    for k in 1..=(d + 1).min(n) {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            if is_dependent(frame, &subset, tol_rank) {
                return Ok(SparkReport {
                    spark: k,
                    witness: subset,
                    full_spark: k == d + 1,
                });
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    }
    Ok(SparkReport {
        spark: n + 1,
        witness: Vec::new(),
        full_spark: n + 1 == d + 1,
    })
}

fn is_dependent(frame: &Frame, subset: &[usize], tol: f64) -> bool {
    let d = frame.dim();
    if subset.len() > d {
        return true;
    }
    let mut m = DMatrix::<C64>::zeros(d, subset.len());
    for (c, &j) in subset.iter().enumerate() {
        m.set_column(c, &frame.data().column(j));
    }
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    max == 0.0 || min < tol * max
}

/// Advances to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}
