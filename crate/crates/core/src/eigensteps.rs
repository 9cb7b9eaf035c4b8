//! Eigenstep tables: the spectra of the partial frame operators of a frame,
//! and the polytope of valid tables.
//!
//! Rows are stored nonincreasing (largest eigenvalue first), indexed
//! `n = 0..=N`, and interlace as `λ[n+1][i+1] <= λ[n][i] <= λ[n+1][i]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::numerics::{hermitian_eig, CMat, Matrix};

/// Default absolute tolerance for [`validate`].
pub const DEFAULT_VALIDATE_TOL: f64 = 1e-9;

/// Margin used by [`is_boundary_consistent_with_od`].
pub const DEFAULT_INTERIOR_MARGIN: f64 = 1e-9;

/// Human-readable statement of the index convention used in reports.
pub const CONVENTION: &str =
    "rows nonincreasing (largest first); interlacing lambda[n+1][i+1] <= lambda[n][i] <= lambda[n+1][i]";

/// An `(N+1) x d` table of partial spectra.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenstepsTable {
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    rows: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawTable {
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    rows: Vec<Vec<f64>>,
}

impl<'de> Deserialize<'de> for EigenstepsTable {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTable::deserialize(de)?;
        EigenstepsTable::new(raw.n, raw.d, raw.rows).map_err(serde::de::Error::custom)
    }
}

impl EigenstepsTable {
    /// Checks only the shape and finiteness; use [`validate`] for membership.
    pub fn new(n: usize, d: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidTable("dimension d must be positive".into()));
        }
        if rows.len() != n + 1 {
            return Err(Error::InvalidTable(format!(
                "expected {} rows for N = {n}, found {}",
                n + 1,
                rows.len()
            )));
        }
        for (k, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidTable(format!(
                    "row {k} has length {}, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidTable(format!(
                    "row {k} has a non-finite entry"
                )));
            }
        }
        Ok(Self { n, d, rows })
    }

    /// Number of frame vectors `N`.
    pub fn frame_size(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    pub fn get(&self, n: usize, i: usize) -> f64 {
        self.rows[n][i]
    }

    /// The tight-frame bound `N/d`.
    pub fn top(&self) -> f64 {
        self.n as f64 / self.d as f64
    }

    /// Whether entry `(n, i)` takes the same value on every valid table.
    pub fn is_forced(&self, n: usize, i: usize) -> bool {
        forced_value(self.n, self.d, n, i).is_some()
    }

    /// `(1 - t) self + t other`.
    pub fn lerp(&self, other: &EigenstepsTable, t: f64) -> EigenstepsTable {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (1.0 - t) * x + t * y)
                    .collect()
            })
            .collect();
        EigenstepsTable {
            n: self.n,
            d: self.d,
            rows,
        }
    }

    /// Largest entrywise difference; infinite when shapes differ.
    pub fn max_deviation(&self, other: &EigenstepsTable) -> f64 {
        if self.n != other.n || self.d != other.d {
            return f64::INFINITY;
        }
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidTable(format!("eigensteps JSON: {e}")))
    }

    /// One line per `n`, preceded by a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for i in 1..=self.d {
            out.push_str(&format!(",lambda_{i}"));
        }
        out.push('\n');
        for (n, row) in self.rows.iter().enumerate() {
            out.push_str(&n.to_string());
            for x in row {
                out.push_str(&format!(",{x:.17e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// The value of entry `(n, i)` if every valid table shares it: row 0, row
/// `N`, the zeros `i >= n` for `n < d`, and the `N/d` entries
/// `i < n - (N - d)` for `n > N - d`.
pub fn forced_value(big_n: usize, d: usize, n: usize, i: usize) -> Option<f64> {
    let top = big_n as f64 / d as f64;
    if n == 0 {
        Some(0.0)
    } else if n == big_n {
        Some(top)
    } else if n < d && i >= n {
        Some(0.0)
    } else if n + d > big_n && i + big_n < n + d {
        Some(top)
    } else {
        None
    }
}

/// Which defining condition a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Row 0 is zero.
    InitialRow,
    /// Row N equals N/d.
    FinalRow,
    /// Consecutive rows interlace.
    Interlacing,
    /// Traces grow by one per row.
    TraceStep,
    /// Rows are nonincreasing.
    Monotone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    pub n: usize,
    pub i: Option<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub convention: &'static str,
}

/// Checks the four defining conditions, plus row monotonicity, within `tol`.
pub fn validate(table: &EigenstepsTable, tol: f64) -> ValidationReport {
    let (big_n, d) = (table.n, table.d);
    let top = table.top();
    let mut violations = Vec::new();
    let mut flag = |condition, n, i, magnitude: f64| {
        if magnitude > tol {
            violations.push(Violation {
                condition,
                n,
                i,
                magnitude,
            });
        }
    };
    for i in 0..d {
        flag(Condition::InitialRow, 0, Some(i), table.rows[0][i].abs());
        flag(
            Condition::FinalRow,
            big_n,
            Some(i),
            (table.rows[big_n][i] - top).abs(),
        );
    }
    for (n, row) in table.rows.iter().enumerate() {
        for i in 1..d {
            flag(Condition::Monotone, n, Some(i), row[i] - row[i - 1]);
        }
    }
    for n in 0..big_n {
        let (cur, next) = (&table.rows[n], &table.rows[n + 1]);
        for i in 0..d {
            flag(Condition::Interlacing, n, Some(i), cur[i] - next[i]);
            if i + 1 < d {
                flag(Condition::Interlacing, n, Some(i), next[i + 1] - cur[i]);
            }
        }
        let step = next.iter().sum::<f64>() - cur.iter().sum::<f64>();
        flag(Condition::TraceStep, n, None, (step - 1.0).abs());
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
        convention: CONVENTION,
    }
}

/// Every inequality of the polytope as a pair `(larger, smaller)` of entry
/// positions, skipping pairs where both entries are forced.
pub(crate) fn free_inequalities(big_n: usize, d: usize) -> Vec<((usize, usize), (usize, usize))> {
    let forced = |n, i| forced_value(big_n, d, n, i).is_some();
    let mut out = Vec::new();
    let mut push = |hi: (usize, usize), lo: (usize, usize)| {
        if !(forced(hi.0, hi.1) && forced(lo.0, lo.1)) {
            out.push((hi, lo));
        }
    };
    for n in 0..=big_n {
        for i in 1..d {
            push((n, i - 1), (n, i));
        }
    }
    for n in 0..big_n {
        for i in 0..d {
            push((n + 1, i), (n, i));
            if i + 1 < d {
                push((n, i), (n + 1, i + 1));
            }
        }
    }
    out
}

/// Whether the table lies in the relative interior of the polytope, every
/// non-forced inequality holding with slack greater than `margin`.
/// Always false when `N < d + 2`.
pub fn is_interior(table: &EigenstepsTable, margin: f64) -> Result<bool> {
    let report = validate(table, DEFAULT_VALIDATE_TOL);
    if !report.ok {
        return Err(Error::InvalidTable(format!(
            "{} violated condition(s), first {:?}",
            report.violations.len(),
            report.violations[0]
        )));
    }
    if table.n < table.d + 2 {
        return Ok(false);
    }
    Ok(free_inequalities(table.n, table.d)
        .into_iter()
        .all(|((hn, hi), (ln, li))| table.rows[hn][hi] - table.rows[ln][li] > margin))
}

/// The necessary eigensteps condition for an orthodecomposable frame: the
/// table is on the boundary.
pub fn is_boundary_consistent_with_od(table: &EigenstepsTable) -> Result<bool> {
    Ok(!is_interior(table, DEFAULT_INTERIOR_MARGIN)?)
}

/// Partial spectra of `f_1, ..., f_k` for `k = 0..=N`.
pub fn of_frame(frame: &Frame) -> EigenstepsTable {
    let (d, big_n) = (frame.dim(), frame.len());
    let mut rows = Vec::with_capacity(big_n + 1);
    rows.push(vec![0.0; d]);
    let mut partial = CMat::zeros(d, d);
    for k in 0..big_n {
        let f = frame.column(k);
        partial += &f * f.adjoint();
        let herm = (&partial + partial.adjoint()).map(|z| z * 0.5);
        let m = Matrix::from_parts(frame.field(), herm);
        let eig = hermitian_eig(&m).expect("partial frame operator is self-adjoint");
        rows.push(eig.eigenvalues);
    }
    EigenstepsTable { n: big_n, d, rows }
}

/// The affine path `t -> (1 - t) start + t end`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenstepsPath {
    pub start: EigenstepsTable,
    pub end: EigenstepsTable,
}

impl EigenstepsPath {
    pub fn at(&self, t: f64) -> EigenstepsTable {
        if t == 0.0 {
            self.start.clone()
        } else if t == 1.0 {
            self.end.clone()
        } else {
            self.start.lerp(&self.end, t)
        }
    }
}

pub fn linear_path(start: &EigenstepsTable, end: &EigenstepsTable) -> Result<EigenstepsPath> {
    if start.n != end.n || start.d != end.d {
        return Err(Error::DimensionMismatch(format!(
            "tables for (N, d) = ({}, {}) and ({}, {})",
            start.n, start.d, end.n, end.d
        )));
    }
    for (name, t) in [("start", start), ("end", end)] {
        let report = validate(t, DEFAULT_VALIDATE_TOL);
        if !report.ok {
            return Err(Error::InvalidTable(format!(
                "{name} table: {:?}",
                report.violations[0]
            )));
        }
    }
    Ok(EigenstepsPath {
        start: start.clone(),
        end: end.clone(),
    })
}

/// Fraction of each interlacing box kept away from its ends.
const BOX_INSET: f64 = 1e-3;
const SAMPLE_ATTEMPTS: usize = 1000;

/// Draws a table strictly inside the polytope.
///
/// Rows are sampled one at a time inside the interlacing box left by the
/// previous row, shifted onto the trace hyperplane by bisection, and kept
/// only while the remaining rows can still reach `N/d` strictly. The
/// distribution is not uniform over the polytope.
pub fn sample_interior<R: Rng + ?Sized>(
    big_n: usize,
    d: usize,
    rng: &mut R,
) -> Result<EigenstepsTable> {
    if d == 0 || big_n < d + 2 {
        return Err(Error::EmptyInterior { n: big_n, d });
    }
    for _ in 0..SAMPLE_ATTEMPTS {
        if let Some(rows) = try_sample(big_n, d, rng) {
            let table = EigenstepsTable { n: big_n, d, rows };
            if is_interior(&table, 1e-6).unwrap_or(false) {
                return Ok(table);
            }
        }
    }
    Err(Error::SamplingFailed(SAMPLE_ATTEMPTS))
}

fn try_sample<R: Rng + ?Sized>(big_n: usize, d: usize, rng: &mut R) -> Option<Vec<Vec<f64>>> {
    let top = big_n as f64 / d as f64;
    let mut rows: Vec<Vec<f64>> = vec![vec![0.0; d]];
    for n in 1..big_n {
        let prev = &rows[n - 1];
        let mut row = vec![0.0; d];
        let mut free = Vec::new();
        let mut fixed_sum = 0.0;
        for (i, slot) in row.iter_mut().enumerate() {
            match forced_value(big_n, d, n, i) {
                Some(v) => {
                    *slot = v;
                    fixed_sum += v;
                }
                None => {
                    let lo = prev[i];
                    let hi = if i == 0 { top } else { prev[i - 1].min(top) };
                    if hi - lo <= 0.0 {
                        return None;
                    }
                    free.push((i, lo, hi, rng.random::<f64>()));
                }
            }
        }
        let target = n as f64 - fixed_sum;
        let fill = |s: f64, row: &mut [f64]| {
            let mut sum = 0.0;
            for &(i, lo, hi, u) in &free {
                let theta = (u + s).clamp(BOX_INSET, 1.0 - BOX_INSET);
                row[i] = lo + theta * (hi - lo);
                sum += row[i];
            }
            sum
        };
        if fill(-1.0, &mut row) > target || fill(1.0, &mut row) < target {
            return None;
        }
        let (mut a, mut b) = (-1.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if fill(mid, &mut row) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        fill(0.5 * (a + b), &mut row);
        // absorb the bisection residue in the widest free entry
        let residue = target - free.iter().map(|&(i, ..)| row[i]).sum::<f64>();
        if let Some(&(i, ..)) = free
            .iter()
            .max_by(|x, y| (x.2 - x.1).total_cmp(&(y.2 - y.1)))
        {
            row[i] += residue;
        }
        if !completable(&row, big_n - n, top) {
            return None;
        }
        rows.push(row);
    }
    rows.push(vec![top; d]);
    Some(rows)
}

/// Whether `remaining` more unit vectors can lift a row with these
/// eigenvalues to `top * I` strictly inside the polytope: the bottom `k`
/// entries must sum to less than `k (top - 1)`, except at `k = remaining`
/// where the forced entries make it an equality.
fn completable(row: &[f64], remaining: usize, top: f64) -> bool {
    let d = row.len();
    let mut tail = 0.0;
    for k in 1..=d.min(remaining) {
        tail += row[d - k];
        if k == remaining {
            continue;
        }
        if tail >= k as f64 * (top - 1.0) - BOX_INSET * 1e-3 {
            return false;
        }
    }
    true
}

/// Walks from `interior` through `through` and returns the last valid table
/// on that ray, a point on the boundary. Returns `through` when the tables
/// coincide.
pub fn boundary_exit(
    interior: &EigenstepsTable,
    through: &EigenstepsTable,
) -> Result<EigenstepsTable> {
    linear_path(interior, through)?;
    let mut s_max = f64::INFINITY;
    for ((hn, hi), (ln, li)) in free_inequalities(interior.n, interior.d) {
        let at_start = interior.rows[hn][hi] - interior.rows[ln][li];
        let at_end = through.rows[hn][hi] - through.rows[ln][li];
        if at_end < at_start {
            s_max = s_max.min(at_start / (at_start - at_end));
        }
    }
    if !s_max.is_finite() {
        return Ok(through.clone());
    }
    let mut exit = interior.lerp(through, s_max);
    // pin the binding entries: snap near-equal neighbours produced by rounding
    for ((hn, hi), (ln, li)) in free_inequalities(interior.n, interior.d) {
        let gap = exit.rows[hn][hi] - exit.rows[ln][li];
        if gap < 0.0 {
            exit.rows[hn][hi] = exit.rows[ln][li];
        }
    }
    Ok(exit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::fixtures::{doubled_basis, mercedes_benz, standard_basis, two_onbs};
    use crate::numerics::Field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_rows(t: &EigenstepsTable, expected: &[&[f64]]) {
        for (row, exp) in t.rows().iter().zip(expected) {
            for (a, b) in row.iter().zip(exp.iter()) {
                assert!((a - b).abs() < 1e-12, "{row:?} vs {exp:?}");
            }
        }
    }

    fn two_onb_table() -> EigenstepsTable {
        EigenstepsTable::new(
            4,
            2,
            vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
                vec![2.0, 1.0],
                vec![2.0, 2.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_onb_table_is_valid_but_not_interior() {
        let t = two_onb_table();
        let r = validate(&t, 1e-9);
        assert!(r.ok, "{:?}", r.violations);
        assert!(r.convention.contains("nonincreasing"));
        assert!(!is_interior(&t, 0.0).unwrap());
        assert!(is_boundary_consistent_with_od(&t).unwrap());
    }

    #[test]
    fn bad_final_row_is_reported() {
        let mut rows = two_onb_table().rows;
        rows[4] = vec![2.1, 2.1];
        let t = EigenstepsTable::new(4, 2, rows).unwrap();
        let r = validate(&t, 1e-9);
        assert!(!r.ok);
        assert!(r
            .violations
            .iter()
            .any(|v| v.condition == Condition::FinalRow
                && v.n == 4
                && (v.magnitude - 0.1).abs() < 1e-12));
        assert!(matches!(is_interior(&t, 0.0), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn shape_errors() {
        assert!(EigenstepsTable::new(2, 2, vec![vec![0.0, 0.0]]).is_err());
        assert!(EigenstepsTable::new(1, 2, vec![vec![0.0, 0.0], vec![1.0]]).is_err());
        assert!(EigenstepsTable::new(1, 1, vec![vec![0.0], vec![f64::NAN]]).is_err());
    }

    #[test]
    fn of_frame_standard_basis() {
        let t = of_frame(&standard_basis(Field::Real, 2));
        assert_rows(&t, &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0]]);
    }

    #[test]
    fn of_frame_mercedes_benz() {
        let t = of_frame(&mercedes_benz());
        assert_rows(&t, &[&[0.0, 0.0], &[1.0, 0.0], &[1.5, 0.5], &[1.5, 1.5]]);
        assert!(validate(&t, 1e-9).ok);
    }

    #[test]
    fn od_frames_land_on_boundary() {
        assert!(is_boundary_consistent_with_od(&of_frame(&doubled_basis(2))).unwrap());
        assert!(is_boundary_consistent_with_od(&of_frame(&two_onbs(3))).unwrap());
        let t = of_frame(&doubled_basis(2));
        assert!((t.get(1, 1) - t.get(2, 1)).abs() < 1e-12);
    }

    #[test]
    fn interior_is_empty_for_small_n() {
        let t = of_frame(&standard_basis(Field::Complex, 3));
        assert!(!is_interior(&t, 0.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            sample_interior(3, 2, &mut rng),
            Err(Error::EmptyInterior { n: 3, d: 2 })
        );
        assert_eq!(
            sample_interior(4, 3, &mut rng),
            Err(Error::EmptyInterior { n: 4, d: 3 })
        );
    }

    #[test]
    fn sampler_is_interior_and_deterministic() {
        for (n, d) in [(4, 2), (5, 2), (5, 3), (6, 3), (8, 3), (8, 5), (12, 4)] {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let t = sample_interior(n, d, &mut rng).unwrap();
            assert!(validate(&t, 1e-9).ok);
            assert!(is_interior(&t, 1e-6).unwrap());
        }
        let a = sample_interior(8, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_interior(8, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn midpoint_of_interior_tables_is_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = sample_interior(6, 3, &mut rng).unwrap();
        let b = sample_interior(6, 3, &mut rng).unwrap();
        let path = linear_path(&a, &b).unwrap();
        assert_eq!(path.at(0.0), a);
        assert_eq!(path.at(1.0), b);
        assert!(is_interior(&path.at(0.5), 1e-9).unwrap());
    }

    #[test]
    fn linear_path_rejects_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = sample_interior(6, 3, &mut rng).unwrap();
        let b = sample_interior(6, 2, &mut rng).unwrap();
        assert!(matches!(
            linear_path(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn boundary_exit_hits_the_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = sample_interior(5, 2, &mut rng).unwrap();
        let b = sample_interior(5, 2, &mut rng).unwrap();
        let e = boundary_exit(&a, &b).unwrap();
        assert!(validate(&e, 1e-9).ok);
        assert!(!is_interior(&e, 1e-9).unwrap());
        assert_eq!(boundary_exit(&a, &a).unwrap(), a);
    }

    #[test]
    fn json_and_csv() {
        let t = two_onb_table();
        let back = EigenstepsTable::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["N"], 4);
        assert!(EigenstepsTable::from_json(r#"{"N":1,"d":1,"rows":[[0]]}"#).is_err());
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("n,lambda_1,lambda_2\n"));
    }
}
