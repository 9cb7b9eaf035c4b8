//! Frames from eigensteps and continuous lifts of eigenstep paths.
//!
//! Synthesis runs the rank-one update recursion: with `U_n` an eigenbasis of
//! the n-th partial frame operator and `V_n` a unitary that is block
//! diagonal over the eigenvalue clusters of row `n`,
//!
//! ```text
//! f_{n+1} = U_n V_n P_n [v_n; 0]
//! U_{n+1} = U_n V_n P_n [W_n 0; 0 I] Q_n^T
//! ```
//!
//! where `P_n`, `Q_n` are the permutation matrices of `sigma_n`, `tau_n`.
//! A path `(1 - t) lambda + t mu` from an interior table keeps the index sets
//! of `lambda`; at `t = 1` every factor that vanishes is replaced by its
//! `(1 - t)` coefficient and the powers are balanced explicitly.

use nalgebra::DMatrix;

use crate::eigensteps::{
    free_inequalities, is_interior, of_frame, validate, EigenstepsTable, DEFAULT_VALIDATE_TOL,
};
use crate::error::{Error, Result};
use crate::frames::{Frame, FramePath, FrameSample, PathMetadata};
use crate::numerics::{
    orthonormal_completion, unitary_geodesic, CMat, CVec, Field, Matrix, UnitaryGeodesic, C64,
};

/// Entries closer than this are one spectral value.
pub const TAU_EQ: f64 = 1e-9;
const RADICAND_TOL: f64 = 1e-12;
/// Share of `[0, 1]` sampled linearly before the grid clusters toward 1.
const LINEAR_SHARE: f64 = 0.9;

/// A maximal run of equal entries in a row: positions `start..start + len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub start: usize,
    pub len: usize,
    pub value: f64,
}

impl Cluster {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Combinatorics of one rank-one update `n -> n + 1`. Index sets are
/// 0-based and increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct StepIndexData {
    pub n: usize,
    /// `(value, multiplicity)` over the clusters of row `n`.
    pub gamma_n: Vec<(f64, usize)>,
    /// Same for row `n + 1`.
    pub gamma_n1: Vec<(f64, usize)>,
    /// Nonzero values of `gamma_n - gamma_{n+1}`.
    pub g_n: Vec<(f64, i32)>,
    pub i_set: Vec<usize>,
    pub j_set: Vec<usize>,
    pub k: usize,
    /// `sigma[k] = i_set[k]` for `k < K`, then the complement in order.
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
    /// Clusters of row `n`; the blocks of `V_n`.
    pub blocks: Vec<Cluster>,
}

impl StepIndexData {
    fn permutation_matrix(p: &[usize]) -> DMatrix<f64> {
        let d = p.len();
        let mut m = DMatrix::zeros(d, d);
        for (col, &row) in p.iter().enumerate() {
            m[(row, col)] = 1.0;
        }
        m
    }

    /// `P_n e_k = e_{sigma(k)}`.
    pub fn p_matrix(&self) -> DMatrix<f64> {
        Self::permutation_matrix(&self.sigma)
    }

    pub fn q_matrix(&self) -> DMatrix<f64> {
        Self::permutation_matrix(&self.tau)
    }

    fn i_complement(&self) -> &[usize] {
        &self.sigma[self.k..]
    }

    fn j_complement(&self) -> &[usize] {
        &self.tau[self.k..]
    }
}

/// `v_n`, `w_n` (length `d`, supported on `I_n`, `J_n`) and the `K x K`
/// matrix `W_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftEvaluation {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub w_matrix: DMatrix<f64>,
}

/// Fiber coordinates: `U_1` and the block-diagonal `V_1, ..., V_{N-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseData {
    pub u1: Matrix,
    pub v: Vec<Matrix>,
}

impl BaseData {
    pub fn identity(field: Field, big_n: usize, d: usize) -> Self {
        Self {
            u1: Matrix::identity(field, d),
            v: vec![Matrix::identity(field, d); big_n.saturating_sub(1)],
        }
    }

    pub fn field(&self) -> Field {
        self.v
            .iter()
            .fold(self.u1.field(), |f, m| f.join(m.field()))
    }
}

fn clusters_of(values: &[f64]) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    for (i, &x) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (values[i - 1] - x).abs() <= TAU_EQ => {
                c.value = (c.value * c.len as f64 + x) / (c.len + 1) as f64;
                c.len += 1;
            }
            _ => out.push(Cluster {
                start: i,
                len: 1,
                value: x,
            }),
        }
    }
    out
}

fn index_data_unchecked(table: &EigenstepsTable, n: usize) -> Result<StepIndexData> {
    let d = table.dim();
    let blocks = clusters_of(table.row(n));
    let next = clusters_of(table.row(n + 1));
    let multiplicity = |cs: &[Cluster], x: f64| -> usize {
        cs.iter()
            .find(|c| (c.value - x).abs() <= TAU_EQ)
            .map_or(0, |c| c.len)
    };
    let mut g_n = Vec::new();
    let mut i_set = Vec::new();
    let mut j_set = Vec::new();
    for c in &blocks {
        let g = c.len as i32 - multiplicity(&next, c.value) as i32;
        if g > 0 {
            g_n.push((c.value, g));
        }
        if g == 1 {
            i_set.push(c.start);
        }
    }
    for c in &next {
        let g = multiplicity(&blocks, c.value) as i32 - c.len as i32;
        if g < 0 {
            g_n.push((c.value, g));
        }
        if g == -1 {
            j_set.push(c.start);
        }
    }
    if g_n.iter().any(|&(_, g)| g.abs() > 1) || i_set.len() != j_set.len() {
        return Err(Error::InvalidTable(format!(
            "rows {n} and {} do not interlace at the clustering tolerance",
            n + 1
        )));
    }
    let complete = |set: &[usize]| -> Vec<usize> {
        let mut p = set.to_vec();
        p.extend((0..d).filter(|i| !set.contains(i)));
        p
    };
    Ok(StepIndexData {
        n,
        gamma_n: blocks.iter().map(|c| (c.value, c.len)).collect(),
        gamma_n1: next.iter().map(|c| (c.value, c.len)).collect(),
        g_n,
        k: i_set.len(),
        sigma: complete(&i_set),
        tau: complete(&j_set),
        i_set,
        j_set,
        blocks,
    })
}

fn ensure_valid(table: &EigenstepsTable) -> Result<()> {
    let report = validate(table, DEFAULT_VALIDATE_TOL);
    if report.ok {
        Ok(())
    } else {
        Err(Error::InvalidTable(format!(
            "{:?} ({})",
            report.violations[0], report.convention
        )))
    }
}

/// Index data for step `n` (`1 <= n <= N - 1`), grouping entries within
/// [`TAU_EQ`].
pub fn step_index_data(table: &EigenstepsTable, n: usize) -> Result<StepIndexData> {
    ensure_valid(table)?;
    if n == 0 || n >= table.frame_size() {
        return Err(Error::InvalidTable(format!(
            "step {n} outside 1..{}",
            table.frame_size()
        )));
    }
    index_data_unchecked(table, n)
}

/// A difference of two table entries, as `coeff * (1 - t)^power` near the
/// point of evaluation.
#[derive(Debug, Clone, Copy)]
struct Factor {
    coeff: f64,
    power: i32,
}

/// How table entries are read when evaluating `v`, `w`, `W`.
enum Source<'a> {
    Table(&'a EigenstepsTable),
    Path {
        start: &'a EigenstepsTable,
        end: &'a EigenstepsTable,
        t: f64,
    },
}

impl Source<'_> {
    /// Entry `(a) - (b)` with `a`, `b` given as `(row, position)`.
    fn diff(&self, a: (usize, usize), b: (usize, usize), n: usize) -> Result<Factor> {
        match *self {
            Source::Table(tab) => {
                let x = tab.get(a.0, a.1) - tab.get(b.0, b.1);
                if x.abs() <= TAU_EQ {
                    // only reachable with index sets taken from another table
                    return Err(Error::VanishingDenominator { n });
                }
                Ok(Factor { coeff: x, power: 0 })
            }
            Source::Path { start, end, t } => {
                let dl = start.get(a.0, a.1) - start.get(b.0, b.1);
                let dm = end.get(a.0, a.1) - end.get(b.0, b.1);
                if t < 1.0 {
                    let x = (1.0 - t) * dl + t * dm;
                    if x == 0.0 {
                        return Err(Error::VanishingDenominator { n });
                    }
                    Ok(Factor { coeff: x, power: 0 })
                } else if dm.abs() <= TAU_EQ {
                    Ok(Factor {
                        coeff: dl,
                        power: 1,
                    })
                } else {
                    Ok(Factor {
                        coeff: dm,
                        power: 0,
                    })
                }
            }
        }
    }
}

/// A squared quantity `value * (1 - t)^power`; its limit is `value` when
/// `power` is zero and 0 otherwise.
#[derive(Debug, Clone, Copy)]
struct Squared {
    value: f64,
    power: i32,
}

fn product(fs: impl IntoIterator<Item = Result<Factor>>) -> Result<Factor> {
    let mut acc = Factor {
        coeff: 1.0,
        power: 0,
    };
    for f in fs {
        let f = f?;
        acc.coeff *= f.coeff;
        acc.power += f.power;
    }
    Ok(acc)
}

fn ratio(sign: f64, num: Factor, den: Factor, n: usize) -> Result<Squared> {
    let power = num.power - den.power;
    if power < 0 {
        return Err(Error::NoncancellingPowers {
            n,
            net_half_powers: power,
        });
    }
    let value = sign * num.coeff / den.coeff;
    if value < -RADICAND_TOL {
        return Err(Error::NegativeRadicand { n, value });
    }
    Ok(Squared {
        value: value.max(0.0),
        power,
    })
}

fn evaluate(src: &Source, data: &StepIndexData) -> Result<LiftEvaluation> {
    let (n, d, k) = (data.n, data.sigma.len(), data.k);
    let (is, js) = (&data.i_set, &data.j_set);
    let mut v2 = Vec::with_capacity(k);
    for &i in is {
        let num = product(js.iter().map(|&j| src.diff((n, i), (n + 1, j), n)))?;
        let den = product(
            is.iter()
                .filter(|&&i2| i2 != i)
                .map(|&i2| src.diff((n, i), (n, i2), n)),
        )?;
        v2.push(ratio(-1.0, num, den, n)?);
    }
    let mut w2 = Vec::with_capacity(k);
    for &j in js {
        let num = product(is.iter().map(|&i| src.diff((n + 1, j), (n, i), n)))?;
        let den = product(
            js.iter()
                .filter(|&&j2| j2 != j)
                .map(|&j2| src.diff((n + 1, j), (n + 1, j2), n)),
        )?;
        w2.push(ratio(1.0, num, den, n)?);
    }
    let mut w_matrix = DMatrix::zeros(k, k);
    for (a, &i) in is.iter().enumerate() {
        for (b, &j) in js.iter().enumerate() {
            let den = src.diff((n + 1, j), (n, i), n)?;
            let doubled = v2[a].power + w2[b].power - 2 * den.power;
            if doubled < 0 {
                return Err(Error::NoncancellingPowers {
                    n,
                    net_half_powers: doubled,
                });
            }
            if doubled == 0 {
                if den.coeff == 0.0 {
                    return Err(Error::VanishingDenominator { n });
                }
                w_matrix[(a, b)] = v2[a].value.sqrt() * w2[b].value.sqrt() / den.coeff;
            }
        }
    }
    let mut v = vec![0.0; d];
    let mut w = vec![0.0; d];
    for (a, &i) in is.iter().enumerate() {
        v[i] = if v2[a].power == 0 {
            v2[a].value.sqrt()
        } else {
            0.0
        };
    }
    for (b, &j) in js.iter().enumerate() {
        w[j] = if w2[b].power == 0 {
            w2[b].value.sqrt()
        } else {
            0.0
        };
    }
    Ok(LiftEvaluation { v, w, w_matrix })
}

/// `v_n`, `w_n`, `W_n` of `table` at step `n` for the index sets in `data`.
pub fn eval_vw_w(
    table: &EigenstepsTable,
    n: usize,
    data: &StepIndexData,
) -> Result<LiftEvaluation> {
    if data.n != n {
        return Err(Error::InvalidArgument(format!(
            "index data is for step {}, not {n}",
            data.n
        )));
    }
    evaluate(&Source::Table(table), data)
}

/// `v_n`, `w_n`, `W_n` at the point `t` of the segment from `lambda` to
/// `mu`, using the index sets of `lambda`. At `t = 1` vanishing factors are
/// replaced by their `(1 - t)` coefficients.
pub fn eval_vw_w_on_path(
    lambda: &EigenstepsTable,
    mu: &EigenstepsTable,
    n: usize,
    t: f64,
) -> Result<LiftEvaluation> {
    let data = step_index_data(lambda, n)?;
    check_same_shape(lambda, mu)?;
    evaluate(
        &Source::Path {
            start: lambda,
            end: mu,
            t,
        },
        &data,
    )
}

/// The `t -> 1` limit of [`eval_vw_w_on_path`].
pub fn eval_vw_w_limit(
    lambda: &EigenstepsTable,
    mu: &EigenstepsTable,
    n: usize,
) -> Result<LiftEvaluation> {
    eval_vw_w_on_path(lambda, mu, n, 1.0)
}

fn check_same_shape(a: &EigenstepsTable, b: &EigenstepsTable) -> Result<()> {
    if a.frame_size() != b.frame_size() || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "tables for (N, d) = ({}, {}) and ({}, {})",
            a.frame_size(),
            a.dim(),
            b.frame_size(),
            b.dim()
        )));
    }
    Ok(())
}

fn check_base(base: &BaseData, big_n: usize, d: usize, index: &[StepIndexData]) -> Result<()> {
    if base.u1.rows() != d || base.u1.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "U_1 is {}x{}, expected {d}x{d}",
            base.u1.rows(),
            base.u1.cols()
        )));
    }
    if base.v.len() != big_n.saturating_sub(1) {
        return Err(Error::DimensionMismatch(format!(
            "{} block unitaries for N = {big_n}",
            base.v.len()
        )));
    }
    let defect = base.u1.unitarity_defect();
    if defect > 1e-8 {
        return Err(Error::NotUnitary(defect));
    }
    for (vn, data) in base.v.iter().zip(index) {
        if vn.rows() != d || vn.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "V_{} has the wrong shape",
                data.n
            )));
        }
        let defect = vn.unitarity_defect();
        if defect > 1e-8 {
            return Err(Error::NotUnitary(defect));
        }
        let block_of = |i: usize| data.blocks.iter().position(|c| c.range().contains(&i));
        for r in 0..d {
            for c in 0..d {
                if block_of(r) != block_of(c) && vn.data()[(r, c)].norm() > 1e-9 {
                    return Err(Error::BaseMismatch(format!(
                        "V_{} couples positions {r} and {c} across eigenvalue clusters",
                        data.n
                    )));
                }
            }
        }
    }
    Ok(())
}

/// One step of the recursion: returns `f_{n+1}` and `U_{n+1}` from
/// `U_n V_n`.
fn advance(ut: &CMat, data: &StepIndexData, ev: &LiftEvaluation) -> (CVec, CMat) {
    let d = ut.nrows();
    let mut f = CVec::zeros(d);
    for &i in &data.i_set {
        f += ut.column(i) * C64::new(ev.v[i], 0.0);
    }
    let mut next = CMat::zeros(d, d);
    for (b, &j) in data.j_set.iter().enumerate() {
        let mut col = CVec::zeros(d);
        for (a, &i) in data.i_set.iter().enumerate() {
            col += ut.column(i) * C64::new(ev.w_matrix[(a, b)], 0.0);
        }
        next.set_column(j, &col);
    }
    for (&i, &j) in data.i_complement().iter().zip(data.j_complement()) {
        next.set_column(j, &ut.column(i));
    }
    (f, next)
}

fn run(
    source: &Source,
    index: &[StepIndexData],
    base: &BaseData,
    big_n: usize,
    d: usize,
) -> Result<Frame> {
    let field = base.field();
    let mut frame = CMat::zeros(d, big_n);
    if big_n == 0 {
        return Frame::new(field, frame);
    }
    let mut u = base.u1.data().clone();
    frame.set_column(0, &u.column(0));
    for (data, vn) in index.iter().zip(&base.v) {
        let ev = evaluate(source, data)?;
        let ut = &u * vn.data();
        let (f, next) = advance(&ut, data, &ev);
        frame.set_column(data.n, &f);
        u = next;
    }
    Ok(Frame::from_matrix(Matrix::new(field, frame)?))
}

fn all_index_data(table: &EigenstepsTable) -> Result<Vec<StepIndexData>> {
    (1..table.frame_size())
        .map(|n| index_data_unchecked(table, n))
        .collect()
}

/// The frame with eigensteps `table` and fiber coordinates `base`.
///
/// Tables on the boundary are handled by the same recursion with clustered
/// partial spectra.
pub fn synthesize(table: &EigenstepsTable, base: &BaseData) -> Result<Frame> {
    ensure_valid(table)?;
    let (big_n, d) = (table.frame_size(), table.dim());
    let index = all_index_data(table)?;
    check_base(base, big_n, d, &index)?;
    run(&Source::Table(table), &index, base, big_n, d)
}

/// The frame at parameter `t` of the lift of `(1 - t) start + t end`, with
/// `start` interior.
pub fn synthesize_on_path(
    start: &EigenstepsTable,
    end: &EigenstepsTable,
    t: f64,
    base: &BaseData,
) -> Result<Frame> {
    check_same_shape(start, end)?;
    ensure_valid(start)?;
    ensure_valid(end)?;
    let index = all_index_data(start)?;
    check_base(base, start.frame_size(), start.dim(), &index)?;
    run(
        &Source::Path { start, end, t },
        &index,
        base,
        start.frame_size(),
        start.dim(),
    )
}

/// First row involved in a non-forced equality, if any.
fn first_degenerate_row(table: &EigenstepsTable, margin: f64) -> Option<usize> {
    free_inequalities(table.frame_size(), table.dim())
        .into_iter()
        .filter(|&((hn, hi), (ln, li))| table.get(hn, hi) - table.get(ln, li) <= margin)
        .map(|((hn, _), (ln, _))| hn.min(ln))
        .min()
}

/// Unitary (orthogonal for real frames) whose first column is `x`, with
/// determinant `+1` in the real case when there is room to flip a column.
fn complete_from(x: &CVec, field: Field) -> Result<CMat> {
    let m = Matrix::new(field, CMat::from_columns(&[x.clone()]))?;
    let mut u = orthonormal_completion(&m)?.into_data();
    let k = u.ncols();
    if field.is_real() && k > 1 && u.map(|z| z.re).determinant() < 0.0 {
        let last = -u.column(k - 1);
        u.set_column(k - 1, &last);
    }
    Ok(u)
}

/// Fiber coordinates of a FUNTF with interior eigensteps.
pub fn recover_base_data(frame: &Frame) -> Result<BaseData> {
    let report = frame.check_funtf(1e-8);
    if !report.ok {
        return Err(Error::NotFuntf {
            unit_norm: report.unit_norm_resid,
            tightness: report.tightness_resid,
        });
    }
    let table = of_frame(frame);
    if frame.len() < frame.dim() + 2 || !is_interior(&table, TAU_EQ)? {
        return Err(Error::DegenerateSpectra(
            first_degenerate_row(&table, TAU_EQ).unwrap_or(0),
        ));
    }
    recover_base_data_on(frame, &table)
}

/// Fiber coordinates of `frame` relative to `table`, which must be the
/// frame's eigensteps up to rounding. Works on the boundary: each `V_n`
/// block of a cluster that receives the new vector maps its first basis
/// vector onto the normalized component of `f_{n+1}`, and every other block
/// is the identity.
pub fn recover_base_data_on(frame: &Frame, table: &EigenstepsTable) -> Result<BaseData> {
    let (d, big_n) = (frame.dim(), frame.len());
    if table.frame_size() != big_n || table.dim() != d {
        return Err(Error::DimensionMismatch(
            "table and frame shapes differ".into(),
        ));
    }
    ensure_valid(table)?;
    let deviation = of_frame(frame).max_deviation(table);
    if deviation > 1e-7 {
        return Err(Error::EigenstepsMismatch(deviation));
    }
    let field = frame.field();
    if big_n == 0 {
        return Ok(BaseData::identity(field, 0, d));
    }
    let u1 = complete_from(&frame.column(0), field)?;
    let mut u = u1.clone();
    let mut vs = Vec::with_capacity(big_n - 1);
    for n in 1..big_n {
        let data = index_data_unchecked(table, n)?;
        let ev = evaluate(&Source::Table(table), &data)?;
        let b = u.adjoint() * frame.column(n);
        let mut vn = CMat::identity(d, d);
        for block in data.blocks.iter().filter(|c| data.i_set.contains(&c.start)) {
            let part = b.rows(block.start, block.len).into_owned();
            let norm = part.norm();
            if norm < 1e-12 {
                continue;
            }
            let sub = complete_from(&part.unscale(norm), field)?;
            vn.view_mut((block.start, block.start), (block.len, block.len))
                .copy_from(&sub);
        }
        let ut = &u * &vn;
        let (_, next) = advance(&ut, &data, &ev);
        vs.push(Matrix::from_parts(field, vn));
        u = next;
    }
    Ok(BaseData {
        u1: Matrix::from_parts(field, u1),
        v: vs,
    })
}

/// `steps + 1` times from 0 to 1: uniform up to 0.9, then quadratically
/// clustered toward 1.
pub fn time_grid(steps: usize) -> Vec<f64> {
    let steps = steps.max(2);
    let tail = (steps / 10).max(1);
    let head = steps - tail;
    let mut ts: Vec<f64> = (0..=head)
        .map(|k| LINEAR_SHARE * k as f64 / head as f64)
        .collect();
    for k in 1..=tail {
        let u = k as f64 / tail as f64;
        ts.push(LINEAR_SHARE + (1.0 - LINEAR_SHARE) * (1.0 - (1.0 - u) * (1.0 - u)));
    }
    ts[steps] = 1.0;
    ts
}

/// Lifts `(1 - t) lambda(F) + t target` to a frame path starting at `F`.
pub fn lift_path(frame: &Frame, target: &EigenstepsTable, steps: usize) -> Result<FramePath> {
    let start = of_frame(frame);
    if !is_interior(&start, TAU_EQ)? {
        return Err(Error::NotInterior);
    }
    let base = recover_base_data(frame)?;
    lift_with_base(&start, target, &base, steps)
}

/// Lift of `(1 - t) start + t target` through the fiber point `base`.
pub fn lift_with_base(
    start: &EigenstepsTable,
    target: &EigenstepsTable,
    base: &BaseData,
    steps: usize,
) -> Result<FramePath> {
    check_same_shape(start, target)?;
    ensure_valid(target)?;
    if !is_interior(start, TAU_EQ)? {
        return Err(Error::NotInterior);
    }
    let ts = time_grid(steps);
    let mut samples = Vec::with_capacity(ts.len());
    for &t in &ts {
        let frame = synthesize_on_path(start, target, t, base)?;
        let declared = start.lerp(target, t);
        let mut s = FrameSample::new(t, frame);
        s.eigensteps_deviation = Some(of_frame(&s.frame).max_deviation(&declared));
        samples.push(s);
    }
    FramePath::new(
        samples,
        PathMetadata {
            construction: "lift".into(),
            steps: ts.len() - 1,
            notes: vec![format!(
                "endpoint {}",
                if is_interior(target, TAU_EQ)? {
                    "interior"
                } else {
                    "on the boundary"
                }
            )],
        },
    )
}

/// Path between two frames with the same eigensteps, interpolating their
/// fiber coordinates along unitary geodesics, block by block.
pub fn fiber_path(f: &Frame, g: &Frame, steps: usize) -> Result<FramePath> {
    if (f.dim(), f.len()) != (g.dim(), g.len()) {
        return Err(Error::DimensionMismatch("frames differ in shape".into()));
    }
    let table = of_frame(f);
    let deviation = table.max_deviation(&of_frame(g));
    if deviation > 1e-7 {
        return Err(Error::EigenstepsMismatch(deviation));
    }
    let field = f.field().join(g.field());
    let (f, g) = (retag(f, field), retag(g, field));
    let bf = recover_base_data_on(&f, &table)?;
    let bg = recover_base_data_on(&g, &table)?;
    let index = all_index_data(&table)?;

    let orient = |e: Error, what: String| match e {
        Error::OrientationMismatch => Error::OrientationObstruction(what),
        other => other,
    };
    let u1 = UnitaryGeodesic::new(&bf.u1, &bg.u1).map_err(|e| orient(e, "U_1".into()))?;
    let mut notes = Vec::new();
    if u1.is_perturbed() {
        notes.push("U_1 geodesic detoured through a fixed perturbation".to_string());
    }
    let mut blocks: Vec<Vec<(Cluster, UnitaryGeodesic)>> = Vec::with_capacity(index.len());
    for ((vf, vg), data) in bf.v.iter().zip(&bg.v).zip(&index) {
        let mut per = Vec::with_capacity(data.blocks.len());
        for c in &data.blocks {
            let sub = |m: &Matrix| {
                Matrix::from_parts(
                    field,
                    m.data()
                        .view((c.start, c.start), (c.len, c.len))
                        .into_owned(),
                )
            };
            let geo = UnitaryGeodesic::new(&sub(vf), &sub(vg))
                .map_err(|e| orient(e, format!("V_{} block at {}", data.n, c.start)))?;
            if geo.is_perturbed() {
                notes.push(format!("V_{} block at {} detoured", data.n, c.start));
            }
            per.push((*c, geo));
        }
        blocks.push(per);
    }
    let d = f.dim();
    let base_at = |t: f64| -> BaseData {
        let v = blocks
            .iter()
            .map(|per| {
                let mut m = CMat::zeros(d, d);
                for (c, geo) in per {
                    m.view_mut((c.start, c.start), (c.len, c.len))
                        .copy_from(geo.at(t).data());
                }
                Matrix::from_parts(field, m)
            })
            .collect();
        BaseData { u1: u1.at(t), v }
    };
    let steps = steps.max(1);
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let frame = synthesize(&table, &base_at(t))?;
        let mut s = FrameSample::new(t, frame);
        s.eigensteps_deviation = Some(of_frame(&s.frame).max_deviation(&table));
        samples.push(s);
    }
    FramePath::new(
        samples,
        PathMetadata {
            construction: "fiber".into(),
            steps,
            notes,
        },
    )
}

fn retag(f: &Frame, field: Field) -> Frame {
    Frame::from_parts(field, f.data().clone())
}

/// Interpolated base data, exposed for callers composing their own routes.
pub fn interpolate_u1(a: &BaseData, b: &BaseData, t: f64) -> Result<Matrix> {
    unitary_geodesic(&a.u1, &b.u1, t)
}
