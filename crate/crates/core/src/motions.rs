//! Frame-operator-preserving motions, each sampled as a [`FramePath`].
//!
//! Every motion is built from one primitive: a unitary family applied to a
//! subset of columns whose frame operator it commutes with.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::frames::{naimark_complement, FramePath, FrameSample, PathMetadata};
use crate::numerics::{max_abs, CMat, CVec, Field, Matrix, PlaneRotation, C64};

/// Default samples per stage.
pub const DEFAULT_STAGE_STEPS: usize = 64;

const TIGHT_TOL: f64 = 1e-8;
const LEAK_TOL: f64 = 1e-9;
const ORTHO_TOL: f64 = 1e-8;

/// Columns to move, and optionally the subspace `W` they live in. Without a
/// subspace the span of the columns is used.
#[derive(Debug, Clone, PartialEq)]
pub struct SubframeSelector {
    pub indices: Vec<usize>,
    pub subspace: Option<CMat>,
}

impl SubframeSelector {
    pub fn new(indices: Vec<usize>) -> Self {
        Self {
            indices,
            subspace: None,
        }
    }

    pub fn with_subspace(indices: Vec<usize>, basis: CMat) -> Self {
        Self {
            indices,
            subspace: Some(basis),
        }
    }
}

fn grid(steps: usize) -> Vec<f64> {
    let steps = steps.max(1);
    (0..=steps).map(|k| k as f64 / steps as f64).collect()
}

fn constant_path(construction: &str, frame: &Frame, steps: usize) -> Result<FramePath> {
    let ts = grid(steps);
    FramePath::from_frames(construction, &ts, vec![frame.clone(); ts.len()])
}

fn check_indices(frame: &Frame, indices: &[usize]) -> Result<()> {
    match indices.iter().find(|&&j| j >= frame.len()) {
        Some(&index) => Err(Error::IndexOutOfRange {
            index,
            len: frame.len(),
        }),
        None => Ok(()),
    }
}

fn require_funtf(frame: &Frame) -> Result<()> {
    let report = frame.check_funtf(1e-8);
    if report.ok {
        Ok(())
    } else {
        Err(Error::NotFuntf {
            unit_norm: report.unit_norm_resid,
            tightness: report.tightness_resid,
        })
    }
}

/// Orthonormal basis of the span of the selected columns.
fn span_basis(sub: &CMat) -> CMat {
    let (d, k) = sub.shape();
    if k == 0 {
        return CMat::zeros(d, 0);
    }
    let svd = SVD::new(sub.clone(), true, false);
    let u = svd.u.expect("left vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-8 * top.max(1.0))
        .count();
    u.columns(0, rank).into_owned()
}

/// Largest entry of `S(G) - S(F)` over a path.
pub fn frame_operator_drift(path: &FramePath) -> f64 {
    let s0 = path.start().frame_operator().into_data();
    path.samples()
        .iter()
        .map(|s| max_abs(&(s.frame.frame_operator().into_data() - &s0)))
        .fold(0.0, f64::max)
}

/// Moves the selected columns by `rotation(t)`, `t` on a uniform grid.
///
/// The selected columns must be a tight frame for `W` and every `U(t)` must
/// map `W` into itself; then the frame operator never changes.
pub fn spin(
    frame: &Frame,
    sel: &SubframeSelector,
    rotation: &dyn Fn(f64) -> CMat,
    steps: usize,
) -> Result<FramePath> {
    check_indices(frame, &sel.indices)?;
    let d = frame.dim();
    let sub = frame.select(&sel.indices)?;
    let basis = match &sel.subspace {
        Some(b) => {
            if b.nrows() != d {
                return Err(Error::DimensionMismatch(format!(
                    "subspace basis has {} rows, d = {d}",
                    b.nrows()
                )));
            }
            let defect = max_abs(&(b.adjoint() * b - CMat::identity(b.ncols(), b.ncols())));
            if defect > ORTHO_TOL {
                return Err(Error::NotOrthonormal(defect));
            }
            b.clone()
        }
        None => span_basis(sub.data()),
    };
    let proj = &basis * basis.adjoint();
    let s_g = sub.frame_operator().into_data();
    let r = basis.ncols();
    let c = if r == 0 {
        0.0
    } else {
        s_g.trace().re / r as f64
    };
    let tight = max_abs(&(&s_g - &proj * C64::new(c, 0.0)));
    if tight > TIGHT_TOL {
        return Err(Error::NotTightOnSpan(tight));
    }
    let complement = CMat::identity(d, d) - &proj;
    let ts = grid(steps);
    let mut frames = Vec::with_capacity(ts.len());
    for &t in &ts {
        let u = rotation(t);
        if u.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "rotation is {:?}, expected {d}x{d}",
                u.shape()
            )));
        }
        if frame.field().is_real() && u.iter().any(|z| z.im.abs() > 1e-12) {
            return Err(Error::FieldMismatch(
                "complex rotation applied to a real frame".into(),
            ));
        }
        let leak = max_abs(&(&complement * &u * &proj));
        if leak > LEAK_TOL {
            return Err(Error::RotationLeaksSubspace(leak));
        }
        let on_w = max_abs(&(&proj * u.adjoint() * &u * &proj - &proj));
        if on_w > LEAK_TOL {
            return Err(Error::NotUnitary(on_w));
        }
        frames.push(frame.rotate_columns(&sel.indices, &u));
    }
    FramePath::from_frames("spin", &ts, frames)
}

/// Like [`spin`] but only demands that the frame operator be kept, for
/// stages whose moving columns are not tight on their span.
fn commuting_stage(
    construction: &str,
    frame: &Frame,
    indices: &[usize],
    rotation: &dyn Fn(f64) -> CMat,
    steps: usize,
) -> Result<FramePath> {
    let ts = grid(steps);
    let s0 = frame.frame_operator().into_data();
    let mut samples = Vec::with_capacity(ts.len());
    for &t in &ts {
        let g = frame.rotate_columns(indices, &rotation(t));
        let drift = max_abs(&(g.frame_operator().into_data() - &s0));
        if drift > TIGHT_TOL {
            return Err(Error::RotationLeaksSubspace(drift));
        }
        samples.push(FrameSample::new(t, g));
    }
    FramePath::new(
        samples,
        PathMetadata {
            construction: construction.into(),
            steps: ts.len() - 1,
            notes: Vec::new(),
        },
    )
}

fn renamed(mut path: FramePath, construction: &str) -> FramePath {
    path.metadata.construction = construction.into();
    path
}

/// Spin by `R(1 - s) R(1)^{-1}`: undoes a completed rotation `R`.
fn undo(rot: &PlaneRotation) -> impl Fn(f64) -> CMat + '_ {
    let inv = rot.matrix(1.0).adjoint();
    move |s| rot.matrix(1.0 - s) * &inv
}

// ---------------------------------------------------------------------------
// two orthonormal bases

/// Splits a frame of `2d` unit vectors into two orthonormal bases. Returns
/// a block label (0 or 1) per column, column 0 in block 0.
pub fn two_onb_blocks(frame: &Frame) -> Result<Vec<u8>> {
    let (d, n) = (frame.dim(), frame.len());
    if d == 0 || n != 2 * d || frame.check_funtf(ORTHO_TOL).unit_norm_resid > ORTHO_TOL {
        return Err(Error::NotTwoOnbs);
    }
    let gram = frame.gram();
    let orth = |i: usize, j: usize| gram[(i, j)].norm() <= ORTHO_TOL;

    fn extend(
        chosen: &mut Vec<usize>,
        next: usize,
        n: usize,
        d: usize,
        orth: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if chosen.len() == d {
            let rest: Vec<usize> = (0..n).filter(|j| !chosen.contains(j)).collect();
            return rest
                .iter()
                .enumerate()
                .all(|(a, &i)| rest[a + 1..].iter().all(|&j| orth(i, j)));
        }
        for j in next..n {
            if chosen.iter().all(|&c| orth(c, j)) {
                chosen.push(j);
                if extend(chosen, j + 1, n, d, orth) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    let mut chosen = vec![0];
    if !extend(&mut chosen, 1, n, d, &orth) {
        return Err(Error::NotTwoOnbs);
    }
    Ok((0..n).map(|j| u8::from(!chosen.contains(&j))).collect())
}

/// Swap of columns `i` and `j` from different blocks: rotate `j`'s basis
/// until `f_j` sits on `f_i`, re-label the two coincident vectors, then
/// rotate the re-labelled basis back.
fn cross_swap(frame: &Frame, labels: &[u8], i: usize, j: usize, steps: usize) -> Result<FramePath> {
    let (fi, fj) = (frame.column(i), frame.column(j));
    let rot = PlaneRotation::taking(&fj, &fi, frame.field());
    let block_j: Vec<usize> = (0..frame.len())
        .filter(|&k| labels[k] == labels[j])
        .collect();
    let align = spin(
        frame,
        &SubframeSelector::new(block_j.clone()),
        &|s| rot.matrix(s),
        steps,
    )?;
    let relabelled: Vec<usize> = block_j
        .iter()
        .map(|&k| if k == j { i } else { k })
        .collect();
    let back = spin(
        align.end(),
        &SubframeSelector::new(relabelled),
        &undo(&rot),
        steps,
    )?;
    FramePath::concat("cross-block swap", vec![align, back])
}

fn swap_with_labels(
    frame: &Frame,
    labels: &mut [u8],
    i: usize,
    j: usize,
    chaperone: Option<usize>,
    steps: usize,
) -> Result<FramePath> {
    if i == j {
        return constant_path("swap", frame, steps);
    }
    if labels[i] != labels[j] {
        let path = cross_swap(frame, labels, i, j, steps)?;
        labels.swap(i, j);
        return Ok(path);
    }
    let c = chaperone.ok_or(Error::MissingChaperone)?;
    if labels[c] == labels[i] {
        return Err(Error::MissingChaperone);
    }
    let mut parts = Vec::with_capacity(3);
    let mut current = frame.clone();
    for (p, q) in [(i, c), (i, j), (j, c)] {
        let part = cross_swap(&current, labels, p, q, steps)?;
        labels.swap(p, q);
        current = part.end().clone();
        parts.push(part);
    }
    FramePath::concat("chaperone swap", parts)
}

/// Exchanges columns `i` and `j` of a union of two orthonormal bases through
/// FUNTFs. Same-block pairs go through three cross-block swaps with the
/// `chaperone`, which ends where it started.
pub fn swap_pair_path(
    frame: &Frame,
    i: usize,
    j: usize,
    chaperone: Option<usize>,
    steps: usize,
) -> Result<FramePath> {
    check_indices(frame, &[i, j])?;
    if let Some(c) = chaperone {
        check_indices(frame, &[c])?;
    }
    let mut labels = two_onb_blocks(frame)?;
    swap_with_labels(frame, &mut labels, i, j, chaperone, steps)
}

/// Realizes `frame.permute(sigma)` by a chain of pair swaps.
pub fn permutation_path(frame: &Frame, sigma: &[usize], steps: usize) -> Result<FramePath> {
    let target = frame.permute(sigma)?;
    let mut labels = two_onb_blocks(frame)?;
    let n = frame.len();
    // holding[p] = original index of the vector at position p
    let mut holding: Vec<usize> = (0..n).collect();
    let mut parts = Vec::new();
    let mut current = frame.clone();
    for p in 0..n {
        let q = holding
            .iter()
            .position(|&o| o == sigma[p])
            .expect("sigma is a permutation");
        if q == p {
            continue;
        }
        let chaperone = (0..n).find(|&k| labels[k] != labels[p]);
        let part = swap_with_labels(&current, &mut labels, p, q, chaperone, steps)?;
        holding.swap(p, q);
        current = part.end().clone();
        parts.push(part);
    }
    if parts.is_empty() {
        return constant_path("permutation", frame, steps);
    }
    let mut path = FramePath::concat("permutation", parts)?;
    let gap = path.end().max_column_distance(&target);
    path.metadata
        .notes
        .push(format!("endpoint off target by {gap:.2e}"));
    Ok(path)
}

// ---------------------------------------------------------------------------
// negation through a chaperone

fn is_tight(frame: &Frame, subset: &[usize]) -> bool {
    let d = frame.dim();
    let s = frame
        .select(subset)
        .expect("indices checked")
        .frame_operator()
        .into_data();
    let c = s.trace().re / d as f64;
    max_abs(&(s - CMat::identity(d, d) * C64::new(c, 0.0))) <= TIGHT_TOL
}

/// Smallest tight subframe containing `target` whose complement is tight
/// and contains `chaperone`.
fn tight_split(frame: &Frame, target: usize, chaperone: usize) -> Result<Vec<usize>> {
    let (d, n) = (frame.dim(), frame.len());
    if n > 20 {
        return Err(Error::TooLarge {
            needed: 1u128 << (n - 2),
            budget: 1 << 18,
        });
    }
    let others: Vec<usize> = (0..n).filter(|&k| k != target && k != chaperone).collect();
    let mut best: Option<Vec<usize>> = None;
    let mut joint = false;
    for mask in 0u32..(1 << others.len()) {
        let mut s = vec![target];
        s.extend(
            others
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &k)| k),
        );
        if !joint && s.len() + 1 >= d && n - s.len() > d {
            let mut with_c = s.clone();
            with_c.push(chaperone);
            joint = is_tight(frame, &with_c);
        }
        let fits = s.len() >= d && n - s.len() >= d;
        if fits && best.as_ref().is_none_or(|b| b.len() > s.len()) && is_tight(frame, &s) {
            best = Some(s);
        }
    }
    match best {
        Some(mut s) => {
            s.sort_unstable();
            Ok(s)
        }
        None if joint => Err(Error::SameSubframe),
        None => Err(Error::NotTight),
    }
}

fn unit_orthogonal_to(b: &CVec) -> CVec {
    let n = b.len();
    let m = (0..n)
        .min_by(|&x, &y| b[x].norm().total_cmp(&b[y].norm()))
        .unwrap_or(0);
    let mut e = CVec::zeros(n);
    e[m] = C64::new(1.0, 0.0);
    let r = &e - b * b.dotc(&e);
    let norm = r.norm();
    r.unscale(norm)
}

/// Replaces column `target` by its negative, leaving all other columns in
/// place. `target` and `chaperone` must lie in complementary tight
/// subframes; these are found by search.
pub fn negate_vector_path(
    frame: &Frame,
    target: usize,
    chaperone: usize,
    steps: usize,
) -> Result<FramePath> {
    check_indices(frame, &[target, chaperone])?;
    if target == chaperone {
        return Err(Error::SameSubframe);
    }
    require_funtf(frame)?;
    if frame.dim() < 2 {
        return Err(Error::InvalidArgument("negation needs d >= 2".into()));
    }
    let field = frame.field();
    let block_a = tight_split(frame, target, chaperone)?;
    let block_b: Vec<usize> = (0..frame.len()).filter(|k| !block_a.contains(k)).collect();
    let (a, b) = (frame.column(target), frame.column(chaperone));

    // 1: turn the target's block until the target is orthogonal to the chaperone
    let rest = &a - &b * b.dotc(&a);
    let a_perp = if rest.norm() > 1e-12 {
        rest.unscale(rest.norm())
    } else {
        unit_orthogonal_to(&b)
    };
    let r1 = PlaneRotation::taking(&a, &a_perp, field);
    let s1 = spin(
        frame,
        &SubframeSelector::new(block_a.clone()),
        &|s| r1.matrix(s),
        steps,
    )?;
    // 2: quarter turn of the orthonormal pair: target -> b, chaperone -> -a'
    let quarter = PlaneRotation::in_plane(a_perp.clone(), b.clone(), FRAC_PI_2);
    let s2 = spin(
        s1.end(),
        &SubframeSelector::new(vec![target, chaperone]),
        &|s| quarter.matrix(s),
        steps,
    )?;
    // 3: turn the chaperone's original vectors (b now sits at `target`) onto -a'
    let minus_a = -&a_perp;
    let r2 = PlaneRotation::taking(&b, &minus_a, field);
    let b_with_target: Vec<usize> = block_b
        .iter()
        .map(|&k| if k == chaperone { target } else { k })
        .collect();
    let s3 = spin(
        s2.end(),
        &SubframeSelector::new(b_with_target),
        &|s| r2.matrix(s),
        steps,
    )?;
    // 4: target and chaperone coincide; bring the chaperone's block home
    let s4 = spin(s3.end(), &SubframeSelector::new(block_b), &undo(&r2), steps)?;
    // 5: bring the target's block home, now carrying -a
    let s5 = spin(s4.end(), &SubframeSelector::new(block_a), &undo(&r1), steps)?;
    FramePath::concat("negate vector", vec![s1, s2, s3, s4, s5])
}

// ---------------------------------------------------------------------------
// simplex to two orthonormal bases

fn sign_vector(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| (x.abs() - 1.0).abs() > 1e-12) {
        Some(i) => Err(Error::NotSimplex(format!(
            "entry {i} of the sign vector is not +-1"
        ))),
        None => Ok(()),
    }
}

/// `h` must be a real FUNTF of `d` vectors in `R^{d-1}` annihilating `sign`.
fn check_simplex(h: &Frame, sign: &[f64]) -> Result<()> {
    let d = sign.len();
    if !h.field().is_real() {
        return Err(Error::NotSimplex("simplex must be real".into()));
    }
    if d < 2 || h.len() != d || h.dim() != d - 1 {
        return Err(Error::NotSimplex(format!(
            "expected {} x {d}, got {} x {}",
            d.saturating_sub(1),
            h.dim(),
            h.len()
        )));
    }
    sign_vector(sign)?;
    let report = h.check_funtf(1e-8);
    if !report.ok {
        return Err(Error::NotSimplex(format!(
            "not a FUNTF (norm {:.1e}, tightness {:.1e})",
            report.unit_norm_resid, report.tightness_resid
        )));
    }
    let kernel = h
        .data()
        .column_iter()
        .zip(sign)
        .fold(CVec::zeros(d - 1), |acc, (c, &s)| {
            acc + c * C64::new(s, 0.0)
        });
    if kernel.norm() > 1e-8 {
        return Err(Error::NotSimplex(
            "sign vector is not a complement of the simplex".into(),
        ));
    }
    Ok(())
}

/// The fixed simplex: complement of the all-ones row, with its sign vector.
pub fn canonical_simplex(d: usize) -> Result<(Frame, Vec<f64>)> {
    if d < 2 {
        return Err(Error::InvalidArgument("a simplex needs d >= 2".into()));
    }
    let ones = Frame::new(Field::Real, CMat::from_element(1, d, C64::new(1.0, 0.0)))?;
    Ok((naimark_complement(&ones)?, vec![1.0; d]))
}

/// `<u_1(1), v_i(1)>` for every `i`.
fn alignment(xi: &[f64], h: &Frame, h_prime: &Frame, zeta: &[f64]) -> Vec<f64> {
    let d = xi.len() as f64;
    let hp1 = h_prime.column(0);
    (0..xi.len())
        .map(|i| zeta[0] * xi[i] / d + (d - 1.0) / d * hp1.dotc(&h.column(i)).re)
        .collect()
}

fn check_alignment(xi: &[f64], h: &Frame, h_prime: &Frame, zeta: &[f64]) -> Result<()> {
    match alignment(xi, h, h_prime, zeta)
        .iter()
        .position(|x| x.abs() <= 1e-6)
    {
        Some(i) => Err(Error::DegenerateAlignment(i)),
        None => Ok(()),
    }
}

/// Rotates `h_prime` by Givens rotations of angle `0.01 k` until the
/// alignment condition holds with margin `1e-6`. Returns `h_prime`
/// unchanged when it already does.
pub fn align_for_morph(xi: &[f64], h: &Frame, h_prime: &Frame, zeta: &[f64]) -> Result<Frame> {
    check_simplex(h, xi)?;
    check_simplex(h_prime, zeta)?;
    if check_alignment(xi, h, h_prime, zeta).is_ok() {
        return Ok(h_prime.clone());
    }
    let m = h.dim();
    for p in 0..m.saturating_sub(1) {
        for k in 1..=700 {
            let e = |i: usize| {
                let mut v = CVec::zeros(m);
                v[i] = C64::new(1.0, 0.0);
                v
            };
            let g = PlaneRotation::in_plane(e(p), e(p + 1), 0.01 * k as f64).matrix(1.0);
            let candidate = h_prime.left_mul(&g);
            if check_alignment(xi, h, &candidate, zeta).is_ok() {
                return Ok(candidate);
            }
        }
    }
    check_alignment(xi, h, h_prime, zeta).map(|_| h_prime.clone())
}

/// The `2d`-vector frame `[V(t) U(t)]` with
/// `V(t) = [sqrt((2-t)/d) xi; sqrt((d-2+t)/d) H]` and
/// `U(t) = [sqrt(t/d) zeta; sqrt((d-t)/d) H']`.
pub fn simplex_onb_morph(
    xi: &[f64],
    h: &Frame,
    h_prime: &Frame,
    zeta: &[f64],
    t: f64,
) -> Result<Frame> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
    }
    if zeta.len() != xi.len() {
        return Err(Error::NotSimplex("sign vectors differ in length".into()));
    }
    check_simplex(h, xi)?;
    check_simplex(h_prime, zeta)?;
    check_alignment(xi, h, h_prime, zeta)?;
    let d = xi.len();
    let df = d as f64;
    let mut data = CMat::zeros(d, 2 * d);
    let blocks = [
        (
            0,
            xi,
            h,
            ((2.0 - t) / df).sqrt(),
            ((df - 2.0 + t) / df).sqrt(),
        ),
        (d, zeta, h_prime, (t / df).sqrt(), ((df - t) / df).sqrt()),
    ];
    for (offset, sign, simplex, top, bottom) in blocks {
        for j in 0..d {
            data[(0, offset + j)] = C64::new(top * sign[j], 0.0);
            for r in 0..d - 1 {
                data[(r + 1, offset + j)] = simplex.data()[(r, j)] * bottom;
            }
        }
    }
    Frame::new(Field::Real, data)
}

/// [`simplex_onb_morph`] sampled on a uniform grid of `t`.
pub fn simplex_onb_morph_path(
    xi: &[f64],
    h: &Frame,
    h_prime: &Frame,
    zeta: &[f64],
    steps: usize,
) -> Result<FramePath> {
    let ts = grid(steps);
    let frames = ts
        .iter()
        .map(|&t| simplex_onb_morph(xi, h, h_prime, zeta, t))
        .collect::<Result<Vec<_>>>()?;
    FramePath::from_frames("simplex to two bases", &ts, frames)
}

// ---------------------------------------------------------------------------
// the two-basis swap

/// The two positively oriented bases and the two frames they assemble.
#[derive(Debug, Clone)]
pub struct TwoOnbSwap {
    pub xi: Vec<f64>,
    pub u: Matrix,
    pub v: Matrix,
    /// `(u1 v1 u2 v2 v3..vd u3..ud)`
    pub f_star: Frame,
    /// `(v1 u1 u2 v2 v3..vd u3..ud)`
    pub g_star: Frame,
}

/// Builds the bases `U`, `V` and frames `F_*`, `G_*` from a FUNTF of `d - 2`
/// vectors in `R^{d-3}` (`None` when `d = 3`).
pub fn two_onb_swap_frames(d: usize, f_small: Option<&Frame>) -> Result<TwoOnbSwap> {
    if d < 3 {
        return Err(Error::BadSubframe(format!("d = {d} < 3")));
    }
    let k = d - 2;
    let small = match f_small {
        Some(f) if f.len() == k && f.dim() == k - 1 => {
            if !f.field().is_real() || !f.check_funtf(1e-8).ok {
                return Err(Error::BadSubframe("subframe must be a real FUNTF".into()));
            }
            f.as_matrix().real_part()
        }
        Some(f) if d == 3 && f.is_empty() => nalgebra::DMatrix::zeros(0, 1),
        Some(f) => {
            return Err(Error::BadSubframe(format!(
                "expected {} vectors in dimension {}, got {} x {}",
                k,
                k - 1,
                f.dim(),
                f.len()
            )))
        }
        None if d == 3 => nalgebra::DMatrix::zeros(0, 1),
        None => return Err(Error::BadSubframe(format!("d = {d} needs a subframe"))),
    };
    let mut xi: Vec<f64> = if d == 3 {
        vec![1.0]
    } else {
        let g = naimark_complement(&Frame::new(Field::Real, small.map(|x| C64::new(x, 0.0)))?)?;
        g.data().iter().map(|z| z.re.signum()).collect()
    };
    let stacked = |xi: &[f64]| {
        let mut m = nalgebra::DMatrix::zeros(k, k);
        for j in 0..k {
            m[(0, j)] = xi[j] / (k as f64).sqrt();
            for r in 0..k - 1 {
                m[(r + 1, j)] = ((k as f64 - 1.0) / k as f64).sqrt() * small[(r, j)];
            }
        }
        m
    };
    if stacked(&xi).determinant() > 0.0 {
        xi.iter_mut().for_each(|x| *x = -*x);
    }
    let m = stacked(&xi);
    let a = FRAC_1_SQRT_2;
    let mut u = nalgebra::DMatrix::zeros(d, d);
    let mut v = nalgebra::DMatrix::zeros(d, d);
    u[(0, 0)] = a;
    u[(0, 1)] = a;
    u[(1, 0)] = a;
    u[(1, 1)] = -a;
    v[(0, 0)] = a;
    v[(0, 1)] = a;
    v[(2, 0)] = a;
    v[(2, 1)] = -a;
    for j in 0..k {
        for r in 0..k {
            u[(2 + r, 2 + j)] = m[(r, j)];
        }
        v[(1, 2 + j)] = -m[(0, j)];
        for r in 1..k {
            v[(2 + r, 2 + j)] = m[(r, j)];
        }
    }
    let (u, v) = (Matrix::from_real(&u), Matrix::from_real(&v));
    let col = |m: &Matrix, j: usize| m.data().column(j).into_owned();
    let tail: Vec<CVec> = (2..d)
        .map(|j| col(&v, j))
        .chain((2..d).map(|j| col(&u, j)))
        .collect();
    let head_f = [col(&u, 0), col(&v, 0), col(&u, 1), col(&v, 1)];
    let head_g = [col(&v, 0), col(&u, 0), col(&u, 1), col(&v, 1)];
    let assemble = |head: &[CVec]| {
        let cols: Vec<CVec> = head.iter().cloned().chain(tail.iter().cloned()).collect();
        Frame::from_columns(Field::Real, d, &cols)
    };
    Ok(TwoOnbSwap {
        xi,
        f_star: assemble(&head_f)?,
        g_star: assemble(&head_g)?,
        u,
        v,
    })
}

fn basis_vector(d: usize, i: usize) -> CVec {
    let mut e = CVec::zeros(d);
    e[i] = C64::new(1.0, 0.0);
    e
}

/// The six-stage NOD path from `F_*` to `G_*`, `steps` samples per stage:
/// turn the last `2d - 4` columns by `-pi/4` in the `e2-e3` plane, turn the
/// first four by `pi/2` in the same plane (a 4-cycle on them), three spins
/// of orthonormal pairs (a 3-cycle), and undo the first turn.
pub fn two_onb_swap_path(d: usize, f_small: Option<&Frame>, steps: usize) -> Result<FramePath> {
    let swap = two_onb_swap_frames(d, f_small)?;
    let e = |i| basis_vector(d, i);
    let head: Vec<usize> = (0..4).collect();
    let tail: Vec<usize> = (4..2 * d).collect();

    let pre = PlaneRotation::in_plane(e(1), e(2), -FRAC_PI_4);
    let s1 = commuting_stage(
        "pre-rotation",
        &swap.f_star,
        &tail,
        &|s| pre.matrix(s),
        steps,
    )?;
    let cycle = PlaneRotation::in_plane(e(1), e(2), FRAC_PI_2);
    let s2 = commuting_stage("4-cycle", s1.end(), &head, &|s| cycle.matrix(s), steps)?;
    let r3 = PlaneRotation::in_plane(e(0), e(1), FRAC_PI_4);
    let s3 = renamed(
        spin(
            s2.end(),
            &SubframeSelector::new(vec![1, 3]),
            &|s| r3.matrix(s),
            steps,
        )?,
        "spin 2,4",
    );
    let p = s3.end().column(2);
    let r4 = PlaneRotation::in_plane(p, e(1), -FRAC_PI_2);
    let s4 = renamed(
        spin(
            s3.end(),
            &SubframeSelector::new(vec![2, 3]),
            &|s| r4.matrix(s),
            steps,
        )?,
        "spin 3,4",
    );
    let r5 = PlaneRotation::in_plane(e(0), e(1), FRAC_PI_4);
    let s5 = renamed(
        spin(
            s4.end(),
            &SubframeSelector::new(vec![1, 2]),
            &|s| r5.matrix(s),
            steps,
        )?,
        "spin 2,3",
    );
    let s6 = commuting_stage("undo pre-rotation", s5.end(), &tail, &undo(&pre), steps)?;
    FramePath::concat("two-basis swap", vec![s1, s2, s3, s4, s5, s6])
}
