//! Dense linear algebra over the real or complex field.
//!
//! All matrices are stored as `DMatrix<Complex<f64>>` and tagged with a
//! [`Field`]. Real-tagged matrices keep every imaginary part at exactly zero;
//! the routines here route real inputs through real arithmetic so that the
//! tag stays honest.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// The scalar field a frame or matrix lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn is_real(self) -> bool {
        matches!(self, Field::Real)
    }

    /// The field that can hold values from both operands.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(Field::Real),
            "complex" | "c" => Ok(Field::Complex),
            other => Err(format!(
                "unknown field `{other}` (expected real or complex)"
            )),
        }
    }
}

/// Numerical tolerances shared by the kernel. Every routine that takes a
/// tolerance has a `_with` variant accepting an override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Maximum entrywise asymmetry accepted as self-adjoint.
    pub sym: f64,
    /// Maximum entrywise deviation of `U*U` from the identity.
    pub unit: f64,
    /// Relative reconstruction residual of a spectral decomposition.
    pub recon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sym: 1e-10,
            unit: 1e-9,
            recon: 1e-9,
        }
    }
}

/// A field-tagged dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    field: Field,
    data: CMat,
}

impl Matrix {
    /// Wraps `data`, rejecting real-tagged input with nonzero imaginary parts.
    pub fn new(field: Field, data: CMat) -> Result<Self> {
        if field.is_real() {
            let worst = data.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if worst > 1e-12 {
                return Err(Error::FieldMismatch(format!(
                    "real matrix has imaginary part {worst:.3e}"
                )));
            }
        }
        Ok(Self::from_parts(field, data))
    }

    /// Wraps `data`, zeroing imaginary parts when the field is real.
    pub(crate) fn from_parts(field: Field, mut data: CMat) -> Self {
        if field.is_real() {
            data.iter_mut().for_each(|z| z.im = 0.0);
        }
        Self { field, data }
    }

    pub fn from_real(data: &DMatrix<f64>) -> Self {
        Self {
            field: Field::Real,
            data: data.map(|x| C64::new(x, 0.0)),
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        Self {
            field,
            data: CMat::identity(n, n),
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    /// Real parts of the entries.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.data.map(|z| z.re)
    }

    /// Row-major entries.
    pub fn entries_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Matrix {
        Self {
            field: self.field,
            data: self.data.adjoint(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        Self::from_parts(self.field.join(other.field), &self.data * &other.data)
    }

    /// `max |A*A - I|` over entries.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.cols();
        max_abs(&(self.data.adjoint() * &self.data - CMat::identity(n, n)))
    }

    pub fn determinant(&self) -> C64 {
        if self.field.is_real() {
            C64::new(self.real_part().determinant(), 0.0)
        } else {
            self.data.clone().determinant()
        }
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (nonincreasing) with matching unitary eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    /// `U diag(e) U*`.
    pub fn reconstruct(&self) -> CMat {
        let u = self.eigenvectors.data();
        let diag = CMat::from_diagonal(&CVec::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&e| C64::new(e, 0.0)),
        ));
        u * diag * u.adjoint()
    }
}

pub fn hermitian_eig(a: &Matrix) -> Result<SpectralDecomposition> {
    hermitian_eig_with(a, &Tolerances::default())
}

/// Spectral decomposition of a self-adjoint matrix, eigenvalues sorted
/// nonincreasing. Repeated eigenvalues get an arbitrary orthonormal basis of
/// their eigenspace.
pub fn hermitian_eig_with(a: &Matrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "hermitian_eig needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let asym = max_abs(&(a.data() - a.data().adjoint()));
    if asym > tol.sym {
        return Err(Error::NotSelfAdjoint(asym));
    }
    let n = a.rows();
    let (values, vectors): (Vec<f64>, CMat) = if a.field().is_real() {
        let re = a.real_part();
        let sym = (&re + re.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let herm = (a.data() + a.data().adjoint()).map(|z| z * 0.5);
        let eig = SymmetricEigen::new(herm);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let mut sorted = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: Matrix::from_parts(a.field(), sorted),
    })
}

/// Extends a set of orthonormal columns to a unitary (orthogonal) matrix
/// whose leading columns are exactly `v`. New columns come from Gram-Schmidt
/// on the standard basis, taking the best-conditioned candidate each time.
pub fn orthonormal_completion(v: &Matrix) -> Result<Matrix> {
    orthonormal_completion_with(v, &Tolerances::default())
}

pub fn orthonormal_completion_with(v: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let (d, k) = (v.rows(), v.cols());
    if k > d {
        return Err(Error::DimensionMismatch(format!(
            "cannot complete {k} columns in dimension {d}"
        )));
    }
    let defect = v.unitarity_defect();
    if defect > tol.unit {
        return Err(Error::NotOrthonormal(defect));
    }
    let mut cols: Vec<CVec> = (0..k).map(|j| v.data().column(j).into_owned()).collect();
    while cols.len() < d {
        let mut best: Option<(f64, CVec)> = None;
        for m in 0..d {
            let mut r = CVec::zeros(d);
            r[m] = ONE;
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dotc(&r);
                    r -= c * proj;
                }
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, r));
            }
        }
        let (norm, r) = best.expect("d > 0 when a column is missing");
        cols.push(r.unscale(norm));
    }
    let data = if d == 0 {
        CMat::zeros(0, 0)
    } else {
        CMat::from_columns(&cols)
    };
    Ok(Matrix::from_parts(v.field(), data))
}

/// `exp(t log(U0* U1))` precomputed for repeated evaluation.
#[derive(Debug, Clone)]
pub struct UnitaryGeodesic {
    field: Field,
    start: CMat,
    /// Second leg of the path when `U0* U1` has an eigenvalue at -1 and the
    /// route goes through a fixed perturbation of `U0`.
    detour: Option<Box<UnitaryGeodesic>>,
    basis: CMat,
    angles: Vec<f64>,
}

impl UnitaryGeodesic {
    pub fn new(u0: &Matrix, u1: &Matrix) -> Result<Self> {
        Self::new_with(u0, u1, &Tolerances::default())
    }

    pub fn new_with(u0: &Matrix, u1: &Matrix, tol: &Tolerances) -> Result<Self> {
        if u0.rows() != u1.rows() || u0.cols() != u1.cols() || u0.rows() != u0.cols() {
            return Err(Error::DimensionMismatch(
                "geodesic endpoints differ in shape".into(),
            ));
        }
        if u0.field() != u1.field() {
            return Err(Error::FieldMismatch(
                "geodesic endpoints differ in field".into(),
            ));
        }
        for u in [u0, u1] {
            let defect = u.unitarity_defect();
            if defect > tol.unit {
                return Err(Error::NotUnitary(defect));
            }
        }
        let field = u0.field();
        if field.is_real() && u0.rows() > 0 {
            let s = u0.determinant().re * u1.determinant().re;
            if s <= 0.0 {
                return Err(Error::OrientationMismatch);
            }
        }
        let w = u0.data().adjoint() * u1.data();
        match principal_angles(&w) {
            Some((basis, angles)) => Ok(Self {
                field,
                start: u0.data().clone(),
                detour: None,
                basis,
                angles,
            }),
            None => {
                let n = w.nrows();
                for k in 1..=8 {
                    let p = fixed_perturbation(field, n, 0.25 * k as f64);
                    let mid = Matrix::from_parts(field, u0.data() * &p);
                    let rest = mid.data().adjoint() * u1.data();
                    if principal_angles(&rest).is_none() {
                        continue;
                    }
                    let first = Self::new_with(u0, &mid, tol)?;
                    let second = Self::new_with(&mid, u1, tol)?;
                    return Ok(Self {
                        detour: Some(Box::new(second)),
                        ..first
                    });
                }
                Err(Error::NotUnitary(f64::NAN))
            }
        }
    }

    /// Whether the path was routed through a fixed perturbation because the
    /// relative rotation had an eigenvalue at -1.
    pub fn is_perturbed(&self) -> bool {
        self.detour.is_some()
    }

    pub fn at(&self, t: f64) -> Matrix {
        let data = match &self.detour {
            None => self.evaluate(t),
            Some(second) if t > 0.5 => second.at(2.0 * t - 1.0).into_data(),
            Some(_) => self.evaluate(2.0 * t),
        };
        Matrix::from_parts(self.field, data)
    }

    fn evaluate(&self, t: f64) -> CMat {
        let n = self.angles.len();
        if t == 0.0 {
            return self.start.clone();
        }
        let phases =
            CVec::from_iterator(n, self.angles.iter().map(|&a| C64::from_polar(1.0, t * a)));
        let step = &self.basis * CMat::from_diagonal(&phases) * self.basis.adjoint();
        &self.start * step
    }
}

pub fn unitary_geodesic(u0: &Matrix, u1: &Matrix, t: f64) -> Result<Matrix> {
    Ok(UnitaryGeodesic::new(u0, u1)?.at(t))
}

/// Eigenbasis and principal arguments of a unitary matrix, or `None` when an
/// eigenvalue sits at -1 (where the principal logarithm is discontinuous).
fn principal_angles(w: &CMat) -> Option<(CMat, Vec<f64>)> {
    let n = w.nrows();
    if n == 0 {
        return Some((CMat::zeros(0, 0), Vec::new()));
    }
    let schur = Schur::try_new(w.clone(), 1e-14, 10_000)?;
    let (q, t) = schur.unpack();
    let mut angles = Vec::with_capacity(n);
    for k in 0..n {
        let z = t[(k, k)];
        if (z + ONE).norm() < 1e-7 {
            return None;
        }
        angles.push(z.arg());
    }
    Some((q, angles))
}

fn fixed_perturbation(field: Field, n: usize, scale: f64) -> CMat {
    let mut g = CMat::zeros(n, n);
    for j in 0..n {
        for k in (j + 1)..n {
            let x = (1 + (j * 7 + k * 3) % 5) as f64 / 5.0;
            g[(j, k)] = C64::new(x, 0.0);
            g[(k, j)] = C64::new(-x, 0.0);
        }
        if !field.is_real() {
            g[(j, j)] = C64::new(0.0, (j + 1) as f64 / n as f64);
        }
    }
    let g = g.map(|z| z * scale);
    // exp of a small skew-Hermitian matrix via its Hermitian partner i*g
    let h = g.map(|z| z * C64::new(0.0, -1.0));
    let eig = SymmetricEigen::new((&h + h.adjoint()).map(|z| z * 0.5));
    let phases = CVec::from_iterator(n, eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, e)));
    let p = &eig.eigenvectors * CMat::from_diagonal(&phases) * eig.eigenvectors.adjoint();
    if field.is_real() {
        p.map(|z| C64::new(z.re, 0.0))
    } else {
        p
    }
}

/// A one-parameter rotation family acting on the plane spanned by the
/// orthonormal pair `(u, w)`, with an optional global phase on that plane.
/// At parameter `s` it maps `u` to `e^{i s phase} (cos(s angle) u + sin(s angle) w)`
/// and fixes the orthogonal complement of the plane.
#[derive(Debug, Clone)]
pub struct PlaneRotation {
    pub u: CVec,
    pub w: CVec,
    pub angle: f64,
    pub phase: f64,
}

impl PlaneRotation {
    /// Rotation by `angle` in the plane of orthonormal `u`, `w`.
    pub fn in_plane(u: CVec, w: CVec, angle: f64) -> Self {
        Self {
            u,
            w,
            angle,
            phase: 0.0,
        }
    }

    /// Minimal-angle rotation carrying unit vector `x` onto unit vector `y`.
    /// Antipodal pairs rotate through the standard basis direction least
    /// aligned with `x`.
    pub fn taking(x: &CVec, y: &CVec, field: Field) -> Self {
        let u = x.clone();
        let alpha = u.dotc(y);
        let rest = y - &u * alpha;
        let beta = rest.norm();
        let (angle, phase) = if field.is_real() {
            (beta.atan2(alpha.re), 0.0)
        } else {
            (
                beta.atan2(alpha.norm()),
                if alpha.norm() > 1e-14 {
                    alpha.arg()
                } else {
                    0.0
                },
            )
        };
        let w = if beta > 1e-12 {
            // y = e^{i phase}(cos u + sin w)
            (rest * C64::from_polar(1.0, -phase)).unscale(beta)
        } else {
            fallback_direction(&u)
        };
        Self { u, w, angle, phase }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn matrix(&self, s: f64) -> CMat {
        let n = self.dim();
        let (c, sn) = ((s * self.angle).cos(), (s * self.angle).sin());
        let ph = C64::from_polar(1.0, s * self.phase);
        let uu = &self.u * self.u.adjoint();
        let ww = &self.w * self.w.adjoint();
        let wu = &self.w * self.u.adjoint();
        let uw = &self.u * self.w.adjoint();
        let plane =
            (&uu * C64::new(c, 0.0) + &ww * C64::new(c, 0.0) + (wu - uw) * C64::new(sn, 0.0)) * ph;
        CMat::identity(n, n) - uu - ww + plane
    }
}

fn fallback_direction(u: &CVec) -> CVec {
    let n = u.len();
    let m = (0..n)
        .min_by(|&a, &b| u[a].norm().total_cmp(&u[b].norm()))
        .unwrap_or(0);
    let mut e = CVec::zeros(n);
    if n == 0 {
        return e;
    }
    e[m] = ONE;
    let r = &e - u * u.dotc(&e);
    let norm = r.norm();
    r.unscale(norm)
}
