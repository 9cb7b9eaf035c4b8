//! Frames as `d x N` matrices of column vectors, and their structural
//! analyses.

mod graph;
mod naimark;
mod path;
mod spark;

pub use graph::{
    correlation_graph, is_od, nod_reorder, od_components, od_margin, od_perturb, CorrelationGraph,
    DEFAULT_EDGE_EPS,
};
pub use naimark::naimark_complement;
pub use path::{FramePath, FrameSample, PathMetadata};
pub use spark::{spark, spark_with_budget, SparkReport, DEFAULT_RANK_TOL, DEFAULT_SPARK_BUDGET};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{max_abs, CMat, CVec, Field, Matrix, C64};

/// A finite collection of vectors in `F^d`, stored as the columns of a
/// `d x N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    field: Field,
    data: CMat,
}

/// Outcome of a FUNTF check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuntfReport {
    /// `max_n | ||f_n||^2 - 1 |`
    pub unit_norm_resid: f64,
    /// `|| F F* - (N/d) I ||_max`
    pub tightness_resid: f64,
    pub ok: bool,
}

impl Frame {
    pub fn new(field: Field, data: CMat) -> Result<Self> {
        Ok(Self::from_matrix(Matrix::new(field, data)?))
    }

    pub fn from_matrix(m: Matrix) -> Self {
        let field = m.field();
        Self {
            field,
            data: m.into_data(),
        }
    }

    pub(crate) fn from_parts(field: Field, data: CMat) -> Self {
        Self::from_matrix(Matrix::from_parts(field, data))
    }

    pub fn from_columns(field: Field, d: usize, columns: &[CVec]) -> Result<Self> {
        if let Some(bad) = columns.iter().find(|c| c.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} in dimension {d}",
                bad.len()
            )));
        }
        let mut data = CMat::zeros(d, columns.len());
        for (j, c) in columns.iter().enumerate() {
            data.set_column(j, c);
        }
        Self::new(field, data)
    }

    /// Real frame from column slices.
    pub fn from_real_columns(columns: &[&[f64]]) -> Result<Self> {
        let d = columns.first().map_or(0, |c| c.len());
        let cols: Vec<CVec> = columns
            .iter()
            .map(|c| CVec::from_iterator(c.len(), c.iter().map(|&x| C64::new(x, 0.0))))
            .collect();
        Self::from_columns(Field::Real, d, &cols)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of vectors `N`.
    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix::from_parts(self.field, self.data.clone())
    }

    pub fn column(&self, j: usize) -> CVec {
        self.data.column(j).into_owned()
    }

    pub fn columns(&self) -> Vec<CVec> {
        (0..self.len()).map(|j| self.column(j)).collect()
    }

    /// Replaces column `j`.
    pub fn with_column(&self, j: usize, v: &CVec) -> Frame {
        let mut data = self.data.clone();
        data.set_column(j, v);
        Frame::from_parts(self.field, data)
    }

    /// Applies `u` to every column.
    pub fn left_mul(&self, u: &CMat) -> Frame {
        Frame::from_parts(self.field, u * &self.data)
    }

    /// Applies `u` to the columns listed in `indices`.
    pub fn rotate_columns(&self, indices: &[usize], u: &CMat) -> Frame {
        let mut data = self.data.clone();
        for &j in indices {
            let v = u * self.data.column(j);
            data.set_column(j, &v);
        }
        Frame::from_parts(self.field, data)
    }

    /// The subframe made of the listed columns, in order.
    pub fn select(&self, indices: &[usize]) -> Result<Frame> {
        let mut data = CMat::zeros(self.dim(), indices.len());
        for (dst, &src) in indices.iter().enumerate() {
            if src >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: src,
                    len: self.len(),
                });
            }
            data.set_column(dst, &self.data.column(src));
        }
        Ok(Frame::from_parts(self.field, data))
    }

    /// The frame operator `F F*`.
    pub fn frame_operator(&self) -> Matrix {
        Matrix::from_parts(self.field, &self.data * self.data.adjoint())
    }

    /// The Gram matrix `F* F`.
    pub fn gram(&self) -> CMat {
        self.data.adjoint() * &self.data
    }

    pub fn check_funtf(&self, tol: f64) -> FuntfReport {
        let unit_norm_resid = (0..self.len())
            .map(|j| (self.data.column(j).norm_squared() - 1.0).abs())
            .fold(0.0, f64::max);
        let tightness_resid = self.tightness_residual();
        FuntfReport {
            unit_norm_resid,
            tightness_resid,
            ok: unit_norm_resid <= tol && tightness_resid <= tol,
        }
    }

    fn tightness_residual(&self) -> f64 {
        let d = self.dim();
        if d == 0 {
            return 0.0;
        }
        let scale = self.len() as f64 / d as f64;
        let target = CMat::identity(d, d).map(|z| z * scale);
        max_abs(&(&self.data * self.data.adjoint() - target))
    }

    /// `max( max_n | ||f_n|| - 1 |, || F F* - (N/d) I ||_max )`, the residual
    /// recorded along frame paths.
    pub fn funtf_residual(&self) -> f64 {
        let norms = (0..self.len())
            .map(|j| (self.data.column(j).norm() - 1.0).abs())
            .fold(0.0, f64::max);
        norms.max(self.tightness_residual())
    }

    /// Largest entrywise distance to another frame of the same shape.
    pub fn max_distance(&self, other: &Frame) -> f64 {
        if self.data.shape() != other.data.shape() {
            return f64::INFINITY;
        }
        max_abs(&(&self.data - &other.data))
    }

    /// Largest column-wise Euclidean distance to another frame.
    pub fn max_column_distance(&self, other: &Frame) -> f64 {
        if self.data.shape() != other.data.shape() {
            return f64::INFINITY;
        }
        (0..self.len())
            .map(|j| (self.data.column(j) - other.data.column(j)).norm())
            .fold(0.0, f64::max)
    }

    /// Reorders columns: column `n` of the result is `f_{sigma[n]}`.
    pub fn permute(&self, sigma: &[usize]) -> Result<Frame> {
        check_permutation(sigma, self.len())?;
        self.select(sigma)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&FrameJson::from(self)).expect("frame serializes")
    }

    pub fn from_json(s: &str) -> Result<Frame> {
        let raw: FrameJson = serde_json::from_str(s)
            .map_err(|e| Error::InvalidArgument(format!("frame JSON: {e}")))?;
        raw.try_into()
    }
}

pub(crate) fn check_permutation(sigma: &[usize], n: usize) -> Result<()> {
    if sigma.len() != n {
        return Err(Error::NotAPermutation(n));
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(Error::NotAPermutation(n));
        }
        seen[s] = true;
    }
    Ok(())
}

/// Inverse of a permutation given as an index vector.
pub fn invert_permutation(sigma: &[usize]) -> Result<Vec<usize>> {
    check_permutation(sigma, sigma.len())?;
    let mut inv = vec![0; sigma.len()];
    for (n, &s) in sigma.iter().enumerate() {
        inv[s] = n;
    }
    Ok(inv)
}

/// On-disk frame layout: `{"field", "d", "N", "columns": [[[re, im], ...], ...]}`.
#[derive(Debug, Serialize, Deserialize)]
struct FrameJson {
    field: Field,
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    columns: Vec<Vec<[f64; 2]>>,
}

impl From<&Frame> for FrameJson {
    fn from(f: &Frame) -> Self {
        let columns = (0..f.len())
            .map(|j| {
                f.data
                    .column(j)
                    .iter()
                    .map(|z| [z.re, if f.field.is_real() { 0.0 } else { z.im }])
                    .collect()
            })
            .collect();
        Self {
            field: f.field,
            d: f.dim(),
            n: f.len(),
            columns,
        }
    }
}

impl TryFrom<FrameJson> for Frame {
    type Error = Error;

    fn try_from(raw: FrameJson) -> Result<Frame> {
        if raw.columns.len() != raw.n {
            return Err(Error::DimensionMismatch(format!(
                "N = {} but {} columns given",
                raw.n,
                raw.columns.len()
            )));
        }
        let mut data = CMat::zeros(raw.d, raw.n);
        for (j, col) in raw.columns.iter().enumerate() {
            if col.len() != raw.d {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} entries, expected d = {}",
                    col.len(),
                    raw.d
                )));
            }
            for (i, [re, im]) in col.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite entry in column {j}"
                    )));
                }
                data[(i, j)] = C64::new(*re, *im);
            }
        }
        Frame::new(raw.field, data)
    }
}
