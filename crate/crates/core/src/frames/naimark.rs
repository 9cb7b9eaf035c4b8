use super::Frame;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eig, CMat, Matrix, C64};

/// A FUNTF `G` of `N` vectors in dimension `N - d` with
/// `(d/N) F*F + ((N-d)/N) G*G = I`.
///
/// `G` is taken from the unit eigenspace of `I - (d/N) F*F`; it is unique
/// only up to a left unitary.
pub fn naimark_complement(frame: &Frame) -> Result<Frame> {
    let (d, n) = (frame.dim(), frame.len());
    let report = frame.check_funtf(1e-8);
    if !report.ok {
        return Err(Error::NotFuntf {
            unit_norm: report.unit_norm_resid,
            tightness: report.tightness_resid,
        });
    }
    if n <= d {
        return Err(Error::NoComplement);
    }
    let scale = d as f64 / n as f64;
    let proj = CMat::identity(n, n) - frame.gram().map(|z| z * scale);
    let eig = hermitian_eig(&Matrix::from_parts(
        frame.field(),
        (&proj + proj.adjoint()).map(|z| z * 0.5),
    ))?;
    let k = n - d;
    let u = eig.eigenvectors.data();
    let rescale = C64::new((n as f64 / k as f64).sqrt(), 0.0);
    let mut g = CMat::zeros(k, n);
    for r in 0..k {
        // rows of G are the conjugated top eigenvectors
        for c in 0..n {
            g[(r, c)] = u[(c, r)].conj() * rescale;
        }
    }
    Ok(Frame::from_parts(frame.field(), g))
}
