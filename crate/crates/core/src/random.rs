//! Seeded random unitaries, fiber coordinates and frames.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigensteps::{sample_interior, EigenstepsTable};
use crate::error::{Error, Result};
use crate::frames::{naimark_complement, Frame};
use crate::lifting::{step_index_data, synthesize, BaseData};
use crate::numerics::{CMat, Field, Matrix, C64};

/// Haar-distributed unitary (orthogonal for [`Field::Real`]), from the QR
/// factorization of a Gaussian matrix with the diagonal phases of `R`
/// divided out.
pub fn haar_unitary<R: Rng + ?Sized>(field: Field, d: usize, rng: &mut R) -> Matrix {
    let g = CMat::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = if field.is_real() {
            0.0
        } else {
            StandardNormal.sample(rng)
        };
        C64::new(re, im)
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    Matrix::from_parts(field, q)
}

/// Random unimodular scalar: a sign or a phase.
pub fn random_unimodular<R: Rng + ?Sized>(field: Field, rng: &mut R) -> C64 {
    if field.is_real() {
        C64::new(if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0)
    } else {
        C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
    }
}

/// Haar `U_1` and, for each `V_n`, independent Haar blocks over the
/// eigenvalue clusters of row `n` (a phase or sign for singleton clusters).
pub fn random_base<R: Rng + ?Sized>(
    table: &EigenstepsTable,
    field: Field,
    rng: &mut R,
) -> Result<BaseData> {
    let (big_n, d) = (table.frame_size(), table.dim());
    let u1 = haar_unitary(field, d, rng);
    let mut v = Vec::with_capacity(big_n.saturating_sub(1));
    for n in 1..big_n {
        let data = step_index_data(table, n)?;
        let mut m = CMat::zeros(d, d);
        for c in &data.blocks {
            if c.len == 1 {
                m[(c.start, c.start)] = random_unimodular(field, rng);
            } else {
                let block = haar_unitary(field, c.len, rng);
                m.view_mut((c.start, c.start), (c.len, c.len))
                    .copy_from(block.data());
            }
        }
        v.push(Matrix::from_parts(field, m));
    }
    Ok(BaseData { u1, v })
}

/// A random FUNTF of `N` vectors in `F^d`: Haar unitary columns when
/// `N = d`, the complement of a random unimodular row when `N = d + 1`, and
/// otherwise an interior eigensteps sample lifted through a random fiber
/// point. The distribution is construction-defined, not uniform.
pub fn random_funtf<R: Rng + ?Sized>(
    big_n: usize,
    d: usize,
    field: Field,
    rng: &mut R,
) -> Result<Frame> {
    if d == 0 || big_n < d {
        return Err(Error::InvalidArgument(format!(
            "no FUNTF with N = {big_n} < d = {d}"
        )));
    }
    if d == 1 {
        let row = CMat::from_fn(1, big_n, |_, _| random_unimodular(field, rng));
        return Frame::new(field, row);
    }
    if big_n == d {
        return Ok(Frame::from_matrix(haar_unitary(field, d, rng)));
    }
    if big_n == d + 1 {
        let row = CMat::from_fn(1, big_n, |_, _| random_unimodular(field, rng));
        let g = naimark_complement(&Frame::new(field, row)?)?;
        let u = haar_unitary(field, d, rng);
        return Ok(g.left_mul(u.data()));
    }
    let table = sample_interior(big_n, d, rng)?;
    let base = random_base(&table, field, rng)?;
    synthesize(&table, &base)
}

/// An orthodecomposable FUNTF: random FUNTF blocks placed in mutually
/// orthogonal subspaces of dimensions `dims` (each `N/d * dim` vectors),
/// rotated by a Haar unitary and shuffled.
pub fn random_od_funtf<R: Rng + ?Sized>(
    big_n: usize,
    d: usize,
    dims: &[usize],
    field: Field,
    rng: &mut R,
) -> Result<Frame> {
    if dims.len() < 2 || dims.iter().sum::<usize>() != d || dims.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "block dimensions {dims:?} do not split d = {d}"
        )));
    }
    let mut data = CMat::zeros(d, big_n);
    let (mut row, mut col) = (0, 0);
    for &k in dims {
        if (big_n * k) % d != 0 {
            return Err(Error::InvalidArgument(format!(
                "block of dimension {k} needs N k / d = {big_n}*{k}/{d} vectors"
            )));
        }
        let nk = big_n * k / d;
        let block = random_funtf(nk, k, field, rng)?;
        data.view_mut((row, col), (k, nk)).copy_from(block.data());
        row += k;
        col += nk;
    }
    let u = haar_unitary(field, d, rng);
    let frame = Frame::new(field, u.data() * data)?;
    let mut sigma: Vec<usize> = (0..big_n).collect();
    for i in (1..big_n).rev() {
        sigma.swap(i, rng.random_range(0..=i));
    }
    frame.permute(&sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensteps::{is_interior, of_frame};
    use crate::frames::is_od;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_is_unitary_and_real_when_asked() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(Field::Complex, 4, &mut rng);
        assert!(u.unitarity_defect() < 1e-12);
        let o = haar_unitary(Field::Real, 3, &mut rng);
        assert!(o.unitarity_defect() < 1e-12);
        assert!(o.data().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn random_funtfs_for_every_regime() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (n, d) in [(3, 3), (4, 3), (5, 2), (6, 3), (5, 1)] {
            for field in [Field::Real, Field::Complex] {
                let f = random_funtf(n, d, field, &mut rng).unwrap();
                assert!(f.check_funtf(1e-9).ok, "({n}, {d}) {field}");
                assert_eq!(f.field(), field);
            }
        }
        let f = random_funtf(7, 3, Field::Complex, &mut rng).unwrap();
        assert!(is_interior(&of_frame(&f), 1e-7).unwrap());
    }

    #[test]
    fn od_fixtures_are_od_funtfs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, d, dims) in [
            (4, 2, vec![1, 1]),
            (6, 3, vec![2, 1]),
            (8, 4, vec![2, 1, 1]),
        ] {
            let f = random_od_funtf(n, d, &dims, Field::Real, &mut rng).unwrap();
            assert!(f.check_funtf(1e-9).ok);
            assert!(is_od(&f));
        }
        assert!(random_od_funtf(6, 3, &[3], Field::Real, &mut rng).is_err());
    }
}
