//! Majorization order and the doubly stochastic matrices realizing it.

use super::eig::Spectrum;
use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-10;

/// True iff `x` majorizes `y`: equal totals and dominating sorted prefix sums.
pub fn majorizes(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "majorization of length {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    ys.sort_by(|a, b| b.total_cmp(a));
    let scale = xs.iter().chain(&ys).map(|v| v.abs()).sum::<f64>().max(1.0);
    let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
    if (sx - sy).abs() > SUM_TOL * scale {
        return Ok(false);
    }
    let (mut px, mut py) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if px - py < -SUM_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `D_ij = |U_ij|^2` from the eigenvector unitary; `D λ` is the diagonal of `U Λ U^†`.
pub fn schur_horn_ds(s: &Spectrum) -> ComplexMatrix {
    s.eigenvectors.map(|z| C64::new(z.norm_sqr(), 0.0))
}

/// Non-negative entries and unit row/column sums, all to `tol`.
pub fn is_doubly_stochastic(d: &ComplexMatrix, tol: f64) -> bool {
    if !d.is_square() || !d.is_real(tol) {
        return false;
    }
    let n = d.rows();
    if d.as_slice().iter().any(|z| z.re < -tol) {
        return false;
    }
    (0..n).all(|i| {
        let row: f64 = (0..n).map(|j| d[(i, j)].re).sum();
        let col: f64 = (0..n).map(|j| d[(j, i)].re).sum();
        (row - 1.0).abs() <= tol && (col - 1.0).abs() <= tol
    })
}

/// Real matrix-vector product `D v` using the real parts of `D`.
pub fn apply_real(d: &ComplexMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if d.cols() != v.len() {
        return Err(Error::DimensionMismatch("matrix-vector length".into()));
    }
    Ok((0..d.rows())
        .map(|i| d.row(i).iter().zip(v).map(|(z, x)| z.re * x).sum())
        .collect())
}

/// Alternating row/column normalization of a strictly positive matrix, stopping
/// early once row sums are within `1e-14` after a column pass.
pub fn sinkhorn(seed: &ComplexMatrix, iterations: usize) -> Result<ComplexMatrix> {
    let n = seed.require_square()?;
    if seed.as_slice().iter().any(|z| !(z.re > 0.0)) {
        return Err(Error::Precondition("Sinkhorn seed must be strictly positive".into()));
    }
    let mut m: Vec<f64> = seed.as_slice().iter().map(|z| z.re).collect();
    for _ in 0..iterations {
        for i in 0..n {
            let s: f64 = m[i * n..(i + 1) * n].iter().sum();
            m[i * n..(i + 1) * n].iter_mut().for_each(|x| *x /= s);
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| m[i * n + j]).sum();
            (0..n).for_each(|i| m[i * n + j] /= s);
        }
        let row_err = (0..n)
            .map(|i| (m[i * n..(i + 1) * n].iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max);
        if row_err <= 1e-14 {
            break;
        }
    }
    ComplexMatrix::new(n, n, m.into_iter().map(|x| C64::new(x, 0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig::hermitian_eig;

    #[test]
    fn point_mass_majorizes_uniform() {
        assert!(majorizes(&[1.0, 0.0], &[0.5, 0.5]).unwrap());
        assert!(!majorizes(&[0.5, 0.5], &[1.0, 0.0]).unwrap());
    }

    #[test]
    fn unequal_totals_do_not_majorize() {
        assert!(!majorizes(&[2.0, 0.0], &[0.5, 0.5]).unwrap());
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(majorizes(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn identity_unitary_gives_identity() {
        let s = hermitian_eig(&ComplexMatrix::from_real_diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(schur_horn_ds(&s), ComplexMatrix::identity(3));
    }

    #[test]
    fn hadamard_basis_gives_uniform() {
        let h = 0.5f64.sqrt();
        let u = ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap();
        let s = Spectrum {
            eigenvalues: vec![1.0, -1.0],
            eigenvectors: u,
        };
        let d = schur_horn_ds(&s);
        for z in d.as_slice() {
            assert!((z.re - 0.5).abs() < 1e-15);
        }
        assert!(is_doubly_stochastic(&d, 1e-12));
    }

    #[test]
    fn doubly_stochastic_examples() {
        assert!(is_doubly_stochastic(&ComplexMatrix::identity(3), 1e-12));
        let u = ComplexMatrix::from_fn(4, 4, |_, _| C64::new(0.25, 0.0));
        assert!(is_doubly_stochastic(&u, 1e-12));
        assert!(!is_doubly_stochastic(
            &ComplexMatrix::from_real_diag(&[2.0, 0.0]),
            1e-12
        ));
    }

    #[test]
    fn sinkhorn_converges_on_positive_seed() {
        let seed = ComplexMatrix::from_fn(5, 5, |i, j| C64::new(1.0 + ((i * 7 + j * 3) % 5) as f64, 0.0));
        let d = sinkhorn(&seed, 50).unwrap();
        assert!(is_doubly_stochastic(&d, 1e-10));
    }
}
