//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Relative Hermiticity tolerance accepted by [`hermitian_eig`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Negative eigenvalues down to `-CLIP_REL * max|λ|` are treated as zero.
pub const CLIP_REL: f64 = 1e-12;

const MAX_SWEEPS: usize = 60;

/// Eigenvalues at or below this magnitude count as exact zeros in powers and logs.
pub const ZERO_FLOOR: f64 = 1e-300;

/// Eigenvalues in descending order with the unitary of eigenvectors (as columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `U f(Λ) U^†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let u = &self.eigenvectors;
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let mut acc = ZERO;
                for (k, &v) in vals.iter().enumerate() {
                    if v != 0.0 {
                        acc += u[(i, k)] * u[(j, k)].conj() * v;
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
            out[(i, i)].im = 0.0;
        }
        out
    }

    /// `U Λ U^†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }

    /// Clamp threshold `τ_clip = CLIP_REL · max|λ|`.
    pub fn clip_threshold(&self) -> f64 {
        CLIP_REL * self.max_abs_eigenvalue()
    }

    /// Eigenvalues clamped at zero, failing if any lies below `-τ_clip`.
    pub fn psd_eigenvalues(&self) -> Result<Vec<f64>> {
        let thr = self.clip_threshold();
        self.eigenvalues
            .iter()
            .map(|&l| {
                if l < -thr {
                    Err(Error::NotPsd {
                        eigenvalue: l,
                        threshold: thr,
                    })
                } else {
                    Ok(l.max(0.0))
                }
            })
            .collect()
    }

    /// `‖U^†U − I‖_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let u = &self.eigenvectors;
        let g = &u.adjoint() * u;
        g.distance(&ComplexMatrix::identity(self.dim()))
            .expect("square Gram matrix")
    }

    /// `‖X U − U Λ‖_F` against the source matrix.
    pub fn residual(&self, x: &ComplexMatrix) -> Result<f64> {
        let u = &self.eigenvectors;
        let xu = x.matmul(u)?;
        let ul = ComplexMatrix::from_fn(u.rows(), u.cols(), |i, j| u[(i, j)] * self.eigenvalues[j]);
        xu.distance(&ul)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input may deviate from Hermitian by at most `1e-10 · ‖X‖_F`; the
/// Hermitian part is decomposed.
pub fn hermitian_eig(x: &ComplexMatrix) -> Result<Spectrum> {
    let dim = x.require_square()?;
    let fro = x.frobenius_norm();
    let defect = x.hermitian_defect().unwrap_or(f64::INFINITY);
    let allowed = HERMITIAN_TOL * fro;
    if defect > allowed {
        return Err(Error::NotHermitian {
            asymmetry: defect,
            allowed,
        });
    }
    Ok(jacobi(x.hermitian_part(), dim))
}

fn jacobi(mut a: ComplexMatrix, n: usize) -> Spectrum {
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    if n > 1 && scale > 0.0 {
        let stop = (f64::EPSILON * scale).powi(2);
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|ij| a[ij].norm_sqr())
                .sum();
            if off <= stop {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, n, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Annihilate `a[p][q]` with a unitary acting on coordinates `p, q`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, n: usize, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that cannot change a diagonal entry in floating point.
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on columns (p, q).
    let gpp = C64::new(c, 0.0);
    let gpq = C64::new(s, 0.0);
    let gqp = -phase.conj() * s;
    let gqq = phase.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}

/// `U λ^q U^†` for a PSD spectrum, with `0^q = 0` for every `q ≥ 0`.
pub fn psd_power(s: &Spectrum, q: f64) -> Result<ComplexMatrix> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(crate::error::invalid("q", q, "power must be finite and >= 0"));
    }
    let vals = s.psd_eigenvalues()?;
    let powered = Spectrum {
        eigenvalues: vals.iter().map(|&l| pow0(l, q)).collect(),
        eigenvectors: s.eigenvectors.clone(),
    };
    Ok(powered.reconstruct())
}

/// `λ^q` with the convention `0^q = 0` (including `q = 0`).
pub(crate) fn pow0(l: f64, q: f64) -> f64 {
    if l <= ZERO_FLOOR {
        0.0
    } else if q == 1.0 {
        l
    } else {
        l.powf(q)
    }
}

/// Identity check helper used by tests and certification.
pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    u.is_square()
        && (&u.adjoint() * u)
            .distance(&ComplexMatrix::identity(u.rows()))
            .map(|d| d <= tol)
            .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        });
        g.hermitian_part()
    }

    #[test]
    fn identity_spectrum() {
        let s = hermitian_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let s = hermitian_eig(&pauli(1)).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_hermitian_residual_contract() {
        for (seed, dim) in [(1u64, 8usize), (2, 16), (3, 5), (4, 64)] {
            let x = random_hermitian(dim, seed);
            let s = hermitian_eig(&x).unwrap();
            let fro = x.frobenius_norm();
            assert!(s.residual(&x).unwrap() <= 1e-10 * fro, "dim {dim}");
            assert!(s.orthogonality_defect() <= 1e-10 * dim as f64);
            assert!(s.reconstruct().distance(&x).unwrap() <= 1e-10 * fro);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(Error::NotSquare { .. })));
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        match hermitian_eig(&m) {
            Err(Error::NotHermitian { asymmetry, .. }) => {
                assert!((asymmetry - 8f64.sqrt()).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn psd_power_examples() {
        let s = hermitian_eig(&ComplexMatrix::identity(4)).unwrap();
        assert!(
            psd_power(&s, 3.0)
                .unwrap()
                .distance(&ComplexMatrix::identity(4))
                .unwrap()
                < 1e-15
        );

        let s = hermitian_eig(&ComplexMatrix::from_real_diag(&[4.0, 1.0])).unwrap();
        let r = psd_power(&s, 0.5).unwrap();
        assert!(r.distance(&ComplexMatrix::from_real_diag(&[2.0, 1.0])).unwrap() < 1e-15);

        let g = random_hermitian(6, 9);
        let x = &g.adjoint() * &g;
        let s = hermitian_eig(&x).unwrap();
        let sq = psd_power(&s, 2.0).unwrap();
        assert!(sq.distance(&(&x * &x)).unwrap() <= 1e-10 * (&x * &x).frobenius_norm());
    }

    #[test]
    fn psd_power_rejects_negative_eigenvalue() {
        let s = hermitian_eig(&ComplexMatrix::from_real_diag(&[1.0, -0.5])).unwrap();
        match psd_power(&s, 1.0) {
            Err(Error::NotPsd { eigenvalue, .. }) => assert_eq!(eigenvalue, -0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_to_the_zero_is_zero() {
        let s = hermitian_eig(&ComplexMatrix::from_real_diag(&[2.0, 0.0])).unwrap();
        let r = psd_power(&s, 0.0).unwrap();
        assert_eq!(r, ComplexMatrix::from_real_diag(&[1.0, 0.0]));
    }

    #[test]
    fn power_composition() {
        let g = random_hermitian(8, 21);
        let x = &g.adjoint() * &g;
        let s = hermitian_eig(&x).unwrap();
        for (a, b) in [(0.5, 2.0), (2.0, 0.5), (0.5, 0.5), (2.0, 2.0)] {
            let once = psd_power(&s, a).unwrap();
            let twice = psd_power(&hermitian_eig(&once).unwrap(), b).unwrap();
            let direct = psd_power(&s, a * b).unwrap();
            assert!(twice.distance(&direct).unwrap() <= 1e-9 * direct.frobenius_norm().max(1.0));
        }
    }
}
