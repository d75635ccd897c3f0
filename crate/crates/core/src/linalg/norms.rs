use super::eig::{hermitian_eig, pow0, Spectrum, HERMITIAN_TOL};
use super::matrix::ComplexMatrix;
use crate::error::{invalid, Result};

/// Singular values of `X`, descending.
///
/// Hermitian inputs use `|λ(X)|`; everything else goes through `λ(X^†X)`.
pub fn singular_values(x: &ComplexMatrix) -> Result<Vec<f64>> {
    let fro = x.frobenius_norm();
    let mut sv = match x.hermitian_defect() {
        Some(d) if d <= HERMITIAN_TOL * fro * 1e-2 => hermitian_eig(x)?
            .eigenvalues
            .into_iter()
            .map(f64::abs)
            .collect::<Vec<_>>(),
        _ => {
            let gram = &x.adjoint() * x;
            hermitian_eig(&gram)?
                .eigenvalues
                .into_iter()
                .map(|l| l.max(0.0).sqrt())
                .collect()
        }
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// `|X| = sqrt(X^† X)`.
pub fn abs_matrix(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram = &x.adjoint() * x;
    let s = hermitian_eig(&gram)?;
    Ok(Spectrum {
        eigenvalues: s.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect(),
        eigenvectors: s.eigenvectors,
    }
    .reconstruct())
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(invalid("p", p, "Schatten exponent must be >= 1"))
    } else {
        Ok(())
    }
}

/// `(mean σ^p)^{1/p}` over the given singular values; `p = ∞` gives the max.
pub fn normalized_power_mean(sv: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return sv.iter().fold(0.0, |m, &s| m.max(s));
    }
    let mean = sv.iter().map(|&s| pow0(s, p)).sum::<f64>() / sv.len() as f64;
    mean.powf(1.0 / p)
}

/// `Σ σ^p` raised to `1/p`; `p = ∞` gives the max.
pub fn power_sum_norm(sv: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return sv.iter().fold(0.0, |m, &s| m.max(s));
    }
    sv.iter().map(|&s| pow0(s, p)).sum::<f64>().powf(1.0 / p)
}

/// Normalized Schatten norm `(τ|X|^p)^{1/p}` with `τ = Tr / dim`.
pub fn schatten_norm_normalized(x: &ComplexMatrix, p: f64) -> Result<f64> {
    check_exponent(p)?;
    x.require_square()?;
    Ok(normalized_power_mean(&singular_values(x)?, p))
}

/// Un-normalized Schatten norm `(Tr|X|^p)^{1/p}`.
pub fn schatten_norm(x: &ComplexMatrix, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(power_sum_norm(&singular_values(x)?, p))
}

/// Hölder conjugate `p*` with `1/p + 1/p* = 1`.
pub fn holder_conjugate(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}

/// Un-normalized vector `p`-norm of non-negative entries, `Σ |x|^p` (not rooted).
pub fn vector_power_sum(v: &[f64], p: f64) -> f64 {
    v.iter().map(|&x| pow0(x.abs(), p)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{pauli, C64};

    #[test]
    fn identity_has_unit_norm() {
        for n in 0..4 {
            let i = ComplexMatrix::identity(1 << n);
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                assert!((schatten_norm_normalized(&i, p).unwrap() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pauli_z_has_unit_norm() {
        for p in [1.0, 2.0, 4.5] {
            assert!((schatten_norm_normalized(&pauli(3), p).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diag_two_zero_closed_form() {
        let x = ComplexMatrix::from_real_diag(&[2.0, 0.0]);
        for q in [1.0, 1.5, 2.0, 3.0, 7.0] {
            // (2^q / 2)^{1/q}
            let expected = (2f64.powf(q) / 2.0).powf(1.0 / q);
            let got = schatten_norm_normalized(&x, q).unwrap();
            assert!((got - expected).abs() < 1e-14, "q={q}");
            assert!((expected - 2f64.powf((q - 1.0) / q)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_small_exponent() {
        assert!(schatten_norm_normalized(&ComplexMatrix::identity(2), 0.5).is_err());
        assert!(holder_conjugate(0.9).is_err());
    }

    #[test]
    fn holder_conjugates() {
        assert_eq!(holder_conjugate(2.0).unwrap(), 2.0);
        assert_eq!(holder_conjugate(1.0).unwrap(), f64::INFINITY);
        assert_eq!(holder_conjugate(f64::INFINITY).unwrap(), 1.0);
        assert!((holder_conjugate(4.0 / 3.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_singular_values() {
        // [[0,1],[2,0]] has singular values 2 and 1.
        let x = ComplexMatrix::new(
            2,
            2,
            vec![
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let sv = singular_values(&x).unwrap();
        assert!((sv[0] - 2.0).abs() < 1e-14 && (sv[1] - 1.0).abs() < 1e-14);
    }
}
