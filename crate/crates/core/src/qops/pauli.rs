//! Expansion in the Pauli-string basis.
//!
//! A string `σ_{x_1} ⊗ … ⊗ σ_{x_n}` is indexed by `Σ_k x_k 4^{n−k}`, so the
//! digit of qubit 1 is the most significant.

use super::QubitOperator;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Coefficients `c_x = τ[σ_x X]`, so that `X = Σ_x c_x σ_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoefficients {
    n: usize,
    coeffs: Vec<C64>,
}

/// Pauli strings are monomial: row `i` has its single entry at column
/// `i ⊕ flip`, with value `phase(i)`.
struct PauliString {
    flip: usize,
    digits: Vec<u8>,
}

impl PauliString {
    fn new(n: usize, index: usize) -> Self {
        let digits: Vec<u8> = (0..n).map(|k| ((index >> (2 * (n - 1 - k))) & 3) as u8).collect();
        let flip = digits.iter().enumerate().fold(
            0usize,
            |acc, (k, &d)| {
                if d == 1 || d == 2 {
                    acc | 1 << (n - 1 - k)
                } else {
                    acc
                }
            },
        );
        Self { flip, digits }
    }

    fn entry(&self, row: usize) -> C64 {
        let n = self.digits.len();
        let mut v = C64::new(1.0, 0.0);
        for (k, &d) in self.digits.iter().enumerate() {
            let bit = (row >> (n - 1 - k)) & 1;
            v *= match (d, bit) {
                (0, _) | (1, _) => C64::new(1.0, 0.0),
                (2, 0) => C64::new(0.0, -1.0),
                (2, _) => C64::new(0.0, 1.0),
                (_, 0) => C64::new(1.0, 0.0),
                _ => C64::new(-1.0, 0.0),
            };
        }
        v
    }
}

impl PauliCoefficients {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of the string with per-qubit labels `digits` (each in `0..4`).
    pub fn get(&self, digits: &[u8]) -> Result<C64> {
        if digits.len() != self.n || digits.iter().any(|&d| d > 3) {
            return Err(Error::InvalidSubset(format!(
                "{digits:?} is not a Pauli label on {} qubits",
                self.n
            )));
        }
        let idx = digits.iter().fold(0usize, |acc, &d| acc * 4 + d as usize);
        Ok(self.coeffs[idx])
    }

    /// Number of non-identity factors in string `index`.
    pub fn weight(&self, index: usize) -> usize {
        (0..self.n).filter(|k| (index >> (2 * k)) & 3 != 0).count()
    }

    /// Multiply coefficient `x` by `f(weight(x))`.
    pub fn scale_by_weight(&self, f: impl Fn(usize) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * f(self.weight(i)))
            .collect();
        Self { n: self.n, coeffs }
    }

    pub fn reconstruct(&self) -> QubitOperator {
        let dim = 1usize << self.n;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (index, &c) in self.coeffs.iter().enumerate() {
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            let p = PauliString::new(self.n, index);
            for row in 0..dim {
                m[(row, row ^ p.flip)] += c * p.entry(row);
            }
        }
        QubitOperator::new(self.n, m).expect("dimension matches qubit count")
    }
}

pub fn pauli_decompose(x: &QubitOperator) -> PauliCoefficients {
    let n = x.n();
    let dim = x.dim();
    let m = x.matrix();
    let coeffs = (0..1usize << (2 * n))
        .map(|index| {
            let p = PauliString::new(n, index);
            // τ[P X] = 2^{-n} Σ_i P_{i, i⊕f} X_{i⊕f, i}
            (0..dim).map(|row| p.entry(row) * m[(row ^ p.flip, row)]).sum::<C64>() / dim as f64
        })
        .collect();
    PauliCoefficients { n, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::qops::random_operator;

    #[test]
    fn strings_match_kronecker_products() {
        for a in 0..4u8 {
            for b in 0..4u8 {
                let expected = pauli(a).kron(&pauli(b)).unwrap();
                let p = PauliString::new(2, (a as usize) * 4 + b as usize);
                let got = ComplexMatrix::from_fn(4, 4, |i, j| {
                    if j == i ^ p.flip {
                        p.entry(i)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                assert_eq!(got, expected, "σ{a}⊗σ{b}");
            }
        }
    }

    #[test]
    fn single_pauli_has_one_coefficient() {
        let x = QubitOperator::new(2, pauli(2).kron(&pauli(3)).unwrap()).unwrap();
        let c = pauli_decompose(&x);
        for (i, z) in c.as_slice().iter().enumerate() {
            let want = if i == 2 * 4 + 3 { 1.0 } else { 0.0 };
            assert!((z - C64::new(want, 0.0)).norm() < 1e-15);
        }
        assert_eq!(c.get(&[2, 3]).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(c.weight(2 * 4 + 3), 2);
        assert_eq!(c.weight(3), 1);
    }

    #[test]
    fn round_trip() {
        for n in 0..=3 {
            let x = random_operator(n, 90 + n as u64).unwrap();
            let back = pauli_decompose(&x).reconstruct();
            assert!(back.distance(&x).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn parseval() {
        // τ[X^† X] = Σ |c_x|^2
        let x = random_operator(3, 4).unwrap();
        let lhs = x.matrix().frobenius_norm().powi(2) / x.dim() as f64;
        let rhs: f64 = pauli_decompose(&x).as_slice().iter().map(|c| c.norm_sqr()).sum();
        assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn bad_labels() {
        let c = pauli_decompose(&QubitOperator::identity(1));
        assert!(c.get(&[4]).is_err());
        assert!(c.get(&[0, 0]).is_err());
    }
}
