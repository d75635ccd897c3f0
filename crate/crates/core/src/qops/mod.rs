//! Multi-qubit operators.
//!
//! Indexing convention: on an `n`-qubit operator, qubit `k ∈ {1..n}` is bit
//! `n − k` of the row/column index, so qubit 1 is the most significant bit.
//! Partial traces renumber the surviving qubits `1..n−|S|` in their original
//! relative order.

mod pauli;
mod random;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{abs_matrix, hermitian_eig, ComplexMatrix, Spectrum, C64};

pub use pauli::{pauli_decompose, PauliCoefficients};
pub use random::{
    derive_seed, random_hermitian, random_operator, random_psd, sample_general, sample_hermitian, sample_psd,
    OperatorSampler, DEFAULT_QUBIT_CAP,
};

/// Largest qubit count any subset mask can address.
pub const MAX_QUBITS: usize = 24;

/// A `2^n × 2^n` operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitOperator {
    n: usize,
    mat: ComplexMatrix,
}

impl QubitOperator {
    pub fn new(n: usize, mat: ComplexMatrix) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::QubitCap { n, cap: MAX_QUBITS });
        }
        let dim = 1usize << n;
        if mat.dims() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "{n}-qubit operator needs {dim}x{dim}, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self { n, mat })
    }

    /// Infer the qubit count from a square power-of-two matrix.
    pub fn from_matrix(mat: ComplexMatrix) -> Result<Self> {
        let dim = mat.require_square()?;
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "dimension {dim} is not a power of two"
            )));
        }
        Self::new(dim.trailing_zeros() as usize, mat)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            mat: ComplexMatrix::identity(1 << n),
        }
    }

    pub fn scalar(value: f64) -> Self {
        Self {
            n: 0,
            mat: ComplexMatrix::scalar(C64::new(value, 0.0)),
        }
    }

    /// Diagonal operator with the given diagonal (length `2^n`).
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_matrix(ComplexMatrix::from_real_diag(values))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn normalized_trace(&self) -> C64 {
        self.mat.normalized_trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n: self.n,
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            n: self.n,
            mat: self.mat.scale(s),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            n: self.n,
            mat: self.mat.scale_real(s),
        }
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        hermitian_eig(&self.mat)
    }

    /// `X ⊗ Y`, with `self`'s qubits first.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Self::new(self.n + other.n, self.mat.kron(&other.mat)?)
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.mat.distance(&other.mat)
    }

    /// Permute qubits: qubit `k` of the result is qubit `order[k-1]` of `self`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<Self> {
        let n = self.n;
        let mut seen = vec![false; n + 1];
        if order.len() != n
            || order
                .iter()
                .any(|&k| k == 0 || k > n || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::InvalidSubset(format!(
                "{order:?} is not a permutation of 1..{n}"
            )));
        }
        let map = |idx: usize| {
            let mut out = 0usize;
            for (new_pos, &old) in order.iter().enumerate() {
                let bit = (idx >> (n - old)) & 1;
                out |= bit << (n - 1 - new_pos);
            }
            out
        };
        let perm: Vec<usize> = (0..self.dim()).map(map).collect();
        let mut mat = ComplexMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                mat[(perm[i], perm[j])] = self.mat[(i, j)];
            }
        }
        Self::new(n, mat)
    }
}

/// A subset `S ⊆ {1..n}` of qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    n: usize,
    bits: u32,
}

impl SubsetMask {
    pub fn empty(n: usize) -> Self {
        Self { n, bits: 0 }
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            bits: ((1u64 << n) - 1) as u32,
        }
    }

    /// Subset from 1-based qubit indices.
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::QubitCap { n, cap: MAX_QUBITS });
        }
        let mut bits = 0u32;
        for &k in members {
            if k == 0 || k > n {
                return Err(Error::InvalidSubset(format!("qubit {k} outside 1..={n}")));
            }
            bits |= 1 << (k - 1);
        }
        Ok(Self { n, bits })
    }

    /// Subset from its bit encoding (bit `k−1` set iff qubit `k` is a member).
    pub fn from_bits(n: usize, bits: u32) -> Result<Self> {
        if n > MAX_QUBITS || (bits as u64) >> n != 0 {
            return Err(Error::InvalidSubset(format!("bits {bits:#b} do not fit {n} qubits")));
        }
        Ok(Self { n, bits })
    }

    /// Every subset of `{1..n}`, ordered by bit encoding.
    pub fn all(n: usize) -> impl Iterator<Item = SubsetMask> {
        (0u32..(1u32 << n)).map(move |bits| SubsetMask { n, bits })
    }

    /// Qubits `{first, .., last}` (1-based, inclusive).
    pub fn range(n: usize, first: usize, last: usize) -> Result<Self> {
        Self::new(n, &(first..=last).collect::<Vec<_>>())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, k: usize) -> bool {
        k >= 1 && k <= self.n && self.bits & (1 << (k - 1)) != 0
    }

    /// Sorted 1-based member list.
    pub fn members(&self) -> Vec<usize> {
        (1..=self.n).filter(|&k| self.contains(k)).collect()
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            bits: !self.bits & Self::full(self.n).bits,
        }
    }

    pub fn with(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidSubset(format!("qubit {k} outside 1..={}", self.n)));
        }
        Ok(Self {
            n: self.n,
            bits: self.bits | (1 << (k - 1)),
        })
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            bits: self.bits | other.bits,
        }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.bits & other.bits == 0
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    /// Position of qubit `k` after tracing out `traced` (which must not contain `k`).
    pub fn position_after(traced: &SubsetMask, k: usize) -> Result<usize> {
        if traced.contains(k) || k == 0 || k > traced.n {
            return Err(Error::InvalidSubset(format!("qubit {k} does not survive the trace")));
        }
        Ok(k - traced.members().iter().filter(|&&s| s < k).count())
    }

    /// Express `self` (disjoint from `traced`) in the numbering left after
    /// tracing out `traced`.
    pub fn relabel_after(&self, traced: &SubsetMask) -> Result<Self> {
        if !self.is_disjoint(traced) || self.n != traced.n {
            return Err(Error::InvalidSubset("subsets must be disjoint".into()));
        }
        let members = self
            .members()
            .into_iter()
            .map(|k| Self::position_after(traced, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.n - traced.len(), &members)
    }

    /// Restriction of a subset of `{1..n}` to a subset of `{1..m}` (fails when it does not fit).
    pub fn within(&self, m: usize) -> Result<Self> {
        Self::from_bits(m, self.bits)
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{:?}/{}", self.members(), self.n)
    }
}

impl Serialize for SubsetMask {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.members().serialize(s)
    }
}

/// Bit-scatter tables for one partial trace.
struct TraceLayout {
    kept: Vec<usize>,
    traced: Vec<usize>,
}

impl TraceLayout {
    fn new(n: usize, s: &SubsetMask) -> Self {
        let scatter = |qubits: &[usize]| -> Vec<usize> {
            let m = qubits.len();
            (0..1usize << m)
                .map(|local| {
                    qubits.iter().enumerate().fold(0usize, |acc, (j, &k)| {
                        let bit = (local >> (m - 1 - j)) & 1;
                        acc | (bit << (n - k))
                    })
                })
                .collect()
        };
        let members = s.members();
        let rest = s.complement().members();
        Self {
            kept: scatter(&rest),
            traced: scatter(&members),
        }
    }
}

/// `τ_S[X] = 2^{-|S|} Tr_S[X]`, an operator on the `n − |S|` surviving qubits.
pub fn partial_trace_normalized(x: &QubitOperator, s: &SubsetMask) -> Result<QubitOperator> {
    if s.n() != x.n() {
        return Err(Error::InvalidSubset(format!(
            "subset over {} qubits applied to {}-qubit operator",
            s.n(),
            x.n()
        )));
    }
    let layout = TraceLayout::new(x.n(), s);
    let w = 1.0 / layout.traced.len() as f64;
    let d = layout.kept.len();
    let m = x.matrix();
    let out = ComplexMatrix::from_fn(d, d, |r, c| {
        let (rr, cc) = (layout.kept[r], layout.kept[c]);
        layout.traced.iter().map(|&t| m[(rr | t, cc | t)]).sum::<C64>() * w
    });
    QubitOperator::new(x.n() - s.len(), out)
}

/// `Y ⊗ I_S`: re-insert identity factors on the qubits in `s` (a subset of
/// `{1..n}` with `n = y.n() + |s|`), normalized so that `τ_S[Y ⊗ I_S] = Y`.
pub fn embed_with_identity(y: &QubitOperator, s: &SubsetMask) -> Result<QubitOperator> {
    let n = s.n();
    if y.n() + s.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "block on {} qubits cannot fill {} qubits with |S| = {}",
            y.n(),
            n,
            s.len()
        )));
    }
    let layout = TraceLayout::new(n, s);
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let ym = y.matrix();
    for (r, &rr) in layout.kept.iter().enumerate() {
        for (c, &cc) in layout.kept.iter().enumerate() {
            let v = ym[(r, c)];
            for &t in &layout.traced {
                out[(rr | t, cc | t)] = v;
            }
        }
    }
    QubitOperator::new(n, out)
}

/// `|X| = sqrt(X^† X)`.
pub fn abs_op(x: &QubitOperator) -> Result<QubitOperator> {
    QubitOperator::new(x.n(), abs_matrix(x.matrix())?)
}

/// PSD pair sharing the singular values of `X = Σ l_i |u_i⟩⟨v_i|`:
/// `X_L = Σ l_i |u_i⟩⟨u_i| = sqrt(X X^†)` and `X_R = Σ l_i |v_i⟩⟨v_i| = sqrt(X^† X)`.
pub fn watrous_split(x: &QubitOperator) -> Result<(QubitOperator, QubitOperator)> {
    let left = abs_matrix(&x.matrix().adjoint())?;
    let right = abs_matrix(x.matrix())?;
    Ok((QubitOperator::new(x.n(), left)?, QubitOperator::new(x.n(), right)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, schatten_norm_normalized};

    fn epr_projector() -> QubitOperator {
        let h = 0.5;
        let mut m = ComplexMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(i, j)] = C64::new(h, 0.0);
        }
        QubitOperator::new(2, m).unwrap()
    }

    #[test]
    fn trace_of_identity_is_identity() {
        for n in 0..4 {
            for s in SubsetMask::all(n) {
                let out = partial_trace_normalized(&QubitOperator::identity(n), &s).unwrap();
                assert_eq!(out, QubitOperator::identity(n - s.len()));
            }
        }
    }

    #[test]
    fn traceless_factor_vanishes() {
        let x = QubitOperator::new(1, pauli(3))
            .unwrap()
            .tensor(&QubitOperator::identity(1))
            .unwrap();
        let out = partial_trace_normalized(&x, &SubsetMask::new(2, &[1]).unwrap()).unwrap();
        assert!(out.matrix().frobenius_norm() < 1e-15);
        // Tracing the identity factor leaves σ_3.
        let out = partial_trace_normalized(&x, &SubsetMask::new(2, &[2]).unwrap()).unwrap();
        assert_eq!(out.matrix(), &pauli(3));
    }

    #[test]
    fn epr_reduced_state() {
        // Tr_2 |Φ⟩⟨Φ| = I/2, and the normalized trace halves it again.
        let out = partial_trace_normalized(&epr_projector(), &SubsetMask::new(2, &[2]).unwrap()).unwrap();
        let expected = ComplexMatrix::identity(2).scale_real(0.25);
        assert!(out.matrix().distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn qubit_one_is_most_significant() {
        // |1⟩⟨1| ⊗ |0⟩⟨0| sits at index 2 = 0b10.
        let x = QubitOperator::diagonal(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        let keep_first = partial_trace_normalized(&x, &SubsetMask::new(2, &[2]).unwrap()).unwrap();
        assert_eq!(keep_first.matrix().real_diagonal(), vec![0.0, 0.5]);
        let keep_second = partial_trace_normalized(&x, &SubsetMask::new(2, &[1]).unwrap()).unwrap();
        assert_eq!(keep_second.matrix().real_diagonal(), vec![0.5, 0.0]);
    }

    #[test]
    fn trailing_block_diagonal_formula() {
        // For S = {n−|S|+1..n}: diag(τ_S X)_i = 2^{-|S|} Σ_j x_{2^{|S|}(i−1)+j}.
        for n in 1..=3usize {
            let x = random_hermitian(n, 40 + n as u64).unwrap();
            let d = x.matrix().real_diagonal();
            for size in 0..=n {
                let s = SubsetMask::range(n, n - size + 1, n).unwrap();
                let out = partial_trace_normalized(&x, &s).unwrap();
                let block = 1usize << size;
                for (i, got) in out.matrix().real_diagonal().iter().enumerate() {
                    let want: f64 = d[block * i..block * (i + 1)].iter().sum::<f64>() / block as f64;
                    assert!((got - want).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn partial_traces_compose() {
        let n = 4;
        let x = random_operator(n, 5).unwrap();
        for s in SubsetMask::all(n) {
            for t in SubsetMask::all(n).filter(|t| t.is_disjoint(&s)) {
                let joint = partial_trace_normalized(&x, &s.union(&t)).unwrap();
                let inner = partial_trace_normalized(&x, &t).unwrap();
                let outer = partial_trace_normalized(&inner, &s.relabel_after(&t).unwrap()).unwrap();
                assert!(joint.distance(&outer).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn trace_is_preserved() {
        let x = random_operator(3, 8).unwrap();
        for s in SubsetMask::all(3) {
            let out = partial_trace_normalized(&x, &s).unwrap();
            assert!((out.normalized_trace() - x.normalized_trace()).norm() <= 1e-12);
        }
    }

    #[test]
    fn invalid_subsets_are_rejected() {
        assert!(SubsetMask::new(2, &[3]).is_err());
        assert!(SubsetMask::new(2, &[0]).is_err());
        let x = QubitOperator::identity(2);
        assert!(partial_trace_normalized(&x, &SubsetMask::new(3, &[1]).unwrap()).is_err());
    }

    #[test]
    fn embedding_inverts_partial_trace_on_products() {
        let y = random_operator(2, 3).unwrap();
        let s = SubsetMask::new(3, &[2]).unwrap();
        let e = embed_with_identity(&y, &s).unwrap();
        let back = partial_trace_normalized(&e, &s).unwrap();
        assert!(back.distance(&y).unwrap() < 1e-14);
        // Y ⊗ I on the middle qubit matches an explicit permuted Kronecker product.
        let kron = y.tensor(&QubitOperator::identity(1)).unwrap();
        let moved = kron.permute_qubits(&[1, 3, 2]).unwrap();
        assert!(moved.distance(&e).unwrap() < 1e-14);
    }

    #[test]
    fn abs_examples() {
        let z = QubitOperator::new(1, pauli(3)).unwrap();
        assert!(abs_op(&z).unwrap().distance(&QubitOperator::identity(1)).unwrap() < 1e-14);
        let d = QubitOperator::diagonal(&[-2.0, 1.0]).unwrap();
        let a = abs_op(&d).unwrap();
        assert!(a.distance(&QubitOperator::diagonal(&[2.0, 1.0]).unwrap()).unwrap() < 1e-14);
        let x = random_operator(3, 77).unwrap();
        let lhs = schatten_norm_normalized(abs_op(&x).unwrap().matrix(), 2.0).unwrap();
        let rhs = schatten_norm_normalized(x.matrix(), 2.0).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn watrous_split_of_psd_is_itself() {
        let x = random_psd(2, 12).unwrap();
        let (l, r) = watrous_split(&x).unwrap();
        assert!(l.distance(&x).unwrap() <= 1e-8);
        assert!(r.distance(&x).unwrap() <= 1e-8);
    }

    #[test]
    fn watrous_split_of_weighted_flip() {
        // σ_1 · diag(2, 1) = [[0, 1], [2, 0]].
        let x = QubitOperator::new(1, &pauli(1) * &ComplexMatrix::from_real_diag(&[2.0, 1.0])).unwrap();
        let (l, r) = watrous_split(&x).unwrap();
        for half in [l, r] {
            let ev = half.spectrum().unwrap().eigenvalues;
            assert!((ev[0] - 2.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn watrous_split_preserves_norms() {
        let x = random_operator(3, 31).unwrap();
        let (l, r) = watrous_split(&x).unwrap();
        let nx = schatten_norm_normalized(x.matrix(), 3.0).unwrap();
        for half in [&l, &r] {
            assert!(half.spectrum().unwrap().psd_eigenvalues().is_ok());
            assert!((schatten_norm_normalized(half.matrix(), 3.0).unwrap() - nx).abs() <= 1e-10);
        }
    }

    #[test]
    fn permutation_validation() {
        let x = QubitOperator::identity(2);
        assert!(x.permute_qubits(&[1, 1]).is_err());
        assert!(x.permute_qubits(&[2, 1]).is_ok());
    }
}
