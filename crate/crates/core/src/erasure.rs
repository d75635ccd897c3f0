//! Product erasure channels in subset form.
//!
//! The erasure output of an `n`-qubit operator is carried as the family
//! `S ↦ τ_S X` over all `S ⊆ [n]`. The `3^n`-dimensional operator is only
//! materialized by the small-`n` dense routines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::eig::pow0;
use crate::linalg::norms::normalized_power_mean;
use crate::linalg::{hermitian_eig, singular_values, ComplexMatrix, MatrixRecord, C64};
use crate::qops::{
    embed_with_identity, partial_trace_normalized, pauli_decompose, QubitOperator, SubsetMask, DEFAULT_QUBIT_CAP,
};

/// Largest `n` accepted by the literal `3^n` constructions.
pub const DENSE_CAP: usize = 3;

pub(crate) fn check_probability(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(name, v, "must lie in [0, 1]"));
    }
    Ok(())
}

pub(crate) fn check_exponent(name: &'static str, q: f64) -> Result<()> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(invalid(name, q, "exponent must be finite and >= 1"));
    }
    Ok(())
}

/// Bernoulli subset weights `w(S) = (1−ε)^{n−|S|} ε^{|S|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureWeights {
    eps: f64,
    n: usize,
}

impl ErasureWeights {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        check_probability("eps", eps)?;
        Ok(Self { eps, n })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight of an erasure pattern with `erased` erased qubits (`0^0 = 1`).
    pub fn by_size(&self, erased: usize) -> f64 {
        (1.0 - self.eps).powi((self.n - erased) as i32) * self.eps.powi(erased as i32)
    }

    pub fn weight(&self, s: &SubsetMask) -> f64 {
        self.by_size(s.len())
    }
}

/// Blocks `Y_S` indexed by the bit encoding of `S`; block `S` acts on `n − |S|` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasedFamily {
    n: usize,
    blocks: Vec<QubitOperator>,
}

impl ErasedFamily {
    pub fn new(n: usize, blocks: Vec<QubitOperator>) -> Result<Self> {
        if blocks.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "{n}-qubit family needs {} blocks, got {}",
                1 << n,
                blocks.len()
            )));
        }
        for (bits, b) in blocks.iter().enumerate() {
            let size = (bits as u32).count_ones() as usize;
            if b.n() != n - size {
                return Err(Error::DimensionMismatch(format!(
                    "block for subset bits {bits:#b} has {} qubits, expected {}",
                    b.n(),
                    n - size
                )));
            }
        }
        Ok(Self { n, blocks })
    }

    /// Build a family from a closure over subsets.
    pub fn from_fn(n: usize, f: impl Fn(&SubsetMask) -> Result<QubitOperator>) -> Result<Self> {
        Self::new(n, SubsetMask::all(n).map(|s| f(&s)).collect::<Result<_>>()?)
    }

    /// Family with `I` on every block.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            blocks: SubsetMask::all(n)
                .map(|s| QubitOperator::identity(n - s.len()))
                .collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self, s: &SubsetMask) -> &QubitOperator {
        &self.blocks[s.bits() as usize]
    }

    pub fn blocks(&self) -> impl Iterator<Item = (SubsetMask, &QubitOperator)> {
        SubsetMask::all(self.n).zip(self.blocks.iter())
    }

    pub fn map(&self, f: impl Fn(&QubitOperator) -> QubitOperator) -> Self {
        Self {
            n: self.n,
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch("families on different qubit counts".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| QubitOperator::new(a.n(), a.matrix().try_add(b.matrix())?))
            .collect::<Result<_>>()?;
        Ok(Self { n: self.n, blocks })
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch("families on different qubit counts".into()));
        }
        let mut sq = 0.0;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            sq += a.distance(b)?.powi(2);
        }
        Ok(sq.sqrt())
    }

    /// Smallest eigenvalue over all blocks (blocks must be Hermitian).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut m = f64::INFINITY;
        for b in &self.blocks {
            let ev = hermitian_eig(b.matrix())?.eigenvalues;
            m = m.min(*ev.last().expect("nonempty block"));
        }
        Ok(m)
    }

    /// Block-diagonal `3^n × 3^n` operator: block `S` occupies the indices
    /// whose base-3 digit is 2 exactly on `S`.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        check_dense(self.n)?;
        let dim = 3usize.pow(self.n as u32);
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (s, b) in self.blocks() {
            let idx = block_indices(self.n, &s);
            for (r, &rr) in idx.iter().enumerate() {
                for (c, &cc) in idx.iter().enumerate() {
                    out[(rr, cc)] = b.matrix()[(r, c)];
                }
            }
        }
        Ok(out)
    }

    /// Pinch a `3^n` operator onto the erasure-pattern blocks.
    pub fn from_dense(n: usize, m: &ComplexMatrix) -> Result<Self> {
        check_dense(n)?;
        let dim = 3usize.pow(n as u32);
        if m.dims() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} erasure-space operator"
            )));
        }
        Self::from_fn(n, |s| {
            let idx = block_indices(n, s);
            let b = ComplexMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
            QubitOperator::new(n - s.len(), b)
        })
    }

    pub fn to_records(&self) -> Vec<FamilyBlockRecord> {
        self.blocks()
            .map(|(s, b)| FamilyBlockRecord {
                subset: s.members(),
                matrix: MatrixRecord::from_matrix(b.matrix(), Some(b.n())),
            })
            .collect()
    }

    pub fn from_records(n: usize, records: &[FamilyBlockRecord]) -> Result<Self> {
        let mut slots: Vec<Option<QubitOperator>> = vec![None; 1 << n];
        for rec in records {
            let s = SubsetMask::new(n, &rec.subset)?;
            let slot = &mut slots[s.bits() as usize];
            if slot.is_some() {
                return Err(Error::Format(format!("duplicate block for {:?}", rec.subset)));
            }
            *slot = Some(QubitOperator::from_matrix(rec.matrix.to_matrix()?)?);
        }
        let blocks = slots
            .into_iter()
            .enumerate()
            .map(|(bits, b)| b.ok_or_else(|| Error::Format(format!("missing block for subset bits {bits:#b}"))))
            .collect::<Result<_>>()?;
        Self::new(n, blocks)
    }
}

/// One `(subset, matrix)` entry of a serialized family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyBlockRecord {
    pub subset: Vec<usize>,
    pub matrix: MatrixRecord,
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        Err(Error::QubitCap { n, cap: DENSE_CAP })
    } else {
        Ok(())
    }
}

/// Base-3 indices (qubit 1 most significant) of block `S`, in the block's own order.
fn block_indices(n: usize, s: &SubsetMask) -> Vec<usize> {
    let kept = s.complement().members();
    let m = kept.len();
    (0..1usize << m)
        .map(|local| {
            (1..=n).fold(0usize, |acc, k| {
                let digit = if s.contains(k) {
                    2
                } else {
                    let j = kept.iter().position(|&x| x == k).expect("kept qubit");
                    (local >> (m - 1 - j)) & 1
                };
                acc * 3 + digit
            })
        })
        .collect()
}

/// The expanding operator in subset form: `S ↦ τ_S X`.
pub fn expand(x: &QubitOperator) -> Result<ErasedFamily> {
    if x.n() > DEFAULT_QUBIT_CAP {
        return Err(Error::QubitCap {
            n: x.n(),
            cap: DEFAULT_QUBIT_CAP,
        });
    }
    let n = x.n();
    let masks: Vec<SubsetMask> = SubsetMask::all(n).collect();
    let blocks = masks
        .par_iter()
        .map(|s| partial_trace_normalized(x, s))
        .collect::<Result<Vec<_>>>()?;
    ErasedFamily::new(n, blocks)
}

/// Singular values of every block of a family; evaluates `‖·‖_{ε,q}` for many `(ε, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpectra {
    n: usize,
    sv: Vec<Vec<f64>>,
}

impl FamilySpectra {
    pub fn new(family: &ErasedFamily) -> Result<Self> {
        let sv = family
            .blocks
            .iter()
            .map(|b| singular_values(b.matrix()))
            .collect::<Result<_>>()?;
        Ok(Self { n: family.n, sv })
    }

    pub fn of(x: &QubitOperator) -> Result<Self> {
        Self::new(&expand(x)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `τ|Y_S|^q` for the block with bit encoding `bits`.
    pub fn moment(&self, bits: usize, q: f64) -> f64 {
        let sv = &self.sv[bits];
        sv.iter().map(|&s| pow0(s, q)).sum::<f64>() / sv.len() as f64
    }

    /// `‖Y_S‖_q` (normalized) for the block with bit encoding `bits`.
    pub fn block_norm(&self, bits: usize, q: f64) -> f64 {
        normalized_power_mean(&self.sv[bits], q)
    }

    /// `Σ_S w(S) τ|Y_S|^q`.
    pub fn weighted_moment(&self, eps: f64, q: f64) -> Result<f64> {
        let w = ErasureWeights::new(self.n, eps)?;
        check_exponent("q", q)?;
        Ok((0..self.sv.len())
            .map(|bits| {
                let size = (bits as u32).count_ones() as usize;
                let wt = w.by_size(size);
                if wt == 0.0 {
                    0.0
                } else {
                    wt * self.moment(bits, q)
                }
            })
            .sum())
    }

    pub fn eps_q_norm(&self, eps: f64, q: f64) -> Result<f64> {
        Ok(self.weighted_moment(eps, q)?.powf(1.0 / q))
    }
}

/// `‖X‖_{ε,q} = (Σ_S w(S) ‖τ_S X‖_q^q)^{1/q}`.
pub fn eps_q_norm(x: &QubitOperator, eps: f64, q: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    check_exponent("q", q)?;
    FamilySpectra::of(x)?.eps_q_norm(eps, q)
}

/// `D(σ)` for the single-qubit Pauli `σ_i`: `diag(σ_i, τ(σ_i))` on `C^3`.
fn expanded_pauli(i: u8) -> ComplexMatrix {
    let p = crate::linalg::pauli(i);
    let mut m = ComplexMatrix::zeros(3, 3);
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] = p[(r, c)];
        }
    }
    m[(2, 2)] = p.normalized_trace();
    m
}

/// `D^{⊗n}(X)` on `C^{3^n}`, built term by term from the Pauli expansion.
pub fn expand_dense(x: &QubitOperator) -> Result<ComplexMatrix> {
    check_dense(x.n())?;
    let n = x.n();
    let coeffs = pauli_decompose(x);
    let locals: Vec<ComplexMatrix> = (0..4).map(expanded_pauli).collect();
    let dim = 3usize.pow(n as u32);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (index, &c) in coeffs.as_slice().iter().enumerate() {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let mut term = ComplexMatrix::scalar(C64::new(1.0, 0.0));
        for k in 0..n {
            let digit = (index >> (2 * (n - 1 - k))) & 3;
            term = term.kron(&locals[digit])?;
        }
        out.add_scaled(&term, c)?;
    }
    Ok(out)
}

/// Diagonal of `Π_ε^{⊗n}` with `Π_ε = diag(1−ε, 1−ε, 2ε)`.
pub fn noise_diagonal(n: usize, eps: f64) -> Result<Vec<f64>> {
    check_probability("eps", eps)?;
    let local = [1.0 - eps, 1.0 - eps, 2.0 * eps];
    let mut d = vec![1.0];
    for _ in 0..n {
        d = d.iter().flat_map(|&a| local.iter().map(move |&b| a * b)).collect();
    }
    Ok(d)
}

/// Literal `3^n` evaluation `(2^{-n} Tr[Π_ε^{⊗n} |D^{⊗n}(X)|^q])^{1/q}`.
pub fn dense_oracle(x: &QubitOperator, eps: f64, q: f64) -> Result<f64> {
    check_exponent("q", q)?;
    let d = expand_dense(x)?;
    let pi = noise_diagonal(x.n(), eps)?;
    // Tr[Π f(M^†M)] = Σ_j f(λ_j) ⟨v_j|Π|v_j⟩
    let gram = (&d.adjoint() * &d).hermitian_part();
    let s = hermitian_eig(&gram)?;
    let dim = pi.len();
    let mut total = 0.0;
    for (j, &l) in s.eigenvalues.iter().enumerate() {
        let weight: f64 = (0..dim).map(|i| pi[i] * s.eigenvectors[(i, j)].norm_sqr()).sum();
        total += weight * pow0(l.max(0.0), q / 2.0);
    }
    Ok((total / x.dim() as f64).powf(1.0 / q))
}

/// `QEC_ε^{⊗n}(X)` on `C^{3^n}`, from `|a⟩⟨b| ↦ (1−ε)|a⟩⟨b| + ε δ_{ab} |2⟩⟨2|` per qubit.
pub fn apply_qec_dense(x: &QubitOperator, eps: f64) -> Result<ComplexMatrix> {
    check_dense(x.n())?;
    check_probability("eps", eps)?;
    let n = x.n();
    let w = ErasureWeights::new(n, eps)?;
    let dim = 3usize.pow(n as u32);
    let mut out = ComplexMatrix::zeros(dim, dim);
    let digit_index = |i: usize, erased: &SubsetMask| {
        (1..=n).fold(0usize, |acc, k| {
            let d = if erased.contains(k) { 2 } else { (i >> (n - k)) & 1 };
            acc * 3 + d
        })
    };
    for e in SubsetMask::all(n) {
        let wt = w.weight(&e);
        if wt == 0.0 {
            continue;
        }
        let mask: usize = e.members().iter().map(|&k| 1usize << (n - k)).sum();
        for i in 0..x.dim() {
            for j in 0..x.dim() {
                if (i ^ j) & mask != 0 {
                    continue;
                }
                out[(digit_index(i, &e), digit_index(j, &e))] += x.matrix()[(i, j)] * wt;
            }
        }
    }
    Ok(out)
}

/// `QEC_ε^{†⊗n}` on a family: `Σ_S (1−ε)^{n−|S|} ε^{|S|} Y_S ⊗ I_S`.
pub fn conjugate_qec_apply(y: &ErasedFamily, eps: f64) -> Result<QubitOperator> {
    let w = ErasureWeights::new(y.n(), eps)?;
    let dim = 1usize << y.n();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (s, b) in y.blocks() {
        let wt = w.weight(&s);
        if wt == 0.0 {
            continue;
        }
        out.add_scaled(embed_with_identity(b, &s)?.matrix(), C64::new(wt, 0.0))?;
    }
    QubitOperator::new(y.n(), out)
}

/// Product depolarizing channel: Pauli coefficient `X̂_x` is scaled by `ρ^{|x|}`.
pub fn depolarize(x: &QubitOperator, rho: f64) -> Result<QubitOperator> {
    check_probability("rho", rho)?;
    Ok(pauli_decompose(x).scale_by_weight(|w| rho.powi(w as i32)).reconstruct())
}

/// `‖f‖_p = (2^{-n} Σ_x |f(x)|^p)^{1/p}` under the uniform measure.
pub fn classical_norm(f: &[f64], p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    Ok(normalized_power_mean(&f.iter().map(|v| v.abs()).collect::<Vec<_>>(), p))
}

/// Largest `n` for the `{0,1,*}^n` enumeration.
pub const BEC_CAP: usize = 8;

/// `‖g(Y)‖_q` for `Y = BEC_ε(X)`, `X` uniform, `g(y) = E[f(X) | Y = y]`, by
/// enumeration of `{0,1,*}^n`. `f` is indexed like a diagonal operator
/// (qubit 1 most significant).
pub fn classical_bec_norm(f: &[f64], eps: f64, q: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    check_exponent("q", q)?;
    if !f.len().is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "function table length {} is not a power of two",
            f.len()
        )));
    }
    let n = f.len().trailing_zeros() as usize;
    if n > BEC_CAP {
        return Err(Error::QubitCap { n, cap: BEC_CAP });
    }
    let mut total = 0.0;
    for code in 0..3usize.pow(n as u32) {
        // digits: 0, 1 observed; 2 erased
        let mut digits = vec![0usize; n];
        let mut c = code;
        for k in (0..n).rev() {
            digits[k] = c % 3;
            c /= 3;
        }
        let erased: Vec<usize> = (0..n).filter(|&k| digits[k] == 2).collect();
        let prob = digits
            .iter()
            .fold(1.0, |acc, &d| acc * if d == 2 { eps } else { (1.0 - eps) / 2.0 });
        if prob == 0.0 {
            continue;
        }
        let mut sum = 0.0;
        for fill in 0..1usize << erased.len() {
            let mut x = 0usize;
            for (k, &d) in digits.iter().enumerate() {
                x <<= 1;
                x |= match erased.iter().position(|&e| e == k) {
                    Some(j) => (fill >> j) & 1,
                    None => d,
                };
            }
            sum += f[x];
        }
        let g = sum / (1usize << erased.len()) as f64;
        total += prob * pow0(g.abs(), q);
    }
    Ok(total.powf(1.0 / q))
}
