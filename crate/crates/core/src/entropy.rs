//! Entropy functionals, Dirichlet terms and the `g(t)` path derivative.
//!
//! Throughout, `X_S = τ_S X` and `M_S(q) = τ[X_S^q]`. Sums over `S ⊆ [m]`
//! carry the weights `w_m(S) = (1−ε)^{m−|S|} ε^{|S|}`.

use serde::{Deserialize, Serialize};

use crate::erasure::{check_exponent, check_probability, eps_q_norm, expand, ErasureWeights};
use crate::error::{invalid, Error, Result};
use crate::linalg::eig::{pow0, ZERO_FLOOR};
use crate::linalg::{hermitian_eig, psd_power, MatrixRecord, Spectrum};
use crate::qops::{partial_trace_normalized, QubitOperator, SubsetMask};
use crate::verify::{CheckReport, Witness};

/// Default finite-difference step for `g′`.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Regularization `δ = FD_REGULARIZATION · λ_max` added in the finite-difference route.
pub const FD_REGULARIZATION: f64 = 1e-8;
/// Per-summand nonnegativity allowance for `J` and `K`.
pub const SUMMAND_TOL: f64 = 1e-9;

fn xlogx(v: f64) -> f64 {
    if v <= ZERO_FLOOR {
        0.0
    } else {
        v * v.ln()
    }
}

/// `Entropy[(w_i, v_i)]` for scalars: `Σ w_i v_i ln v_i − (Σ w_i v_i) ln(Σ w_i v_i)`,
/// where each `v_i ln v_i` is supplied precomputed as `t_i`.
fn weighted_entropy(terms: impl Iterator<Item = (f64, f64, f64)>) -> f64 {
    let (mut a, mut total) = (0.0, 0.0);
    for (w, moment, xlx) in terms {
        if w == 0.0 {
            continue;
        }
        a += w * xlx;
        total += w * moment;
    }
    a - xlogx(total)
}

/// `(1−ε) a ln a + ε b ln b − m ln m` with `m = (1−ε)a + εb`.
pub fn ent_two_point(a: f64, b: f64, eps: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(invalid("a", a, "must be positive"));
    }
    if !(b > 0.0) {
        return Err(invalid("b", b, "must be positive"));
    }
    check_probability("eps", eps)?;
    Ok(weighted_entropy(
        [(1.0 - eps, a, xlogx(a)), (eps, b, xlogx(b))].into_iter(),
    ))
}

fn psd_spectrum(x: &QubitOperator) -> Result<(Spectrum, Vec<f64>)> {
    let s = hermitian_eig(x.matrix())?;
    let ev = s.psd_eigenvalues()?;
    Ok((s, ev))
}

/// `τ[X^q ln X^q] − τ[X^q] ln τ[X^q]` for PSD `X`.
pub fn ent_q(x: &QubitOperator, q: f64) -> Result<f64> {
    check_exponent("q", q)?;
    let (_, ev) = psd_spectrum(x)?;
    let (m, t) = moments(&ev, q);
    Ok(t - xlogx(m))
}

/// `(τ[Y^q], τ[Y^q ln Y^q])` from PSD eigenvalues.
fn moments(ev: &[f64], q: f64) -> (f64, f64) {
    let d = ev.len() as f64;
    let m = ev.iter().map(|&l| pow0(l, q)).sum::<f64>() / d;
    let t = ev.iter().map(|&l| xlogx(pow0(l, q))).sum::<f64>() / d;
    (m, t)
}

/// A Dirichlet-type sum with its smallest summand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletTerm {
    pub value: f64,
    /// Smallest unweighted summand; `+∞` for an empty sum.
    pub min_summand: f64,
}

impl DirichletTerm {
    pub fn summands_nonnegative(&self) -> bool {
        self.min_summand >= -SUMMAND_TOL
    }
}

/// Spectra of every `X_S`, `S ⊆ [n]`, for a PSD `X`.
#[derive(Debug, Clone)]
pub struct TracedSpectra {
    n: usize,
    spectra: Vec<Spectrum>,
    eigen: Vec<Vec<f64>>,
}

impl TracedSpectra {
    pub fn new(x: &QubitOperator) -> Result<Self> {
        psd_spectrum(x)?;
        let family = expand(x)?;
        let mut spectra = Vec::with_capacity(1 << x.n());
        let mut eigen = Vec::with_capacity(1 << x.n());
        for (_, b) in family.blocks() {
            let (s, ev) = psd_spectrum(b)?;
            spectra.push(s);
            eigen.push(ev);
        }
        Ok(Self {
            n: x.n(),
            spectra,
            eigen,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `M_S(q) = τ[X_S^q]`.
    pub fn moment(&self, s: &SubsetMask, q: f64) -> f64 {
        moments(&self.eigen[s.bits() as usize], q).0
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m > self.n {
            return Err(Error::Precondition(format!("m = {m} exceeds qubit count {}", self.n)));
        }
        Ok(())
    }

    /// Subsets of `[m]` embedded as subsets of `[n]`.
    fn prefix_subsets(&self, m: usize) -> impl Iterator<Item = SubsetMask> + '_ {
        SubsetMask::all(m).map(move |t| SubsetMask::from_bits(self.n, t.bits()).expect("prefix fits"))
    }

    /// `Σ_{S⊆[m]} w_m(S) M_S(q)`.
    pub fn weighted_moment(&self, m: usize, eps: f64, q: f64) -> Result<f64> {
        self.check_m(m)?;
        let w = ErasureWeights::new(m, eps)?;
        Ok(self
            .prefix_subsets(m)
            .map(|s| {
                let wt = w.weight(&s);
                if wt == 0.0 {
                    0.0
                } else {
                    wt * self.moment(&s, q)
                }
            })
            .sum())
    }

    /// Bernoulli multipartite entropy over `T ⊆ [m]` (any `q ≥ 1`).
    pub fn entropy(&self, m: usize, eps: f64, q: f64) -> Result<f64> {
        self.check_m(m)?;
        check_exponent("q", q)?;
        let w = ErasureWeights::new(m, eps)?;
        Ok(weighted_entropy(self.prefix_subsets(m).map(|s| {
            let (mo, t) = moments(&self.eigen[s.bits() as usize], q);
            (w.weight(&s), mo, t)
        })))
    }

    /// `J(X, m) = Σ_{S⊆[m]} w_m(S) Σ_{k∈[m]\S} (M_S − M_{S∪k})`.
    pub fn dirichlet_j(&self, m: usize, eps: f64, q: f64) -> Result<DirichletTerm> {
        self.check_m(m)?;
        check_exponent("q", q)?;
        let w = ErasureWeights::new(m, eps)?;
        let mut value = 0.0;
        let mut min_summand = f64::INFINITY;
        for s in self.prefix_subsets(m) {
            let base = self.moment(&s, q);
            let wt = w.weight(&s);
            for k in (1..=m).filter(|&k| !s.contains(k)) {
                let d = base - self.moment(&s.with(k)?, q);
                min_summand = min_summand.min(d);
                value += wt * d;
            }
        }
        Ok(DirichletTerm { value, min_summand })
    }

    /// `K(X, m) = Σ_{S⊆[m]} w_m(S) Σ_{k∈[n]\S} (M_S − τ[(τ_k[X_S^{q/2}])²])`,
    /// with `k` located inside `X_S` by the surviving-order renumbering.
    pub fn dirichlet_k(&self, m: usize, eps: f64, q: f64) -> Result<DirichletTerm> {
        self.check_m(m)?;
        check_exponent("q", q)?;
        let w = ErasureWeights::new(m, eps)?;
        let mut value = 0.0;
        let mut min_summand = f64::INFINITY;
        for s in self.prefix_subsets(m) {
            let bits = s.bits() as usize;
            let base = self.moment(&s, q);
            let wt = w.weight(&s);
            let half = QubitOperator::new(self.n - s.len(), psd_power(&self.spectra[bits], q / 2.0)?)?;
            for k in (1..=self.n).filter(|&k| !s.contains(k)) {
                let pos = SubsetMask::position_after(&s, k)?;
                let traced = partial_trace_normalized(&half, &SubsetMask::new(half.n(), &[pos])?)?;
                let sq = traced.matrix().frobenius_norm().powi(2) / traced.dim() as f64;
                let d = base - sq;
                min_summand = min_summand.min(d);
                value += wt * d;
            }
        }
        Ok(DirichletTerm { value, min_summand })
    }
}

fn check_unit_q(q: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&q) {
        return Err(invalid("q", q, "must lie in [1, 2]"));
    }
    Ok(())
}

/// Bernoulli multipartite entropy of `{(τ_T X)^q : T ⊆ [m]}`.
pub fn ent_multipartite(x: &QubitOperator, m: usize, eps: f64, q: f64) -> Result<f64> {
    check_unit_q(q)?;
    TracedSpectra::new(x)?.entropy(m, eps, q)
}

pub fn dirichlet_j(x: &QubitOperator, m: usize, eps: f64, q: f64) -> Result<f64> {
    check_unit_q(q)?;
    Ok(TracedSpectra::new(x)?.dirichlet_j(m, eps, q)?.value)
}

pub fn dirichlet_k(x: &QubitOperator, m: usize, eps: f64, q: f64) -> Result<f64> {
    check_unit_q(q)?;
    Ok(TracedSpectra::new(x)?.dirichlet_k(m, eps, q)?.value)
}

/// `Ent_{ε,[m],q}[X] ≤ 2J + 2K`; side conditions flag negative `J`/`K` summands.
pub fn log_sobolev_gap(x: &QubitOperator, m: usize, eps: f64, q: f64) -> Result<CheckReport> {
    check_unit_q(q)?;
    let ts = TracedSpectra::new(x)?;
    let ent = ts.entropy(m, eps, q)?;
    let j = ts.dirichlet_j(m, eps, q)?;
    let k = ts.dirichlet_k(m, eps, q)?;
    let witness = Witness::LogSobolev {
        x: MatrixRecord::from_matrix(x.matrix(), Some(x.n())),
        m,
        eps,
        q,
    };
    Ok(CheckReport::inequality(
        "log_sobolev",
        "variable-log-sobolev",
        ent,
        2.0 * j.value + 2.0 * k.value,
        witness,
    )
    .param("n", x.n() as f64)
    .param("m", m as f64)
    .param("eps", eps)
    .param("q", q)
    .detail("j", j.value)
    .detail("k", k.value)
    .detail("j_min_summand", finite_or_zero(j.min_summand))
    .detail("k_min_summand", finite_or_zero(k.min_summand))
    .require("j_summands_nonnegative", j.summands_nonnegative())
    .require("k_summands_nonnegative", k.summands_nonnegative()))
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Both sides of `Ent_2[A] ≤ 2 Σ_k (τ[A²] − τ[(τ_k A)²])` for PSD `A`.
pub fn kt_sides(a: &QubitOperator) -> Result<(f64, f64)> {
    let lhs = ent_q(a, 2.0)?;
    let n = a.n();
    let sq = |y: &QubitOperator| y.matrix().frobenius_norm().powi(2) / y.dim() as f64;
    let base = sq(a);
    let mut rhs = 0.0;
    for k in 1..=n {
        rhs += base - sq(&partial_trace_normalized(a, &SubsetMask::new(n, &[k])?)?);
    }
    Ok((lhs, 2.0 * rhs))
}

/// Pieces of the one-step expansion of `Ent_{ε,[m],q}[X]` along qubit `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyDecomposition {
    /// `Ent_{ε,[m],q}[X]`
    pub total: f64,
    /// `Ent_{ε,[m−1],q}[X]`
    pub kept: f64,
    /// `Ent_{ε,[m−1],q}[X_{{m}}]`
    pub erased: f64,
    /// `Σ_{S⊆[m−1]} w M_S`
    pub a: f64,
    /// `Σ_{S⊆[m−1]} w M_{S∪{m}}`
    pub b: f64,
    /// `Ent_ε[a, b]`
    pub two_point: f64,
    /// `2 (1−ε) Σ_{S⊆[m−1]} w (M_S − M_{S∪{m}})`
    pub two_point_bound: f64,
}

impl EntropyDecomposition {
    /// `(1−ε)·kept + ε·erased + two_point`, weighted by `eps`.
    pub fn recombined(&self, eps: f64) -> f64 {
        (1.0 - eps) * self.kept + eps * self.erased + self.two_point
    }
}

/// Expand `Ent_{ε,[m],q}[X]` along qubit `m ≥ 1`; the erased branch is computed
/// from a separately traced operator.
pub fn decompose_entropy(x: &QubitOperator, m: usize, eps: f64, q: f64) -> Result<EntropyDecomposition> {
    if m == 0 || m > x.n() {
        return Err(Error::Precondition(format!(
            "expansion needs 1 <= m <= n, got m = {m}, n = {}",
            x.n()
        )));
    }
    check_exponent("q", q)?;
    let ts = TracedSpectra::new(x)?;
    let total = ts.entropy(m, eps, q)?;
    let kept = ts.entropy(m - 1, eps, q)?;
    let xm = partial_trace_normalized(x, &SubsetMask::new(x.n(), &[m])?)?;
    let erased = TracedSpectra::new(&xm)?.entropy(m - 1, eps, q)?;
    let w = ErasureWeights::new(m - 1, eps)?;
    let (mut a, mut b, mut diff) = (0.0, 0.0, 0.0);
    for t in SubsetMask::all(m - 1) {
        let s = SubsetMask::from_bits(x.n(), t.bits())?;
        let wt = w.weight(&t);
        let ms = ts.moment(&s, q);
        let msm = ts.moment(&s.with(m)?, q);
        a += wt * ms;
        b += wt * msm;
        diff += wt * (ms - msm);
    }
    let two_point = if a > 0.0 && b > 0.0 {
        ent_two_point(a, b, eps)?
    } else {
        0.0
    };
    Ok(EntropyDecomposition {
        total,
        kept,
        erased,
        a,
        b,
        two_point,
        two_point_bound: 2.0 * (1.0 - eps) * diff,
    })
}

/// A point on the coupled path `q(t) = 1 + (p−1)e^{t/c}`, `ε(t) = 1 − e^{−t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub t: f64,
    pub p: f64,
    pub c: f64,
}

impl PathPoint {
    pub fn new(t: f64, p: f64, c: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid("t", t, "must be finite and >= 0"));
        }
        if !(1.0..=2.0).contains(&p) {
            return Err(invalid("p", p, "must lie in [1, 2]"));
        }
        if !(c >= 1.0 && c.is_finite()) {
            return Err(invalid("c", c, "must be finite and >= 1"));
        }
        Ok(Self { t, p, c })
    }

    pub fn q(&self) -> f64 {
        1.0 + (self.p - 1.0) * (self.t / self.c).exp()
    }

    pub fn eps(&self) -> f64 {
        -(-self.t).exp_m1()
    }

    fn at(&self, t: f64) -> Self {
        Self { t, ..*self }
    }
}

fn require_nonzero(x: &QubitOperator) -> Result<()> {
    if x.matrix().max_abs() == 0.0 {
        return Err(Error::Precondition("operator must be nonzero".into()));
    }
    Ok(())
}

/// `g(t) = ln ‖X‖_{ε(t), q(t)}`.
pub fn g_value(x: &QubitOperator, pt: &PathPoint) -> Result<f64> {
    require_nonzero(x)?;
    Ok(eps_q_norm(x, pt.eps(), pt.q())?.ln())
}

/// Closed-form `g′(t)` for PSD `X`; requires `q(t) > 1`.
pub fn g_prime_closed(x: &QubitOperator, pt: &PathPoint) -> Result<f64> {
    require_nonzero(x)?;
    g_prime_closed_spectra(&TracedSpectra::new(x)?, pt)
}

/// Closed-form `g′(t)` from precomputed spectra.
pub fn g_prime_closed_spectra(ts: &TracedSpectra, pt: &PathPoint) -> Result<f64> {
    let q = pt.q();
    if !(q > 1.0) {
        return Err(invalid("q", q, "closed-form derivative needs q(t) > 1"));
    }
    let eps = pt.eps();
    let n = ts.n();
    let f = ts.weighted_moment(n, eps, q)?;
    if !(f > 0.0) {
        return Err(Error::Precondition("operator must be nonzero".into()));
    }
    let ent = ts.entropy(n, eps, q)?;
    let j = ts.dirichlet_j(n, eps, q)?.value;
    let c = pt.c;
    Ok((q - 1.0) / (c * q * q * f) * (ent - c * q / (q - 1.0) * j))
}

/// Finite-difference `g′(t)` on `X + δI`, `δ = 1e−8 λ_max`.
///
/// Central differences when `t ≥ h`; otherwise the second-order forward stencil.
pub fn g_prime_fd(x: &QubitOperator, pt: &PathPoint, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", h, "step must be positive"));
    }
    require_nonzero(x)?;
    let reg = regularize(x)?;
    let g = |t: f64| -> Result<f64> {
        let p = pt.at(t);
        Ok(eps_q_norm(&reg, p.eps(), p.q())?.ln())
    };
    if pt.t >= h {
        Ok((g(pt.t + h)? - g(pt.t - h)?) / (2.0 * h))
    } else {
        Ok((-3.0 * g(pt.t)? + 4.0 * g(pt.t + h)? - g(pt.t + 2.0 * h)?) / (2.0 * h))
    }
}

/// `X + δ I` with `δ = FD_REGULARIZATION · λ_max(X)`.
pub fn regularize(x: &QubitOperator) -> Result<QubitOperator> {
    let (s, _) = psd_spectrum(x)?;
    let delta = FD_REGULARIZATION * s.max_abs_eigenvalue();
    let mut m = x.matrix().clone();
    for i in 0..x.dim() {
        m[(i, i)] += delta;
    }
    QubitOperator::new(x.n(), m)
}

fn check_function(f: &[f64]) -> Result<usize> {
    if !f.len().is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "function table length {} is not a power of two",
            f.len()
        )));
    }
    if let Some(&v) = f.iter().find(|v| !(**v >= 0.0)) {
        return Err(invalid("f", v, "entries must be nonnegative"));
    }
    Ok(f.len().trailing_zeros() as usize)
}

/// Classical multipartite entropy of `f: {0,1}^n → R≥0` through the diagonal embedding.
pub fn ent_classical(f: &[f64], m: usize, eps: f64, q: f64) -> Result<f64> {
    check_function(f)?;
    ent_multipartite(&QubitOperator::diagonal(f)?, m, eps, q)
}

/// The same quantity by sub-cube averaging: `f_{S^c}` averages `f` over the
/// coordinates in `S`, and expectations are uniform over `{0,1}^n`.
pub fn ent_classical_direct(f: &[f64], m: usize, eps: f64, q: f64) -> Result<f64> {
    let n = check_function(f)?;
    check_unit_q(q)?;
    check_probability("eps", eps)?;
    if m > n {
        return Err(Error::Precondition(format!("m = {m} exceeds n = {n}")));
    }
    let len = f.len();
    let (mut acc, mut total) = (0.0, 0.0);
    for sbits in 0..1usize << m {
        let size = sbits.count_ones() as i32;
        let w = (1.0 - eps).powi(m as i32 - size) * eps.powi(size);
        if w == 0.0 {
            continue;
        }
        // coordinate k (1-based) is bit n−k of the table index
        let mask: usize = (0..m)
            .filter(|j| sbits >> j & 1 == 1)
            .map(|j| 1usize << (n - 1 - j))
            .sum();
        let (mut e_fq, mut e_xlx) = (0.0, 0.0);
        for x in 0..len {
            let base = x & !mask;
            let mut sum = 0.0;
            let mut count = 0usize;
            for (y, &fy) in f.iter().enumerate() {
                if y & !mask == base {
                    sum += fy;
                    count += 1;
                }
            }
            let v = pow0(sum / count as f64, q);
            e_fq += v;
            e_xlx += xlogx(v);
        }
        acc += w * e_xlx / len as f64;
        total += w * e_fq / len as f64;
    }
    Ok(acc - xlogx(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qops::{random_hermitian, random_psd};
    use proptest::prelude::*;

    #[test]
    fn two_point_examples() {
        assert!(ent_two_point(3.0, 3.0, 0.4).unwrap().abs() < 1e-15);
        assert_eq!(ent_two_point(3.0, 1.0, 0.0).unwrap(), 0.0);
        assert!(ent_two_point(3.0, 1.0, 1.0).unwrap().abs() < 1e-15);
        let v = ent_two_point(16.0, 1.0, 0.5).unwrap();
        let want = 0.5 * 16.0 * 16f64.ln() - 8.5 * 8.5f64.ln();
        assert!((v - want).abs() < 1e-13);
        assert!(v <= 15.0);
        assert!(ent_two_point(0.0, 1.0, 0.5).is_err());
        assert!(ent_two_point(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn ent_q_examples() {
        assert!(ent_q(&QubitOperator::identity(2), 1.5).unwrap().abs() < 1e-15);
        let c = QubitOperator::identity(2).scale_real(3.7);
        assert!(ent_q(&c, 1.3).unwrap().abs() < 1e-12);
        let d = QubitOperator::diagonal(&[2.0, 0.0]).unwrap();
        assert!((ent_q(&d, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(ent_q(&QubitOperator::diagonal(&[1.0, -1.0]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn multipartite_reductions() {
        let x = random_psd(3, 1).unwrap();
        for q in [1.0, 1.5, 2.0] {
            let base = ent_q(&x, q).unwrap();
            assert!((ent_multipartite(&x, 0, 0.6, q).unwrap() - base).abs() < 1e-12);
            assert!((ent_multipartite(&x, 3, 0.0, q).unwrap() - base).abs() < 1e-12);
            for m in 0..=3 {
                assert!(ent_multipartite(&QubitOperator::identity(3), m, 0.3, q).unwrap().abs() < 1e-14);
            }
        }
        assert!(ent_multipartite(&x, 4, 0.5, 1.5).is_err());
        assert!(ent_multipartite(&x, 1, 0.5, 2.5).is_err());
    }

    #[test]
    fn dirichlet_examples() {
        let i = QubitOperator::identity(2);
        assert!(dirichlet_j(&i, 2, 0.3, 1.5).unwrap().abs() < 1e-14);
        assert!(dirichlet_k(&i, 2, 0.3, 1.5).unwrap().abs() < 1e-14);
        let x = random_psd(2, 4).unwrap();
        assert_eq!(dirichlet_j(&x, 0, 0.3, 1.5).unwrap(), 0.0);
        let d = QubitOperator::diagonal(&[2.0, 0.0]).unwrap();
        assert!((dirichlet_j(&d, 1, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kt_matches_variable_form() {
        for seed in 0..5 {
            let x = random_psd(3, seed).unwrap();
            let r = log_sobolev_gap(&x, 0, 0.4, 2.0).unwrap();
            let (lhs, rhs) = kt_sides(&x).unwrap();
            assert!((r.lhs - lhs).abs() <= 1e-10);
            assert!((r.rhs - rhs).abs() <= 1e-10);
            assert!(r.pass);
        }
    }

    #[test]
    fn log_sobolev_identity_is_tight() {
        let r = log_sobolev_gap(&QubitOperator::identity(2), 2, 0.5, 1.5).unwrap();
        assert!(r.gap.abs() < 1e-14 && r.pass);
    }

    #[test]
    fn decomposition_identity() {
        for seed in 0..4u64 {
            let x = random_psd(3, 20 + seed).unwrap();
            for m in 1..=3 {
                for eps in [0.0, 0.3, 0.8, 1.0] {
                    for q in [1.0, 1.4, 2.0] {
                        let d = decompose_entropy(&x, m, eps, q).unwrap();
                        assert!((d.total - d.recombined(eps)).abs() <= 1e-10 * d.total.abs().max(1.0));
                        assert!(d.two_point <= d.two_point_bound + 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn path_point_derivations() {
        let pt = PathPoint::new(0.0, 1.5, 2.0).unwrap();
        assert_eq!(pt.q(), 1.5);
        assert_eq!(pt.eps(), 0.0);
        let pt = PathPoint::new(0.7, 1.2, 1.0).unwrap();
        assert!(((pt.p - 1.0) / (pt.q() - 1.0) - (-0.7f64).exp()).abs() < 1e-15);
        assert!(PathPoint::new(-1.0, 1.5, 2.0).is_err());
        assert!(PathPoint::new(0.1, 2.5, 2.0).is_err());
        assert!(PathPoint::new(0.1, 1.5, 0.5).is_err());
    }

    #[test]
    fn g_examples() {
        let x = random_psd(2, 8).unwrap();
        let pt = PathPoint::new(0.0, 1.5, 2.0).unwrap();
        let plain = crate::linalg::schatten_norm_normalized(x.matrix(), 1.5).unwrap().ln();
        assert!((g_value(&x, &pt).unwrap() - plain).abs() < 1e-12);
        let i = QubitOperator::identity(2);
        let pt = PathPoint::new(0.4, 1.5, 2.0).unwrap();
        assert!(g_value(&i, &pt).unwrap().abs() < 1e-14);
        assert!(g_prime_closed(&i, &pt).unwrap().abs() < 1e-14);
        assert!(g_prime_fd(&i, &pt, DEFAULT_FD_STEP).unwrap().abs() < 1e-8);
        // σ_3 on the path: ln((1−ε)^{1/q})
        let z = QubitOperator::new(1, crate::linalg::pauli(3)).unwrap();
        let want = (1.0 - pt.eps()).ln() / pt.q();
        assert!((g_value(&z, &pt).unwrap() - want).abs() < 1e-13);
        assert!(g_value(&QubitOperator::diagonal(&[0.0, 0.0]).unwrap(), &pt).is_err());
    }

    #[test]
    fn closed_rejects_q_one() {
        let x = random_psd(1, 2).unwrap();
        let pt = PathPoint::new(0.3, 1.0, 2.0).unwrap();
        assert!(g_prime_closed(&x, &pt).is_err());
        assert!(g_prime_fd(&x, &pt, DEFAULT_FD_STEP).is_ok());
    }

    #[test]
    fn derivative_routes_agree() {
        for seed in 0..6u64 {
            let x = random_psd(2, 60 + seed).unwrap();
            for (t, p, c) in [(0.3, 1.5, 2.0), (0.0, 1.5, 2.0), (1.1, 1.2, 1.0), (0.05, 1.9, 2.0)] {
                let pt = PathPoint::new(t, p, c).unwrap();
                let a = g_prime_closed(&x, &pt).unwrap();
                let b = g_prime_fd(&x, &pt, DEFAULT_FD_STEP).unwrap();
                assert!(
                    (a - b).abs() <= 1e-6f64.max(1e-4 * a.abs()),
                    "t={t} p={p} c={c}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn classical_routes_agree() {
        let f = [0.5, 2.0, 1.0, 0.0, 3.0, 1.5, 0.25, 1.0];
        for m in 0..=3 {
            for eps in [0.0, 0.5, 1.0] {
                for q in [1.0, 1.5, 2.0] {
                    let a = ent_classical(&f, m, eps, q).unwrap();
                    let b = ent_classical_direct(&f, m, eps, q).unwrap();
                    assert!((a - b).abs() <= 1e-10);
                }
            }
        }
        assert!(ent_classical(&[1.0, -0.5], 1, 0.5, 1.0).is_err());
        assert!(ent_classical(&[1.0; 4], 2, 0.5, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dictator_frozen_value() {
        // f = 2·1[x_1 = 0] on one bit: Ent = (1−ε)·ln 2 at q = 1.
        let f = [2.0, 0.0];
        for eps in [0.0, 0.3, 0.75, 1.0] {
            let v = ent_classical_direct(&f, 1, eps, 1.0).unwrap();
            assert!((v - (1.0 - eps) * 2f64.ln()).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn ent_q_scales(seed in 0u64..500, c in 0.1f64..5.0, q in 1.0f64..3.0) {
            let x = random_psd(2, seed).unwrap();
            let a = ent_q(&x.scale_real(c), q).unwrap();
            let b = c.powf(q) * ent_q(&x, q).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }

        #[test]
        fn entropies_nonnegative(seed in 0u64..500, m in 0usize..=2, eps in 0.0f64..=1.0, q in 1.0f64..=2.0) {
            let x = random_psd(2, seed).unwrap();
            prop_assert!(ent_multipartite(&x, m, eps, q).unwrap() >= -1e-9);
            let h = random_hermitian(2, seed).unwrap();
            let sq = QubitOperator::new(2, h.matrix() * h.matrix()).unwrap();
            prop_assert!(ent_q(&sq, q).unwrap() >= -1e-9);
        }
    }
}
