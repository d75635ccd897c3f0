//! Common randomness generation from erased EPR pairs: communication lower
//! bounds and exact evaluation of small strategies.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::erasure::{
    apply_qec_dense, check_probability, expand, ErasedFamily, ErasureWeights, FamilyBlockRecord, DENSE_CAP,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eig, holder_conjugate, schatten_norm, ComplexMatrix, MatrixRecord, C64};
use crate::qops::{sample_psd, QubitOperator, SubsetMask};

/// Completeness and positivity tolerance for strategies.
pub const POVM_TOL: f64 = 1e-10;
const DELTA_RANGE: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrgParams {
    pub eps: f64,
    /// Success probability is at least `2^{−γk}`; the endpoints 0 and 1 are accepted as limits.
    pub gamma: f64,
    pub k: f64,
    pub c: f64,
}

impl CrgParams {
    pub fn new(eps: f64, gamma: f64, k: f64, c: f64) -> Result<Self> {
        check_probability("eps", eps)?;
        check_probability("gamma", gamma)?;
        if !(k >= 1.0 && k.is_finite()) {
            return Err(invalid("k", k, "must be finite and >= 1"));
        }
        if !(c >= 1.0 && c.is_finite()) {
            return Err(invalid("c", c, "must be finite and >= 1"));
        }
        Ok(Self { eps, gamma, k, c })
    }

    /// Default exponent `c = 2`.
    pub fn with_default_c(eps: f64, gamma: f64, k: f64) -> Result<Self> {
        Self::new(eps, gamma, k, 2.0)
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps / self.c
    }
}

fn tradeoff(e: f64, gamma: f64, k: f64) -> f64 {
    (e * (1.0 - gamma) - 2.0 * (e * (1.0 - e) * gamma).sqrt()) * k
}

/// Closed-form value before clamping; negative means the bound is vacuous.
pub fn lower_bound_raw(params: &CrgParams) -> f64 {
    tradeoff(params.eps_prime(), params.gamma, params.k)
}

/// `max(0, (ε′(1−γ) − 2√(ε′(1−ε′)γ))·k)` bits, `ε′ = ε/c`.
pub fn lower_bound(params: &CrgParams) -> f64 {
    lower_bound_raw(params).max(0.0)
}

/// `(ε′/(1+(1−ε′)δ) − γ/δ − γ)·k`.
pub fn bound_via_delta(params: &CrgParams, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", delta, "must be positive"));
    }
    let e = params.eps_prime();
    let g = params.gamma;
    Ok((e / (1.0 + (1.0 - e) * delta) - g / delta - g) * params.k)
}

/// Golden-section maximization of [`bound_via_delta`] over `ln δ ∈ [ln 1e−6, ln 1e6]`.
pub fn optimize_delta(params: &CrgParams) -> (f64, f64) {
    let f = |u: f64| bound_via_delta(params, u.exp()).expect("exp is positive");
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (DELTA_RANGE.0.ln(), DELTA_RANGE.1.ln());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let mut best = ((a + b) / 2.0, f((a + b) / 2.0));
    // the objective can be monotone, leaving the optimum at an endpoint
    for u in [DELTA_RANGE.0.ln(), DELTA_RANGE.1.ln()] {
        let v = f(u);
        if v > best.1 {
            best = (u, v);
        }
    }
    (best.0.exp(), best.1)
}

/// Classical achievability `max(0, (ε(1−γ) − 2√(ε(1−ε)γ))·k)`.
pub fn classical_upper_bound(eps: f64, gamma: f64, k: f64) -> Result<f64> {
    CrgParams::new(eps, gamma, k, 1.0)?;
    Ok(tradeoff(eps, gamma, k).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub eps: f64,
    pub gamma: f64,
    pub k: f64,
    pub c: f64,
    pub lower_bound: f64,
    pub delta_star: f64,
    pub classical_upper: f64,
}

pub fn bound_row(params: &CrgParams) -> Result<BoundRow> {
    let (delta_star, _) = optimize_delta(params);
    Ok(BoundRow {
        eps: params.eps,
        gamma: params.gamma,
        k: params.k,
        c: params.c,
        lower_bound: lower_bound(params),
        delta_star,
        classical_upper: classical_upper_bound(params.eps, params.gamma, params.k)?,
    })
}

/// Rows for every `(ε, γ)` pair, ε-major.
pub fn bound_table(eps: &[f64], gammas: &[f64], k: f64, c: f64) -> Result<Vec<BoundRow>> {
    let params: Vec<CrgParams> = eps
        .iter()
        .flat_map(|&e| gammas.iter().map(move |&g| CrgParams::new(e, g, k, c)))
        .collect::<Result<_>>()?;
    params.par_iter().map(bound_row).collect()
}

pub const BOUND_CSV_HEADER: &str = "eps,gamma,k,c,lower_bound,delta_star,classical_upper";

pub fn bound_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from(BOUND_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.eps, r.gamma, r.k, r.c, r.lower_bound, r.delta_star, r.classical_upper
        )
        .expect("string write");
    }
    out
}

/// `min_r log2(1/μ(r))` over the support.
pub fn min_entropy(dist: &[f64]) -> Result<f64> {
    if let Some(&v) = dist.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(invalid("probability", v, "must be finite and >= 0"));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(invalid("total", total, "probabilities must sum to 1"));
    }
    let top = dist.iter().cloned().fold(0.0, f64::max);
    Ok(-top.log2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AliceElement {
    pub outcome: u32,
    pub message: u32,
    pub op: QubitOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BobElement {
    pub outcome: u32,
    pub element: ErasedFamily,
}

/// Alice's POVM `{X_{a,π}}` and, per message, Bob's good-form POVM `{Y^π_a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    n: usize,
    alice: Vec<AliceElement>,
    bob: BTreeMap<u32, Vec<BobElement>>,
}

fn completeness_defect(sum: &ComplexMatrix) -> f64 {
    sum.distance(&ComplexMatrix::identity(sum.rows())).expect("square sum")
}

fn min_eig(m: &ComplexMatrix) -> Result<f64> {
    Ok(*hermitian_eig(m)?.eigenvalues.last().expect("nonempty"))
}

impl Strategy {
    /// Validated strategy: PSD elements, completeness to [`POVM_TOL`], and a
    /// Bob POVM for every message Alice can send.
    pub fn new(n: usize, alice: Vec<AliceElement>, bob: BTreeMap<u32, Vec<BobElement>>) -> Result<Self> {
        let dim = 1usize << n;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &alice {
            if e.op.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "Alice element on {} qubits",
                    e.op.n()
                )));
            }
            let m = min_eig(e.op.matrix())?;
            if m < -POVM_TOL {
                return Err(Error::NotPsd {
                    eigenvalue: m,
                    threshold: -POVM_TOL,
                });
            }
            sum.add_scaled(e.op.matrix(), C64::new(1.0, 0.0))?;
        }
        if completeness_defect(&sum) > POVM_TOL {
            return Err(Error::Precondition("Alice's POVM does not sum to the identity".into()));
        }
        for e in &alice {
            if !bob.contains_key(&e.message) {
                return Err(Error::Precondition(format!("no Bob POVM for message {}", e.message)));
            }
        }
        for (pi, elems) in &bob {
            let mut total: Option<ErasedFamily> = None;
            for e in elems {
                if e.element.n() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "Bob element on {} qubits",
                        e.element.n()
                    )));
                }
                let m = e.element.min_eigenvalue()?;
                if m < -POVM_TOL {
                    return Err(Error::NotPsd {
                        eigenvalue: m,
                        threshold: -POVM_TOL,
                    });
                }
                total = Some(match total {
                    None => e.element.clone(),
                    Some(t) => t.try_add(&e.element)?,
                });
            }
            let total = total.ok_or_else(|| Error::Precondition(format!("empty Bob POVM for message {pi}")))?;
            if total.distance(&ErasedFamily::identity(n))? > POVM_TOL {
                return Err(Error::Precondition(format!(
                    "Bob's POVM for message {pi} is incomplete"
                )));
            }
        }
        Ok(Self { n, alice, bob })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alice(&self) -> &[AliceElement] {
        &self.alice
    }

    pub fn bob(&self) -> &BTreeMap<u32, Vec<BobElement>> {
        &self.bob
    }

    fn bob_element(&self, message: u32, outcome: u32) -> Option<&ErasedFamily> {
        self.bob
            .get(&message)?
            .iter()
            .find(|e| e.outcome == outcome)
            .map(|e| &e.element)
    }

    /// Bob's POVMs as dense `3^n` operators (`n ≤ 3`).
    pub fn dense_bob(&self) -> Result<DenseBob> {
        self.bob
            .iter()
            .map(|(pi, elems)| {
                let v = elems
                    .iter()
                    .map(|e| Ok((e.outcome, e.element.to_dense()?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((*pi, v))
            })
            .collect()
    }

    pub fn to_record(&self) -> StrategyRecord {
        StrategyRecord {
            n: self.n,
            alice: self
                .alice
                .iter()
                .map(|e| AliceRecord {
                    outcome: e.outcome,
                    message: e.message,
                    matrix: MatrixRecord::from_matrix(e.op.matrix(), Some(self.n)),
                })
                .collect(),
            bob: self
                .bob
                .iter()
                .map(|(pi, elems)| BobPovmRecord {
                    message: *pi,
                    elements: elems
                        .iter()
                        .map(|e| BobRecord {
                            outcome: e.outcome,
                            blocks: e.element.to_records(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &StrategyRecord) -> Result<Self> {
        let alice = rec
            .alice
            .iter()
            .map(|a| {
                Ok(AliceElement {
                    outcome: a.outcome,
                    message: a.message,
                    op: QubitOperator::new(rec.n, a.matrix.to_matrix()?)?,
                })
            })
            .collect::<Result<_>>()?;
        let mut bob = BTreeMap::new();
        for p in &rec.bob {
            let elems = p
                .elements
                .iter()
                .map(|e| {
                    Ok(BobElement {
                        outcome: e.outcome,
                        element: ErasedFamily::from_records(rec.n, &e.blocks)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if bob.insert(p.message, elems).is_some() {
                return Err(Error::Format(format!("duplicate Bob POVM for message {}", p.message)));
            }
        }
        Self::new(rec.n, alice, bob)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("strategy serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: StrategyRecord = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_record(&rec)
    }
}

/// Per message, `(outcome, 3^n operator)` pairs.
pub type DenseBob = BTreeMap<u32, Vec<(u32, ComplexMatrix)>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliceRecord {
    pub outcome: u32,
    pub message: u32,
    pub matrix: MatrixRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobRecord {
    pub outcome: u32,
    pub blocks: Vec<FamilyBlockRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobPovmRecord {
    pub message: u32,
    pub elements: Vec<BobRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRecord {
    pub n: usize,
    pub alice: Vec<AliceRecord>,
    pub bob: Vec<BobPovmRecord>,
}

/// Un-normalized `Tr[A B^T]`.
fn trace_with_transpose(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

/// Block weight `(1−ε)^{n−|S|}(2ε)^{|S|}` of `Π_ε^{⊗n}` against normalized partial traces.
fn pi_weight(n: usize, eps: f64, s: &SubsetMask) -> f64 {
    let k = s.len() as i32;
    (1.0 - eps).powi(n as i32 - k) * (2.0 * eps).powi(k)
}

/// `2^{−n} Σ_{a,π} Σ_S (1−ε)^{n−|S|}(2ε)^{|S|} Tr[τ_S X_{a,π} (Y^π_{a,S^c})^T]`.
pub fn success_probability(strat: &Strategy, eps: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    let n = strat.n;
    let mut total = 0.0;
    for e in &strat.alice {
        let Some(y) = strat.bob_element(e.message, e.outcome) else {
            continue;
        };
        let fam = expand(&e.op)?;
        for (s, xb) in fam.blocks() {
            let w = pi_weight(n, eps, &s);
            if w == 0.0 {
                continue;
            }
            total += w * trace_with_transpose(xb.matrix(), y.block(&s).matrix()).re;
        }
    }
    Ok(total / (1u64 << n) as f64)
}

/// The shared state `(id ⊗ QEC_ε^{⊗n})(Φ^{⊗n})` on `2^n ⊗ 3^n`, Alice first.
pub fn erased_epr_state(n: usize, eps: f64) -> Result<ComplexMatrix> {
    if n > 2 {
        return Err(Error::QubitCap { n, cap: 2 });
    }
    let d = 1usize << n;
    let b = 3usize.pow(n as u32);
    let mut rho = ComplexMatrix::zeros(d * b, d * b);
    for i in 0..d {
        for j in 0..d {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(i, j)] = C64::new(1.0, 0.0);
            let bob = apply_qec_dense(&QubitOperator::new(n, e.clone())?, eps)?;
            rho.add_scaled(&e.kron(&bob)?, C64::new(1.0 / d as f64, 0.0))?;
        }
    }
    Ok(rho)
}

/// `Σ Tr[(X_{a,π} ⊗ Y^π_a) ρ]` with dense Bob operators (`n ≤ 2`).
pub fn success_probability_dense(n: usize, alice: &[AliceElement], bob: &DenseBob, eps: f64) -> Result<f64> {
    let rho = erased_epr_state(n, eps)?;
    let mut total = 0.0;
    for e in alice {
        let Some(y) = bob
            .get(&e.message)
            .and_then(|v| v.iter().find(|(a, _)| *a == e.outcome))
        else {
            continue;
        };
        total += e.op.matrix().kron(&y.1)?.trace_product(&rho)?.re;
    }
    Ok(total)
}

/// Pinch each dense Bob element onto the erasure-pattern blocks.
pub fn good_form(n: usize, bob: &DenseBob) -> Result<BTreeMap<u32, Vec<BobElement>>> {
    if n > DENSE_CAP {
        return Err(Error::QubitCap { n, cap: DENSE_CAP });
    }
    bob.iter()
        .map(|(pi, v)| {
            let elems = v
                .iter()
                .map(|(a, m)| {
                    Ok(BobElement {
                        outcome: *a,
                        element: ErasedFamily::from_dense(n, m)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((*pi, elems))
        })
        .collect()
}

/// `2^{−n+n/q*} Σ_π (Σ_a Tr[Π_ε^{⊗n} D(X_{a,π})^q])^{1/q}` for PSD `X_{a,π}`.
pub fn holder_bound(strat: &Strategy, eps: f64, q: f64) -> Result<f64> {
    check_probability("eps", eps)?;
    let qs = holder_conjugate(q)?;
    let n = strat.n;
    let mut per_message: BTreeMap<u32, f64> = BTreeMap::new();
    for e in &strat.alice {
        let fam = expand(&e.op)?;
        let mut t = 0.0;
        for (s, xb) in fam.blocks() {
            let w = pi_weight(n, eps, &s);
            if w > 0.0 {
                t += w * schatten_norm(xb.matrix(), q)?.powf(q);
            }
        }
        *per_message.entry(e.message).or_insert(0.0) += t;
    }
    let nf = n as f64;
    let scale = 2f64.powf(-nf + if qs.is_finite() { nf / qs } else { 0.0 });
    Ok(scale * per_message.values().map(|v| v.powf(1.0 / q)).sum::<f64>())
}

fn basis_projector(n: usize, index: usize) -> QubitOperator {
    let mut d = vec![0.0; 1 << n];
    d[index] = 1.0;
    QubitOperator::diagonal(&d).expect("power-of-two diagonal")
}

/// Alice measures in the computational basis and sends nothing; Bob reads
/// the surviving qubits and guesses 0 on every erased one.
pub fn guess_zero_strategy(n: usize) -> Result<Strategy> {
    let dim = 1usize << n;
    let alice = (0..dim)
        .map(|a| AliceElement {
            outcome: a as u32,
            message: 0,
            op: basis_projector(n, a),
        })
        .collect();
    let bob = (0..dim)
        .map(|a| {
            let element = ErasedFamily::from_fn(n, |s| {
                // qubit k is bit n−k of the outcome
                let erased_bits: usize = s.members().iter().map(|&k| 1usize << (n - k)).sum();
                let m = n - s.len();
                if a & erased_bits != 0 {
                    return QubitOperator::new(m, ComplexMatrix::zeros(1 << m, 1 << m));
                }
                let kept = s.complement().members();
                let local = kept.iter().fold(0usize, |acc, &k| (acc << 1) | ((a >> (n - k)) & 1));
                Ok(basis_projector(m, local))
            })?;
            Ok(BobElement {
                outcome: a as u32,
                element,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Strategy::new(n, alice, BTreeMap::from([(0, bob)]))
}

/// `G_i ↦ S^{−1/2} G_i S^{−1/2}` with `S = Σ G_i`.
fn normalize_povm(gs: Vec<ComplexMatrix>) -> Result<Vec<ComplexMatrix>> {
    let dim = gs[0].rows();
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for g in &gs {
        sum.add_scaled(g, C64::new(1.0, 0.0))?;
    }
    let s = hermitian_eig(&sum)?;
    let floor = *s.eigenvalues.last().expect("nonempty");
    if !(floor > 0.0) {
        return Err(Error::Precondition("POVM seed sum is singular".into()));
    }
    let inv_sqrt = s.map(|l| l.powf(-0.5));
    gs.iter()
        .map(|g| Ok((&(&inv_sqrt * g) * &inv_sqrt).hermitian_part()))
        .collect()
}

/// Random POVM with `outcomes` elements on a `dim`-dimensional space.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Vec<ComplexMatrix>> {
    if outcomes == 0 {
        return Err(Error::Precondition("a POVM needs at least one outcome".into()));
    }
    normalize_povm((0..outcomes).map(|_| sample_psd(dim, rng)).collect())
}

/// Random strategy: Alice's elements indexed by `(a, π)`, Bob's good-form
/// POVM drawn blockwise for each message.
pub fn random_strategy(n: usize, outcomes: usize, messages: usize, seed: u64) -> Result<Strategy> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (alice, _) = random_alice(n, outcomes, messages, &mut rng)?;
    let mut bob = BTreeMap::new();
    for pi in 0..messages as u32 {
        let per_block: Vec<Vec<ComplexMatrix>> = SubsetMask::all(n)
            .map(|s| random_povm(1 << (n - s.len()), outcomes, &mut rng))
            .collect::<Result<_>>()?;
        let elems = (0..outcomes)
            .map(|a| {
                let blocks = per_block
                    .iter()
                    .zip(SubsetMask::all(n))
                    .map(|(b, s)| QubitOperator::new(n - s.len(), b[a].clone()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BobElement {
                    outcome: a as u32,
                    element: ErasedFamily::new(n, blocks)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        bob.insert(pi, elems);
    }
    Strategy::new(n, alice, bob)
}

fn random_alice<R: Rng + ?Sized>(
    n: usize,
    outcomes: usize,
    messages: usize,
    rng: &mut R,
) -> Result<(Vec<AliceElement>, usize)> {
    let total = outcomes * messages;
    let ops = random_povm(1 << n, total, rng)?;
    let alice = ops
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            Ok(AliceElement {
                outcome: (i % outcomes) as u32,
                message: (i / outcomes) as u32,
                op: QubitOperator::new(n, m)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((alice, total))
}

/// Random Alice POVM with dense, generally not good-form, Bob POVMs (`n ≤ 2`).
pub fn random_dense_strategy(
    n: usize,
    outcomes: usize,
    messages: usize,
    seed: u64,
) -> Result<(Vec<AliceElement>, DenseBob)> {
    if n > 2 {
        return Err(Error::QubitCap { n, cap: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (alice, _) = random_alice(n, outcomes, messages, &mut rng)?;
    let b = 3usize.pow(n as u32);
    let bob = (0..messages as u32)
        .map(|pi| {
            let v = random_povm(b, outcomes, &mut rng)?
                .into_iter()
                .enumerate()
                .map(|(a, m)| (a as u32, m))
                .collect();
            Ok((pi, v))
        })
        .collect::<Result<_>>()?;
    Ok((alice, bob))
}

/// Success probability of [`guess_zero_strategy`]: `(1 − ε/2)^n`.
pub fn guess_zero_success(n: usize, eps: f64) -> Result<f64> {
    ErasureWeights::new(n, eps)?;
    Ok((1.0 - eps / 2.0).powi(n as i32))
}
