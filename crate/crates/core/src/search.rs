//! Derivative-free searches over PSD operators: the extremal norm ratio and
//! positive path derivatives, plus replay certification.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{g_prime_closed, g_prime_fd, PathPoint, DEFAULT_FD_STEP};
use crate::erasure::{check_exponent, check_probability, dense_oracle, eps_q_norm, DENSE_CAP};
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eig, schatten_norm_normalized, ComplexMatrix, MatrixRecord, C64};
use crate::qops::{derive_seed, sample_general, QubitOperator, DEFAULT_QUBIT_CAP};
use crate::verify::derivative_agreement_tol;

/// Minimum `g′` (on both routes) for a monotonicity candidate to be listed.
pub const VIOLATION_THRESHOLD: f64 = 1e-7;
/// Closed and finite-difference `g′` must agree to this relative fraction before listing.
pub const SOUNDNESS_REL: f64 = 0.1;
/// Replayed objective must reproduce the stored one to this tolerance.
pub const CERTIFY_TOL: f64 = 1e-10;
/// Eigendecomposition residual demanded during certification, relative to `max(1, ‖X‖_F)`.
pub const CERTIFY_RESIDUAL: f64 = 1e-12;
/// Finite-difference steps used for Richardson consistency.
pub const CERTIFY_STEPS: [f64; 3] = [1e-4, 1e-5, 1e-6];

const RATIO_STREAM: u64 = 0x5241_5449;
const MONO_STREAM: u64 = 0x4d4f_4e4f;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iterations: usize,
    pub initial_step: f64,
    /// Per-iteration geometric step factor.
    pub decay: f64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 20,
            iterations: 500,
            initial_step: 0.25,
            decay: 0.995,
            seed: 0,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.iterations == 0 {
            return Err(Error::Precondition("restarts and iterations must be positive".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(invalid("initial_step", self.initial_step, "must be positive"));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(invalid("decay", self.decay, "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    /// `‖X‖_{ε,q} / ‖X‖_p`
    Ratio { p: f64, q: f64, eps: f64 },
    /// `g′(t)` on the coupled path.
    PathDerivative { t: f64, p: f64, c: f64 },
}

impl Objective {
    pub fn evaluate(&self, x: &QubitOperator) -> Result<f64> {
        match *self {
            Objective::Ratio { p, q, eps } => Ok(eps_q_norm(x, eps, q)? / schatten_norm_normalized(x.matrix(), p)?),
            Objective::PathDerivative { t, p, c } => g_prime_closed(x, &PathPoint::new(t, p, c)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub x: MatrixRecord,
    pub objective_kind: Objective,
    pub objective: f64,
    pub certified: bool,
    /// Restart that produced the candidate; `None` for fixed anchors.
    pub restart: Option<usize>,
    /// Side values (finite-difference derivative, replay deltas).
    pub diagnostics: BTreeMap<String, f64>,
}

impl Candidate {
    pub fn operator(&self) -> Result<QubitOperator> {
        QubitOperator::from_matrix(self.x.to_matrix()?)
    }

    fn new(x: &QubitOperator, kind: Objective, value: f64, restart: Option<usize>) -> Self {
        Self {
            x: MatrixRecord::from_matrix(x.matrix(), Some(x.n())),
            objective_kind: kind,
            objective: value,
            certified: false,
            restart,
            diagnostics: BTreeMap::new(),
        }
    }
}

fn gram(a: &ComplexMatrix, n: usize) -> QubitOperator {
    let x = (&a.adjoint() * a).hermitian_part();
    QubitOperator::new(n, x).expect("square power-of-two gram matrix")
}

fn score(obj: &Objective, a: &ComplexMatrix, n: usize) -> f64 {
    match obj.evaluate(&gram(a, n)) {
        Ok(v) if v.is_finite() => v,
        _ => f64::NEG_INFINITY,
    }
}

/// One restart: random Gaussian `A`, then coordinate steps on `X = A^†A` kept
/// only when they raise the objective, with geometric step decay.
fn ascend(n: usize, obj: &Objective, budget: &SearchBudget, seed: u64) -> (ComplexMatrix, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1 << n;
    let mut a = sample_general(dim, &mut rng);
    let mut best = score(obj, &a, n);
    let mut step = budget.initial_step;
    for _ in 0..budget.iterations {
        let k = rng.random_range(0..dim * dim);
        let imag = rng.random_bool(0.5);
        let delta = if imag { C64::new(0.0, step) } else { C64::new(step, 0.0) };
        let base = a.as_slice()[k];
        let mut chosen = None;
        for cand in [base + delta, base - delta] {
            a.as_mut_slice()[k] = cand;
            let v = score(obj, &a, n);
            if v > best {
                best = v;
                chosen = Some(cand);
            }
        }
        a.as_mut_slice()[k] = chosen.unwrap_or(base);
        step *= budget.decay;
    }
    (a, best)
}

fn check_search_n(n: usize) -> Result<()> {
    if n == 0 || n > DEFAULT_QUBIT_CAP {
        return Err(invalid("n", n as f64, "must lie in 1..=6"));
    }
    Ok(())
}

/// Best-effort `sup_X ‖X‖_{ε,q}/‖X‖_p` over PSD `X`.
///
/// The identity and the rank-one projector `diag(1, 0, …, 0)` are always
/// evaluated as anchors besides the random restarts. The returned `X` is
/// scaled to `‖X‖_p = 1`.
pub fn maximize_ratio(n: usize, p: f64, q: f64, eps: f64, budget: &SearchBudget) -> Result<Candidate> {
    check_search_n(n)?;
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    check_probability("eps", eps)?;
    budget.validate()?;
    let obj = Objective::Ratio { p, q, eps };
    let dim = 1usize << n;
    let mut projector = vec![0.0; dim];
    projector[0] = 1.0;
    let anchors = [QubitOperator::identity(n), QubitOperator::diagonal(&projector)?];
    let runs: Vec<(ComplexMatrix, f64)> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| ascend(n, &obj, budget, derive_seed(budget.seed, RATIO_STREAM, r as u64)))
        .collect();
    let mut best: Option<(QubitOperator, f64, Option<usize>)> = None;
    let mut consider = |x: QubitOperator, v: f64, r: Option<usize>| {
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((x, v, r));
        }
    };
    for x in anchors {
        let v = obj.evaluate(&x)?;
        consider(x, v, None);
    }
    for (r, (a, v)) in runs.into_iter().enumerate() {
        if v.is_finite() {
            consider(gram(&a, n), v, Some(r));
        }
    }
    let (x, _, restart) = best.expect("anchors always evaluate");
    let x = x.scale_real(1.0 / schatten_norm_normalized(x.matrix(), p)?);
    let value = obj.evaluate(&x)?;
    Ok(Candidate::new(&x, obj, value, restart))
}

/// `p` such that `q(t) = q_target` on the path with exponent `c`, if it lies in `[1, 2]`.
pub fn base_exponent_for(q_target: f64, t: f64, c: f64) -> Option<f64> {
    let p = 1.0 + (q_target - 1.0) * (-t / c).exp();
    (1.0..=2.0).contains(&p).then_some(p)
}

fn agrees(closed: f64, fd: f64) -> bool {
    closed.signum() == fd.signum() && (closed - fd).abs() <= SOUNDNESS_REL * closed.abs().max(fd.abs())
}

/// Search for `X` with `g′(t) > 0` at each `t` of the grid.
///
/// With `q_override`, the base exponent at each `t` is chosen so that
/// `q(t)` equals the override; points where that exponent falls outside
/// `[1, 2]` are skipped. Only candidates with both derivative routes above
/// [`VIOLATION_THRESHOLD`] and agreeing to [`SOUNDNESS_REL`] are returned.
pub fn scan_monotonicity(
    n: usize,
    p: f64,
    c: f64,
    q_override: Option<f64>,
    t_grid: &[f64],
    budget: &SearchBudget,
) -> Result<Vec<Candidate>> {
    check_search_n(n)?;
    budget.validate()?;
    if !(p >= 1.0) || !(c >= 1.0) {
        return Err(Error::Precondition(format!(
            "requires p >= 1 and c >= 1, got p = {p}, c = {c}"
        )));
    }
    if let Some(q) = q_override {
        check_exponent("q_override", q)?;
    }
    let mut points = Vec::new();
    for &t in t_grid {
        let base = match q_override {
            Some(q) => base_exponent_for(q, t, c),
            None => Some(p),
        };
        if let Some(bp) = base {
            let pt = PathPoint::new(t, bp, c)?;
            // the derivative formula needs q(t) > 1
            if pt.q() > 1.0 {
                points.push(pt);
            }
        }
    }
    let jobs: Vec<(usize, PathPoint, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, pt)| (0..budget.restarts).map(move |r| (i, *pt, r)))
        .collect();
    let found: Vec<Option<Candidate>> = jobs
        .par_iter()
        .map(|&(i, pt, r)| -> Result<Option<Candidate>> {
            let obj = Objective::PathDerivative {
                t: pt.t,
                p: pt.p,
                c: pt.c,
            };
            let seed = derive_seed(budget.seed, MONO_STREAM, (i * budget.restarts + r) as u64);
            let (a, v) = ascend(n, &obj, budget, seed);
            if !(v > VIOLATION_THRESHOLD) {
                return Ok(None);
            }
            let x = gram(&a, n);
            let x = x.scale_real(1.0 / x.matrix().max_abs());
            let closed = obj.evaluate(&x)?;
            let fd = g_prime_fd(&x, &pt, DEFAULT_FD_STEP)?;
            if closed > VIOLATION_THRESHOLD && fd > VIOLATION_THRESHOLD && agrees(closed, fd) {
                let mut cand = Candidate::new(&x, obj, closed, Some(r));
                cand.diagnostics.insert("g_prime_fd".into(), fd);
                cand.diagnostics.insert("q".into(), pt.q());
                cand.diagnostics.insert("eps".into(), pt.eps());
                Ok(Some(cand))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

fn residual_ok(x: &QubitOperator) -> Result<f64> {
    let m = x.matrix();
    let s = hermitian_eig(m)?;
    Ok(s.residual(m)? / m.frobenius_norm().max(1.0))
}

/// Replay a candidate at tighter settings.
///
/// Ratio objectives are recomputed and, for `n ≤ 3`, compared with the
/// dense oracle. Path derivatives are compared against finite differences
/// at each step of [`CERTIFY_STEPS`] and their Richardson extrapolation.
/// The stored objective must reproduce to [`CERTIFY_TOL`].
pub fn certify(cand: &Candidate) -> Result<Candidate> {
    let x = cand.operator()?;
    let mut out = cand.clone();
    let mut ok = true;
    let residual = residual_ok(&x)?;
    out.diagnostics.insert("eig_residual".into(), residual);
    ok &= residual <= CERTIFY_RESIDUAL;
    let value = cand.objective_kind.evaluate(&x)?;
    let delta = (value - cand.objective).abs();
    out.diagnostics.insert("objective_delta".into(), delta);
    ok &= delta <= CERTIFY_TOL * value.abs().max(1.0);
    match cand.objective_kind {
        Objective::Ratio { p, q, eps } => {
            if x.n() <= DENSE_CAP {
                let dense = dense_oracle(&x, eps, q)? / schatten_norm_normalized(x.matrix(), p)?;
                let d = (dense - value).abs();
                out.diagnostics.insert("oracle_delta".into(), d);
                ok &= d <= CERTIFY_TOL * value.abs().max(1.0);
            }
        }
        Objective::PathDerivative { t, p, c } => {
            let pt = PathPoint::new(t, p, c)?;
            let tol = derivative_agreement_tol(value);
            let mut fds = Vec::new();
            for (i, h) in CERTIFY_STEPS.iter().enumerate() {
                let fd = g_prime_fd(&x, &pt, *h)?;
                let d = (fd - value).abs();
                out.diagnostics.insert(format!("fd_delta_{i}"), d);
                ok &= d <= tol;
                fds.push(fd);
            }
            // central differences are O(h²): extrapolate from the two largest steps
            let ratio = (CERTIFY_STEPS[0] / CERTIFY_STEPS[1]).powi(2);
            let rich = (ratio * fds[1] - fds[0]) / (ratio - 1.0);
            let d = (rich - value).abs();
            out.diagnostics.insert("richardson_delta".into(), d);
            ok &= d <= tol;
        }
    }
    out.certified = ok;
    Ok(out)
}
