//! One function per inequality; each validates its domain, evaluates both
//! sides and records a replayable witness.

use crate::entropy::{
    decompose_entropy, ent_two_point, g_prime_closed, g_prime_fd, kt_sides, log_sobolev_gap, PathPoint, DEFAULT_FD_STEP,
};
use crate::erasure::{
    check_exponent, check_probability, classical_bec_norm, classical_norm, dense_oracle, depolarize, eps_q_norm,
    expand, FamilySpectra, DENSE_CAP,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::eig::pow0;
use crate::linalg::majorization::apply_real;
use crate::linalg::{
    hermitian_eig, holder_conjugate, is_doubly_stochastic, majorizes, psd_power, schatten_norm,
    schatten_norm_normalized, schur_horn_ds, ComplexMatrix, MatrixRecord,
};
use crate::qops::{partial_trace_normalized, watrous_split, QubitOperator, SubsetMask};

use super::report::{CheckReport, Witness};

/// Check ids with their descriptive labels.
pub const CHECKS: &[(&str, &str)] = &[
    ("hc", "erasure-hypercontractivity"),
    ("hc_unnormalized", "inductive-unnormalized-hypercontractivity"),
    ("refined_gross", "refined-gross-lemma"),
    ("ds_vector", "doubly-stochastic-vector-lemma"),
    ("tech_lemma", "two-point-entropy-bound"),
    ("pt_sandwich", "partial-trace-moment-sandwich"),
    ("norm_compression", "block-norm-compression"),
    ("entrywise_2x2", "entrywise-monotone-2x2-norm"),
    ("watrous", "watrous-psd-reduction"),
    ("depolarizing_hc", "depolarizing-hypercontractivity"),
    ("classical_bec", "classical-bec-hypercontractivity"),
    ("schur_horn", "schur-horn-majorization"),
    ("matrix_holder", "matrix-holder"),
    ("kt", "fixed-dimension-log-sobolev"),
    ("log_sobolev", "variable-log-sobolev"),
    ("decomposition", "bernoulli-entropy-expansion"),
    ("two_point_claim", "two-point-term-bound"),
    ("norm_oracle", "subset-vs-dense-norm"),
    ("g_prime", "path-derivative-sign"),
];

pub fn label_of(id: &str) -> Result<&'static str> {
    CHECKS
        .iter()
        .find(|(k, _)| *k == id)
        .map(|(_, l)| *l)
        .ok_or_else(|| Error::UnknownCheck(id.to_string()))
}

fn record(x: &QubitOperator) -> MatrixRecord {
    MatrixRecord::from_matrix(x.matrix(), Some(x.n()))
}

fn report_ineq(id: &str, lhs: f64, rhs: f64, w: Witness) -> CheckReport {
    CheckReport::inequality(id, label_of(id).expect("registered id"), lhs, rhs, w)
}

fn report_eq(id: &str, lhs: f64, rhs: f64, w: Witness) -> CheckReport {
    CheckReport::equality(id, label_of(id).expect("registered id"), lhs, rhs, w)
}

fn require_psd(x: &ComplexMatrix) -> Result<()> {
    hermitian_eig(x)?.psd_eigenvalues().map(|_| ())
}

/// Slack allowed when validating parameter constraints computed in floating point.
const DOMAIN_SLACK: f64 = 1e-12;

/// `(p−1)/(q−1)`, taken as 1 when `p ≥ q`.
pub fn hc_ratio(p: f64, q: f64) -> f64 {
    if p >= q {
        1.0
    } else {
        (p - 1.0) / (q - 1.0)
    }
}

/// Exponent `c` of a theorem case.
pub fn hc_constant(case: u8) -> Result<f64> {
    match case {
        1 => Ok(1.0),
        2 => Ok(2.0),
        _ => Err(invalid("case", case as f64, "case must be 1 or 2")),
    }
}

/// Smallest admissible `ε`: `1 − ((p−1)/(q−1))^c`.
pub fn hc_min_eps(p: f64, q: f64, case: u8) -> Result<f64> {
    Ok(1.0 - hc_ratio(p, q).powf(hc_constant(case)?))
}

fn validate_hc(p: f64, q: f64, eps: f64, case: u8) -> Result<()> {
    check_probability("eps", eps)?;
    let c = hc_constant(case)?;
    let ok_range = match case {
        1 => (1.0..=2.0).contains(&p) && q >= 2.0,
        _ => p >= 1.0 && p <= q && q <= 2.0,
    };
    if !ok_range || !q.is_finite() {
        let want = if case == 1 {
            "1 <= p <= 2 <= q"
        } else {
            "1 <= p <= q <= 2"
        };
        return Err(Error::Precondition(format!(
            "case {case} requires {want}, got p = {p}, q = {q}"
        )));
    }
    let bound = hc_ratio(p, q).powf(c);
    if 1.0 - eps > bound + DOMAIN_SLACK {
        return Err(Error::Precondition(format!(
            "1 - eps = {} exceeds ((p-1)/(q-1))^{c} = {bound}",
            1.0 - eps
        )));
    }
    Ok(())
}

/// `‖X‖_{ε,q} ≤ ‖X‖_p` under the case's admissibility constraint.
pub fn check_hc(x: &QubitOperator, p: f64, q: f64, eps: f64, case: u8) -> Result<CheckReport> {
    validate_hc(p, q, eps, case)?;
    let lhs = eps_q_norm(x, eps, q)?;
    let rhs = schatten_norm_normalized(x.matrix(), p)?;
    Ok(report_ineq(
        "hc",
        lhs,
        rhs,
        Witness::Hc {
            x: record(x),
            p,
            q,
            eps,
            case,
        },
    )
    .param("n", x.n() as f64)
    .param("p", p)
    .param("q", q)
    .param("eps", eps)
    .param("case", case as f64))
}

/// Same instance through the un-normalized statement
/// `(Tr[Π^{⊗n}|D^{⊗n}(X)|^q])^{1/q} ≤ ‖X‖_p^{Tr} · 2^{n(1/q − 1/p)}` (case 1 domain).
pub fn check_hc_unnormalized(x: &QubitOperator, p: f64, q: f64, eps: f64) -> Result<CheckReport> {
    validate_hc(p, q, eps, 1)?;
    let n = x.n();
    let fam = expand(x)?;
    // Π weight on block S is (1−ε)^{n−|S|}(2ε)^{|S|}, traces un-normalized.
    let mut total = 0.0;
    for (s, b) in fam.blocks() {
        let k = s.len() as i32;
        let w = (1.0 - eps).powi(n as i32 - k) * (2.0 * eps).powi(k);
        if w == 0.0 {
            continue;
        }
        total += w * schatten_norm(b.matrix(), q)?.powf(q);
    }
    let lhs = total.powf(1.0 / q);
    let rhs = schatten_norm(x.matrix(), p)? * 2f64.powf(n as f64 * (1.0 / q - 1.0 / p));
    Ok(report_ineq(
        "hc_unnormalized",
        lhs,
        rhs,
        Witness::HcUnnormalized {
            x: record(x),
            p,
            q,
            eps,
        },
    )
    .param("n", n as f64)
    .param("p", p)
    .param("q", q)
    .param("eps", eps))
}

fn check_q_unit_open(q: f64) -> Result<()> {
    if !(q > 1.0 && q <= 2.0) {
        return Err(invalid("q", q, "must lie in (1, 2]"));
    }
    Ok(())
}

fn normalized_square(y: &QubitOperator) -> f64 {
    y.matrix().frobenius_norm().powi(2) / y.dim() as f64
}

/// `τ[X^q] − τ[(τ_k[X^{q/2}])²] ≤ (τ[X^q] − τ[(τ_k X)^q]) / (q−1)` for PSD `X`,
/// traced over qubit `k` (the last qubit in the stated form).
pub fn check_refined_gross(x: &QubitOperator, q: f64, qubit: usize) -> Result<CheckReport> {
    check_q_unit_open(q)?;
    if x.n() == 0 || qubit == 0 || qubit > x.n() {
        return Err(Error::InvalidSubset(format!(
            "qubit {qubit} invalid for {}-qubit operator",
            x.n()
        )));
    }
    let s = hermitian_eig(x.matrix())?;
    let ev = s.psd_eigenvalues()?;
    let xq = ev.iter().map(|&l| pow0(l, q)).sum::<f64>() / ev.len() as f64;
    let mask = SubsetMask::new(x.n(), &[qubit])?;
    let half = QubitOperator::new(x.n(), psd_power(&s, q / 2.0)?)?;
    let traced_half = partial_trace_normalized(&half, &mask)?;
    let lhs = xq - normalized_square(&traced_half);
    let traced = partial_trace_normalized(x, &mask)?;
    let tq = FamilySpectra::new(&expand(&traced)?)?.moment(0, q);
    let rhs = (xq - tq) / (q - 1.0);
    Ok(report_ineq(
        "refined_gross",
        lhs,
        rhs,
        Witness::RefinedGross { x: record(x), q, qubit },
    )
    .param("n", x.n() as f64)
    .param("q", q)
    .param("qubit", qubit as f64))
}

/// `‖λ‖_q^q − ‖Dλ^{q/2}‖_2² ≤ (‖λ‖_q^q − ‖Dλ‖_q^q)/(q−1)`, un-normalized.
pub fn check_ds_vector(lambda: &[f64], d: &ComplexMatrix, q: f64) -> Result<CheckReport> {
    check_q_unit_open(q)?;
    if let Some(&v) = lambda.iter().find(|v| !(**v >= 0.0)) {
        return Err(invalid("lambda", v, "entries must be nonnegative"));
    }
    if d.rows() != lambda.len() || !is_doubly_stochastic(d, 1e-10) {
        return Err(Error::Precondition("matrix is not doubly stochastic at 1e-10".into()));
    }
    let lq: f64 = lambda.iter().map(|&l| pow0(l, q)).sum();
    let half: Vec<f64> = lambda.iter().map(|&l| pow0(l, q / 2.0)).collect();
    let dh = apply_real(d, &half)?;
    let dl = apply_real(d, lambda)?;
    let lhs = lq - dh.iter().map(|v| v * v).sum::<f64>();
    let rhs = (lq - dl.iter().map(|&v| pow0(v.max(0.0), q)).sum::<f64>()) / (q - 1.0);
    Ok(report_ineq(
        "ds_vector",
        lhs,
        rhs,
        Witness::DsVector {
            lambda: lambda.to_vec(),
            d: MatrixRecord::from_matrix(d, None),
            q,
        },
    )
    .param("dim", lambda.len() as f64)
    .param("q", q))
}

/// `Ent_ε[a, b] ≤ 2(1−ε)(a−b)` for `16b ≥ a ≥ b > 0`.
pub fn check_tech_lemma(a: f64, b: f64, eps: f64) -> Result<CheckReport> {
    if !(b > 0.0 && a >= b && a <= 16.0 * b) {
        return Err(Error::Precondition(format!(
            "requires 16b >= a >= b > 0, got a = {a}, b = {b}"
        )));
    }
    let lhs = ent_two_point(a, b, eps)?;
    let rhs = 2.0 * (1.0 - eps) * (a - b);
    Ok(report_ineq("tech_lemma", lhs, rhs, Witness::TechLemma { a, b, eps })
        .param("a", a)
        .param("b", b)
        .param("eps", eps))
}

/// `τ[(τ_1 A)^q] ≤ τ[A^q] ≤ 4^q τ[(τ_1 A)^q]`; the reported gap is the smaller side.
pub fn check_pt_sandwich(a: &QubitOperator, q: f64) -> Result<CheckReport> {
    check_exponent("q", q)?;
    if a.n() == 0 {
        return Err(Error::Precondition("needs at least one qubit".into()));
    }
    require_psd(a.matrix())?;
    let moments = |y: &QubitOperator| -> Result<f64> {
        let ev = hermitian_eig(y.matrix())?.psd_eigenvalues()?;
        Ok(ev.iter().map(|&l| pow0(l, q)).sum::<f64>() / ev.len() as f64)
    };
    let middle = moments(a)?;
    let low = moments(&partial_trace_normalized(a, &SubsetMask::new(a.n(), &[1])?)?)?;
    let high = 4f64.powf(q) * low;
    let lower_gap = middle - low;
    let upper_gap = high - middle;
    let r = report_ineq("pt_sandwich", middle, high, Witness::PtSandwich { a: record(a), q })
        .param("n", a.n() as f64)
        .param("q", q)
        .detail("lower", low)
        .detail("lower_gap", lower_gap)
        .detail("upper_gap", upper_gap);
    Ok(r.with_gap(upper_gap.min(lower_gap)))
}

/// Block norms `m_p = [[‖X‖_p, ‖Y‖_p], [‖Y‖_p, ‖Z‖_p]]` of `M = [[X, Y], [Y^†, Z]]`.
pub fn compressed_norms(m: &ComplexMatrix, p: f64) -> Result<ComplexMatrix> {
    let dim = m.require_square()?;
    if dim % 2 != 0 {
        return Err(Error::DimensionMismatch(format!("dimension {dim} is odd")));
    }
    let h = dim / 2;
    let block = |r0: usize, c0: usize| ComplexMatrix::from_fn(h, h, |i, j| m[(r0 + i, c0 + j)]);
    let x = schatten_norm(&block(0, 0), p)?;
    let y = schatten_norm(&block(0, h), p)?;
    let z = schatten_norm(&block(h, h), p)?;
    ComplexMatrix::from_real_rows(&[&[x, y], &[y, z]])
}

/// `‖M‖_p ≥ ‖m_p‖_p` for `1 ≤ p ≤ 2` and `≤` for `p ≥ 2` (un-normalized).
pub fn check_norm_compression(m: &ComplexMatrix, p: f64) -> Result<CheckReport> {
    check_exponent("p", p)?;
    require_psd(m)?;
    let mp = compressed_norms(m, p)?;
    let big = schatten_norm(m, p)?;
    let small = schatten_norm(&mp, p)?;
    let (lhs, rhs) = if p <= 2.0 { (small, big) } else { (big, small) };
    Ok(report_ineq(
        "norm_compression",
        lhs,
        rhs,
        Witness::NormCompression {
            m: MatrixRecord::from_matrix(m, None),
            p,
        },
    )
    .param("dim", m.rows() as f64)
    .param("p", p)
    .detail("full_norm", big)
    .detail("compressed_norm", small))
}

fn real_psd_2x2(m: &ComplexMatrix, name: &str) -> Result<()> {
    if m.dims() != (2, 2) || !m.is_real(1e-14) || m.hermitian_defect().is_none_or(|d| d > 1e-14) {
        return Err(Error::Precondition(format!(
            "{name} must be a real symmetric 2x2 matrix"
        )));
    }
    require_psd(m)
}

/// Entrywise `0 ≤ X ≤ Y` on real PSD 2×2 implies `‖X‖_p ≤ ‖Y‖_p` (un-normalized).
pub fn check_entrywise_2x2(x: &ComplexMatrix, y: &ComplexMatrix, p: f64) -> Result<CheckReport> {
    check_exponent("p", p)?;
    real_psd_2x2(x, "X")?;
    real_psd_2x2(y, "Y")?;
    // Without X ≥ 0 the implication fails, e.g. X = [[1, −1], [−1, 1]], Y = I at p = 2.
    if x.as_slice().iter().any(|a| a.re < 0.0) {
        return Err(Error::Precondition("X must be entrywise nonnegative".into()));
    }
    if x.as_slice().iter().zip(y.as_slice()).any(|(a, b)| a.re > b.re) {
        return Err(Error::Precondition("X must be entrywise dominated by Y".into()));
    }
    let lhs = schatten_norm(x, p)?;
    let rhs = schatten_norm(y, p)?;
    Ok(report_ineq(
        "entrywise_2x2",
        lhs,
        rhs,
        Witness::Entrywise2x2 {
            x: MatrixRecord::from_matrix(x, None),
            y: MatrixRecord::from_matrix(y, None),
            p,
        },
    )
    .param("p", p))
}

/// `‖X‖_{ε,q}/‖X‖_p ≤ max` of the same ratio over the PSD pair `(X_L, X_R)`.
pub fn check_watrous(x: &QubitOperator, eps: f64, q: f64, p: f64) -> Result<CheckReport> {
    check_exponent("p", p)?;
    if x.matrix().max_abs() == 0.0 {
        return Err(Error::Precondition("operator must be nonzero".into()));
    }
    let ratio =
        |y: &QubitOperator| -> Result<f64> { Ok(eps_q_norm(y, eps, q)? / schatten_norm_normalized(y.matrix(), p)?) };
    let (l, r) = watrous_split(x)?;
    let lhs = ratio(x)?;
    let rl = ratio(&l)?;
    let rr = ratio(&r)?;
    Ok(report_ineq(
        "watrous",
        lhs,
        rl.max(rr),
        Witness::Watrous {
            x: record(x),
            eps,
            q,
            p,
        },
    )
    .param("n", x.n() as f64)
    .param("eps", eps)
    .param("q", q)
    .param("p", p)
    .detail("ratio_left", rl)
    .detail("ratio_right", rr))
}

/// Largest `ρ` for which the depolarizing bound is asserted: `√r` when
/// `p ≤ 2 ≤ q`, `r` when `p ≤ q ≤ 2`, where `r = (p−1)/(q−1)`.
pub fn depolarizing_max_rho(p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0 && q >= p && q.is_finite()) {
        return Err(Error::Precondition(format!(
            "requires 1 <= p <= q, got p = {p}, q = {q}"
        )));
    }
    let r = hc_ratio(p, q);
    if p <= 2.0 && q >= 2.0 {
        Ok(r.sqrt())
    } else if q <= 2.0 {
        Ok(r)
    } else {
        Err(Error::Precondition(format!(
            "no admissible case for 2 < p <= q (p = {p}, q = {q})"
        )))
    }
}

/// `‖Δ_ρ^{⊗n}(X)‖_q ≤ ‖X‖_p` for admissible `ρ`.
pub fn check_depolarizing_hc(x: &QubitOperator, p: f64, q: f64, rho: f64) -> Result<CheckReport> {
    check_probability("rho", rho)?;
    let max_rho = depolarizing_max_rho(p, q)?;
    if rho > max_rho + DOMAIN_SLACK {
        return Err(Error::Precondition(format!("rho = {rho} exceeds admissible {max_rho}")));
    }
    let lhs = schatten_norm_normalized(depolarize(x, rho)?.matrix(), q)?;
    let rhs = schatten_norm_normalized(x.matrix(), p)?;
    Ok(report_ineq(
        "depolarizing_hc",
        lhs,
        rhs,
        Witness::DepolarizingHc {
            x: record(x),
            p,
            q,
            rho,
        },
    )
    .param("n", x.n() as f64)
    .param("p", p)
    .param("q", q)
    .param("rho", rho))
}

/// Tolerance of the diagonal-embedding side condition.
pub const BRIDGE_TOL: f64 = 1e-10;

/// `‖g(Y)‖_q ≤ ‖f(X)‖_p` for `Y = BEC_ε(X)`, `1−ε ≤ (p−1)/(q−1)`; also
/// requires the brute-force value to match `‖diag f‖_{ε,q}`.
pub fn check_classical_bec(f: &[f64], p: f64, q: f64, eps: f64) -> Result<CheckReport> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    check_probability("eps", eps)?;
    if 1.0 - eps > hc_ratio(p, q) + DOMAIN_SLACK {
        return Err(Error::Precondition(format!(
            "1 - eps = {} exceeds (p-1)/(q-1) = {}",
            1.0 - eps,
            hc_ratio(p, q)
        )));
    }
    let lhs = classical_bec_norm(f, eps, q)?;
    let rhs = classical_norm(f, p)?;
    let bridge = eps_q_norm(&QubitOperator::diagonal(f)?, eps, q)?;
    let delta = (lhs - bridge).abs();
    Ok(report_ineq(
        "classical_bec",
        lhs,
        rhs,
        Witness::ClassicalBec {
            f: f.to_vec(),
            p,
            q,
            eps,
        },
    )
    .param("n", f.len().trailing_zeros() as f64)
    .param("p", p)
    .param("q", q)
    .param("eps", eps)
    .detail("bridge_delta", delta)
    .require("diagonal_bridge", delta <= BRIDGE_TOL))
}

/// Schur–Horn: `λ(X)` majorizes `diag(X)` and `D = |U_ij|²` maps `λ` to the diagonal.
///
/// Reported as `max |Dλ − diag X| = 0` at tolerance `1e−9`, with doubly
/// stochasticity (`1e−10`) and majorization as side conditions.
pub fn check_schur_horn(x: &QubitOperator) -> Result<CheckReport> {
    let s = hermitian_eig(x.matrix())?;
    let d = schur_horn_ds(&s);
    let diag = x.matrix().real_diagonal();
    let dl = apply_real(&d, &s.eigenvalues)?;
    let err = dl.iter().zip(&diag).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ds = is_doubly_stochastic(&d, 1e-10);
    let maj = majorizes(&s.eigenvalues, &diag)?;
    Ok(report_eq("schur_horn", err, 0.0, Witness::SchurHorn { x: record(x) })
        .with_tolerance(1e-9)
        .param("dim", x.dim() as f64)
        .require("doubly_stochastic", ds)
        .require("majorization", maj))
}

/// `|Tr[B^† A]| ≤ ‖A‖_p ‖B‖_{p*}` (un-normalized).
pub fn check_matrix_holder(a: &ComplexMatrix, b: &ComplexMatrix, p: f64) -> Result<CheckReport> {
    let ps = holder_conjugate(p)?;
    let lhs = b.adjoint().trace_product(a)?.norm();
    let rhs = schatten_norm(a, p)? * schatten_norm(b, ps)?;
    Ok(report_ineq(
        "matrix_holder",
        lhs,
        rhs,
        Witness::MatrixHolder {
            a: MatrixRecord::from_matrix(a, None),
            b: MatrixRecord::from_matrix(b, None),
            p,
        },
    )
    .param("dim", a.rows() as f64)
    .param("p", p))
}

/// `Ent_2[A] ≤ 2 Σ_k (τ[A²] − τ[(τ_k A)²])`.
pub fn check_kt(a: &QubitOperator) -> Result<CheckReport> {
    let (lhs, rhs) = kt_sides(a)?;
    Ok(report_ineq("kt", lhs, rhs, Witness::Kt { a: record(a) }).param("n", a.n() as f64))
}

pub fn check_log_sobolev(x: &QubitOperator, m: usize, eps: f64, q: f64) -> Result<CheckReport> {
    log_sobolev_gap(x, m, eps, q)
}

/// `Ent_{[m]} = (1−ε) Ent_{[m−1]}[X] + ε Ent_{[m−1]}[X_{m}] + Ent_ε[A, B]`.
pub fn check_decomposition(x: &QubitOperator, m: usize, eps: f64, q: f64) -> Result<CheckReport> {
    let d = decompose_entropy(x, m, eps, q)?;
    let scale = d.total.abs().max(1.0);
    Ok(report_eq(
        "decomposition",
        d.total / scale,
        d.recombined(eps) / scale,
        Witness::Decomposition {
            x: record(x),
            m,
            eps,
            q,
        },
    )
    .param("n", x.n() as f64)
    .param("m", m as f64)
    .param("eps", eps)
    .param("q", q)
    .detail("total", d.total)
    .detail("two_point", d.two_point))
}

/// `Ent_ε[A, B] ≤ 2(1−ε) Σ_{S⊆[m−1]} w (M_S − M_{S∪{m}})`.
pub fn check_two_point_claim(x: &QubitOperator, m: usize, eps: f64, q: f64) -> Result<CheckReport> {
    if !(1.0..=2.0).contains(&q) {
        return Err(invalid("q", q, "must lie in [1, 2]"));
    }
    let d = decompose_entropy(x, m, eps, q)?;
    Ok(report_ineq(
        "two_point_claim",
        d.two_point,
        d.two_point_bound,
        Witness::TwoPointClaim {
            x: record(x),
            m,
            eps,
            q,
        },
    )
    .param("n", x.n() as f64)
    .param("m", m as f64)
    .param("eps", eps)
    .param("q", q))
}

/// Tolerance of the subset-form vs dense-form equality.
pub const ORACLE_TOL: f64 = 1e-9;

/// Subset-form `‖X‖_{ε,q}` against the literal `3^n` construction (`n ≤ 3`).
pub fn check_norm_oracle(x: &QubitOperator, eps: f64, q: f64) -> Result<CheckReport> {
    if x.n() > DENSE_CAP {
        return Err(Error::QubitCap {
            n: x.n(),
            cap: DENSE_CAP,
        });
    }
    let lhs = eps_q_norm(x, eps, q)?;
    let rhs = dense_oracle(x, eps, q)?;
    Ok(
        report_eq("norm_oracle", lhs, rhs, Witness::NormOracle { x: record(x), eps, q })
            .with_tolerance(ORACLE_TOL)
            .param("n", x.n() as f64)
            .param("eps", eps)
            .param("q", q),
    )
}

/// Agreement tolerance between the closed and finite-difference derivatives.
pub fn derivative_agreement_tol(value: f64) -> f64 {
    1e-6f64.max(1e-4 * value.abs())
}

/// `g′(t) ≤ 0` on the case-2 path (`c = 2`, `q(t) ≤ 2`), with route agreement as a side condition.
pub fn check_g_prime(x: &QubitOperator, pt: &PathPoint) -> Result<CheckReport> {
    let q = pt.q();
    if pt.c != 2.0 || q > 2.0 + DOMAIN_SLACK {
        return Err(Error::Precondition(format!(
            "sign is asserted only for c = 2 and q(t) <= 2, got c = {}, q = {q}",
            pt.c
        )));
    }
    require_psd(x.matrix())?;
    let closed = g_prime_closed(x, pt)?;
    let fd = g_prime_fd(x, pt, DEFAULT_FD_STEP)?;
    let delta = (closed - fd).abs();
    Ok(report_ineq(
        "g_prime",
        closed,
        0.0,
        Witness::GPrime {
            x: record(x),
            t: pt.t,
            p: pt.p,
            c: pt.c,
        },
    )
    .param("n", x.n() as f64)
    .param("t", pt.t)
    .param("p", pt.p)
    .param("c", pt.c)
    .detail("q", q)
    .detail("eps", pt.eps())
    .detail("fd", fd)
    .detail("route_delta", delta)
    .require("route_agreement", delta <= derivative_agreement_tol(closed)))
}

fn operator(rec: &MatrixRecord) -> Result<QubitOperator> {
    QubitOperator::from_matrix(rec.to_matrix()?)
}

/// Rerun a check from its witness.
pub fn replay(report: &CheckReport) -> Result<CheckReport> {
    match &report.witness {
        Witness::Hc { x, p, q, eps, case } => check_hc(&operator(x)?, *p, *q, *eps, *case),
        Witness::HcUnnormalized { x, p, q, eps } => check_hc_unnormalized(&operator(x)?, *p, *q, *eps),
        Witness::RefinedGross { x, q, qubit } => check_refined_gross(&operator(x)?, *q, *qubit),
        Witness::DsVector { lambda, d, q } => check_ds_vector(lambda, &d.to_matrix()?, *q),
        Witness::TechLemma { a, b, eps } => check_tech_lemma(*a, *b, *eps),
        Witness::PtSandwich { a, q } => check_pt_sandwich(&operator(a)?, *q),
        Witness::NormCompression { m, p } => check_norm_compression(&m.to_matrix()?, *p),
        Witness::Entrywise2x2 { x, y, p } => check_entrywise_2x2(&x.to_matrix()?, &y.to_matrix()?, *p),
        Witness::Watrous { x, eps, q, p } => check_watrous(&operator(x)?, *eps, *q, *p),
        Witness::DepolarizingHc { x, p, q, rho } => check_depolarizing_hc(&operator(x)?, *p, *q, *rho),
        Witness::ClassicalBec { f, p, q, eps } => check_classical_bec(f, *p, *q, *eps),
        Witness::SchurHorn { x } => check_schur_horn(&operator(x)?),
        Witness::MatrixHolder { a, b, p } => check_matrix_holder(&a.to_matrix()?, &b.to_matrix()?, *p),
        Witness::Kt { a } => check_kt(&operator(a)?),
        Witness::LogSobolev { x, m, eps, q } => check_log_sobolev(&operator(x)?, *m, *eps, *q),
        Witness::Decomposition { x, m, eps, q } => check_decomposition(&operator(x)?, *m, *eps, *q),
        Witness::TwoPointClaim { x, m, eps, q } => check_two_point_claim(&operator(x)?, *m, *eps, *q),
        Witness::NormOracle { x, eps, q } => check_norm_oracle(&operator(x)?, *eps, *q),
        Witness::GPrime { x, t, p, c } => check_g_prime(&operator(x)?, &PathPoint::new(*t, *p, *c)?),
    }
}
