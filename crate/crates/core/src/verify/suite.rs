//! Batch runs: seeded instance generation per check, CSV rows and a JSON summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::PathPoint;
use crate::error::{invalid, Error, Result};
use crate::linalg::{sinkhorn, ComplexMatrix, C64};
use crate::qops::{derive_seed, OperatorSampler, QubitOperator, DEFAULT_QUBIT_CAP};

use super::checks::*;
use super::report::CheckReport;

/// Parameter grids the instance generators draw from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// `(p, q)` pairs with `1 ≤ p ≤ 2 ≤ q`.
    pub hc_case1: Vec<[f64; 2]>,
    /// `(p, q)` pairs with `1 ≤ p ≤ q ≤ 2`.
    pub hc_case2: Vec<[f64; 2]>,
    pub eps: Vec<f64>,
    /// Entropy exponents in `[1, 2]`.
    pub q_entropy: Vec<f64>,
    /// Exponents in `(1, 2]`.
    pub q_open: Vec<f64>,
    /// Schatten exponents for the un-normalized lemmas.
    pub p_schatten: Vec<f64>,
    /// Path base exponents in `(1, 2)`.
    pub p_path: Vec<f64>,
}

const P_CASE1: [f64; 5] = [1.0, 1.25, 1.5, 1.75, 2.0];
const Q_CASE1: [f64; 4] = [2.0, 2.5, 3.0, 4.0];
const PQ_CASE2: [f64; 7] = [1.0, 1.1, 1.25, 1.4, 1.6, 1.8, 2.0];

impl Default for Grids {
    fn default() -> Self {
        let hc_case1 = P_CASE1
            .iter()
            .flat_map(|&p| Q_CASE1.iter().map(move |&q| [p, q]))
            .collect();
        let mut hc_case2 = Vec::new();
        for (i, &p) in PQ_CASE2.iter().enumerate() {
            for &q in &PQ_CASE2[i + 1..] {
                hc_case2.push([p, q]);
            }
        }
        Self {
            hc_case1,
            hc_case2,
            eps: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            q_entropy: vec![1.0, 1.25, 1.5, 1.75, 2.0],
            q_open: vec![1.1, 1.5, 1.9, 2.0],
            p_schatten: vec![1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0],
            p_path: vec![1.1, 1.25, 1.5, 1.75],
        }
    }
}

/// Suite description, readable from JSON. Missing fields take defaults;
/// `checks` defaults to empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub checks: Vec<String>,
    /// Largest qubit count; instance `i` uses `1 + i mod n`, capped per check.
    pub n: usize,
    /// Instances per check.
    pub samples: usize,
    pub seed: u64,
    pub grids: Grids,
    /// Per-check tolerance coefficient overrides.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            checks: Vec::new(),
            n: 3,
            samples: 20,
            seed: 0,
            grids: Grids::default(),
            tolerances: BTreeMap::new(),
        }
    }
}

impl SuiteConfig {
    /// Every registered check.
    pub fn default_suite() -> Self {
        Self {
            checks: CHECKS.iter().map(|(id, _)| id.to_string()).collect(),
            ..Self::default()
        }
    }

    /// Named preset; only `default` and `empty` exist.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default_suite()),
            "empty" => Ok(Self::default()),
            _ => Err(Error::Format(format!("unknown suite preset {name:?}"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        for id in self.checks.iter().chain(self.tolerances.keys()) {
            label_of(id)?;
        }
        if self.n == 0 || self.n > DEFAULT_QUBIT_CAP {
            return Err(invalid("n", self.n as f64, "must lie in 1..=6"));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Format(format!(
                "tolerance for {k} must be finite and >= 0, got {v}"
            )));
        }
        let g = &self.grids;
        let lists: [(&str, &[f64]); 5] = [
            ("eps", &g.eps),
            ("q_entropy", &g.q_entropy),
            ("q_open", &g.q_open),
            ("p_schatten", &g.p_schatten),
            ("p_path", &g.p_path),
        ];
        for (name, v) in lists {
            if v.is_empty() {
                return Err(Error::Format(format!("grid {name} is empty")));
            }
        }
        if g.hc_case1.is_empty() || g.hc_case2.is_empty() {
            return Err(Error::Format("hypercontractivity grids must be nonempty".into()));
        }
        Ok(())
    }
}

fn stream_of(id: &str) -> u64 {
    CHECKS.iter().position(|(k, _)| *k == id).expect("validated id") as u64
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, v: &[T]) -> T {
    v[rng.random_range(0..v.len())]
}

/// Admissible `ε` for an HC pair: the boundary half of the time, otherwise uniform above it.
fn admissible_eps(rng: &mut ChaCha8Rng, min_eps: f64) -> f64 {
    if rng.random_bool(0.5) {
        min_eps
    } else {
        min_eps + (1.0 - min_eps) * rng.random::<f64>()
    }
}

fn real_nonneg_psd(rng: &mut ChaCha8Rng) -> Result<ComplexMatrix> {
    let a = 2.0 * rng.random::<f64>();
    let b = 2.0 * rng.random::<f64>();
    let e = (a * b).sqrt() * rng.random::<f64>();
    ComplexMatrix::from_real_rows(&[&[a, e], &[e, b]])
}

fn random_ds(dim: usize, rng: &mut ChaCha8Rng) -> Result<ComplexMatrix> {
    let seed = ComplexMatrix::from_fn(dim, dim, |_, _| C64::new(0.05 + rng.random::<f64>(), 0.0));
    sinkhorn(&seed, 10_000)
}

struct Instance<'a> {
    cfg: &'a SuiteConfig,
    rng: ChaCha8Rng,
    index: usize,
    sampler: OperatorSampler,
}

impl Instance<'_> {
    fn qubits(&self, cap: usize) -> usize {
        1 + self.index % self.cfg.n.min(cap)
    }

    fn hermitian(&mut self, cap: usize) -> Result<QubitOperator> {
        let n = self.qubits(cap);
        self.sampler.hermitian_with(n, &mut self.rng)
    }

    fn psd(&mut self, cap: usize) -> Result<QubitOperator> {
        let n = self.qubits(cap);
        self.sampler.psd_with(n, &mut self.rng)
    }

    fn general(&mut self, cap: usize) -> Result<QubitOperator> {
        let n = self.qubits(cap);
        self.sampler.general_with(n, &mut self.rng)
    }

    fn run(&mut self, id: &str) -> Result<CheckReport> {
        let g = self.cfg.grids.clone();
        let max = DEFAULT_QUBIT_CAP;
        match id {
            "hc" => {
                let case = 1 + (self.index % 2) as u8;
                let [p, q] = pick(&mut self.rng, if case == 1 { &g.hc_case1 } else { &g.hc_case2 });
                let eps = admissible_eps(&mut self.rng, hc_min_eps(p, q, case)?);
                let x = self.hermitian(4)?;
                check_hc(&x, p, q, eps, case)
            }
            "hc_unnormalized" => {
                let [p, q] = pick(&mut self.rng, &g.hc_case1);
                let eps = admissible_eps(&mut self.rng, hc_min_eps(p, q, 1)?);
                let x = self.hermitian(4)?;
                check_hc_unnormalized(&x, p, q, eps)
            }
            "refined_gross" => {
                let q = pick(&mut self.rng, &g.q_open);
                let x = self.psd(4)?;
                let last = x.n();
                check_refined_gross(&x, q, last)
            }
            "ds_vector" => {
                let q = pick(&mut self.rng, &g.q_open);
                let dim = 1 << self.qubits(4);
                let lambda: Vec<f64> = (0..dim).map(|_| 4.0 * self.rng.random::<f64>().powi(2)).collect();
                let d = random_ds(dim, &mut self.rng)?;
                check_ds_vector(&lambda, &d, q)
            }
            "tech_lemma" => {
                let b = 0.1 + 10.0 * self.rng.random::<f64>();
                let ratio = if self.rng.random_bool(0.2) {
                    16.0
                } else {
                    1.0 + 15.0 * self.rng.random::<f64>()
                };
                let eps = if self.rng.random_bool(0.5) {
                    pick(&mut self.rng, &g.eps)
                } else {
                    self.rng.random()
                };
                check_tech_lemma(ratio * b, b, eps)
            }
            "pt_sandwich" => {
                let q = 1.0 + 3.0 * self.rng.random::<f64>();
                let a = self.psd(4)?;
                check_pt_sandwich(&a, q)
            }
            "norm_compression" => {
                let p = pick(&mut self.rng, &g.p_schatten);
                let m = self.psd(4)?;
                check_norm_compression(m.matrix(), p)
            }
            "entrywise_2x2" => {
                let p = pick(&mut self.rng, &g.p_schatten);
                let x = real_nonneg_psd(&mut self.rng)?;
                let y = x.try_add(&real_nonneg_psd(&mut self.rng)?)?;
                check_entrywise_2x2(&x, &y, p)
            }
            "watrous" => {
                let [p, q] = pick(&mut self.rng, &g.hc_case1);
                let eps = pick(&mut self.rng, &g.eps);
                let x = self.general(3)?;
                check_watrous(&x, eps, q, p)
            }
            "depolarizing_hc" => {
                let grid = if self.index.is_multiple_of(2) {
                    &g.hc_case1
                } else {
                    &g.hc_case2
                };
                let [p, q] = pick(&mut self.rng, grid);
                let top = depolarizing_max_rho(p, q)?;
                let rho = if self.rng.random_bool(0.5) {
                    top
                } else {
                    top * self.rng.random::<f64>()
                };
                let x = self.hermitian(3)?;
                check_depolarizing_hc(&x, p, q, rho)
            }
            "classical_bec" => {
                let pairs: Vec<[f64; 2]> = g
                    .hc_case1
                    .iter()
                    .chain(&g.hc_case2)
                    .copied()
                    .filter(|[p, _]| *p > 1.0)
                    .collect();
                if pairs.is_empty() {
                    return Err(Error::Format("classical check needs a pair with p > 1".into()));
                }
                let [p, q] = pick(&mut self.rng, &pairs);
                let eps = admissible_eps(&mut self.rng, 1.0 - hc_ratio(p, q));
                let dim = 1 << self.qubits(max);
                let f: Vec<f64> = (0..dim).map(|_| 2.0 * self.rng.random::<f64>() - 0.5).collect();
                check_classical_bec(&f, p, q, eps)
            }
            "schur_horn" => {
                let x = self.hermitian(4)?;
                check_schur_horn(&x)
            }
            "matrix_holder" => {
                let p = pick(&mut self.rng, &g.p_schatten);
                let a = self.general(4)?;
                let b = self.sampler.general_with(a.n(), &mut self.rng)?;
                check_matrix_holder(a.matrix(), b.matrix(), p)
            }
            "kt" => {
                let a = self.psd(3)?;
                check_kt(&a)
            }
            "log_sobolev" | "decomposition" | "two_point_claim" => {
                let x = self.psd(3)?;
                let lo = usize::from(id != "log_sobolev");
                let m = self.rng.random_range(lo..=x.n());
                let eps = pick(&mut self.rng, &g.eps);
                let q = pick(&mut self.rng, &g.q_entropy);
                match id {
                    "log_sobolev" => check_log_sobolev(&x, m, eps, q),
                    "decomposition" => check_decomposition(&x, m, eps, q),
                    _ => check_two_point_claim(&x, m, eps, q),
                }
            }
            "norm_oracle" => {
                let eps = pick(&mut self.rng, &g.eps);
                let q = pick(&mut self.rng, &g.p_schatten);
                let x = self.hermitian(3)?;
                check_norm_oracle(&x, eps, q)
            }
            "g_prime" => {
                let p = pick(&mut self.rng, &g.p_path);
                if !(p > 1.0 && p < 2.0) {
                    return Err(invalid("p_path", p, "path exponents must lie in (1, 2)"));
                }
                // q(t) ≤ 2 on c = 2 means t ≤ 2 ln(1/(p−1))
                let t_max = 2.0 * (1.0 / (p - 1.0)).ln();
                let t = t_max * self.rng.random::<f64>();
                let x = self.psd(3)?;
                check_g_prime(&x, &PathPoint::new(t, p, 2.0)?)
            }
            other => Err(Error::UnknownCheck(other.to_string())),
        }
    }
}

/// Run one instance of a check; deterministic in `(cfg.seed, id, index)`.
pub fn run_instance(cfg: &SuiteConfig, id: &str, index: usize) -> Result<CheckReport> {
    label_of(id)?;
    let seed = derive_seed(cfg.seed, stream_of(id), index as u64);
    let mut inst = Instance {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(seed),
        index,
        sampler: OperatorSampler::default(),
    };
    let mut r = inst.run(id)?.param("sample", index as f64);
    if let Some(&coeff) = cfg.tolerances.get(id) {
        r = r.with_tolerance(coeff);
    }
    Ok(r)
}

/// All instances, ordered by (check position in the config, sample index).
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    cfg.validate()?;
    let jobs: Vec<(&str, usize)> = cfg
        .checks
        .iter()
        .flat_map(|id| (0..cfg.samples).map(move |i| (id.as_str(), i)))
        .collect();
    jobs.par_iter().map(|&(id, i)| run_instance(cfg, id, i)).collect()
}

pub const CSV_HEADER: &str = "id,label,sample,params,lhs,rhs,gap,tol,pass";

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per report; floats carry 17 significant digits.
pub fn to_csv(reports: &[CheckReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let sample = r.params.get("sample").map_or(String::new(), |s| format!("{s}"));
        let mut params = r.clone();
        params.params.remove("sample");
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.id,
            r.label,
            sample,
            params.params_string(),
            sci(r.lhs),
            sci(r.rhs),
            sci(r.gap),
            sci(r.tol),
            r.pass
        )
        .expect("string write");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub id: String,
    pub label: String,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Smallest `gap / tol` seen; negative values below −1 are failures.
    pub worst_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub id: String,
    pub sample: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tol: f64,
    pub failed_conditions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<Failure>,
}

impl SuiteSummary {
    pub fn new(seed: u64, reports: &[CheckReport]) -> Self {
        let mut checks: Vec<CheckSummary> = Vec::new();
        let mut failures = Vec::new();
        for r in reports {
            let idx = match checks.iter().position(|c| c.id == r.id) {
                Some(i) => i,
                None => {
                    checks.push(CheckSummary {
                        id: r.id.clone(),
                        label: r.label.clone(),
                        total: 0,
                        passed: 0,
                        failed: 0,
                        worst_gap: f64::INFINITY,
                    });
                    checks.len() - 1
                }
            };
            let c = &mut checks[idx];
            c.total += 1;
            c.worst_gap = c.worst_gap.min(r.gap);
            if r.pass {
                c.passed += 1;
            } else {
                c.failed += 1;
                failures.push(Failure {
                    id: r.id.clone(),
                    sample: r.params.get("sample").copied().unwrap_or(f64::NAN),
                    lhs: r.lhs,
                    rhs: r.rhs,
                    gap: r.gap,
                    tol: r.tol,
                    failed_conditions: r.failed_conditions.clone(),
                });
            }
        }
        let passed = reports.iter().filter(|r| r.pass).count();
        Self {
            seed,
            total: reports.len(),
            passed,
            failed: reports.len() - passed,
            checks,
            failures,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(checks: &[&str], samples: usize, seed: u64) -> SuiteConfig {
        SuiteConfig {
            checks: checks.iter().map(|s| s.to_string()).collect(),
            samples,
            seed,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn empty_config_runs_nothing() {
        assert!(run_suite(&SuiteConfig::default()).unwrap().is_empty());
        let cfg = SuiteConfig::from_json("{}").unwrap();
        assert!(run_suite(&cfg).unwrap().is_empty());
    }

    #[test]
    fn default_covers_many_statements() {
        let cfg = SuiteConfig::default_suite();
        assert!(cfg.checks.len() >= 10);
        assert_eq!(Grids::default().hc_case1.len(), 20);
        assert_eq!(Grids::default().hc_case2.len(), 21);
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(matches!(
            run_suite(&small(&["nope"], 1, 0)),
            Err(Error::UnknownCheck(_))
        ));
        let mut cfg = small(&["kt"], 1, 0);
        cfg.tolerances.insert("bogus".into(), 1e-6);
        assert!(run_suite(&cfg).is_err());
        assert!(SuiteConfig::from_json(r#"{"chekcs": []}"#).is_err());
    }

    #[test]
    fn every_check_passes_small_run() {
        let mut cfg = SuiteConfig::default_suite();
        cfg.samples = 6;
        cfg.seed = 3;
        let reports = run_suite(&cfg).unwrap();
        let summary = SuiteSummary::new(cfg.seed, &reports);
        assert_eq!(summary.total, 6 * CHECKS.len());
        assert!(summary.all_passed(), "{}", summary.to_json());
    }

    #[test]
    fn csv_is_deterministic_and_ordered() {
        let cfg = small(&["hc", "tech_lemma", "norm_oracle"], 5, 11);
        let a = to_csv(&run_suite(&cfg).unwrap());
        let b = to_csv(&run_suite(&cfg).unwrap());
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("hc,erasure-hypercontractivity,0,"));
        assert!(lines[6].starts_with("tech_lemma,"));
        let other = to_csv(&run_suite(&small(&["hc", "tech_lemma", "norm_oracle"], 5, 12)).unwrap());
        assert_ne!(a, other);
    }

    #[test]
    fn instance_independent_of_other_checks() {
        let a = run_suite(&small(&["kt"], 3, 5)).unwrap();
        let b = run_suite(&small(&["hc", "kt"], 3, 5)).unwrap();
        assert_eq!(a[..], b[3..]);
    }

    #[test]
    fn csv_floats_round_trip() {
        let reports = run_suite(&small(&["tech_lemma"], 3, 1)).unwrap();
        let csv = to_csv(&reports);
        for (line, r) in csv.lines().skip(1).zip(&reports) {
            let lhs: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
            assert_eq!(lhs, r.lhs);
        }
    }

    #[test]
    fn tolerance_override_applies() {
        let mut cfg = small(&["norm_oracle"], 2, 0);
        cfg.tolerances.insert("norm_oracle".into(), 1e-3);
        for r in run_suite(&cfg).unwrap() {
            assert_eq!(r.tol, 1e-3);
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SuiteConfig::default_suite();
        assert_eq!(SuiteConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
}
