use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use erasure_hc::crg::{
    bound_csv, bound_table, guess_zero_strategy, holder_bound, random_strategy, success_probability,
    success_probability_dense, Strategy,
};
use erasure_hc::entropy::log_sobolev_gap;
use erasure_hc::erasure::{dense_oracle, eps_q_norm, DENSE_CAP};
use erasure_hc::linalg::{io as matrix_io, schatten_norm_normalized};
use erasure_hc::qops::{derive_seed, random_hermitian, random_operator, random_psd};
use erasure_hc::search::{certify, maximize_ratio, scan_monotonicity, SearchBudget};
use erasure_hc::verify::{label_of, run_suite, to_csv, CheckReport, SuiteConfig, SuiteSummary};
use erasure_hc::QubitOperator;

use crate::grid::parse_grid;
use crate::output::{emit, summary_path, write_atomic};
use crate::{Format, OutputArgs};

pub enum Outcome {
    Done,
    Failed(String),
}

type CmdResult = Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Named preset (`default` or `empty`).
    #[arg(long, default_value = "default")]
    suite: String,
    /// JSON suite config; replaces the preset, flags still override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Restrict to these check ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// `id=coeff` tolerance override; repeatable.
    #[arg(long = "tol-override", value_name = "ID=COEFF")]
    tol_override: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn verify(a: VerifyArgs) -> CmdResult {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            SuiteConfig::from_json(&text).map_err(err)?
        }
        None => SuiteConfig::preset(&a.suite).map_err(err)?,
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(s) = a.samples {
        cfg.samples = s;
    }
    if let Some(c) = a.checks {
        cfg.checks = c;
    }
    for item in &a.tol_override {
        let (id, v) = item
            .split_once('=')
            .ok_or_else(|| format!("tolerance override {item:?} must be id=coeff"))?;
        let v: f64 = v.parse().map_err(|_| format!("bad tolerance in {item:?}"))?;
        cfg.tolerances.insert(id.to_string(), v);
    }
    let reports = run_suite(&cfg).map_err(err)?;
    let summary = SuiteSummary::new(cfg.seed, &reports);
    let body = match a.output.format {
        Format::Csv => to_csv(&reports),
        Format::Structured => to_json(&reports),
    };
    emit(a.output.out.as_deref(), &body)?;
    match &a.output.out {
        Some(p) => write_atomic(&summary_path(p), &(summary.to_json() + "\n"))?,
        None => eprintln!("{}", summary.to_json()),
    }
    eprintln!("passed {}/{} instances", summary.passed, summary.total);
    if summary.all_passed() {
        return Ok(Outcome::Done);
    }
    let mut msg = format!("{} of {} instances failed:", summary.failed, summary.total);
    for f in summary.failures.iter().take(20) {
        write!(msg, "\n  {} sample {} gap {:e} tol {:e}", f.id, f.sample, f.gap, f.tol).unwrap();
        if !f.failed_conditions.is_empty() {
            write!(msg, " conditions {:?}", f.failed_conditions).unwrap();
        }
    }
    Ok(Outcome::Failed(msg))
}

#[derive(Debug, Args)]
pub struct EntropySweepArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Single prefix size; every m in 0..=n when absent.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "eps", default_value = "0,0.25,0.5,0.75,1")]
    eps: String,
    #[arg(long = "q", default_value = "1,1.25,1.5,1.75,2")]
    q: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Serialize)]
struct SweepRow {
    sample: usize,
    m: usize,
    eps: f64,
    q: f64,
    lhs: f64,
    rhs: f64,
    gap: f64,
    pass: bool,
}

pub fn entropy_sweep(a: EntropySweepArgs) -> CmdResult {
    let eps = parse_grid(&a.eps)?;
    let qs = parse_grid(&a.q)?;
    let ms: Vec<usize> = match a.m {
        Some(m) if m > a.n => return Err(format!("m = {m} exceeds n = {}", a.n)),
        Some(m) => vec![m],
        None => (0..=a.n).collect(),
    };
    let per_sample: Vec<Vec<SweepRow>> = (0..a.samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<SweepRow>, String> {
            let x = random_psd(a.n, derive_seed(a.seed, 0, i as u64)).map_err(err)?;
            let mut rows = Vec::new();
            for &m in &ms {
                for &e in &eps {
                    for &q in &qs {
                        let r: CheckReport = log_sobolev_gap(&x, m, e, q).map_err(err)?;
                        rows.push(SweepRow {
                            sample: i,
                            m,
                            eps: e,
                            q,
                            lhs: r.lhs,
                            rhs: r.rhs,
                            gap: r.gap,
                            pass: r.pass,
                        });
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<SweepRow> = per_sample.into_iter().flatten().collect();
    let body = match a.output.format {
        Format::Structured => to_json(&rows),
        Format::Csv => {
            let label = label_of("log_sobolev").map_err(err)?;
            let mut s = String::from("id,label,sample,m,eps,q,lhs,rhs,gap,pass\n");
            for r in &rows {
                writeln!(
                    s,
                    "log_sobolev,{label},{},{},{},{},{},{},{},{}",
                    r.sample,
                    r.m,
                    sci(r.eps),
                    sci(r.q),
                    sci(r.lhs),
                    sci(r.rhs),
                    sci(r.gap),
                    r.pass
                )
                .unwrap();
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &body)?;
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    #[arg(long, default_value_t = 0.995)]
    decay: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            restarts: self.restarts,
            iterations: self.iterations,
            initial_step: self.step,
            decay: self.decay,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct SearchRatioArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    eps: f64,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn search_ratio(a: SearchRatioArgs) -> CmdResult {
    let cand = maximize_ratio(a.n, a.p, a.q, a.eps, &a.budget.budget()).map_err(err)?;
    let cand = certify(&cand).map_err(err)?;
    let body = match a.output.format {
        Format::Structured => to_json(&cand),
        Format::Csv => format!(
            "n,p,q,eps,objective,certified\n{},{},{},{},{},{}\n",
            a.n,
            sci(a.p),
            sci(a.q),
            sci(a.eps),
            sci(cand.objective),
            cand.certified
        ),
    };
    emit(a.output.out.as_deref(), &body)?;
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct SearchMonotoneArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Hold q(t) fixed at this value by solving the base exponent per t (`--p` is then unused).
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "t-grid", default_value = "0.1:1:0.1")]
    t_grid: String,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn search_monotone(a: SearchMonotoneArgs) -> CmdResult {
    let ts = parse_grid(&a.t_grid)?;
    let found = scan_monotonicity(a.n, a.p, a.c, a.q, &ts, &a.budget.budget()).map_err(err)?;
    let certified = found.iter().map(certify).collect::<Result<Vec<_>, _>>().map_err(err)?;
    eprintln!("{} candidate(s) with positive derivative", certified.len());
    let body = match a.output.format {
        Format::Structured => to_json(&certified),
        Format::Csv => {
            let mut s = String::from("t,p,c,q,g_prime_closed,g_prime_fd,certified\n");
            for c in &certified {
                if let erasure_hc::search::Objective::PathDerivative { t, p, c: cc } = c.objective_kind {
                    writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        sci(t),
                        sci(p),
                        sci(cc),
                        sci(c.diagnostics["q"]),
                        sci(c.objective),
                        sci(c.diagnostics["g_prime_fd"]),
                        c.certified
                    )
                    .unwrap();
                }
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &body)?;
    Ok(Outcome::Done)
}

#[derive(Debug, Args)]
pub struct CrgBoundArgs {
    /// Erasure probabilities (value, list or range).
    #[arg(long)]
    eps: String,
    /// Failure exponents (value, list or range).
    #[arg(long, visible_alias = "gamma-grid")]
    gamma: String,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn crg_bound(a: CrgBoundArgs) -> CmdResult {
    let rows = bound_table(&parse_grid(&a.eps)?, &parse_grid(&a.gamma)?, a.k, a.c).map_err(err)?;
    let body = match a.output.format {
        Format::Csv => bound_csv(&rows),
        Format::Structured => to_json(&rows),
    };
    emit(a.output.out.as_deref(), &body)?;
    Ok(Outcome::Done)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Protocol {
    GuessZero,
    Random,
}

#[derive(Debug, Args)]
pub struct CrgSimArgs {
    /// Strategy JSON; overrides --protocol.
    #[arg(long)]
    strategy: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "guess-zero")]
    protocol: Protocol,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value = "0:1:0.25")]
    eps: String,
    /// Hölder exponent for the bound column.
    #[arg(long, default_value_t = 1.5)]
    q: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    outcomes: usize,
    #[arg(long, default_value_t = 1)]
    messages: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Serialize)]
struct SimRow {
    eps: f64,
    success: f64,
    holder_bound: f64,
    success_dense: Option<f64>,
}

pub fn crg_sim(a: CrgSimArgs) -> CmdResult {
    let strat = match &a.strategy {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Strategy::from_json(&text).map_err(err)?
        }
        None => match a.protocol {
            Protocol::GuessZero => guess_zero_strategy(a.n).map_err(err)?,
            Protocol::Random => random_strategy(a.n, a.outcomes, a.messages, a.seed).map_err(err)?,
        },
    };
    let rows = parse_grid(&a.eps)?
        .into_iter()
        .map(|e| -> Result<SimRow, String> {
            let dense = if strat.n() <= 2 {
                Some(
                    success_probability_dense(strat.n(), strat.alice(), &strat.dense_bob().map_err(err)?, e)
                        .map_err(err)?,
                )
            } else {
                None
            };
            Ok(SimRow {
                eps: e,
                success: success_probability(&strat, e).map_err(err)?,
                holder_bound: holder_bound(&strat, e, a.q).map_err(err)?,
                success_dense: dense,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let body = match a.output.format {
        Format::Structured => to_json(&rows),
        Format::Csv => {
            let mut s = String::from("eps,success,holder_bound,success_dense\n");
            for r in &rows {
                let d = r.success_dense.map(sci).unwrap_or_default();
                writeln!(s, "{},{},{},{d}", sci(r.eps), sci(r.success), sci(r.holder_bound)).unwrap();
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &body)?;
    Ok(Outcome::Done)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RandomKind {
    Hermitian,
    Psd,
    General,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// Matrix JSON (`rows`, `cols`, `re`, `im`).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Sample a random operator instead of reading one.
    #[arg(long, value_enum)]
    random: Option<RandomKind>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    q: f64,
    /// Also report the normalized Schatten p-norm.
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Serialize)]
struct NormRow {
    n: usize,
    eps: f64,
    q: f64,
    eps_q_norm: f64,
    dense_oracle: Option<f64>,
    p: Option<f64>,
    schatten_p: Option<f64>,
}

pub fn norm(a: NormArgs) -> CmdResult {
    let x = match (&a.matrix, a.random) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let (m, _) = matrix_io::from_json(&text).map_err(err)?;
            QubitOperator::from_matrix(m).map_err(err)?
        }
        (None, Some(kind)) => match kind {
            RandomKind::Hermitian => random_hermitian(a.n, a.seed),
            RandomKind::Psd => random_psd(a.n, a.seed),
            RandomKind::General => random_operator(a.n, a.seed),
        }
        .map_err(err)?,
        (None, None) => return Err("give --matrix or --random".into()),
    };
    let row = NormRow {
        n: x.n(),
        eps: a.eps,
        q: a.q,
        eps_q_norm: eps_q_norm(&x, a.eps, a.q).map_err(err)?,
        dense_oracle: if x.n() <= DENSE_CAP {
            Some(dense_oracle(&x, a.eps, a.q).map_err(err)?)
        } else {
            None
        },
        p: a.p,
        schatten_p: a
            .p
            .map(|p| schatten_norm_normalized(x.matrix(), p))
            .transpose()
            .map_err(err)?,
    };
    let body = match a.output.format {
        Format::Structured => to_json(&row),
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
            format!(
                "n,eps,q,eps_q_norm,dense_oracle,p,schatten_p\n{},{},{},{},{},{},{}\n",
                row.n,
                sci(row.eps),
                sci(row.q),
                sci(row.eps_q_norm),
                opt(row.dense_oracle),
                opt(row.p),
                opt(row.schatten_p)
            )
        }
    };
    emit(a.output.out.as_deref(), &body)?;
    Ok(Outcome::Done)
}
