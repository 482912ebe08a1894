use rayon::prelude::*;
use serde_json::{json, Value};

use shiftbc::applications::{
    entropy_exact, entropy_smb, exponent_fit, replicate_seed, sampled_hitting_time,
    sampled_max_log_distance, HittingTimeRecord, Replicate,
};
use shiftbc::bc::{envelope_check, run_shift, ConvergenceReport, RunOptions};
use shiftbc::index::{check_assumption_i, check_assumption_ii, AssumptionReport, Verdict};
use shiftbc::processes::{
    gauss_entropy, mixing_oracle_bruteforce, phi_exact, psi_exact, MixingKind, ProcessModel,
};
use shiftbc::symbolic::DistanceParams;
use shiftbc::Error;

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Mix,
    CheckQ,
    BcRun,
    Entropy,
    Maxlog,
    Hit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Mix => "mix",
            Command::CheckQ => "check-q",
            Command::BcRun => "bc-run",
            Command::Entropy => "entropy",
            Command::Maxlog => "maxlog",
            Command::Hit => "hit",
        }
    }
}

/// Why a command stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum Failure {
    Core(Error),
    /// The index family did not pass its checks.
    Assumption(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Assumption(_) => 2,
            Failure::Core(e) => match e {
                Error::Resource(_) => 3,
                Error::Range { .. } | Error::Resolution(_) => 4,
                _ => 2,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Assumption(_) => "assumption",
            Failure::Core(e) => match e {
                Error::Argument(_) => "argument",
                Error::Model(_) => "model",
                Error::Unsupported(_) => "unsupported",
                Error::Range { .. } => "range",
                Error::Resolution(_) => "resolution",
                Error::Resource(_) => "resource",
                Error::Invariant(_) => "invariant",
                Error::InsufficientData(_) => "insufficient_data",
            },
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Assumption(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Rows of one command, plus its summary. `failure` is set when the rows
/// stop early or the summary could not be completed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Value,
    pub failure: Option<Failure>,
}

impl Outcome {
    fn failed(header: Vec<&'static str>, failure: Failure) -> Self {
        Outcome {
            header,
            rows: Vec::new(),
            summary: Value::Null,
            failure: Some(failure),
        }
    }
}

/// Runs `f` on `0..n` in a pool of `threads` workers; results come back in
/// index order whatever the completion order.
fn par_map<T: Send>(threads: usize, n: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| (0..n).into_par_iter().map(f).collect())
}

/// Keeps the successes before the first failure.
fn split_ok<T>(results: Vec<Result<T, Error>>) -> (Vec<T>, Option<Failure>) {
    let mut ok = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => return (ok, Some(Failure::Core(e))),
        }
    }
    (ok, None)
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    })
}

pub fn run(command: Command, cfg: &ExperimentConfig, threads: usize) -> Outcome {
    match command {
        Command::Mix => mix(cfg),
        Command::CheckQ => check_q(cfg),
        Command::BcRun => bc_run(cfg, threads),
        Command::Entropy => entropy(cfg),
        Command::Maxlog => maxlog(cfg, threads),
        Command::Hit => hit(cfg, threads),
    }
}

fn mix(cfg: &ExperimentConfig) -> Outcome {
    let header = vec!["k", "phi", "psi", "phi_oracle", "psi_oracle"];
    let model = match cfg.model.build() {
        Ok(m) => m,
        Err(e) => return Outcome::failed(header, e.into()),
    };
    let mut rows = Vec::new();
    let (mut phi_sum, mut psi_sum) = (0.0, 0.0);
    for k in 1..=cfg.k_max {
        let row = (|| -> Result<Vec<Value>, Error> {
            let phi = phi_exact(&model, k)?;
            let psi = psi_exact(&model, k)?;
            phi_sum += phi;
            psi_sum += psi;
            let (po, so) = match cfg.oracle_max_len {
                Some(len) => (
                    num(mixing_oracle_bruteforce(&model, MixingKind::Phi, k, len)?),
                    num(mixing_oracle_bruteforce(&model, MixingKind::Psi, k, len)?),
                ),
                None => (Value::Null, Value::Null),
            };
            Ok(vec![json!(k), num(phi), num(psi), po, so])
        })();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Outcome {
                    header,
                    rows,
                    summary: Value::Null,
                    failure: Some(e.into()),
                }
            }
        }
    }
    Outcome {
        header,
        rows,
        summary: json!({
            "model": model.name(),
            "k_max": cfg.k_max,
            "provenance": "exact_formula",
            "oracle_max_len": cfg.oracle_max_len,
            "phi_partial_sum": num(phi_sum),
            "psi_partial_sum": num(psi_sum),
        }),
        failure: None,
    }
}

fn report_row(r: &AssumptionReport) -> Vec<Value> {
    let (verdict, witness) = match &r.verdict {
        Verdict::Pass => ("pass", Value::Null),
        Verdict::Fail { witness } => ("fail", json!(witness.to_string())),
    };
    vec![
        json!(r.condition),
        json!(r.horizon),
        json!(r.k_observed),
        json!(r.k),
        json!(r.tail_from),
        json!(verdict),
        witness,
    ]
}

fn first_failure(reports: &[AssumptionReport]) -> Option<Failure> {
    reports.iter().find_map(|r| match &r.verdict {
        Verdict::Pass => None,
        Verdict::Fail { witness } => Some(Failure::Assumption(format!(
            "{:?} check failed at horizon {}: {witness}",
            r.condition, r.horizon
        ))),
    })
}

fn check_family(cfg: &ExperimentConfig, horizon: u64) -> Result<Vec<AssumptionReport>, Error> {
    let family = cfg.family()?;
    Ok(vec![
        check_assumption_i(&family, horizon)?,
        check_assumption_ii(&family, horizon)?,
    ])
}

fn check_q(cfg: &ExperimentConfig) -> Outcome {
    let header = vec![
        "condition",
        "horizon",
        "k_observed",
        "k",
        "tail_from",
        "verdict",
        "witness",
    ];
    match check_family(cfg, cfg.horizon) {
        Ok(reports) => Outcome {
            header,
            rows: reports.iter().map(report_row).collect(),
            summary: json!({ "family": cfg.family, "reports": reports }),
            failure: first_failure(&reports),
        },
        Err(e) => Outcome::failed(header, e.into()),
    }
}

/// Refuses runs whose family has not passed both checks on a horizon of at
/// least `needed`.
fn guard_family(cfg: &ExperimentConfig, needed: u64) -> Result<Vec<AssumptionReport>, Failure> {
    let reports = check_family(cfg, cfg.horizon.max(needed))?;
    match first_failure(&reports) {
        Some(f) => Err(f),
        None => Ok(reports),
    }
}

fn bc_run(cfg: &ExperimentConfig, threads: usize) -> Outcome {
    let header = vec![
        "replicate",
        "N",
        "S_N",
        "E_N",
        "ratio",
        "gap",
        "envelope_ref",
        "seed",
        "stream",
    ];
    let setup = (|| -> Result<_, Failure> {
        let model = cfg.model.build()?;
        let family = cfg.family()?;
        let reports = guard_family(cfg, cfg.n)?;
        Ok((model, family, reports))
    })();
    let (model, family, reports) = match setup {
        Ok(s) => s,
        Err(f) => return Outcome::failed(header, f),
    };
    let options = RunOptions {
        epsilon: cfg.epsilon,
        coordinate_budget: cfg.coordinate_budget,
    };
    let results = par_map(threads, cfg.replicates, |rep| {
        let schedule = cfg.schedule(
            &model,
            family.ell(),
            cfg.n,
            replicate_seed(cfg.seed, rep, 1),
        )?;
        run_shift(
            &model,
            cfg.sidedness,
            &schedule,
            &family,
            cfg.n,
            replicate_seed(cfg.seed, rep, 0),
            options,
        )
    });
    let (reports_ok, failure) = split_ok(results);
    let mut rows = Vec::new();
    let mut per = Vec::new();
    let (mut within, mut clean, mut stable) = (0u64, 0u64, 0u64);
    for (rep, r) in reports_ok.iter().enumerate() {
        for row in &r.rows {
            rows.push(vec![
                json!(rep),
                json!(row.n),
                json!(row.s),
                num(row.e),
                num(row.ratio),
                num(row.gap),
                row.envelope_ref.map(num).unwrap_or(Value::Null),
                json!(r.seed.seed),
                json!(r.seed.stream),
            ]);
        }
        let summary = replicate_summary(rep as u64, r, cfg);
        within += summary["within_tolerance"].as_bool().unwrap_or(false) as u64;
        clean += (summary["envelope"]["violations"].as_u64() == Some(0)) as u64;
        stable += summary["stable_last_decade"].as_bool().unwrap_or(false) as u64;
        per.push(summary);
    }
    Outcome {
        header,
        rows,
        summary: json!({
            "model": model.name(),
            "n": cfg.n,
            "replicates": cfg.replicates,
            "tolerance": cfg.tolerance,
            "envelope_c": cfg.c,
            "epsilon": cfg.epsilon,
            "assumptions": reports,
            "within_tolerance": cfg.tolerance.map(|_| within),
            "envelope_clean": clean,
            "stable_last_decade": stable,
            "per_replicate": per,
        }),
        failure,
    }
}

fn replicate_summary(rep: u64, r: &ConvergenceReport, cfg: &ExperimentConfig) -> Value {
    let last = r.last();
    let decade = (last.n >= 10)
        .then(|| r.row(last.n / 10))
        .flatten()
        .map(|row| row.s);
    let envelope = match envelope_check(r, cfg.c, cfg.epsilon) {
        Ok(env) => json!(env),
        Err(e) => json!({ "error": e.to_string() }),
    };
    json!({
        "replicate": rep,
        "seed": r.seed.seed,
        "stream": r.seed.stream,
        "s_n": last.s,
        "e_n": num(last.e),
        "ratio": num(last.ratio),
        "within_tolerance": cfg.tolerance.map(|t| (last.ratio - 1.0).abs() <= t),
        "s_decade": decade,
        "stable_last_decade": decade.map(|s| s == last.s),
        "envelope": envelope,
    })
}

fn entropy(cfg: &ExperimentConfig) -> Outcome {
    let header = vec!["radius", "replicate", "seed", "stream", "value"];
    let model = match cfg.model.build() {
        Ok(m) => m,
        Err(e) => return Outcome::failed(header, e.into()),
    };
    let mut rows = Vec::new();
    let mut means = Vec::new();
    for &radius in &cfg.radii {
        match entropy_smb(&model, cfg.sidedness, radius, cfg.replicates, cfg.seed) {
            Ok(rep) => {
                for (i, e) in rep.estimates.iter().enumerate() {
                    rows.push(vec![
                        json!(radius),
                        json!(i),
                        json!(e.seed.seed),
                        json!(e.seed.stream),
                        num(e.value),
                    ]);
                }
                means.push(
                    json!({ "radius": radius, "mean": num(rep.mean()), "divisor": rep.divisor }),
                );
            }
            Err(e) => {
                return Outcome {
                    header,
                    rows,
                    summary: Value::Null,
                    failure: Some(e.into()),
                }
            }
        }
    }
    Outcome {
        header,
        rows,
        summary: json!({
            "model": model.name(),
            "exact_h": entropy_exact(&model).ok().map(num),
            "reference_h": reference_entropy(&model).map(num),
            "replicates": cfg.replicates,
            "means": means,
        }),
        failure: None,
    }
}

/// Exact entropy where a closed form exists.
fn reference_entropy(model: &ProcessModel) -> Option<f64> {
    entropy_exact(model)
        .ok()
        .or_else(|| model.is_gauss().then(gauss_entropy))
}

fn maxlog(cfg: &ExperimentConfig, threads: usize) -> Outcome {
    let header = vec!["replicate", "N", "M_N", "M_N_over_ln_N", "radius"];
    let setup = (|| -> Result<_, Failure> {
        let model = cfg.model.build()?;
        let family = cfg.family()?;
        let params = DistanceParams::new(cfg.gamma)?;
        guard_family(cfg, cfg.n)?;
        Ok((model, family, params))
    })();
    let (model, family, params) = match setup {
        Ok(s) => s,
        Err(f) => return Outcome::failed(header, f),
    };
    let results = par_map(threads, cfg.replicates, |rep| {
        sampled_max_log_distance(
            &model,
            cfg.sidedness,
            &family,
            cfg.n,
            &params,
            cfg.target_radius,
            Replicate::new(cfg.seed, rep),
        )
    });
    let (traces, failure) = split_ok(results);
    let mut rows = Vec::new();
    for (rep, t) in traces.iter().enumerate() {
        for &(n, m, r) in &t.checkpoints {
            rows.push(vec![
                json!(rep),
                json!(n),
                num(m),
                if n > 1 {
                    num(m / (n as f64).ln())
                } else {
                    Value::Null
                },
                json!(r),
            ]);
        }
    }
    let medians: Vec<Value> = traces
        .first()
        .map(|t| {
            t.checkpoints
                .iter()
                .map(|c| c.0)
                .filter(|&n| n > 1 && (is_power_of_ten(n) || n == cfg.n))
                .map(|n| {
                    let ratios: Vec<f64> = traces
                        .iter()
                        .filter_map(|t| t.at(n))
                        .map(|m| m / (n as f64).ln())
                        .collect();
                    json!({ "n": n, "median_ratio": median(ratios).map(num) })
                })
                .collect()
        })
        .unwrap_or_default();
    let limit = entropy_exact(&model)
        .ok()
        .map(|h| num(cfg.gamma / (2.0 * family.ell() as f64 * h)));
    Outcome {
        header,
        rows,
        summary: json!({
            "model": model.name(),
            "n": cfg.n,
            "gamma": cfg.gamma,
            "replicates": cfg.replicates,
            "limit": limit,
            "medians": medians,
        }),
        failure,
    }
}

fn is_power_of_ten(mut n: u64) -> bool {
    while n >= 10 && n.is_multiple_of(10) {
        n /= 10;
    }
    n == 1
}

fn hit(cfg: &ExperimentConfig, threads: usize) -> Outcome {
    let header = vec![
        "n",
        "tau",
        "censored",
        "omega_seed",
        "omega_stream",
        "target_seed",
        "target_stream",
    ];
    let setup = (|| -> Result<_, Failure> {
        let model = cfg.model.build()?;
        let family = cfg.family()?;
        guard_family(cfg, cfg.cap)?;
        Ok((model, family))
    })();
    let (model, family) = match setup {
        Ok(s) => s,
        Err(f) => return Outcome::failed(header, f),
    };
    let per_radius = cfg.replicates;
    let jobs = cfg.radii.len() as u64 * per_radius;
    let results = par_map(threads, jobs, |job| {
        sampled_hitting_time(
            &model,
            cfg.sidedness,
            &family,
            cfg.radii[(job / per_radius) as usize],
            cfg.cap,
            Replicate::new(cfg.seed, job),
        )
    });
    let (records, failure) = split_ok(results);
    let rows = records.iter().map(record_row).collect();
    if failure.is_some() {
        return Outcome {
            header,
            rows,
            summary: Value::Null,
            failure,
        };
    }
    let target = entropy_exact(&model)
        .ok()
        .map(|h| 2.0 * family.ell() as f64 * h);
    match exponent_fit(&records) {
        Ok(fit) => Outcome {
            header,
            rows,
            summary: json!({
                "model": model.name(),
                "cap": cfg.cap,
                "replicates_per_radius": per_radius,
                "target": target.map(num),
                "fit": fit,
            }),
            failure: None,
        },
        Err(e) => Outcome {
            header,
            rows,
            summary: Value::Null,
            failure: Some(e.into()),
        },
    }
}

fn record_row(r: &HittingTimeRecord) -> Vec<Value> {
    let seeds = r.seeds.expect("sampled records carry seeds");
    vec![
        json!(r.radius),
        json!(r.tau),
        json!(r.censored()),
        json!(seeds.omega.seed),
        json!(seeds.omega.stream),
        json!(seeds.target.seed),
        json!(seeds.target.stream),
    ]
}
