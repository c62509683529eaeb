use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use lindsim::circuit::{run_algorithm1, Alg1Options, Route};
use lindsim::compressed::{run_algorithm2, Alg2Options};
use lindsim::linalg::{c, trace, CMat, CVec};
use lindsim::oracle::{exact_channel, state_trace_distance, ORACLE_MAX_QUBITS};
use lindsim::trajectory::{evolve_channel_level, evolve_monte_carlo, pure_density, Schedule};
use lindsim::Lindbladian;

use crate::{models, write_output, CliError, CliResult, Format, ModelArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Exact,
    Channel,
    Montecarlo,
    CircuitAlg1,
    CircuitAlg2,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Backend::Channel)]
    pub backend: Backend,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// trajectories (montecarlo, default 1000) or sampled circuits (circuit-alg1, default 200)
    #[arg(long)]
    pub n_traj: Option<usize>,
    /// initial state: a basis index, `plus` or `mixed`
    #[arg(long, default_value = "0")]
    pub init: String,
    /// segment length override (circuit backends)
    #[arg(long)]
    pub r: Option<usize>,
    /// Hamming-weight cutoff (circuit-alg2)
    #[arg(long)]
    pub h: Option<usize>,
    /// dense segment simulation instead of the contracted route (circuit-alg1)
    #[arg(long)]
    pub dense: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

enum Init {
    Pure(CVec),
    Mixed(CMat),
}

impl Init {
    fn rho(&self) -> CMat {
        match self {
            Init::Pure(v) => pure_density(v),
            Init::Mixed(m) => m.clone(),
        }
    }
}

fn parse_init(s: &str, d: usize) -> CliResult<Init> {
    match s {
        "plus" => Ok(Init::Pure(CVec::from_element(d, c(1.0 / (d as f64).sqrt(), 0.0)))),
        "mixed" => Ok(Init::Mixed(CMat::identity(d, d) * c(1.0 / d as f64, 0.0))),
        k => {
            let k: usize = k.parse().map_err(|_| CliError::Usage(format!("bad --init {k:?}")))?;
            if k >= d {
                return Err(CliError::Usage(format!("--init {k} out of range for dimension {d}")));
            }
            let mut v = CVec::zeros(d);
            v[k] = c(1.0, 0.0);
            Ok(Init::Pure(v))
        }
    }
}

fn matrix_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

fn schedule_json(s: &Schedule) -> Value {
    json!({"tau": s.tau, "r": s.r, "delta": s.delta, "lambda_delta": s.lambda_delta()})
}

struct Outcome {
    rho: CMat,
    schedule: Option<Schedule>,
    details: Value,
}

fn evolve(model: &Lindbladian, a: &EvolveArgs, init: &Init) -> CliResult<Outcome> {
    let rho0 = init.rho();
    Ok(match a.backend {
        Backend::Exact => Outcome { rho: exact_channel(model, a.t)?.apply(&rho0), schedule: None, details: json!({}) },
        Backend::Channel => {
            let run = evolve_channel_level(model, a.t, a.eps, &rho0)?;
            Outcome { rho: run.rho, schedule: Some(run.schedule), details: json!({}) }
        }
        Backend::Montecarlo => {
            let Init::Pure(psi) = init else {
                return Err(CliError::Usage("montecarlo needs a pure --init".into()));
            };
            let n = a.n_traj.unwrap_or(1000);
            let run = evolve_monte_carlo(model, a.t, a.eps, psi, n, a.seed)?;
            let se: Vec<Vec<f64>> =
                (0..run.stderr.nrows()).map(|i| (0..run.stderr.ncols()).map(|j| run.stderr[(i, j)]).collect()).collect();
            Outcome { rho: run.rho, schedule: Some(run.schedule), details: json!({"n_traj": n, "stderr": se}) }
        }
        Backend::CircuitAlg1 => {
            let n = a.n_traj.unwrap_or(200);
            let route = if a.dense { Route::Dense } else { Route::Contracted };
            let run = run_algorithm1(model, a.t, a.eps, &rho0, n, a.seed, Alg1Options { r: a.r, route })?;
            Outcome {
                rho: run.rho.clone(),
                schedule: Some(run.schedule),
                details: json!({
                    "n_samples": n,
                    "stderr_frobenius": run.stderr_scale(),
                    "mean_trace": run.mean_trace,
                    "segment_qubits": run.layout.width,
                    "layout": run.layout.arithmetic(),
                    "route": if a.dense { "dense" } else { "contracted" },
                }),
            }
        }
        Backend::CircuitAlg2 => {
            let run = run_algorithm2(model, a.t, a.eps, &rho0, Alg2Options { r: a.r, h: a.h })?;
            Outcome {
                rho: run.rho.clone(),
                schedule: Some(run.schedule),
                details: json!({
                    "h": run.h,
                    "p_trivial": run.p_trivial,
                    "cutoff_tail": run.tail,
                    "segment_norm_loss": run.norm_loss,
                    "logical_qubits": run.logical_qubits,
                    "keys": run.keys,
                }),
            }
        }
    })
}

fn backend_name(b: Backend) -> String {
    b.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

pub fn run(a: EvolveArgs) -> CliResult<()> {
    if !(a.t >= 0.0) || !(a.eps > 0.0) {
        return Err(CliError::Usage(format!("need --t >= 0 and --eps > 0, got t = {}, eps = {}", a.t, a.eps)));
    }
    let model = models::load(&a.model)?;
    let params = model.derived_params()?;
    let init = parse_init(&a.init, model.dim())?;
    let start = Instant::now();
    let out = evolve(&model, &a, &init)?;
    let rho0 = init.rho();
    let exact = if model.n <= ORACLE_MAX_QUBITS { Some(exact_channel(&model, a.t)?.apply(&rho0)) } else { None };
    let distance = match &exact {
        Some(e) => Some(state_trace_distance(&out.rho, e)?),
        None => None,
    };
    let trace_defect = (trace(&out.rho).re - 1.0).abs();
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    let backend = backend_name(a.backend);
    let text = match a.format {
        Format::Json | Format::Table => {
            let doc = json!({
                "backend": backend,
                "model": {"n": model.n, "lambda": params.lambda, "q": params.q, "q0": params.q0, "m": params.m},
                "t": a.t,
                "eps": a.eps,
                "seed": a.seed,
                "schedule": out.schedule.as_ref().map(schedule_json),
                "initial": matrix_json(&rho0),
                "final": matrix_json(&out.rho),
                "exact": exact.as_ref().map(matrix_json),
                "distance_to_exact": distance,
                "trace_defect": trace_defect,
                "details": out.details,
            });
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Csv => {
            let d = out.rho.nrows();
            let mut head = vec!["backend", "t", "eps", "seed", "tau", "r", "distance_to_exact", "trace_defect"]
                .into_iter()
                .map(String::from)
                .collect::<Vec<_>>();
            let (tau, r) = out.schedule.map(|s| (s.tau.to_string(), s.r.to_string())).unwrap_or_default();
            let mut row = vec![
                backend,
                a.t.to_string(),
                a.eps.to_string(),
                a.seed.to_string(),
                tau,
                r,
                distance.map(|x| x.to_string()).unwrap_or_default(),
                trace_defect.to_string(),
            ];
            for i in 0..d {
                for j in 0..d {
                    head.push(format!("rho_{i}_{j}_re"));
                    head.push(format!("rho_{i}_{j}_im"));
                    row.push(out.rho[(i, j)].re.to_string());
                    row.push(out.rho[(i, j)].im.to_string());
                }
            }
            format!("{}\n{}\n", head.join(","), row.join(","))
        }
    };
    write_output(a.out.as_ref(), &text)
}
