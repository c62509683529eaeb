use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::json;

use lindsim::compressed::default_cutoff;
use lindsim::cost::{count_alg1, count_alg2, count_cw16_formula, csv_row, csv_row_cw16, CostParams, CSV_HEADER};
use lindsim::trajectory::Schedule;

use crate::{models, write_output, CliError, CliResult, Format, ModelArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    N,
    M,
    Q,
    T,
    Eps,
}

#[derive(Args, Debug)]
pub struct CostArgs {
    /// model or scenario supplying n, q, q0, m and λ; explicit flags override it
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub q0: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepVar>,
    /// comma-separated sweep values
    #[arg(long, value_delimiter = ',', requires = "sweep")]
    pub values: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Everything a cost point depends on, before the schedule is derived.
#[derive(Debug, Clone, Copy)]
struct Base {
    n: usize,
    q: usize,
    q0: usize,
    m: usize,
    lambda: f64,
    t: f64,
    eps: f64,
}

fn base_from(a: &CostArgs) -> CliResult<Base> {
    let from_model = a.model.model.is_some() || a.model.scenario.is_some();
    let (n, q, q0, m, lambda) = if from_model {
        let model = models::load(&a.model)?;
        let dp = model.derived_params()?;
        (model.n, dp.q, dp.q0, dp.m, dp.lambda)
    } else {
        let q = a.q.ok_or_else(|| CliError::Usage("--q (or --model/--scenario) is required".into()))?;
        (a.model.n, q, q, a.m.unwrap_or(1), 1.0)
    };
    Ok(Base {
        n,
        q: a.q.unwrap_or(q),
        q0: a.q0.unwrap_or(q0),
        m: a.m.unwrap_or(m),
        lambda: a.lambda.unwrap_or(lambda),
        t: a.t,
        eps: a.eps,
    })
}

fn as_count(v: f64, what: &str) -> CliResult<usize> {
    if v < 0.0 || v.fract() != 0.0 {
        return Err(CliError::Usage(format!("sweep value {v} is not a valid {what}")));
    }
    Ok(v as usize)
}

fn point(b: &Base, a: &CostArgs) -> CliResult<CostParams> {
    let mut s = Schedule::new(b.lambda, b.t, b.eps)?;
    if let Some(r) = a.r {
        s = Schedule::with_tau_r(b.lambda, b.t, s.tau, r);
    }
    // without a concrete purification the trivial-branch probability is
    // taken at its guaranteed floor 1 − 3/(2r)
    let p_trivial = (1.0 - 1.5 / s.r as f64).max(1e-3);
    let h = a.h.unwrap_or_else(|| default_cutoff(p_trivial, s.r, s.tau, b.eps)).min(s.r);
    Ok(CostParams { n: b.n, q: b.q, q0: b.q0, m: b.m, t: b.t, eps: b.eps, tau: s.tau, r: s.r, h })
}

pub fn run(a: CostArgs) -> CliResult<()> {
    let base = base_from(&a)?;
    let mut bases = Vec::new();
    match a.sweep {
        None => bases.push(base),
        Some(var) => {
            if a.values.is_empty() {
                return Err(CliError::Usage("--sweep needs --values".into()));
            }
            for &v in &a.values {
                let mut b = base;
                match var {
                    SweepVar::N => {
                        b.n = as_count(v, "qubit count")?;
                        // scenarios are rebuilt so q and λ follow n
                        if let Some(name) = a.model.scenario {
                            let model = models::scenario(name, &a.model, b.n)?;
                            let dp = model.derived_params()?;
                            (b.q, b.q0, b.m, b.lambda) = (dp.q, dp.q0, dp.m, dp.lambda);
                        }
                    }
                    SweepVar::M => b.m = as_count(v, "jump count")?,
                    SweepVar::Q => b.q = as_count(v, "term count")?,
                    SweepVar::T => b.t = v,
                    SweepVar::Eps => b.eps = v,
                }
                bases.push(b);
            }
        }
    }
    let points = bases.iter().map(|b| point(b, &a)).collect::<CliResult<Vec<_>>>()?;
    let text = match a.format {
        Format::Csv | Format::Table => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for p in &points {
                for line in [csv_row(&count_alg1(p)), csv_row(&count_alg2(p)), csv_row_cw16(p)] {
                    s += &line;
                    s.push('\n');
                }
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = points
                .iter()
                .map(|p| json!({"params": p, "alg1": count_alg1(p), "alg2": count_alg2(p), "cw16": count_cw16_formula(p)}))
                .collect();
            serde_json::to_string_pretty(&rows).expect("serializable") + "\n"
        }
    };
    write_output(a.out.as_ref(), &text)
}
