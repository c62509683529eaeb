//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string; the page
//! parses it and draws. The computations live in [`api`] so they can be
//! tested natively.

use wasm_bindgen::prelude::*;

pub mod api {
    use serde_json::{json, Value};

    use lindsim::compressed::{default_cutoff, StructuredPurification};
    use lindsim::cost::{count_alg1, count_alg2, count_cw16_formula, CostParams};
    use lindsim::linalg::{c, CVec};
    use lindsim::model::{amplitude_damping, scenario_xy, ChannelId};
    use lindsim::oracle::exact_channel;
    use lindsim::trajectory::{evolve_channel_level, evolve_monte_carlo, pure_density};
    use lindsim::{Error, Result};

    /// Excited-state population of a damped qubit started in `|1⟩`, sampled
    /// at `points` times in `[0, t_max]` by the exact solution, the mixture
    /// channel and quantum-jump trajectories.
    pub fn decay_curves(gamma: f64, hz: f64, t_max: f64, points: usize, eps: f64, n_traj: usize, seed: u64) -> Result<Value> {
        if points < 2 || points > 200 || n_traj == 0 || n_traj > 20_000 {
            return Err(Error::InvalidModel("need 2..=200 points and 1..=20000 trajectories".into()));
        }
        let model = amplitude_damping(gamma, hz)?;
        let psi = CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let rho0 = pure_density(&psi);
        let (mut ts, mut exact, mut channel, mut mc, mut mc_err) = (vec![], vec![], vec![], vec![], vec![]);
        for k in 0..points {
            let t = t_max * k as f64 / (points - 1) as f64;
            ts.push(t);
            exact.push(exact_channel(&model, t)?.apply(&rho0)[(1, 1)].re);
            channel.push(evolve_channel_level(&model, t, eps, &rho0)?.rho[(1, 1)].re);
            let run = evolve_monte_carlo(&model, t, eps, &psi, n_traj, seed)?;
            mc.push(run.rho[(1, 1)].re);
            mc_err.push(run.stderr[(1, 1)]);
        }
        Ok(json!({"t": ts, "exact": exact, "channel": channel, "montecarlo": mc, "montecarlo_stderr": mc_err}))
    }

    /// Per-channel mixture weights and gadget success probability at
    /// `λδ = 1/(2r)`, where a segment of `r` gadgets keeps `p^r > 1/4`, with
    /// the structured circuit's trivial-branch probability.
    pub fn gadget_probabilities(gamma: f64, hz: f64, r: usize) -> Result<Value> {
        if !(2..=64).contains(&r) {
            return Err(Error::InvalidModel("r must be in 2..=64".into()));
        }
        let model = amplitude_damping(gamma, hz)?;
        let ld = 0.5 / r as f64;
        let mix = model.mixture_distribution()?;
        let sp = StructuredPurification::with_step(&model, ld)?;
        let channels: Vec<Value> = mix
            .ids
            .iter()
            .zip(&mix.weights)
            .map(|(id, w)| {
                let name = match id {
                    ChannelId::F(l) => format!("F{l}"),
                    ChannelId::E(j) => format!("E{j}"),
                };
                json!({"channel": name, "weight": w})
            })
            .collect();
        Ok(json!({
            "r": r,
            "lambda_delta": ld,
            "p": sp.p,
            "p_segment": sp.p.powi(r as i32),
            "channels": channels,
            "p_trivial": sp.p_trivial(),
            "p_trivial_floor": 1.0 - 1.5 / r as f64,
            "default_cutoff": default_cutoff(sp.p_trivial(), r, 1, 0.1),
        }))
    }

    /// Gate totals for the XY chain at `n = 2..=n_max`.
    pub fn cost_curves(n_max: usize, t: f64, eps: f64) -> Result<Value> {
        if !(2..=64).contains(&n_max) {
            return Err(Error::InvalidModel("n_max must be in 2..=64".into()));
        }
        let (mut ns, mut a1, mut a2, mut cw) = (vec![], vec![], vec![], vec![]);
        for n in 2..=n_max {
            let model = scenario_xy(n, 1.0, None)?;
            let p = CostParams::from_model(&model, t, eps, None, Some(3))?;
            ns.push(n);
            a1.push(count_alg1(&p).total);
            a2.push(count_alg2(&p).total);
            cw.push(count_cw16_formula(&p));
        }
        Ok(json!({"n": ns, "alg1": a1, "alg2": a2, "lcu_envelope": cw}))
    }
}

fn export(v: lindsim::Result<serde_json::Value>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn decay_curves(gamma: f64, hz: f64, t_max: f64, points: usize, eps: f64, n_traj: usize, seed: u32) -> Result<String, JsError> {
    export(api::decay_curves(gamma, hz, t_max, points, eps, n_traj, seed as u64))
}

#[wasm_bindgen]
pub fn gadget_probabilities(gamma: f64, hz: f64, r: usize) -> Result<String, JsError> {
    export(api::gadget_probabilities(gamma, hz, r))
}

#[wasm_bindgen]
pub fn cost_curves(n_max: usize, t: f64, eps: f64) -> Result<String, JsError> {
    export(api::cost_curves(n_max, t, eps))
}
