//! The mixture channel `𝓔 = Σ_l (T_{0l}/λ)𝓕_l + Σ_j (c_j²/λ)𝓔_j`, its exact
//! remainder against `I + δ𝓛`, the channel-level Algorithm 1 and a
//! Monte Carlo wavefunction backend.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, identity, kron, conj, max_abs, trace, CMat, CVec, C64, ZERO};
use crate::model::{ChannelId, ChannelMixture, Lindbladian};
use crate::oracle::{first_order_map, ChannelRep};

#[derive(Debug, Clone)]
pub struct IndividualChannel {
    pub id: ChannelId,
    pub kraus: Vec<CMat>,
    /// `‖Σ_k A_k†A_k − I‖₁`
    pub trace_defect: f64,
}

impl IndividualChannel {
    pub fn superop(&self) -> CMat {
        let d = self.kraus[0].nrows();
        let mut s = CMat::zeros(d * d, d * d);
        for k in &self.kraus {
            s += kron(&conj(k), k);
        }
        s
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }
}

fn check_step(lambda_delta: f64) -> Result<()> {
    if !(lambda_delta < 0.5) || lambda_delta < 0.0 {
        return Err(Error::StepTooLarge { lambda_delta, limit: 0.5 });
    }
    Ok(())
}

/// `𝓕_l` with Kraus `I − iλδV_{0l}` and `𝓔_j` with Kraus
/// `A_{j0} = I − (λδ/2c_j²)L_j†L_j`, `A_{j1} = √(λδ)/c_j · L_j`.
pub fn build_individual_channels(model: &Lindbladian, delta: f64) -> Result<Vec<IndividualChannel>> {
    let p = model.derived_params()?;
    let ld = p.lambda * delta;
    check_step(ld)?;
    let d = model.dim();
    let id = identity(d);
    let mut out = Vec::with_capacity(p.q0 + p.m);
    for (l, t) in model.hamiltonian.terms.iter().enumerate() {
        let v = t.unitary_part().to_dense(model.n)?;
        let k = &id - v * c(0.0, ld);
        out.push(finish(ChannelId::F(l), vec![k]));
    }
    for (j, l) in model.jumps.iter().enumerate() {
        let ld_m = l.to_dense();
        let cj = p.c[j];
        let ldl = ld_m.adjoint() * &ld_m;
        let a0 = &id - ldl * c(ld / (2.0 * cj * cj), 0.0);
        let a1 = ld_m * c(ld.sqrt() / cj, 0.0);
        out.push(finish(ChannelId::E(j), vec![a0, a1]));
    }
    Ok(out)
}

fn finish(id: ChannelId, kraus: Vec<CMat>) -> IndividualChannel {
    let d = kraus[0].nrows();
    let mut s = -identity(d);
    for k in &kraus {
        s += k.adjoint() * k;
    }
    let trace_defect = crate::linalg::trace_norm(&s);
    IndividualChannel { id, kraus, trace_defect }
}

pub fn mixture_channel(model: &Lindbladian, delta: f64) -> Result<ChannelRep> {
    let chans = build_individual_channels(model, delta)?;
    let mix = model.mixture_distribution()?;
    mixture_of(&chans, &mix)
}

pub fn mixture_of(chans: &[IndividualChannel], mix: &ChannelMixture) -> Result<ChannelRep> {
    let d = chans[0].kraus[0].nrows();
    let mut s = CMat::zeros(d * d, d * d);
    for (ch, w) in chans.iter().zip(&mix.weights) {
        s += ch.superop() * c(*w, 0.0);
    }
    ChannelRep::from_superop(s)
}

/// Superoperator of `R(ρ) = Σ_l T_{0l}V_{0l}ρV_{0l}† + ¼Σ_j (L_j†L_j)ρ(L_j†L_j)/c_j²`.
pub fn remainder_superop(model: &Lindbladian) -> Result<CMat> {
    let d = model.dim();
    let p = model.derived_params()?;
    let mut s = CMat::zeros(d * d, d * d);
    for t in &model.hamiltonian.terms {
        let v = t.unitary_part().to_dense(model.n)?;
        s += kron(&conj(&v), &v) * c(t.weight, 0.0);
    }
    for (l, cj) in model.jumps_dense().iter().zip(&p.c) {
        let k = l.adjoint() * l;
        s += kron(&conj(&k), &k) * c(0.25 / (cj * cj), 0.0);
    }
    Ok(s)
}

/// Max-abs residual of `S(𝓔) − S(I+δ𝓛) − λδ²S(R)`.
pub fn remainder_identity_check(model: &Lindbladian, delta: f64) -> Result<f64> {
    let lambda = model.lambda()?;
    let e = mixture_channel(model, delta)?;
    let f = first_order_map(model, delta)?;
    let r = remainder_superop(model)?;
    Ok(max_abs(&(e.superop - f.superop - r * c(lambda * delta * delta, 0.0))))
}

/// Segment schedule: `τ = ⌈2λt⌉` segments of `r` steps, `r` the smallest
/// power of two with `r ≥ τ/ε`, and `δ = t/(τr)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub tau: usize,
    pub r: usize,
    pub delta: f64,
    pub lambda: f64,
}

impl Schedule {
    pub fn new(lambda: f64, t: f64, eps: f64) -> Result<Self> {
        if !(t >= 0.0) || !(eps > 0.0) {
            return Err(Error::InvalidModel(format!("need t >= 0 and eps > 0, got t = {t}, eps = {eps}")));
        }
        let tau = (2.0 * lambda * t).ceil() as usize;
        Ok(Self::with_tau_r(lambda, t, tau, min_r(tau, eps)))
    }

    pub fn with_tau_r(lambda: f64, t: f64, tau: usize, r: usize) -> Self {
        let delta = if tau == 0 { 0.0 } else { t / (tau * r) as f64 };
        Schedule { tau, r, delta, lambda }
    }

    pub fn steps(&self) -> usize {
        self.tau * self.r
    }

    pub fn lambda_delta(&self) -> f64 {
        self.lambda * self.delta
    }
}

/// Smallest power of two `r` with `r·ε ≥ τ`.
pub fn min_r(tau: usize, eps: f64) -> usize {
    let mut r = 1usize;
    while (r as f64) * eps < tau as f64 {
        r *= 2;
    }
    r
}

#[derive(Debug, Clone)]
pub struct ChannelEvolution {
    pub rho: CMat,
    pub schedule: Schedule,
    /// `|Tr ρ − 1|` of the output (no renormalization is applied).
    pub trace_error: f64,
}

/// Applies the deterministic mixture `τr` times.
pub fn evolve_channel_level(model: &Lindbladian, t: f64, eps: f64, rho0: &CMat) -> Result<ChannelEvolution> {
    let sched = Schedule::new(model.lambda()?, t, eps)?;
    evolve_channel_level_with(model, sched, rho0)
}

pub fn evolve_channel_level_with(model: &Lindbladian, sched: Schedule, rho0: &CMat) -> Result<ChannelEvolution> {
    if rho0.nrows() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: rho0.nrows() });
    }
    if sched.tau == 0 {
        return Ok(ChannelEvolution { rho: rho0.clone(), schedule: sched, trace_error: (trace(rho0).re - 1.0).abs() });
    }
    let e = mixture_channel(model, sched.delta)?;
    let rho = e.power(sched.steps()).apply(rho0);
    let trace_error = (trace(&rho).re - 1.0).abs();
    Ok(ChannelEvolution { rho, schedule: sched, trace_error })
}

/// Per-trajectory random stream derived from `(seed, index)`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// An index string `s` over the mixture's channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub indices: Vec<usize>,
    pub seed: u64,
    pub index: u64,
}

pub fn sample_indices(mix: &ChannelMixture, len: usize, seed: u64, index: u64) -> TrajectorySample {
    let mut rng = trajectory_rng(seed, index);
    let indices = (0..len).map(|_| mix.sample(&mut rng)).collect();
    TrajectorySample { indices, seed, index }
}

#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    pub rho: CMat,
    /// Standard error of each entry of `rho`.
    pub stderr: nalgebra::DMatrix<f64>,
    pub schedule: Schedule,
    pub n_traj: usize,
}

/// First-order quantum-jump unravelling with step `δ = t/(τr)`.
pub fn evolve_monte_carlo(
    model: &Lindbladian,
    t: f64,
    eps: f64,
    psi0: &CVec,
    n_traj: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    let sched = Schedule::new(model.lambda()?, t, eps)?;
    evolve_monte_carlo_with(model, sched, psi0, n_traj, seed)
}

pub fn evolve_monte_carlo_with(
    model: &Lindbladian,
    sched: Schedule,
    psi0: &CVec,
    n_traj: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    let d = model.dim();
    if psi0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: psi0.len() });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidModel("initial state must be normalized".into()));
    }
    if n_traj == 0 {
        return Err(Error::InvalidModel("n_traj must be positive".into()));
    }
    let delta = sched.delta;
    let jumps = model.jumps_dense();
    let mut heff = model.hamiltonian_dense();
    for l in &jumps {
        heff -= l.adjoint() * l * c(0.0, 0.5);
    }
    let step = identity(d) - heff * c(0.0, delta);

    let mut sum = CMat::zeros(d, d);
    let mut sq_re = nalgebra::DMatrix::<f64>::zeros(d, d);
    let mut sq_im = nalgebra::DMatrix::<f64>::zeros(d, d);
    let mut psi = psi0.clone();
    let mut tmp = CVec::zeros(d);
    let mut probs = vec![0.0; jumps.len()];
    for traj in 0..n_traj {
        let mut rng = trajectory_rng(seed, traj as u64);
        psi.copy_from(psi0);
        for _ in 0..sched.steps() {
            let mut total = 0.0;
            for (pj, l) in probs.iter_mut().zip(&jumps) {
                l.mul_to(&psi, &mut tmp);
                *pj = delta * tmp.norm_squared();
                total += *pj;
            }
            let p0 = 1.0 - total;
            if p0 <= 0.0 {
                return Err(Error::StepTooLarge { lambda_delta: sched.lambda_delta(), limit: 0.5 });
            }
            let u: f64 = rng.random();
            let chosen = if u < p0 {
                None
            } else {
                let mut acc = p0;
                let mut pick = probs.len() - 1;
                for (j, pj) in probs.iter().enumerate() {
                    acc += pj;
                    if u < acc {
                        pick = j;
                        break;
                    }
                }
                Some(pick)
            };
            match chosen {
                None => step.mul_to(&psi, &mut tmp),
                Some(j) => jumps[j].mul_to(&psi, &mut tmp),
            }
            let nrm = tmp.norm();
            psi.copy_from(&tmp);
            psi /= c(nrm, 0.0);
        }
        for i in 0..d {
            for j in 0..d {
                let z = psi[i] * psi[j].conj();
                sum[(i, j)] += z;
                sq_re[(i, j)] += z.re * z.re;
                sq_im[(i, j)] += z.im * z.im;
            }
        }
    }
    let nf = n_traj as f64;
    let rho = sum * c(1.0 / nf, 0.0);
    let stderr = nalgebra::DMatrix::from_fn(d, d, |i, j| {
        let mean = rho[(i, j)];
        let var_re = (sq_re[(i, j)] / nf - mean.re * mean.re).max(0.0);
        let var_im = (sq_im[(i, j)] / nf - mean.im * mean.im).max(0.0);
        let denom = if n_traj > 1 { nf - 1.0 } else { 1.0 };
        ((var_re + var_im) * nf / denom / nf).sqrt()
    });
    Ok(MonteCarloResult { rho, stderr, schedule: sched, n_traj })
}

/// Density matrix of a pure state.
pub fn pure_density(psi: &CVec) -> CMat {
    psi * psi.adjoint()
}

pub fn basis_state(d: usize, k: usize) -> CVec {
    let mut v = CVec::from_element(d, ZERO);
    v[k] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{amplitude_damping, random_model, scenario_depolarizing};
    use crate::oracle::{choi_distance, exact_channel, state_trace_distance};

    #[test]
    fn decay_kraus_forms() {
        let m = amplitude_damping(1.0, 0.0).unwrap();
        let ch = build_individual_channels(&m, 0.1).unwrap();
        let a0 = &ch[0].kraus[0];
        assert!((a0[(0, 0)] - c(1.0, 0.)).norm() < 1e-15);
        assert!((a0[(1, 1)] - c(0.95, 0.)).norm() < 1e-15);
        let a1 = &ch[0].kraus[1];
        assert!((a1[(0, 1)] - c(0.1f64.sqrt(), 0.)).norm() < 1e-15);
        assert!(ch[0].trace_defect <= 0.01 + 1e-15);
    }

    #[test]
    fn hamiltonian_kraus_form() {
        let h = crate::pauli::PauliSum::from_labels(1, &[("Z", c(1.0, 0.))]).unwrap();
        let m = Lindbladian::new(1, h, vec![]).unwrap();
        let ch = build_individual_channels(&m, 0.1).unwrap();
        let k = &ch[0].kraus[0];
        assert!((k[(0, 0)] - c(1.0, -0.1)).norm() < 1e-15);
        assert!((k[(1, 1)] - c(1.0, 0.1)).norm() < 1e-15);
    }

    #[test]
    fn step_too_large() {
        let m = amplitude_damping(1.0, 0.0).unwrap();
        assert!(matches!(build_individual_channels(&m, 0.5), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn mixture_matches_weighted_sum_and_limits() {
        let m = amplitude_damping(1.0, 0.5).unwrap();
        let e = mixture_channel(&m, 1e-9).unwrap();
        assert!(max_abs(&(e.superop - identity(4))) < 1e-8);
        let e = mixture_channel(&m, 0.01 / 1.5).unwrap();
        let exact = exact_channel(&m, 0.01 / 1.5).unwrap();
        assert!(choi_distance(&e, &exact).unwrap() <= 5e-4);
    }

    #[test]
    fn remainder_identity_on_random_models() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut models = vec![amplitude_damping(1.0, 0.5).unwrap(), scenario_depolarizing(1, None).unwrap()];
        for _ in 0..10 {
            models.push(random_model(&mut rng, 2, 2, 2, 2));
        }
        for m in &models {
            let delta = 0.1 / m.lambda().unwrap();
            assert!(remainder_identity_check(m, delta).unwrap() <= 1e-11);
        }
    }

    #[test]
    fn schedule_values() {
        assert_eq!(min_r(8, 0.5), 16);
        assert_eq!(min_r(2, 0.1), 32);
        let s = Schedule::new(1.5, 0.5, 0.25).unwrap();
        assert_eq!(s.tau, 2);
        assert_eq!(s.r, 8);
        assert!(s.lambda_delta() <= 1.0 / (2.0 * s.r as f64) + 1e-15);
    }

    #[test]
    fn depolarizing_closed_form() {
        let m = scenario_depolarizing(1, None).unwrap();
        let rho0 = pure_density(&basis_state(2, 0));
        let out = evolve_channel_level(&m, std::f64::consts::LN_2, 0.1, &rho0).unwrap();
        let target = CMat::from_diagonal(&CVec::from_vec(vec![c(0.75, 0.), c(0.25, 0.)]));
        assert!(state_trace_distance(&out.rho, &target).unwrap() <= 0.02);
        let same = evolve_channel_level(&m, 0.0, 0.1, &rho0).unwrap();
        assert_eq!(same.rho, rho0);
    }

    #[test]
    fn dark_state_never_jumps() {
        let m = amplitude_damping(1.0, 0.0).unwrap();
        let r = evolve_monte_carlo(&m, 1.0, 0.1, &basis_state(2, 0), 50, 3).unwrap();
        assert!((r.rho[(0, 0)] - c(1.0, 0.)).norm() < 1e-14);
    }

    #[test]
    fn single_step_jump_probability() {
        // one step of δ = 0.01 from |1⟩: the population left in |1⟩ is 1 − p_jump
        let m = amplitude_damping(1.0, 0.0).unwrap();
        let sched = Schedule::with_tau_r(1.0, 0.01, 1, 1);
        let r = evolve_monte_carlo_with(&m, sched, &basis_state(2, 1), 20000, 9).unwrap();
        let p_jump = r.rho[(0, 0)].re;
        assert!((p_jump - 0.01).abs() <= 4.0 * r.stderr[(0, 0)] + 1e-12);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let m = amplitude_damping(1.0, 0.3).unwrap();
        let a = evolve_monte_carlo(&m, 0.5, 0.2, &basis_state(2, 1), 200, 7).unwrap();
        let b = evolve_monte_carlo(&m, 0.5, 0.2, &basis_state(2, 1), 200, 7).unwrap();
        assert_eq!(a.rho, b.rho);
    }
}
