//! Segment circuit `W`, oblivious amplitude amplification and the sampled
//! circuit-level Algorithm 1.
//!
//! Two routes compute a segment's effect. The dense route simulates the full
//! segment circuit `F = −W(I−2P₁)W†(I−2P₀)W` on a statevector. The contracted
//! route uses the closed form of `F|0⟩|ψ⟩` when `P₀W|0⟩|ψ⟩` has norm exactly
//! ½ of the good-branch state:
//!
//! `F|0⟩|ψ⟩ = Φ(ψ) + W|0⟩(I − K)ψ`, with `K = Σ_s K_s†K_s` over good-branch
//! Kraus products `K_s`,
//!
//! so after tracing out the ancillas a segment applies
//! `𝒢(ρ) + ½𝒢((I−K)ρ + ρ(I−K)) + 𝒯((I−K)ρ(I−K))`, where `𝒢` composes the
//! gadgets' good branches and `𝒯` their full dilations. Both maps come from
//! simulating single gadgets, so the contracted route scales to segment
//! widths the dense simulator cannot hold.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{c, conj, identity, kron, trace, CMat, CVec, C64, ZERO};
use crate::model::{ChannelId, Lindbladian};
use crate::oracle::ChannelRep;
use crate::trajectory::{sample_indices, Schedule};

use super::gadgets::{index_width, push_gadget, target_probability, PurificationCircuit, SlotLayout};
use super::gate::{Circuit, Cond, Gate};
use super::sim::{check_width, dilation_superop, isometry_columns, simulate};

/// Qubit budget of one segment: `r` slots, one extra qubit, then the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentLayout {
    pub r: usize,
    pub w: usize,
    pub n: usize,
    pub extra: usize,
    pub state_offset: usize,
    pub width: usize,
}

impl SegmentLayout {
    pub fn new(r: usize, w: usize, n: usize) -> Self {
        let slot = SlotLayout::width_for(w);
        let extra = r * slot;
        SegmentLayout { r, w, n, extra, state_offset: extra + 1, width: extra + 1 + n }
    }

    pub fn for_model(model: &Lindbladian, r: usize) -> Result<Self> {
        Ok(Self::new(r, index_width(model)?, model.n))
    }

    pub fn slot(&self, k: usize) -> SlotLayout {
        SlotLayout::at(k * SlotLayout::width_for(self.w), self.w)
    }

    pub fn state_qubits(&self) -> Vec<usize> {
        (self.state_offset..self.width).collect()
    }

    /// `P₀`: extra qubit and every control register zero, selections free.
    pub fn p0(&self) -> Vec<Cond> {
        let mut qs = vec![self.extra];
        for k in 0..self.r {
            qs.extend(self.slot(k).ctrl_qubits());
        }
        vec![Cond::zeros(&qs)]
    }

    /// `P₁`: every ancilla zero.
    pub fn p1(&self) -> Vec<Cond> {
        vec![Cond::zeros(&(0..self.state_offset).collect::<Vec<_>>())]
    }

    pub fn arithmetic(&self) -> String {
        format!(
            "{} slots x (1 sel + {} ctrl) + 1 extra + {} state = {} qubits",
            self.r,
            2 + 2 * self.w,
            self.n,
            self.width
        )
    }

    pub fn check_cap(&self) -> Result<()> {
        check_width(self.width).map_err(|e| match e {
            Error::CapExceeded(msg) => Error::CapExceeded(format!("{msg}; segment layout: {}", self.arithmetic())),
            other => other,
        })
    }
}

/// Extra-qubit rotation with `R|0⟩ = (p^{-r/2}/2)|0⟩ + √(1 − p^{-r}/4)|1⟩`.
pub fn extra_rotation(p: f64, r: usize) -> Result<CMat> {
    let a = p.powf(-(r as f64) / 2.0) / 2.0;
    if !(a <= 1.0) {
        return Err(Error::Degenerate(format!("p^r = {} is below 1/4", p.powi(r as i32))));
    }
    let b = (1.0 - a * a).max(0.0).sqrt();
    Ok(CMat::from_row_slice(2, 2, &[c(a, 0.), c(-b, 0.), c(b, 0.), c(a, 0.)]))
}

/// `W`: the extra-qubit rotation followed by the gadgets of `u` on slots
/// `0..r` in order.
pub fn build_w(model: &Lindbladian, u: &[ChannelId], ld: f64, layout: &SegmentLayout) -> Result<Circuit> {
    let p = target_probability(ld);
    let mut circ = Circuit::new(layout.width);
    circ.push(Gate::register(layout.extra, 1, extra_rotation(p, layout.r)?, "R_extra"));
    let state = layout.state_qubits();
    for (k, id) in u.iter().enumerate() {
        push_gadget(&mut circ, &layout.slot(k), &state, model, *id, ld, p)?;
    }
    Ok(circ)
}

/// `−W(I−2P₁)W†(I−2P₀)W`.
pub fn oaa(w: &Circuit, p0: Vec<Cond>, p1: Vec<Cond>) -> Circuit {
    let mut f = w.clone();
    f.push(Gate::Reflection { predicate: p0, label: "R0".into() });
    f.extend(&w.inverse());
    f.push(Gate::Reflection { predicate: p1, label: "R1".into() });
    f.extend(w);
    f.push(Gate::GlobalPhase(c(-1.0, 0.0)));
    f
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub w: Circuit,
    pub f: Circuit,
    pub layout: SegmentLayout,
}

pub fn build_segment(model: &Lindbladian, u: &[ChannelId], ld: f64) -> Result<Segment> {
    let layout = SegmentLayout::for_model(model, u.len())?;
    let w = build_w(model, u, ld, &layout)?;
    let f = oaa(&w, layout.p0(), layout.p1());
    Ok(Segment { w, f, layout })
}

impl Segment {
    fn embed(&self, psi: &CVec) -> Vec<C64> {
        let mut v = vec![ZERO; 1 << self.layout.width];
        for (b, a) in psi.iter().enumerate() {
            v[b << self.layout.state_offset] = *a;
        }
        v
    }

    /// `(F|0⟩|ψ⟩, Φ)` with `Φ = 2P₀W|0⟩|ψ⟩`.
    pub fn outputs(&self, psi: &CVec) -> Result<(Vec<C64>, Vec<C64>)> {
        self.layout.check_cap()?;
        let input = self.embed(psi);
        let fo = simulate(&self.f, &input)?;
        let wo = simulate(&self.w, &input)?;
        let p0 = self.layout.p0();
        let phi = wo
            .iter()
            .enumerate()
            .map(|(i, a)| if p0.iter().all(|cd| cd.holds(i)) { a * 2.0 } else { ZERO })
            .collect();
        Ok((fo, phi))
    }

    /// `‖F|0⟩|ψ⟩ − Φ‖₂` by dense simulation.
    pub fn deviation(&self, psi: &CVec) -> Result<f64> {
        let (fo, phi) = self.outputs(psi)?;
        Ok(fo.iter().zip(&phi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    /// Segment channel with ancillas traced out, by dense simulation.
    pub fn channel(&self) -> Result<ChannelRep> {
        self.layout.check_cap()?;
        let cols = isometry_columns(&self.f, self.layout.state_offset, self.layout.n)?;
        ChannelRep::from_superop(dilation_superop(&cols, self.layout.state_offset, |_| true))
    }
}

/// Per-channel data extracted from single-gadget simulations at one step.
#[derive(Debug, Clone)]
pub struct GadgetLibrary {
    pub ld: f64,
    pub p: f64,
    pub ids: Vec<ChannelId>,
    pub dim: usize,
    /// good-branch Kraus operators divided by `√p`
    pub good: Vec<Vec<CMat>>,
    pub good_superop: Vec<CMat>,
    pub dilation: Vec<CMat>,
}

impl GadgetLibrary {
    pub fn build(model: &Lindbladian, delta: f64) -> Result<Self> {
        let ld = model.lambda()? * delta;
        let p = target_probability(ld);
        let ids = model.mixture_distribution()?.ids;
        let mut good = Vec::new();
        let mut good_superop = Vec::new();
        let mut dilation = Vec::new();
        for id in &ids {
            let g = PurificationCircuit::build_with_probability(model, *id, ld, p)?;
            let ks: Vec<CMat> = g.good_blocks()?.into_iter().map(|b| b * c(1.0 / p.sqrt(), 0.0)).collect();
            let mut s = CMat::zeros(model.dim().pow(2), model.dim().pow(2));
            for k in &ks {
                s += kron(&conj(k), k);
            }
            good.push(ks);
            good_superop.push(s);
            dilation.push(g.dilation_superop()?);
        }
        Ok(GadgetLibrary { ld, p, ids, dim: model.dim(), good, good_superop, dilation })
    }

    /// `K = Σ_s K_s†K_s` for the index string `u` (mixture indices).
    pub fn k_operator(&self, u: &[usize]) -> CMat {
        let mut x = identity(self.dim);
        for &k in u.iter().rev() {
            let mut y = CMat::zeros(self.dim, self.dim);
            for a in &self.good[k] {
                y += a.adjoint() * &x * a;
            }
            x = y;
        }
        x
    }

    /// `‖(I − K)ψ‖₂`, equal to the OAA deviation `‖F|Ψ⟩ − Φ‖₂`.
    pub fn deviation(&self, u: &[usize], psi: &CVec) -> f64 {
        ((identity(self.dim) - self.k_operator(u)) * psi).norm()
    }

    /// Segment channel through the contracted route.
    pub fn segment_channel(&self, u: &[usize]) -> ChannelRep {
        let d2 = self.dim * self.dim;
        let mut g = identity(d2);
        let mut t = identity(d2);
        for &k in u {
            g = &self.good_superop[k] * g;
            t = &self.dilation[k] * t;
        }
        let e = identity(self.dim) - self.k_operator(u);
        let id = identity(self.dim);
        let left = kron(&id, &e);
        let right = kron(&e.transpose(), &id);
        let both = kron(&e.transpose(), &e);
        let s = &g + (&g * (left + right)) * c(0.5, 0.0) + t * both;
        ChannelRep { dim: self.dim, superop: s, kraus: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Contracted,
    Dense,
}

#[derive(Debug, Clone, Copy)]
pub struct Alg1Options {
    /// overrides `r = 2^⌈log₂(τ/ε)⌉`
    pub r: Option<usize>,
    pub route: Route,
}

impl Default for Alg1Options {
    fn default() -> Self {
        Alg1Options { r: None, route: Route::Contracted }
    }
}

#[derive(Debug, Clone)]
pub struct SampledRun {
    pub rho: CMat,
    /// standard error of each entry of `rho`
    pub stderr: DMatrix<f64>,
    pub schedule: Schedule,
    pub layout: SegmentLayout,
    pub n_samples: usize,
    pub mean_trace: f64,
}

impl SampledRun {
    /// Frobenius norm of the entrywise standard errors.
    pub fn stderr_scale(&self) -> f64 {
        self.stderr.norm()
    }
}

pub fn alg1_schedule(model: &Lindbladian, t: f64, eps: f64, r: Option<usize>) -> Result<Schedule> {
    let s = Schedule::new(model.lambda()?, t, eps)?;
    Ok(match r {
        Some(r) => Schedule::with_tau_r(s.lambda, t, s.tau, r),
        None => s,
    })
}

/// Averages the segment-channel products over `n_samples` index strings.
pub fn run_algorithm1(
    model: &Lindbladian,
    t: f64,
    eps: f64,
    rho0: &CMat,
    n_samples: usize,
    seed: u64,
    opts: Alg1Options,
) -> Result<SampledRun> {
    let sched = alg1_schedule(model, t, eps, opts.r)?;
    let layout = SegmentLayout::for_model(model, sched.r)?;
    // the contracted route only ever simulates one gadget at a time
    if opts.route == Route::Dense {
        layout.check_cap()?;
    }
    let d = model.dim();
    if rho0.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho0.nrows() });
    }
    if n_samples == 0 {
        return Err(Error::InvalidModel("n_samples must be positive".into()));
    }
    if sched.tau == 0 {
        return Ok(SampledRun {
            rho: rho0.clone(),
            stderr: DMatrix::zeros(d, d),
            schedule: sched,
            layout,
            n_samples,
            mean_trace: trace(rho0).re,
        });
    }
    let mix = model.mixture_distribution()?;
    let lib = match opts.route {
        Route::Contracted => Some(GadgetLibrary::build(model, sched.delta)?),
        Route::Dense => None,
    };
    let mut cache: std::collections::HashMap<Vec<usize>, ChannelRep> = std::collections::HashMap::new();
    let mut sum = CMat::zeros(d, d);
    let mut sq = DMatrix::<f64>::zeros(d, d);
    for s in 0..n_samples {
        let sample = sample_indices(&mix, sched.steps(), seed, s as u64);
        let mut rho = rho0.clone();
        for seg in sample.indices.chunks(sched.r) {
            let ch = match &lib {
                Some(lib) => lib.segment_channel(seg),
                None => {
                    if !cache.contains_key(seg) {
                        let ids: Vec<ChannelId> = seg.iter().map(|&k| mix.ids[k]).collect();
                        let segment = build_segment(model, &ids, sched.lambda_delta())?;
                        cache.insert(seg.to_vec(), segment.channel()?);
                    }
                    cache[seg].clone()
                }
            };
            rho = ch.apply(&rho);
        }
        for i in 0..d {
            for j in 0..d {
                let z = rho[(i, j)];
                sum[(i, j)] += z;
                sq[(i, j)] += z.norm_sqr();
            }
        }
    }
    let nf = n_samples as f64;
    let mean = sum * c(1.0 / nf, 0.0);
    let stderr = DMatrix::from_fn(d, d, |i, j| {
        if n_samples < 2 {
            return 0.0;
        }
        let var = (sq[(i, j)] / nf - mean[(i, j)].norm_sqr()).max(0.0) * nf / (nf - 1.0);
        (var / nf).sqrt()
    });
    let mean_trace = trace(&mean).re;
    Ok(SampledRun { rho: mean, stderr, schedule: sched, layout, n_samples, mean_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::model::amplitude_damping;
    use crate::trajectory::basis_state;

    #[test]
    fn extra_rotation_amplitudes() {
        for &r in &[4usize, 8, 16] {
            let p = 1.0 - 1.0 / r as f64;
            assert!(p.powi(r as i32) > 0.25);
            let m = extra_rotation(p, r).unwrap();
            assert!(crate::linalg::unitarity_defect(&m) < 1e-14);
            assert!((m[(0, 0)].re - p.powf(-(r as f64) / 2.0) / 2.0).abs() < 1e-15);
        }
        assert!(extra_rotation(0.5, 4).is_err());
    }

    #[test]
    fn single_f_slot_output() {
        let model = amplitude_damping(1.0, 0.5).unwrap();
        let ld = 0.1;
        let layout = SegmentLayout::for_model(&model, 1).unwrap();
        let w = build_w(&model, &[ChannelId::F(0)], ld, &layout).unwrap();
        let seg = Segment { f: oaa(&w, layout.p0(), layout.p1()), w, layout };
        let psi = CVec::from_vec(vec![c(0.6, 0.), c(0., 0.8)]);
        let (_, phi) = seg.outputs(&psi).unwrap();
        let v = model.hamiltonian.terms[0].unitary_part().to_dense(1).unwrap();
        let want = (identity(2) - v * c(0., ld)) * &psi;
        for b in 0..2 {
            let got = phi[b << layout.state_offset] * 0.5;
            assert!((got - want[b] * 0.5).norm() < 1e-12);
        }
    }

    #[test]
    fn contracted_matches_dense_small() {
        let model = amplitude_damping(1.0, 0.5).unwrap();
        let ld = 0.1;
        let lib = GadgetLibrary::build(&model, ld / model.lambda().unwrap()).unwrap();
        for u in [vec![0usize, 1], vec![1, 1], vec![1, 0]] {
            let ids: Vec<ChannelId> = u.iter().map(|&k| lib.ids[k]).collect();
            let seg = build_segment(&model, &ids, ld).unwrap();
            let psi = CVec::from_vec(vec![c(0.6, 0.), c(0., 0.8)]);
            let dense = seg.deviation(&psi).unwrap();
            assert!((dense - lib.deviation(&u, &psi)).abs() < 1e-12);
            let a = seg.channel().unwrap();
            let b = lib.segment_channel(&u);
            assert!(max_abs(&(a.superop - b.superop)) < 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let model = amplitude_damping(1.0, 0.5).unwrap();
        let rho0 = crate::trajectory::pure_density(&basis_state(2, 1));
        let run = run_algorithm1(&model, 0.0, 0.25, &rho0, 3, 1, Alg1Options::default()).unwrap();
        assert_eq!(run.rho, rho0);
    }
}
