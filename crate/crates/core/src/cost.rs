//! Gate counts for both algorithms and the channel-LCU comparison envelope.
//!
//! Counting policy (shared with [`crate::circuit::GateTally`]): a single-qubit
//! gate costs 1, a dense register unitary on `2^w` levels costs `2^w − 1`
//! (at least 1), a controlled phased Pauli string costs the number of qubits
//! it acts on, and a reflection costs the number of qubits it reads.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::ceil_log2;
use crate::model::{ChannelId, Lindbladian};
use crate::trajectory::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostParams {
    pub n: usize,
    pub q: usize,
    pub q0: usize,
    pub m: usize,
    pub t: f64,
    pub eps: f64,
    pub tau: usize,
    pub r: usize,
    pub h: usize,
}

impl CostParams {
    /// Parameters of `model` at `(t, ε)` with the standard schedule; `r` may
    /// be overridden and `h` defaults to `r`.
    pub fn from_model(model: &Lindbladian, t: f64, eps: f64, r: Option<usize>, h: Option<usize>) -> Result<Self> {
        let dp = model.derived_params()?;
        let mut s = Schedule::new(dp.lambda, t, eps)?;
        if let Some(r) = r {
            s = Schedule::with_tau_r(dp.lambda, t, s.tau, r);
        }
        Ok(CostParams { n: model.n, q: dp.q, q0: dp.q0, m: dp.m, t, eps, tau: s.tau, r: s.r, h: h.unwrap_or(s.r) })
    }

    fn w(&self) -> usize {
        ceil_log2(self.q)
    }

    fn position_bits(&self) -> usize {
        ceil_log2(self.r + 1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CostComponents {
    pub gadgets: u64,
    pub multiplexers: u64,
    pub reflections: u64,
    pub e_ro: u64,
    pub other: u64,
}

impl CostComponents {
    pub fn total(&self) -> u64 {
        self.gadgets + self.multiplexers + self.reflections + self.e_ro + self.other
    }

    fn scaled(self, k: u64) -> Self {
        CostComponents {
            gadgets: self.gadgets * k,
            multiplexers: self.multiplexers * k,
            reflections: self.reflections * k,
            e_ro: self.e_ro * k,
            other: self.other * k,
        }
    }

    fn add(&mut self, o: &CostComponents) {
        self.gadgets += o.gadgets;
        self.multiplexers += o.multiplexers;
        self.reflections += o.reflections;
        self.e_ro += o.e_ro;
        self.other += o.other;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub algorithm: String,
    pub params: CostParams,
    pub components: CostComponents,
    pub total: u64,
    /// asymptotic envelope evaluated without constants
    pub envelope: f64,
}

impl CostReport {
    fn new(algorithm: &str, params: CostParams, components: CostComponents, envelope: f64) -> Self {
        CostReport { algorithm: algorithm.into(), params, components, total: components.total(), envelope }
    }
}

fn prep_cost(w: usize) -> u64 {
    ((1u64 << w) - 1).max(1)
}

/// `𝓕` gadget: five single-qubit gates and one controlled Pauli on `n` qubits.
pub fn f_gadget_cost(n: usize) -> u64 {
    5 + n as u64
}

/// `𝓔` gadget for a jump with `q_j` terms: six single-qubit gates, four index
/// preparations and three multiplexers of `q_j` branches.
pub fn e_gadget_cost(n: usize, q_j: usize, w: usize) -> u64 {
    let preps = if w > 0 { 4 * prep_cost(w) } else { 0 };
    6 + preps + 3 * (q_j * n) as u64
}

fn alg1_reflections(r: usize, w: usize) -> u64 {
    // P₀ reads extra + every ctrl register, P₁ every ancilla
    let p0 = 1 + r * (2 + 2 * w);
    let p1 = 1 + r * (3 + 2 * w);
    (p0 + p1) as u64
}

fn alg1_envelope(p: &CostParams) -> f64 {
    (p.q.max(1) * p.n) as f64 * (p.tau * p.tau) as f64 / p.eps
}

/// One amplified segment `−W R₁ W† R₀ W` for the given channel sequence.
pub fn alg1_segment(model: &Lindbladian, seq: &[ChannelId]) -> Result<CostComponents> {
    let dp = model.derived_params()?;
    let w = ceil_log2(dp.q);
    let gadgets: u64 = seq
        .iter()
        .map(|id| match *id {
            ChannelId::F(_) => f_gadget_cost(model.n),
            ChannelId::E(j) => e_gadget_cost(model.n, model.jumps[j].len(), w),
        })
        .sum();
    Ok(CostComponents {
        gadgets: 3 * gadgets,
        reflections: alg1_reflections(seq.len(), w),
        other: 3,
        ..Default::default()
    })
}

/// Exact Algorithm 1 count for a sampled index sequence (split into segments
/// of length `r`).
pub fn count_alg1_sequence(model: &Lindbladian, params: CostParams, seq: &[ChannelId]) -> Result<CostReport> {
    let mut comp = CostComponents::default();
    for seg in seq.chunks(params.r.max(1)) {
        comp.add(&alg1_segment(model, seg)?);
    }
    Ok(CostReport::new("alg1", params, comp, alg1_envelope(&params)))
}

/// Worst-case Algorithm 1 count: every step draws the most expensive gadget.
pub fn count_alg1(params: &CostParams) -> CostReport {
    let w = params.w();
    let mut worst = 0;
    if params.q0 > 0 {
        worst = f_gadget_cost(params.n);
    }
    if params.m > 0 {
        worst = worst.max(e_gadget_cost(params.n, params.q, w));
    }
    let seg = CostComponents {
        gadgets: 3 * worst * params.r as u64,
        reflections: alg1_reflections(params.r, w),
        other: 3,
        ..Default::default()
    };
    CostReport::new("alg1", *params, seg.scaled(params.tau as u64), alg1_envelope(params))
}

/// Register widths of one structured slot.
fn struct_widths(p: &CostParams) -> (usize, usize) {
    let s1 = ceil_log2(p.q0 + p.m);
    let ctrl = 2 + 2 * p.w();
    (s1, ctrl)
}

/// `G′` and `V′_p` on one copy, matching `StructuredPurification::encoded_prep`.
pub fn encoded_prep_cost(p: &CostParams) -> u64 {
    let (s1, _) = struct_widths(p);
    let w = p.w();
    let mut c = prep_cost(s1 + 1);
    if p.q0 > 0 {
        c += 3;
    }
    if p.m > 0 {
        c += 3 + 2;
        if w > 0 {
            c += 2 * p.m as u64 * prep_cost(w);
        }
    }
    c
}

/// Branch count of `V_c`, matching `StructuredPurification::vc` with every
/// jump at `q` terms: `q₀` Hamiltonian branches, `3q` per jump and the phase.
pub fn vc_branches(p: &CostParams) -> u64 {
    (p.q0 + 3 * p.m * p.q + 1) as u64
}

fn alg2_envelope(p: &CostParams) -> f64 {
    let x = (p.tau as f64 / p.eps).max(std::f64::consts::E.powf(std::f64::consts::E));
    let mq = (p.m * p.q).max(p.q0).max(1) as f64;
    p.tau as f64 * ((mq * x).ln() + p.n as f64) * x.ln() / x.ln().ln()
}

/// Algorithm 2: `τ` segments, each `−W R₁ W† R₀ W` with
/// `W = E_ro† V′_c E_ro`.
pub fn count_alg2(p: &CostParams) -> CostReport {
    let (s1, ctrl) = struct_widths(p);
    let pos = p.position_bits() as u64;
    let h = p.h as u64;
    // E_std on the position registers plus G′V′_p on every copy
    let e_ro = h * pos + h * encoded_prep_cost(p);
    // each V′_c branch: Pauli on n qubits, controlled on the position and
    // selection/control registers of its copy
    let per_branch = p.n as u64 + pos + (s1 + 1 + ctrl) as u64;
    let mux = h * vc_branches(p) * per_branch;
    let r0 = 1 + h * (pos + ctrl as u64);
    let r1 = 1 + h * pos;
    let seg = CostComponents { e_ro: 3 * 2 * e_ro, multiplexers: 3 * mux, reflections: r0 + r1, other: 3, gadgets: 0 };
    CostReport::new("alg2", *p, seg.scaled(p.tau as u64), alg2_envelope(p))
}

/// Channel-LCU comparison envelope `M² log M · n · τ` with `M = q₀ + m·q`
/// LCU terms; arithmetic only.
pub fn count_cw16_formula(p: &CostParams) -> f64 {
    let mm = (p.q0 + p.m * p.q).max(2) as f64;
    mm * mm * mm.log2() * p.n as f64 * p.tau.max(1) as f64
}

pub const CSV_HEADER: &str =
    "algorithm,n,q,m,t,eps,tau,r,h,count_total,gadgets,multiplexers,reflections,e_ro,other,envelope";

pub fn csv_row(r: &CostReport) -> String {
    let p = &r.params;
    let c = &r.components;
    let mut s = String::new();
    let _ = write!(
        s,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6e}",
        r.algorithm, p.n, p.q, p.m, p.t, p.eps, p.tau, p.r, p.h, r.total, c.gadgets, c.multiplexers, c.reflections,
        c.e_ro, c.other, r.envelope
    );
    s
}

/// Row for the comparison envelope (components left empty).
pub fn csv_row_cw16(p: &CostParams) -> String {
    let v = count_cw16_formula(p);
    format!("cw16,{},{},{},{},{},{},{},{},{:.0},,,,,,{v:.6e}", p.n, p.q, p.m, p.t, p.eps, p.tau, p.r, p.h, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_segment;
    use crate::compressed::StructuredPurification;
    use crate::model::{amplitude_damping, scenario_xy};

    #[test]
    fn alg1_segment_matches_built_circuit() {
        let model = amplitude_damping(1.0, 0.5).unwrap();
        let seqs = [
            vec![ChannelId::F(0), ChannelId::E(0)],
            vec![ChannelId::E(0), ChannelId::E(0), ChannelId::F(0)],
        ];
        for seq in seqs {
            let seg = build_segment(&model, &seq, 0.05).unwrap();
            let want = seg.f.tally().total() as u64;
            assert_eq!(alg1_segment(&model, &seq).unwrap().total(), want);
        }
    }

    #[test]
    fn structured_pieces_match_built_circuits() {
        let model = amplitude_damping(1.0, 0.5).unwrap();
        let p = CostParams::from_model(&model, 1.0, 0.1, None, None).unwrap();
        let sp = StructuredPurification::with_step(&model, 0.1).unwrap();
        assert_eq!(encoded_prep_cost(&p), sp.encoded_prep().unwrap().tally().total() as u64);
        // V_c: one n-qubit Pauli per branch
        assert_eq!(vc_branches(&p) * p.n as u64, sp.vc.tally().pauli as u64);
    }

    #[test]
    fn totals_are_sums() {
        let p = CostParams { n: 3, q: 6, q0: 6, m: 3, t: 1.0, eps: 0.1, tau: 4, r: 64, h: 3 };
        for rep in [count_alg1(&p), count_alg2(&p)] {
            let c = rep.components;
            assert_eq!(rep.total, c.gadgets + c.multiplexers + c.reflections + c.e_ro + c.other);
        }
        assert_eq!(csv_row(&count_alg2(&p)).split(',').count(), CSV_HEADER.split(',').count());
        assert_eq!(csv_row_cw16(&p).split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn xy_ratio_declines() {
        let ratios: Vec<f64> = (2..=8)
            .map(|n| {
                let model = scenario_xy(n, 1.0, None).unwrap();
                let p = CostParams::from_model(&model, 1.0, 0.1, None, Some(3)).unwrap();
                count_alg2(&p).total as f64 / count_cw16_formula(&p)
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    }
}
