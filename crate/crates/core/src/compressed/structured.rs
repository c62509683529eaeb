//! Structured purification of the whole mixture on one slot: a selection
//! register picks the channel, `V_p` prepares the control state, `V_c` is a
//! multiplexer of phased Paulis on the system, and `V_p†` unprepares.
//!
//! Slot layout (low to high): `sel1` (`s1 = ⌈log₂(q0+m)⌉` qubits), `sel2`,
//! `c1`, `c2`, `a3`, `a4` (`w` qubits each). The system sits above the slot.

use crate::circuit::gadgets::{
    e_angles, f_angles, index_width, push_gadget, rotation, state_prep, target_probability, EAngles,
    FAngles, SlotLayout,
};
use crate::circuit::sim::{block, dilation_superop, isometry_columns};
use crate::circuit::{Circuit, Cond, Gate};
use crate::error::{Error, Result};
use crate::linalg::{c, ceil_log2, complete_unitary, CMat, CVec, ZERO};
use crate::model::{ChannelId, ChannelMixture, Lindbladian};
use crate::pauli::{Pauli, PauliTerm, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructLayout {
    pub s1: usize,
    /// `sel` of the inner layout is `sel2`
    pub inner: SlotLayout,
}

impl StructLayout {
    pub fn new(s1: usize, w: usize) -> Self {
        StructLayout { s1, inner: SlotLayout::at(s1, w) }
    }

    pub fn width(&self) -> usize {
        self.s1 + self.inner.width()
    }

    pub fn dim(&self) -> usize {
        1 << self.width()
    }

    pub fn sel2(&self) -> usize {
        self.inner.sel
    }

    /// Mask of the control register (`c1`, `c2`, `a3`, `a4`).
    pub fn ctrl_mask(&self) -> usize {
        self.inner.ctrl_qubits().iter().fold(0, |m, q| m | 1 << q)
    }

    /// Basis index belongs to the trivial subspace: `sel2 = c1 = c2 = 0`.
    pub fn is_trivial(&self, b: usize) -> bool {
        let mask = 1 << self.inner.sel | 1 << self.inner.c1 | 1 << self.inner.c2;
        b & mask == 0
    }
}

#[derive(Debug, Clone)]
pub struct StructuredPurification {
    pub n: usize,
    pub q0: usize,
    pub m: usize,
    pub ld: f64,
    pub p: f64,
    pub layout: StructLayout,
    pub mixture: ChannelMixture,
    pub f: Option<FAngles>,
    pub e: Option<EAngles>,
    /// `G` followed by `V_p`, on the slot register only
    pub prep: Circuit,
    /// `V_c` on `[slot | system]`
    pub vc: Circuit,
    model: Lindbladian,
}

fn minus_identity(n: usize) -> PauliTerm {
    PauliTerm { axes: vec![Pauli::I; n], phase: Phase::MinusOne, weight: 1.0 }
}

fn x_of(theta: f64) -> f64 {
    1.0 / (1.0 + theta.tan())
}

impl StructuredPurification {
    pub fn build(model: &Lindbladian, delta: f64) -> Result<Self> {
        let ld = model.lambda()? * delta;
        Self::with_step(model, ld)
    }

    pub fn with_step(model: &Lindbladian, ld: f64) -> Result<Self> {
        let params = model.derived_params()?;
        let (q0, m) = (params.q0, params.m);
        let p = target_probability(ld);
        let f = if q0 > 0 { Some(f_angles(ld, p)?) } else { None };
        let e = if m > 0 { Some(e_angles(ld, p)?) } else { None };
        let layout = StructLayout::new(ceil_log2(q0 + m), index_width(model)?);
        let mixture = model.mixture_distribution()?;
        let mut sp = StructuredPurification {
            n: model.n,
            q0,
            m,
            ld,
            p,
            layout,
            mixture,
            f,
            e,
            prep: Circuit::new(layout.width()),
            vc: Circuit::new(layout.width() + model.n),
            model: model.clone(),
        };
        sp.prep = sp.build_prep();
        sp.vc = sp.build_vc();
        Ok(sp)
    }

    pub fn width(&self) -> usize {
        self.layout.width() + self.n
    }

    pub fn state_offset(&self) -> usize {
        self.layout.width()
    }

    fn state_qubits(&self) -> Vec<usize> {
        (self.state_offset()..self.width()).collect()
    }

    fn is_f(&self) -> Cond {
        Cond::Less { offset: 0, width: self.layout.s1, threshold: self.q0 }
    }

    fn is_e(&self) -> [Cond; 2] {
        let s1 = self.layout.s1;
        [
            Cond::AtLeast { offset: 0, width: s1, threshold: self.q0 },
            Cond::Less { offset: 0, width: s1, threshold: self.q0 + self.m },
        ]
    }

    fn b_matrix(&self, j: usize) -> CMat {
        let weights: Vec<f64> = self.model.jumps[j].terms.iter().map(|t| t.weight).collect();
        state_prep(&weights, self.layout.inner.w)
    }

    /// `G_μ` on `sel1`.
    fn g_mu(&self) -> Option<Gate> {
        (self.layout.s1 > 0).then(|| Gate::register(0, self.layout.s1, state_prep(&self.mixture.weights, self.layout.s1), "G_mu"))
    }

    fn build_prep(&self) -> Circuit {
        let l = self.layout.inner;
        let mut circ = Circuit::new(self.layout.width());
        circ.extend_opt(self.g_mu());
        if let Some(e) = &self.e {
            circ.push(Gate::single(l.sel, rotation(e.alpha1), "R_alpha1").when(self.is_e()));
        }
        // V_p
        if let Some(f) = &self.f {
            circ.push(Gate::single(l.c1, rotation(f.alpha), "R_alpha").when([self.is_f()]));
            circ.push(Gate::single(l.c2, rotation(f.theta), "R_theta1").when([self.is_f()]));
        }
        if let Some(e) = &self.e {
            circ.push(Gate::single(l.c1, rotation(e.alpha2), "R_alpha2").when(self.is_e()));
            circ.push(Gate::single(l.c2, rotation(e.theta), "R_theta2").when(self.is_e()));
            if l.w > 0 {
                for j in 0..self.m {
                    let sel = Cond::reg_eq(0, self.layout.s1, self.q0 + j);
                    let b = self.b_matrix(j);
                    circ.push(Gate::register(l.a3, l.w, b.clone(), "B").when([sel.clone()]));
                    circ.push(Gate::register(l.a4, l.w, b, "B").when([sel]));
                }
            }
        }
        circ
    }

    fn build_vc(&self) -> Circuit {
        let l = self.layout.inner;
        let s1 = self.layout.s1;
        let state = self.state_qubits();
        let mut circ = Circuit::new(self.width());
        if self.q0 > 0 {
            let branches = self
                .model
                .hamiltonian
                .terms
                .iter()
                .map(|t| Some(t.unitary_part().with_phase(Phase::MinusI)))
                .collect();
            circ.push(Gate::Multiplexer {
                select_offset: 0,
                select_width: s1,
                branches,
                targets: state.clone(),
                conds: vec![Cond::qubit(l.c1, true)],
                label: "-iV0".into(),
            });
        }
        for (j, jump) in self.model.jumps.iter().enumerate() {
            let sel = Cond::reg_eq(0, s1, self.q0 + j);
            let units: Vec<PauliTerm> = jump.terms.iter().map(|t| t.unitary_part()).collect();
            let mux = |terms: Vec<PauliTerm>, select: usize, conds: Vec<Cond>, label: &str| Gate::Multiplexer {
                select_offset: select,
                select_width: l.w,
                branches: terms.into_iter().map(Some).collect(),
                targets: state.clone(),
                conds,
                label: label.into(),
            };
            circ.push(mux(units.clone(), l.a4, vec![sel.clone(), Cond::qubit(l.sel, true)], "V"));
            let c10 = vec![sel, Cond::qubit(l.sel, false), Cond::qubit(l.c1, true)];
            let neg = units.iter().map(|t| t.with_phase(Phase::MinusOne)).collect();
            circ.push(mux(neg, l.a4, c10.clone(), "-V"));
            circ.push(mux(units.iter().map(|t| t.adjoint()).collect(), l.a3, c10, "V†"));
        }
        circ.push(
            Gate::pauli(minus_identity(self.n), state)
                .when([Cond::qubit(l.c2, true), Cond::Less { offset: 0, width: s1, threshold: self.q0 + self.m }]),
        );
        circ
    }

    fn widen(&self, c: &Circuit) -> Circuit {
        let mut out = Circuit::new(self.width());
        out.extend(c);
        out
    }

    /// `V_p† V_c V_p (G ⊗ I)` on `[slot | system]`.
    pub fn circuit(&self) -> Circuit {
        let prep = self.widen(&self.prep);
        let mut circ = prep.clone();
        circ.extend(&self.vc);
        let mut unprep = self.widen(&self.prep);
        // G is not undone: drop it from the inverse
        let g_len = self.prep_g_len();
        unprep.gates.drain(..g_len);
        circ.extend(&unprep.inverse());
        circ
    }

    fn prep_g_len(&self) -> usize {
        usize::from(self.layout.s1 > 0) + usize::from(self.e.is_some())
    }

    /// Direct mixture purification: `G_μ`, then every per-channel gadget
    /// controlled on its `sel1` value.
    pub fn direct_circuit(&self) -> Result<Circuit> {
        let mut circ = Circuit::new(self.width());
        circ.extend_opt(self.g_mu());
        let state = self.state_qubits();
        for (k, id) in self.mixture.ids.iter().enumerate() {
            let mut g = Circuit::new(self.width());
            push_gadget(&mut g, &self.layout.inner, &state, &self.model, *id, self.ld, self.p)?;
            let sel = Cond::reg_eq(0, self.layout.s1, k);
            for gate in g.gates {
                circ.push(gate.when([sel.clone()]));
            }
        }
        Ok(circ)
    }

    /// `V_p(G ⊗ I)` as a `D × D` unitary on the slot.
    pub fn prep_matrix(&self) -> CMat {
        self.prep.dense()
    }

    pub fn prep_state(&self) -> CVec {
        self.prep_matrix().column(0).into_owned()
    }

    /// `p_I = ‖P_I V_p(G⊗I)|0⟩‖²`.
    pub fn p_trivial(&self) -> f64 {
        let v = self.prep_state();
        (0..v.len()).filter(|&b| self.layout.is_trivial(b)).map(|b| v[b].norm_sqr()).sum()
    }

    /// `λ_* = √(1 − p_I)`.
    pub fn lambda_star(&self) -> f64 {
        (1.0 - self.p_trivial()).max(0.0).sqrt()
    }

    /// Normalized trivial component `π_I ∝ P_I V_p(G⊗I)|0⟩`.
    pub fn trivial_direction(&self) -> CVec {
        let v = self.prep_state();
        let mut out = CVec::from_fn(v.len(), |b, _| if self.layout.is_trivial(b) { v[b] } else { ZERO });
        out /= c(out.norm(), 0.0);
        out
    }

    /// Normalized nontrivial component `(I − P_I) V_p(G⊗I)|0⟩ / λ_*`.
    pub fn nontrivial_direction(&self) -> CVec {
        let v = self.prep_state();
        let ls = self.lambda_star();
        CVec::from_fn(v.len(), |b, _| if self.layout.is_trivial(b) { ZERO } else { v[b] / ls })
    }

    /// Per-basis blocks `U_b = ⟨b|V_c|b⟩` on the system. `V_c` is diagonal in
    /// the slot basis, so these describe it completely.
    pub fn vc_blocks(&self) -> Result<Vec<CMat>> {
        let d = 1usize << self.n;
        let so = self.state_offset();
        let mut out = Vec::with_capacity(self.layout.dim());
        for b in 0..self.layout.dim() {
            let mut cols = Vec::with_capacity(d);
            for s in 0..d {
                let mut psi = vec![ZERO; 1 << self.width()];
                psi[b | s << so] = c(1.0, 0.0);
                cols.push(crate::circuit::simulate(&self.vc, &psi)?);
            }
            let u = CMat::from_fn(d, d, |i, k| cols[k][b | i << so]);
            out.push(u);
        }
        Ok(out)
    }

    /// `G'` and `V_p'` preparing the nontrivial direction from `|0⟩`.
    pub fn encoded_prep(&self) -> Result<Circuit> {
        let l = self.layout.inner;
        let s1 = self.layout.s1;
        let ls2 = 1.0 - self.p_trivial();
        if ls2 <= 0.0 {
            return Err(Error::Degenerate("no nontrivial branch".into()));
        }
        let mut circ = Circuit::new(self.layout.width());
        // G' on (sel1, sel2)
        let mut amps = CVec::zeros(1 << (s1 + 1));
        let sel2_bit = 1 << s1;
        let mut f_reg = None;
        let mut e_reg0 = None;
        if let Some(f) = &self.f {
            let (xa, xt) = (x_of(f.alpha), x_of(f.theta));
            for k in 0..self.q0 {
                amps[k] = c((self.mixture.weights[k] * (1.0 - xa * xt) / ls2).sqrt(), 0.0);
            }
            let mut v = CVec::zeros(4);
            v[1] = c(((1.0 - xa) * xt).sqrt(), 0.0);
            v[2] = c((xa * (1.0 - xt)).sqrt(), 0.0);
            v[3] = c(((1.0 - xa) * (1.0 - xt)).sqrt(), 0.0);
            f_reg = Some(complete_unitary(&v));
        }
        if let Some(e) = &self.e {
            let (x1, x2, xt) = (x_of(e.alpha1), x_of(e.alpha2), x_of(e.theta));
            for j in 0..self.m {
                let pr = self.mixture.weights[self.q0 + j];
                amps[self.q0 + j] = c((pr * x1 * (1.0 - x2 * xt) / ls2).sqrt(), 0.0);
                amps[(self.q0 + j) | sel2_bit] = c((pr * (1.0 - x1) / ls2).sqrt(), 0.0);
            }
            let mut v = CVec::zeros(4);
            v[1] = c(((1.0 - x2) * xt).sqrt(), 0.0);
            v[2] = c((x2 * (1.0 - xt)).sqrt(), 0.0);
            v[3] = c(((1.0 - x2) * (1.0 - xt)).sqrt(), 0.0);
            e_reg0 = Some(complete_unitary(&v));
        }
        circ.push(Gate::register(0, s1 + 1, complete_unitary(&amps), "G'"));
        // V_p'
        if let Some(u) = f_reg {
            circ.push(Gate::register(l.c1, 2, u, "V_F'").when([self.is_f()]));
        }
        if let (Some(u), Some(e)) = (e_reg0, &self.e) {
            let sel2_0 = Cond::qubit(l.sel, false);
            let sel2_1 = Cond::qubit(l.sel, true);
            let [a, b] = self.is_e();
            circ.push(Gate::register(l.c1, 2, u, "V_E'").when([a.clone(), b.clone(), sel2_0]));
            circ.push(Gate::single(l.c1, rotation(e.alpha2), "R_alpha2").when([a.clone(), b.clone(), sel2_1.clone()]));
            circ.push(Gate::single(l.c2, rotation(e.theta), "R_theta2").when([a, b, sel2_1]));
            if l.w > 0 {
                for j in 0..self.m {
                    let sel = Cond::reg_eq(0, s1, self.q0 + j);
                    let bm = self.b_matrix(j);
                    circ.push(Gate::register(l.a3, l.w, bm.clone(), "B").when([sel.clone()]));
                    circ.push(Gate::register(l.a4, l.w, bm, "B").when([sel]));
                }
            }
        }
        Ok(circ)
    }

    /// `ρ ↦ Tr_sel ⟨ctrl=0| U(|0⟩⟨0| ⊗ ρ)U† |ctrl=0⟩`, which should be `p·𝓔`.
    pub fn implemented_superop(&self, circ: &Circuit) -> Result<CMat> {
        let cols = isometry_columns(circ, self.state_offset(), self.n)?;
        let mask = self.layout.ctrl_mask();
        Ok(dilation_superop(&cols, self.state_offset(), |a| a & mask == 0))
    }

    /// Good block for a given selection value `(sel1, sel2)`.
    pub fn good_block(&self, circ: &Circuit, sel1: usize, sel2: bool) -> Result<CMat> {
        let cols = isometry_columns(circ, self.state_offset(), self.n)?;
        Ok(block(&cols, self.state_offset(), sel1 | (sel2 as usize) << self.layout.sel2()))
    }

    pub fn channel_id(&self, k: usize) -> ChannelId {
        self.mixture.ids[k]
    }
}

trait ExtendOpt {
    fn extend_opt(&mut self, g: Option<Gate>);
}

impl ExtendOpt for Circuit {
    fn extend_opt(&mut self, g: Option<Gate>) {
        if let Some(g) = g {
            self.push(g);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_vec, unitarity_defect};
    use crate::model::{amplitude_damping, scenario_depolarizing};
    use crate::pauli::PauliSum;
    use crate::trajectory::mixture_channel;

    fn pure_decay() -> Lindbladian {
        let l = PauliSum::from_labels(1, &[("X", c(0.5, 0.)), ("Y", c(0., 0.5))]).unwrap();
        Lindbladian::new(1, PauliSum::zero(1), vec![l]).unwrap()
    }

    fn models() -> Vec<Lindbladian> {
        vec![amplitude_damping(1.0, 0.7).unwrap(), scenario_depolarizing(1, None).unwrap(), pure_decay()]
    }

    #[test]
    fn matches_direct_purification_as_unitary() {
        for model in models() {
            for ld in [0.2, 0.1, 0.01] {
                let sp = StructuredPurification::with_step(&model, ld).unwrap();
                let a = sp.circuit().dense();
                let b = sp.direct_circuit().unwrap().dense();
                assert!(unitarity_defect(&a) < 1e-12);
                assert!(max_abs(&(a - b)) < 1e-12);
            }
        }
    }

    #[test]
    fn purifies_the_mixture() {
        for model in models() {
            let ld = 0.1;
            let lambda = model.lambda().unwrap();
            let sp = StructuredPurification::with_step(&model, ld).unwrap();
            let got = sp.implemented_superop(&sp.circuit()).unwrap();
            let want = mixture_channel(&model, ld / lambda).unwrap().superop * c(sp.p, 0.0);
            assert!(max_abs(&(got - want)) < 1e-12);
        }
    }

    #[test]
    fn vc_is_identity_on_trivial_subspace() {
        for model in models() {
            let sp = StructuredPurification::with_step(&model, 0.1).unwrap();
            let blocks = sp.vc_blocks().unwrap();
            let id = crate::linalg::identity(1 << sp.n);
            for (b, u) in blocks.iter().enumerate() {
                assert!(unitarity_defect(u) < 1e-12);
                if sp.layout.is_trivial(b) {
                    assert!(max_abs(&(u - &id)) < 1e-14, "b = {b}");
                }
            }
        }
    }

    #[test]
    fn trivial_probability_bound() {
        for model in models() {
            for r in [4usize, 8, 16] {
                let sp = StructuredPurification::with_step(&model, 1.0 / r as f64).unwrap();
                assert!(sp.p_trivial() >= 1.0 - 1.5 / r as f64, "r = {r}: {}", sp.p_trivial());
            }
        }
    }

    #[test]
    fn encoded_prep_gives_nontrivial_direction() {
        for model in models() {
            for ld in [0.25, 0.1] {
                let sp = StructuredPurification::with_step(&model, ld).unwrap();
                let u = sp.encoded_prep().unwrap().dense();
                let got: Vec<C64> = u.column(0).iter().copied().collect();
                let want = sp.nontrivial_direction();
                let diff: Vec<C64> = got.iter().zip(want.iter()).map(|(a, b)| a - b).collect();
                assert!(max_abs_vec(&diff) < 1e-12);
            }
        }
    }

    use crate::linalg::C64;
}
