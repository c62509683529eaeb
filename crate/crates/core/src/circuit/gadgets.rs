//! Probabilistic-purification gadgets for the individual channels `𝓕_l`
//! and `𝓔_j`.
//!
//! Each gadget occupies one slot: a selection qubit `sel` and control qubits
//! `c1`, `c2` plus two index registers `a3`, `a4` of `w = ⌈log₂ q⌉` qubits.
//! On `c1 = c2 = a3 = a4 = 0` the gadget acts as `√p` times a Kraus operator
//! of the target channel, with the Kraus index carried by `sel`.

use crate::error::{Error, Result};
use crate::linalg::{c, ceil_log2, complete_unitary, CMat, CVec, ZERO};
use crate::model::{ChannelId, Lindbladian};
use crate::pauli::{PauliSum, PauliTerm, Phase};

use super::gate::{Circuit, Cond, Gate};
use super::sim::{block, dilation_superop, isometry_columns};

/// `R_θ = (cosθ + sinθ)^{-1/2} [[√cosθ, √sinθ], [√sinθ, −√cosθ]]`, a real
/// involution with `⟨0|R_θ(|0⟩⟨0|⊗I + |1⟩⟨1|⊗U)R_θ|0⟩ = (I + tanθ·U)/(1 + tanθ)`.
pub fn rotation(theta: f64) -> CMat {
    let (s, co) = theta.sin_cos();
    let norm = (co + s).sqrt();
    let (a, b) = (co.sqrt() / norm, s.sqrt() / norm);
    CMat::from_row_slice(2, 2, &[c(a, 0.), c(b, 0.), c(b, 0.), c(-a, 0.)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1., 0.), ZERO, ZERO, c(-1., 0.)])
}

/// Angle `θ` with `⟨0|R_θ Z R_θ|0⟩ = f`, used to scale a branch by `f ≤ 1`.
pub fn damping_angle(f: f64) -> f64 {
    ((1.0 - f) / (1.0 + f)).atan()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FAngles {
    pub alpha: f64,
    /// `arctan(√(p₁/p) − 1)`, the amplitude-fixing angle in its original form
    pub beta1: f64,
    /// rotation angle actually used on `c2` (see [`damping_angle`])
    pub theta: f64,
    pub p1: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EAngles {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub theta: f64,
    pub p2: f64,
    pub p: f64,
}

fn check_ld(ld: f64) -> Result<()> {
    if !(0.0..0.5).contains(&ld) {
        return Err(Error::StepTooLarge { lambda_delta: ld, limit: 0.5 });
    }
    Ok(())
}

pub fn f_angles(ld: f64, p: f64) -> Result<FAngles> {
    check_ld(ld)?;
    let p1 = 1.0 / ((1.0 + ld) * (1.0 + ld));
    if p1 < p {
        return Err(Error::Degenerate(format!("F gadget probability {p1} below target {p}")));
    }
    let beta1 = ((p1 / p).sqrt() - 1.0).atan();
    Ok(FAngles { alpha: ld.atan(), beta1, theta: damping_angle((p / p1).sqrt()), p1, p })
}

pub fn e_angles(ld: f64, p: f64) -> Result<EAngles> {
    check_ld(ld)?;
    let h = 1.0 + ld / 2.0;
    let p2 = 1.0 / (ld + h * h);
    if p2 < p {
        return Err(Error::Degenerate(format!("E gadget probability {p2} below target {p}")));
    }
    Ok(EAngles {
        alpha1: (ld / (h * h)).atan(),
        alpha2: (ld / 2.0).atan(),
        beta2: ((p2 / p).sqrt() - 1.0).atan(),
        theta: damping_angle((p / p2).sqrt()),
        p2,
        p,
    })
}

/// Target purification probability `1 − 2λδ`.
pub fn target_probability(ld: f64) -> f64 {
    1.0 - 2.0 * ld
}

/// Unitary whose first column is `Σ_k √(w_k/Σw)|k⟩`, padded to `2^width`.
pub fn state_prep(weights: &[f64], width: usize) -> CMat {
    let total: f64 = weights.iter().sum();
    let mut v = CVec::zeros(1 << width);
    for (k, w) in weights.iter().enumerate() {
        v[k] = c((w / total).sqrt(), 0.0);
    }
    complete_unitary(&v)
}

/// Qubit positions of one gadget slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotLayout {
    pub sel: usize,
    pub c1: usize,
    pub c2: usize,
    pub a3: usize,
    pub a4: usize,
    pub w: usize,
}

impl SlotLayout {
    pub fn width_for(w: usize) -> usize {
        3 + 2 * w
    }

    pub fn at(offset: usize, w: usize) -> Self {
        SlotLayout { sel: offset, c1: offset + 1, c2: offset + 2, a3: offset + 3, a4: offset + 3 + w, w }
    }

    pub fn width(&self) -> usize {
        Self::width_for(self.w)
    }

    pub fn ctrl_qubits(&self) -> Vec<usize> {
        let mut v = vec![self.c1, self.c2];
        v.extend(self.a3..self.a3 + 2 * self.w);
        v
    }

    pub fn all_qubits(&self) -> Vec<usize> {
        let mut v = vec![self.sel];
        v.extend(self.ctrl_qubits());
        v
    }
}

/// Index-register width for a model: `⌈log₂ q⌉`.
pub fn index_width(model: &Lindbladian) -> Result<usize> {
    Ok(ceil_log2(model.derived_params()?.q))
}

/// Appends the `𝓕` gadget for the unit phased Pauli `v`.
pub fn push_gadget_f(circ: &mut Circuit, slot: &SlotLayout, state: &[usize], v: &PauliTerm, a: &FAngles) {
    let minus_iv = v.unitary_part().with_phase(Phase::MinusI);
    circ.push(Gate::single(slot.c1, rotation(a.alpha), "R_alpha"));
    circ.push(Gate::single(slot.c2, rotation(a.theta), "R_theta"));
    circ.push(Gate::pauli(minus_iv, state.to_vec()).when([Cond::qubit(slot.c1, true)]));
    circ.push(Gate::single(slot.c2, pauli_z(), "Z"));
    circ.push(Gate::single(slot.c1, rotation(a.alpha), "R_alpha"));
    circ.push(Gate::single(slot.c2, rotation(a.theta), "R_theta"));
}

/// Appends the `𝓔` gadget for the jump `l` with Pauli norm `c_j`.
pub fn push_gadget_e(circ: &mut Circuit, slot: &SlotLayout, state: &[usize], l: &PauliSum, a: &EAngles) {
    let weights: Vec<f64> = l.terms.iter().map(|t| t.weight).collect();
    let b = state_prep(&weights, slot.w);
    let units: Vec<PauliTerm> = l.terms.iter().map(|t| t.unitary_part()).collect();
    let mux = |branches: Vec<PauliTerm>, select: usize, conds: Vec<Cond>, label: &str| Gate::Multiplexer {
        select_offset: select,
        select_width: slot.w,
        branches: branches.into_iter().map(Some).collect(),
        targets: state.to_vec(),
        conds,
        label: label.into(),
    };
    circ.push(Gate::single(slot.sel, rotation(a.alpha1), "R_alpha1"));
    circ.push(Gate::single(slot.c1, rotation(a.alpha2), "R_alpha2"));
    circ.push(Gate::single(slot.c2, rotation(a.theta), "R_theta"));
    if slot.w > 0 {
        circ.push(Gate::register(slot.a3, slot.w, b.clone(), "B"));
        circ.push(Gate::register(slot.a4, slot.w, b.clone(), "B"));
    }
    circ.push(mux(units.clone(), slot.a4, vec![Cond::qubit(slot.sel, true)], "V"));
    let neg: Vec<PauliTerm> = units.iter().map(|t| t.with_phase(Phase::MinusOne)).collect();
    let sel0_c1 = vec![Cond::qubit(slot.sel, false), Cond::qubit(slot.c1, true)];
    circ.push(mux(neg, slot.a4, sel0_c1.clone(), "-V"));
    let adj: Vec<PauliTerm> = units.iter().map(|t| t.adjoint()).collect();
    circ.push(mux(adj, slot.a3, sel0_c1, "V†"));
    circ.push(Gate::single(slot.c2, pauli_z(), "Z"));
    circ.push(Gate::single(slot.c1, rotation(a.alpha2), "R_alpha2"));
    circ.push(Gate::single(slot.c2, rotation(a.theta), "R_theta"));
    if slot.w > 0 {
        circ.push(Gate::register(slot.a3, slot.w, b.adjoint(), "B†"));
        circ.push(Gate::register(slot.a4, slot.w, b.adjoint(), "B†"));
    }
}

/// Appends the gadget for channel `id` of `model` at step `λδ = ld`.
pub fn push_gadget(
    circ: &mut Circuit,
    slot: &SlotLayout,
    state: &[usize],
    model: &Lindbladian,
    id: ChannelId,
    ld: f64,
    p: f64,
) -> Result<()> {
    match id {
        ChannelId::F(l) => {
            let a = f_angles(ld, p)?;
            push_gadget_f(circ, slot, state, &model.hamiltonian.terms[l], &a);
        }
        ChannelId::E(j) => {
            let a = e_angles(ld, p)?;
            push_gadget_e(circ, slot, state, &model.jumps[j], &a);
        }
    }
    Ok(())
}

/// A single gadget on its own register layout `[slot | state]`.
#[derive(Debug, Clone)]
pub struct PurificationCircuit {
    pub circuit: Circuit,
    pub p: f64,
    pub id: ChannelId,
    pub slot: SlotLayout,
    pub n: usize,
}

impl PurificationCircuit {
    pub fn build(model: &Lindbladian, id: ChannelId, delta: f64) -> Result<Self> {
        let ld = model.lambda()? * delta;
        let p = target_probability(ld);
        Self::build_with_probability(model, id, ld, p)
    }

    pub fn build_with_probability(model: &Lindbladian, id: ChannelId, ld: f64, p: f64) -> Result<Self> {
        let w = index_width(model)?;
        let slot = SlotLayout::at(0, w);
        let width = slot.width() + model.n;
        let state: Vec<usize> = (slot.width()..width).collect();
        let mut circuit = Circuit::new(width);
        push_gadget(&mut circuit, &slot, &state, model, id, ld, p)?;
        Ok(PurificationCircuit { circuit, p, id, slot, n: model.n })
    }

    pub fn state_offset(&self) -> usize {
        self.slot.width()
    }

    fn ctrl_mask(&self) -> usize {
        self.slot.ctrl_qubits().iter().fold(0, |m, q| m | 1 << q)
    }

    /// Blocks `⟨sel, ctrl=0| U |0⟩` for `sel ∈ {0, 1}`; these equal `√p` times
    /// the target Kraus operators.
    pub fn good_blocks(&self) -> Result<Vec<CMat>> {
        let cols = isometry_columns(&self.circuit, self.state_offset(), self.n)?;
        Ok([0usize, 1].iter().map(|&s| block(&cols, self.state_offset(), s << self.slot.sel)).collect())
    }

    /// Superoperator of `ρ ↦ Tr_{sel}[⟨ctrl=0| U(|0⟩⟨0|⊗ρ)U† |ctrl=0⟩]`.
    pub fn implemented_superop(&self) -> Result<CMat> {
        let cols = isometry_columns(&self.circuit, self.state_offset(), self.n)?;
        let mask = self.ctrl_mask();
        Ok(dilation_superop(&cols, self.state_offset(), |a| a & mask == 0))
    }

    /// Superoperator of the full dilation `ρ ↦ Tr_anc[U(|0⟩⟨0|⊗ρ)U†]`.
    pub fn dilation_superop(&self) -> Result<CMat> {
        let cols = isometry_columns(&self.circuit, self.state_offset(), self.n)?;
        Ok(dilation_superop(&cols, self.state_offset(), |_| true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs, unitarity_defect};
    use crate::model::{amplitude_damping, scenario_depolarizing};
    use crate::trajectory::build_individual_channels;

    #[test]
    fn rotation_is_involution_with_stated_amplitude() {
        for &th in &[0.0, 0.1, 0.7, 1.2] {
            let r = rotation(th);
            assert!(max_abs(&(&r * &r - identity(2))) < 1e-14);
            assert!(unitarity_defect(&r) < 1e-14);
        }
        // ⟨0|R Z R|0⟩ = f
        for &f in &[1.0, 0.95, 0.5] {
            let r = rotation(damping_angle(f));
            let m = &r * pauli_z() * &r;
            assert!((m[(0, 0)].re - f).abs() < 1e-14);
        }
    }

    #[test]
    fn angle_values() {
        let a = f_angles(0.1, 0.8).unwrap();
        assert!((a.alpha - 0.1f64.atan()).abs() < 1e-15);
        assert!((a.p1 - 1.0 / 1.21).abs() < 1e-15);
        let e = e_angles(0.1, 0.8).unwrap();
        assert!((e.p2 - 1.0 / (0.1 + 1.05 * 1.05)).abs() < 1e-15);
        assert!(e.p2 > 0.8);
        assert!(f_angles(0.5, 0.0).is_err());
    }

    #[test]
    fn gadgets_purify_their_channels() {
        for model in [amplitude_damping(1.0, 0.5).unwrap(), scenario_depolarizing(1, None).unwrap()] {
            let lambda = model.lambda().unwrap();
            for &ld in &[0.2, 0.1, 0.01] {
                let delta = ld / lambda;
                let chans = build_individual_channels(&model, delta).unwrap();
                for ch in &chans {
                    let g = PurificationCircuit::build(&model, ch.id, delta).unwrap();
                    let got = g.implemented_superop().unwrap();
                    let want = ch.superop() * c(g.p, 0.0);
                    assert!(max_abs(&(got - want)) < 1e-10, "{:?} ld={ld}", ch.id);
                    assert!(unitarity_defect(&g.circuit.dense()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn f_gadget_vanishing_step_is_identity() {
        let model = amplitude_damping(1.0, 0.5).unwrap();
        let g = PurificationCircuit::build(&model, ChannelId::F(0), 0.0).unwrap();
        let blocks = g.good_blocks().unwrap();
        assert!(max_abs(&(&blocks[0] - identity(2))) < 1e-14);
    }
}
