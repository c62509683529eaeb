//! Dense statevector simulator with matrix-free kernels per gate variant.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};

use super::gate::{all_hold, Circuit, Cond, Gate};

pub const DEFAULT_QUBIT_CAP: usize = 22;
pub const QUBIT_CAP_ENV: &str = "LINDSIM_MAX_QUBITS";

/// Simulator width limit, overridable through `LINDSIM_MAX_QUBITS`.
pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

pub fn check_width(width: usize) -> Result<()> {
    let cap = qubit_cap();
    if width > cap {
        return Err(Error::CapExceeded(format!(
            "circuit needs {width} qubits, simulator cap is {cap} (set {QUBIT_CAP_ENV} to raise it)"
        )));
    }
    Ok(())
}

pub fn simulate(circuit: &Circuit, psi: &[C64]) -> Result<Vec<C64>> {
    check_width(circuit.width)?;
    if psi.len() != 1 << circuit.width {
        return Err(Error::DimensionMismatch { expected: 1 << circuit.width, got: psi.len() });
    }
    for g in &circuit.gates {
        if g.support_mask() >> circuit.width != 0 {
            let top = usize::BITS as usize - g.support_mask().leading_zeros() as usize - 1;
            return Err(Error::QubitOutOfRange { index: top, width: circuit.width });
        }
        g.check().map_err(Error::InvalidModel)?;
    }
    let mut out = psi.to_vec();
    for g in &circuit.gates {
        apply_gate(g, &mut out);
    }
    Ok(out)
}

pub fn apply_gate(g: &Gate, psi: &mut [C64]) {
    match g {
        Gate::Single { target, u, conds, .. } => apply_single(psi, *target, u, conds),
        Gate::Register { offset, width, u, conds, .. } => apply_register(psi, *offset, *width, u, conds),
        Gate::Pauli { term, targets, conds } => {
            let (x, z, coeff) = term.global_masks(targets);
            apply_pauli(psi, x, z, coeff, conds, None);
        }
        Gate::Multiplexer { select_offset, select_width, branches, targets, conds, .. } => {
            for (k, b) in branches.iter().enumerate() {
                if let Some(term) = b {
                    let (x, z, coeff) = term.global_masks(targets);
                    let sel = Cond::reg_eq(*select_offset, *select_width, k);
                    apply_pauli(psi, x, z, coeff, conds, Some(&sel));
                }
            }
        }
        Gate::Reflection { predicate, .. } => {
            for (i, a) in psi.iter_mut().enumerate() {
                if all_hold(predicate, i) {
                    *a = -*a;
                }
            }
        }
        Gate::GlobalPhase(z) => psi.iter_mut().for_each(|a| *a *= z),
    }
}

fn apply_single(psi: &mut [C64], target: usize, u: &CMat, conds: &[Cond]) {
    let bit = 1usize << target;
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    for i in 0..psi.len() {
        if i & bit != 0 || !all_hold(conds, i) {
            continue;
        }
        let j = i | bit;
        let (a, b) = (psi[i], psi[j]);
        psi[i] = u00 * a + u01 * b;
        psi[j] = u10 * a + u11 * b;
    }
}

fn apply_register(psi: &mut [C64], offset: usize, width: usize, u: &CMat, conds: &[Cond]) {
    let block = 1usize << width;
    let mask = (block - 1) << offset;
    let mut v = vec![ZERO; block];
    let mut w = vec![ZERO; block];
    for base in 0..psi.len() {
        if base & mask != 0 || !all_hold(conds, base) {
            continue;
        }
        for k in 0..block {
            v[k] = psi[base | k << offset];
        }
        for (r, wr) in w.iter_mut().enumerate() {
            let mut s = ZERO;
            for (k, vk) in v.iter().enumerate() {
                s += u[(r, k)] * vk;
            }
            *wr = s;
        }
        for k in 0..block {
            psi[base | k << offset] = w[k];
        }
    }
}

#[inline]
fn sign(i: usize, z: usize) -> f64 {
    if (i & z).count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn apply_pauli(psi: &mut [C64], x: usize, z: usize, coeff: C64, conds: &[Cond], extra: Option<&Cond>) {
    let ok = |i: usize| all_hold(conds, i) && extra.is_none_or(|c| c.holds(i));
    if x == 0 {
        for (i, a) in psi.iter_mut().enumerate() {
            if ok(i) {
                *a *= coeff * sign(i, z);
            }
        }
        return;
    }
    for i in 0..psi.len() {
        let j = i ^ x;
        if i > j || !ok(i) {
            continue;
        }
        let (a, b) = (psi[i], psi[j]);
        psi[j] = coeff * sign(i, z) * a;
        psi[i] = coeff * sign(j, z) * b;
    }
}

/// Output columns `U|0⟩_anc|b⟩` for every state basis vector `b`; the state
/// register occupies the top `n` qubits starting at `state_offset`.
pub fn isometry_columns(circuit: &Circuit, state_offset: usize, n: usize) -> Result<Vec<Vec<C64>>> {
    if state_offset + n != circuit.width {
        return Err(Error::DimensionMismatch { expected: circuit.width, got: state_offset + n });
    }
    let dim = 1usize << circuit.width;
    let mut cols = Vec::with_capacity(1 << n);
    for b in 0..1usize << n {
        let mut psi = vec![ZERO; dim];
        psi[b << state_offset] = C64::new(1.0, 0.0);
        cols.push(simulate(circuit, &psi)?);
    }
    Ok(cols)
}

/// Kraus block `⟨a|_anc U |0⟩_anc` for ancilla outcome `a`.
pub fn block(cols: &[Vec<C64>], state_offset: usize, a: usize) -> CMat {
    let d = cols.len();
    CMat::from_fn(d, d, |s, b| cols[b][a | s << state_offset])
}

/// `Σ_a conj(M_a) ⊗ M_a` over ancilla outcomes accepted by `keep`.
pub fn dilation_superop(cols: &[Vec<C64>], state_offset: usize, keep: impl Fn(usize) -> bool) -> CMat {
    let d = cols.len();
    let mut s = CMat::zeros(d * d, d * d);
    let mut m = vec![ZERO; d * d];
    for a in 0..1usize << state_offset {
        if !keep(a) {
            continue;
        }
        let mut nz = false;
        for s_out in 0..d {
            for b in 0..d {
                let v = cols[b][a | s_out << state_offset];
                m[s_out + b * d] = v;
                nz |= v != ZERO;
            }
        }
        if !nz {
            continue;
        }
        // (M̄ ⊗ M)[(j d + i), (l d + k)] = conj(M[j,l]) · M[i,k]
        for j in 0..d {
            for l in 0..d {
                let cj = m[j + l * d].conj();
                if cj == ZERO {
                    continue;
                }
                for i in 0..d {
                    for k in 0..d {
                        s[(j * d + i, l * d + k)] += cj * m[i + k * d];
                    }
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gadgets::rotation;
    use crate::linalg::{c, max_abs_vec, unitarity_defect, CVec};
    use crate::pauli::{PauliTerm, Phase};
    use rand::{Rng, SeedableRng};

    #[test]
    fn empty_circuit_is_identity() {
        let circ = Circuit::new(3);
        let psi: Vec<C64> = (0..8).map(|k| c(k as f64, 1.0)).collect();
        assert_eq!(simulate(&circ, &psi).unwrap(), psi);
    }

    #[test]
    fn rotation_on_zero() {
        let mut circ = Circuit::new(1);
        let th = std::f64::consts::FRAC_PI_4;
        circ.push(Gate::single(0, rotation(th), "R"));
        let out = simulate(&circ, &[c(1., 0.), ZERO]).unwrap();
        let u = rotation(th);
        assert!((out[0] - u[(0, 0)]).norm() < 1e-15 && (out[1] - u[(1, 0)]).norm() < 1e-15);
    }

    fn random_gate(rng: &mut impl Rng, width: usize) -> Gate {
        let q = rng.random_range(0..width);
        let other = (q + 1 + rng.random_range(0..width - 1)) % width;
        let cond = Cond::qubit(other, rng.random_bool(0.5));
        match rng.random_range(0..5) {
            0 => Gate::single(q, rotation(rng.random_range(0.0..1.5)), "R").when([cond]),
            1 => {
                let off = rng.random_range(0..width - 1);
                let v: CVec = CVec::from_fn(4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                let u = crate::linalg::complete_unitary(&v);
                Gate::register(off, 2, u, "B")
            }
            2 => {
                let paulis = [crate::pauli::Pauli::X, crate::pauli::Pauli::Y, crate::pauli::Pauli::Z];
                let term = PauliTerm {
                    axes: vec![paulis[rng.random_range(0..3)], paulis[rng.random_range(0..3)]],
                    phase: Phase::from_power(rng.random_range(0..4)),
                    weight: 1.0,
                };
                let t2 = (q + 1) % width;
                let mut g = Gate::pauli(term, vec![q, t2]);
                let c3 = (q + 2) % width;
                if c3 != q && c3 != t2 {
                    g = g.when([Cond::qubit(c3, true)]);
                }
                g
            }
            3 => Gate::Reflection {
                predicate: vec![Cond::Less { offset: 0, width: 3, threshold: rng.random_range(0..8) }],
                label: "refl".into(),
            },
            _ => {
                let term = |p| PauliTerm { axes: vec![p], phase: Phase::MinusI, weight: 1.0 };
                Gate::Multiplexer {
                    select_offset: 0,
                    select_width: 2,
                    branches: vec![Some(term(crate::pauli::Pauli::X)), None, Some(term(crate::pauli::Pauli::Y))],
                    targets: vec![width - 1],
                    conds: vec![],
                    label: "mux".into(),
                }
            }
        }
    }

    #[test]
    fn random_circuits_match_dense_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let width = 6;
        for _ in 0..10 {
            let mut circ = Circuit::new(width);
            for _ in 0..25 {
                circ.push(random_gate(&mut rng, width));
            }
            let u = circ.dense();
            assert!(unitarity_defect(&u) < 1e-12);
            for g in &circ.gates {
                assert!(unitarity_defect(&g.dense(width)) < 1e-12);
            }
            let psi: Vec<C64> = (0..64).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let got = simulate(&circ, &psi).unwrap();
            let want = &u * CVec::from_vec(psi);
            let diff: Vec<C64> = got.iter().zip(want.iter()).map(|(a, b)| a - b).collect();
            assert!(max_abs_vec(&diff) < 1e-12);
            // inverse undoes the circuit
            let back = simulate(&circ.inverse(), &got).unwrap();
            let psi2 = circ.inverse().dense() * CVec::from_vec(got.clone());
            assert!(back.iter().zip(psi2.iter()).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn width_cap_is_enforced() {
        let circ = Circuit::new(qubit_cap() + 1);
        assert!(matches!(simulate(&circ, &[]), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn out_of_range_gate() {
        let mut circ = Circuit::new(2);
        circ.gates.push(Gate::single(3, rotation(0.1), "R"));
        assert!(matches!(simulate(&circ, &[ZERO; 4]), Err(Error::QubitOutOfRange { .. })));
    }
}
