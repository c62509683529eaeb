//! Register-addressed gate IR. Qubit `k` is bit `k` of a basis index.

use std::fmt::{self, Write as _};

use crate::linalg::{identity, kron, CMat, C64, ONE, ZERO};
use crate::pauli::{Pauli, PauliTerm};

/// Classical predicate on a computational basis index.
#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    /// `(i & mask) == value`
    Bits { mask: usize, value: usize },
    /// register value `< threshold`
    Less { offset: usize, width: usize, threshold: usize },
    /// register value `>= threshold`
    AtLeast { offset: usize, width: usize, threshold: usize },
}

impl Cond {
    pub fn qubit(q: usize, value: bool) -> Cond {
        Cond::Bits { mask: 1 << q, value: (value as usize) << q }
    }

    pub fn reg_eq(offset: usize, width: usize, value: usize) -> Cond {
        let mask = ((1usize << width) - 1) << offset;
        Cond::Bits { mask, value: (value << offset) & mask }
    }

    /// Every qubit in `qubits` is zero.
    pub fn zeros(qubits: &[usize]) -> Cond {
        Cond::Bits { mask: qubits.iter().fold(0, |m, q| m | 1 << q), value: 0 }
    }

    #[inline]
    pub fn holds(&self, i: usize) -> bool {
        match *self {
            Cond::Bits { mask, value } => i & mask == value,
            Cond::Less { offset, width, threshold } => (i >> offset) & ((1 << width) - 1) < threshold,
            Cond::AtLeast { offset, width, threshold } => (i >> offset) & ((1 << width) - 1) >= threshold,
        }
    }

    /// Qubits the predicate reads.
    pub fn support(&self) -> usize {
        match *self {
            Cond::Bits { mask, .. } => mask,
            Cond::Less { offset, width, .. } | Cond::AtLeast { offset, width, .. } => ((1 << width) - 1) << offset,
        }
    }

    /// Number of control qubits under the counting policy.
    pub fn control_width(&self) -> usize {
        self.support().count_ones() as usize
    }
}

#[inline]
pub fn all_hold(conds: &[Cond], i: usize) -> bool {
    conds.iter().all(|c| c.holds(i))
}

#[derive(Debug, Clone)]
pub enum Gate {
    /// 2×2 unitary on one qubit.
    Single { target: usize, u: CMat, label: String, conds: Vec<Cond> },
    /// Dense unitary on a contiguous register (state preparations, completions).
    Register { offset: usize, width: usize, u: CMat, label: String, conds: Vec<Cond> },
    /// Unit-weight phased Pauli string; `targets[i]` carries `term.axes[i]`.
    Pauli { term: PauliTerm, targets: Vec<usize>, conds: Vec<Cond> },
    /// Branch `k` applies when the select register holds `k`.
    Multiplexer {
        select_offset: usize,
        select_width: usize,
        branches: Vec<Option<PauliTerm>>,
        targets: Vec<usize>,
        conds: Vec<Cond>,
        label: String,
    },
    /// `I − 2P` with `P` the projector onto basis states satisfying `predicate`.
    Reflection { predicate: Vec<Cond>, label: String },
    GlobalPhase(C64),
}

impl Gate {
    pub fn single(target: usize, u: CMat, label: impl Into<String>) -> Gate {
        Gate::Single { target, u, label: label.into(), conds: Vec::new() }
    }

    pub fn register(offset: usize, width: usize, u: CMat, label: impl Into<String>) -> Gate {
        Gate::Register { offset, width, u, label: label.into(), conds: Vec::new() }
    }

    pub fn pauli(term: PauliTerm, targets: Vec<usize>) -> Gate {
        Gate::Pauli { term, targets, conds: Vec::new() }
    }

    /// Z-type phase flip on the all-ones state of `qubits`.
    pub fn multi_controlled_z(qubits: &[usize]) -> Gate {
        let mask = qubits.iter().fold(0, |m, q| m | 1 << q);
        Gate::Reflection { predicate: vec![Cond::Bits { mask, value: mask }], label: "mcz".into() }
    }

    pub fn when(mut self, extra: impl IntoIterator<Item = Cond>) -> Gate {
        match &mut self {
            Gate::Single { conds, .. }
            | Gate::Register { conds, .. }
            | Gate::Pauli { conds, .. }
            | Gate::Multiplexer { conds, .. } => conds.extend(extra),
            Gate::Reflection { predicate, .. } => predicate.extend(extra),
            Gate::GlobalPhase(_) => {}
        }
        self
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Single { target, u, label, conds } => {
                Gate::Single { target: *target, u: u.adjoint(), label: format!("{label}†"), conds: conds.clone() }
            }
            Gate::Register { offset, width, u, label, conds } => Gate::Register {
                offset: *offset,
                width: *width,
                u: u.adjoint(),
                label: format!("{label}†"),
                conds: conds.clone(),
            },
            Gate::Pauli { term, targets, conds } => {
                Gate::Pauli { term: term.adjoint(), targets: targets.clone(), conds: conds.clone() }
            }
            Gate::Multiplexer { select_offset, select_width, branches, targets, conds, label } => Gate::Multiplexer {
                select_offset: *select_offset,
                select_width: *select_width,
                branches: branches.iter().map(|b| b.as_ref().map(|t| t.adjoint())).collect(),
                targets: targets.clone(),
                conds: conds.clone(),
                label: format!("{label}†"),
            },
            Gate::Reflection { .. } => self.clone(),
            Gate::GlobalPhase(z) => Gate::GlobalPhase(z.conj()),
        }
    }

    /// Relabels qubits through `f`. Registers must stay contiguous under `f`.
    pub fn remap(&self, f: &impl Fn(usize) -> usize) -> Gate {
        let map_mask = |mask: usize| (0..usize::BITS as usize).filter(|q| mask >> q & 1 == 1).fold(0, |m, q| m | 1 << f(q));
        let map_cond = |c: &Cond| match *c {
            Cond::Bits { mask, value } => Cond::Bits { mask: map_mask(mask), value: map_mask(value) },
            Cond::Less { offset, width, threshold } => Cond::Less { offset: f(offset), width, threshold },
            Cond::AtLeast { offset, width, threshold } => Cond::AtLeast { offset: f(offset), width, threshold },
        };
        let conds = |cs: &[Cond]| cs.iter().map(map_cond).collect::<Vec<_>>();
        match self {
            Gate::Single { target, u, label, conds: cs } => {
                Gate::Single { target: f(*target), u: u.clone(), label: label.clone(), conds: conds(cs) }
            }
            Gate::Register { offset, width, u, label, conds: cs } => {
                Gate::Register { offset: f(*offset), width: *width, u: u.clone(), label: label.clone(), conds: conds(cs) }
            }
            Gate::Pauli { term, targets, conds: cs } => {
                Gate::Pauli { term: term.clone(), targets: targets.iter().map(|&q| f(q)).collect(), conds: conds(cs) }
            }
            Gate::Multiplexer { select_offset, select_width, branches, targets, conds: cs, label } => Gate::Multiplexer {
                select_offset: f(*select_offset),
                select_width: *select_width,
                branches: branches.clone(),
                targets: targets.iter().map(|&q| f(q)).collect(),
                conds: conds(cs),
                label: label.clone(),
            },
            Gate::Reflection { predicate, label } => Gate::Reflection { predicate: conds(predicate), label: label.clone() },
            Gate::GlobalPhase(z) => Gate::GlobalPhase(*z),
        }
    }

    fn conds(&self) -> &[Cond] {
        match self {
            Gate::Single { conds, .. }
            | Gate::Register { conds, .. }
            | Gate::Pauli { conds, .. }
            | Gate::Multiplexer { conds, .. } => conds,
            Gate::Reflection { predicate, .. } => predicate,
            Gate::GlobalPhase(_) => &[],
        }
    }

    /// Qubits written by the gate.
    pub fn target_mask(&self) -> usize {
        match self {
            Gate::Single { target, .. } => 1 << target,
            Gate::Register { offset, width, .. } => ((1 << width) - 1) << offset,
            Gate::Pauli { targets, .. } | Gate::Multiplexer { targets, .. } => {
                targets.iter().fold(0, |m, q| m | 1 << q)
            }
            Gate::Reflection { .. } | Gate::GlobalPhase(_) => 0,
        }
    }

    /// Every qubit the gate touches.
    pub fn support_mask(&self) -> usize {
        let mut m = self.target_mask();
        for c in self.conds() {
            m |= c.support();
        }
        if let Gate::Multiplexer { select_offset, select_width, .. } = self {
            m |= ((1 << select_width) - 1) << select_offset;
        }
        m
    }

    /// Structural problems: targets overlapping controls or wrong shapes.
    pub fn check(&self) -> Result<(), String> {
        let t = self.target_mask();
        let mut ctrl = self.conds().iter().fold(0, |m, c| m | c.support());
        if let Gate::Multiplexer { select_offset, select_width, branches, targets, .. } = self {
            ctrl |= ((1 << select_width) - 1) << select_offset;
            if branches.len() > 1 << select_width {
                return Err("multiplexer has more branches than select values".into());
            }
            for b in branches.iter().flatten() {
                if b.axes.len() != targets.len() {
                    return Err("multiplexer branch arity mismatch".into());
                }
            }
        }
        if let Gate::Pauli { term, targets, .. } = self {
            if term.axes.len() != targets.len() {
                return Err("Pauli arity mismatch".into());
            }
        }
        if let Gate::Register { width, u, .. } = self {
            if u.nrows() != 1 << width {
                return Err("register unitary has the wrong size".into());
            }
        }
        if !matches!(self, Gate::Reflection { .. }) && t & ctrl != 0 {
            return Err(format!("gate {} reads and writes the same qubit", self.name()));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        match self {
            Gate::Single { label, .. } | Gate::Register { label, .. } => label,
            Gate::Pauli { .. } => "pauli",
            Gate::Multiplexer { label, .. } => label,
            Gate::Reflection { label, .. } => label,
            Gate::GlobalPhase(_) => "phase",
        }
    }

    /// Dense `2^width` matrix built from Kronecker products and diagonal
    /// condition projectors, independent of the simulator kernels.
    pub fn dense(&self, width: usize) -> CMat {
        let dim = 1usize << width;
        let proj = |conds: &[Cond]| -> Vec<bool> { (0..dim).map(|i| all_hold(conds, i)).collect() };
        let controlled = |p: &[bool], u: &CMat| -> CMat {
            CMat::from_fn(dim, dim, |i, j| {
                if p[j] {
                    u[(i, j)]
                } else if i == j {
                    ONE
                } else {
                    ZERO
                }
            })
        };
        match self {
            Gate::Single { target, u, conds, .. } => controlled(&proj(conds), &embed(u, *target, 1, width)),
            Gate::Register { offset, width: w, u, conds, .. } => {
                controlled(&proj(conds), &embed(u, *offset, *w, width))
            }
            Gate::Pauli { term, targets, conds } => controlled(&proj(conds), &full_pauli(term, targets, width)),
            Gate::Multiplexer { select_offset, select_width, branches, targets, conds, .. } => {
                let mut m = identity(dim);
                for (k, b) in branches.iter().enumerate() {
                    if let Some(term) = b {
                        let mut cs = conds.clone();
                        cs.push(Cond::reg_eq(*select_offset, *select_width, k));
                        m = controlled(&proj(&cs), &full_pauli(term, targets, width)) * m;
                    }
                }
                m
            }
            Gate::Reflection { predicate, .. } => {
                let p = proj(predicate);
                CMat::from_fn(dim, dim, |i, j| if i != j { ZERO } else if p[i] { -ONE } else { ONE })
            }
            Gate::GlobalPhase(z) => identity(dim) * *z,
        }
    }
}

/// `I ⊗ u ⊗ I` with `u` on qubits `offset..offset+w`.
fn embed(u: &CMat, offset: usize, w: usize, width: usize) -> CMat {
    let high = identity(1 << (width - offset - w));
    kron(&kron(&high, u), &identity(1 << offset))
}

fn full_pauli(term: &PauliTerm, targets: &[usize], width: usize) -> CMat {
    let mut axes = vec![Pauli::I; width];
    for (p, &q) in term.axes.iter().zip(targets) {
        axes[q] = *p;
    }
    PauliTerm { axes, phase: term.phase, weight: term.weight }.to_dense(width).expect("width matches")
}

/// Gate tallies under the counting policy used by the cost model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GateTally {
    /// single-qubit gates, including controlled rotations
    pub rotations: usize,
    /// state preparations / dense register unitaries, weighted by their rank
    pub preparations: usize,
    /// controlled phased Pauli strings, weighted by the number of non-identity
    /// factors (at least 1)
    pub pauli: usize,
    /// reflections, weighted by the number of qubits they read
    pub reflections: usize,
}

impl GateTally {
    pub fn total(&self) -> usize {
        self.rotations + self.preparations + self.pauli + self.reflections
    }

    pub fn add(&mut self, other: &GateTally) {
        self.rotations += other.rotations;
        self.preparations += other.preparations;
        self.pauli += other.pauli;
        self.reflections += other.reflections;
    }

    pub fn scaled(&self, k: usize) -> GateTally {
        GateTally {
            rotations: self.rotations * k,
            preparations: self.preparations * k,
            pauli: self.pauli * k,
            reflections: self.reflections * k,
        }
    }
}

/// Cost of one controlled phased Pauli string on `targets.len()` qubits:
/// one controlled single-qubit gate per qubit.
pub fn pauli_cost(term: &PauliTerm) -> usize {
    term.axes.len().max(1)
}

#[derive(Debug, Clone)]
pub struct Circuit {
    pub width: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit { width, gates: Vec::new() }
    }

    pub fn push(&mut self, g: Gate) {
        debug_assert!(g.check().is_ok(), "{:?}", g.check());
        self.gates.push(g);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { width: self.width, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    /// Dense unitary (product of per-gate dense matrices).
    pub fn dense(&self) -> CMat {
        let mut m = identity(1 << self.width);
        for g in &self.gates {
            m = g.dense(self.width) * m;
        }
        m
    }

    pub fn tally(&self) -> GateTally {
        let mut t = GateTally::default();
        for g in &self.gates {
            match g {
                Gate::Single { .. } => t.rotations += 1,
                Gate::Register { u, .. } => t.preparations += u.nrows().saturating_sub(1).max(1),
                Gate::Pauli { term, .. } => t.pauli += pauli_cost(term),
                Gate::Multiplexer { branches, .. } => {
                    t.pauli += branches.iter().flatten().map(pauli_cost).sum::<usize>()
                }
                Gate::Reflection { predicate, .. } => {
                    t.reflections += predicate.iter().map(Cond::control_width).sum::<usize>().max(1)
                }
                Gate::GlobalPhase(_) => {}
            }
        }
        t
    }

    /// One gate per line: variant, parameters, qubits.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, g) in self.gates.iter().enumerate() {
            let _ = writeln!(s, "{k:5} {g}");
        }
        s
    }
}

fn fmt_conds(conds: &[Cond]) -> String {
    if conds.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = conds
        .iter()
        .map(|c| match c {
            Cond::Bits { mask, value } => {
                let qs: Vec<String> = (0..usize::BITS as usize)
                    .filter(|q| mask >> q & 1 == 1)
                    .map(|q| format!("q{q}={}", value >> q & 1))
                    .collect();
                qs.join(",")
            }
            Cond::Less { offset, width, threshold } => format!("reg[{offset}..{}]<{threshold}", offset + width),
            Cond::AtLeast { offset, width, threshold } => {
                format!("reg[{offset}..{}]>={threshold}", offset + width)
            }
        })
        .collect();
    format!(" if {}", parts.join(" & "))
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Single { target, label, conds, .. } => write!(f, "single {label} q{target}{}", fmt_conds(conds)),
            Gate::Register { offset, width, label, conds, .. } => {
                write!(f, "register {label} q[{offset}..{}]{}", offset + width, fmt_conds(conds))
            }
            Gate::Pauli { term, targets, conds } => {
                write!(f, "pauli {} on {targets:?}{}", term, fmt_conds(conds))
            }
            Gate::Multiplexer { select_offset, select_width, branches, targets, conds, label } => {
                let bs: Vec<String> =
                    branches.iter().map(|b| b.as_ref().map_or("-".to_string(), |t| t.to_string())).collect();
                write!(
                    f,
                    "mux {label} sel q[{select_offset}..{}] [{}] on {targets:?}{}",
                    select_offset + select_width,
                    bs.join(", "),
                    fmt_conds(conds)
                )
            }
            Gate::Reflection { predicate, label } => write!(f, "reflect {label}{}", fmt_conds(predicate)),
            Gate::GlobalPhase(z) => write!(f, "phase {z}"),
        }
    }
}
