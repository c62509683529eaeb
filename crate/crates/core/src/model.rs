//! Lindbladian data model, derived norms, the sampling distribution over
//! individual channels, scenario generators and the JSON model format.

use std::collections::BTreeSet;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64};
use crate::pauli::{Pauli, PauliSum, PauliTerm, Phase};

/// `𝓛(ρ) = −i[H, ρ] + Σ_j (L_j ρ L_j† − ½{L_j†L_j, ρ})` with `H` and every
/// `L_j` given as Pauli sums on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Lindbladian {
    pub n: usize,
    pub hamiltonian: PauliSum,
    pub jumps: Vec<PauliSum>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub lambda: f64,
    pub c: Vec<f64>,
    pub q: usize,
    pub q0: usize,
    pub m: usize,
}

/// Index into the mixture: the `l`-th Hamiltonian term or the `j`-th jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelId {
    F(usize),
    E(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMixture {
    pub ids: Vec<ChannelId>,
    pub weights: Vec<f64>,
}

impl ChannelMixture {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Inverse-CDF draw; `u` in `[0, 1)`.
    pub fn pick(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return k;
            }
        }
        // rounding leftovers go to the last channel with nonzero weight
        self.weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.pick(rng.random::<f64>())
    }
}

impl Lindbladian {
    /// Validates qubit counts, canonicalizes every sum and drops jumps whose
    /// Pauli norm is zero.
    pub fn new(n: usize, hamiltonian: PauliSum, jumps: Vec<PauliSum>) -> Result<Self> {
        if hamiltonian.n != n {
            return Err(Error::DimensionMismatch { expected: n, got: hamiltonian.n });
        }
        if let Some(t) = hamiltonian.terms.iter().find(|t| matches!(t.phase, Phase::PlusI | Phase::MinusI)) {
            return Err(Error::InvalidModel(format!(
                "Hamiltonian term {} has an imaginary coefficient",
                t.label()
            )));
        }
        let mut kept = Vec::with_capacity(jumps.len());
        for (j, l) in jumps.into_iter().enumerate() {
            if l.n != n {
                return Err(Error::DimensionMismatch { expected: n, got: l.n });
            }
            let l = l.canonical();
            if l.pauli_norm() == 0.0 {
                log::warn!("dropping jump {j}: zero Pauli norm");
                continue;
            }
            kept.push(l);
        }
        Ok(Lindbladian { n, hamiltonian: hamiltonian.canonical(), jumps: kept })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        self.hamiltonian.is_empty() && self.jumps.is_empty()
    }

    pub fn derived_params(&self) -> Result<DerivedParams> {
        if self.is_empty() {
            return Err(Error::EmptyModel);
        }
        let c: Vec<f64> = self.jumps.iter().map(|l| l.pauli_norm()).collect();
        let lambda = self.hamiltonian.pauli_norm() + c.iter().map(|x| x * x).sum::<f64>();
        let q0 = self.hamiltonian.len();
        let q = self.jumps.iter().map(|l| l.len()).chain(std::iter::once(q0)).max().unwrap_or(0);
        Ok(DerivedParams { lambda, c, q, q0, m: self.jumps.len() })
    }

    pub fn lambda(&self) -> Result<f64> {
        Ok(self.derived_params()?.lambda)
    }

    /// Probabilities `T_{0l}/λ` for the Hamiltonian terms followed by
    /// `c_j²/λ` for the jumps.
    pub fn mixture_distribution(&self) -> Result<ChannelMixture> {
        let p = self.derived_params()?;
        if p.lambda <= 0.0 {
            return Err(Error::Degenerate("λ = 0".into()));
        }
        let mut ids = Vec::with_capacity(p.q0 + p.m);
        let mut weights = Vec::with_capacity(p.q0 + p.m);
        for (l, t) in self.hamiltonian.terms.iter().enumerate() {
            ids.push(ChannelId::F(l));
            weights.push(t.weight / p.lambda);
        }
        for (j, cj) in p.c.iter().enumerate() {
            ids.push(ChannelId::E(j));
            weights.push(cj * cj / p.lambda);
        }
        Ok(ChannelMixture { ids, weights })
    }

    pub fn hamiltonian_dense(&self) -> CMat {
        self.hamiltonian.to_dense()
    }

    pub fn jumps_dense(&self) -> Vec<CMat> {
        self.jumps.iter().map(|l| l.to_dense()).collect()
    }

    /// Same model with the Hamiltonian replaced by `h` (or added to it when
    /// `combine` is set).
    pub fn with_hamiltonian(&self, h: PauliSum, combine: bool) -> Result<Self> {
        if h.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: h.n });
        }
        let hamiltonian = if combine {
            let mut terms = self.hamiltonian.terms.clone();
            terms.extend(h.terms);
            PauliSum { n: self.n, terms }
        } else {
            h
        };
        Lindbladian::new(self.n, hamiltonian, self.jumps.clone())
    }
}

// ---------------------------------------------------------------------------
// scenarios

fn all_paulis(n: usize) -> Vec<Vec<Pauli>> {
    const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    (0..1usize << (2 * n))
        .map(|k| (0..n).map(|q| P[(k >> (2 * q)) & 3]).collect())
        .collect()
}

fn single(n: usize, axes: Vec<Pauli>, phase: Phase, weight: f64) -> PauliSum {
    PauliSum { n, terms: vec![PauliTerm { axes, phase, weight }] }
}

fn on_qubits(n: usize, ops: &[(usize, Pauli)]) -> Vec<Pauli> {
    let mut axes = vec![Pauli::I; n];
    for &(k, p) in ops {
        axes[k] = p;
    }
    axes
}

pub const DEPOLARIZING_MAX_QUBITS: usize = 2;

/// Fully depolarizing generator: jumps `{P/2ⁿ : P ∈ Pauli(n)}`.
pub fn scenario_depolarizing(n: usize, hamiltonian: Option<PauliSum>) -> Result<Lindbladian> {
    if n == 0 || n > DEPOLARIZING_MAX_QUBITS {
        return Err(Error::CapExceeded(format!(
            "depolarizing scenario supports 1..={DEPOLARIZING_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let w = 1.0 / (1usize << n) as f64;
    let jumps = all_paulis(n).into_iter().map(|axes| single(n, axes, Phase::One, w)).collect();
    let h = hamiltonian.unwrap_or_else(|| PauliSum::zero(n));
    Lindbladian::new(n, h, jumps)
}

/// Every unordered pair of qubits.
pub fn full_topology(n: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            e.push((i, j));
        }
    }
    e
}

/// Dissipative XY model: `H = −J Σ_{(i,j)∈E} (X_iX_j + Y_iY_j)`, jumps `Z_i`.
/// Qubits are numbered from 0.
pub fn scenario_xy(n: usize, coupling: f64, edges: Option<&[(usize, usize)]>) -> Result<Lindbladian> {
    if n < 2 {
        return Err(Error::InvalidModel(format!("xy scenario needs n >= 2, got {n}")));
    }
    let edges: Vec<(usize, usize)> = match edges {
        Some(e) => e.to_vec(),
        None => full_topology(n),
    };
    let mut seen = BTreeSet::new();
    for &(a, b) in &edges {
        if a >= n || b >= n || a == b || !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::InvalidModel(format!("invalid edge ({a}, {b}) for n = {n}")));
        }
    }
    let coeff = c(-coupling, 0.0);
    let mut terms = Vec::new();
    for &(a, b) in &edges {
        for p in [Pauli::X, Pauli::Y] {
            terms.extend(PauliTerm::from_complex(&on_qubits(n, &[(a, p), (b, p)]), coeff));
        }
    }
    let jumps = (0..n).map(|k| single(n, on_qubits(n, &[(k, Pauli::Z)]), Phase::One, 1.0)).collect();
    Lindbladian::new(n, PauliSum { n, terms }, jumps)
}

/// Collective decay: one jump `√γ_S Π_{i∈S} σ_i⁻` per subset `S`, with
/// `σ⁻ = |0⟩⟨1| = (X + iY)/2`.
pub fn scenario_collective_lowering(n: usize, rates: &[(Vec<usize>, f64)]) -> Result<Lindbladian> {
    let mut jumps = Vec::new();
    for (subset, gamma) in rates {
        if subset.is_empty() {
            return Err(Error::InvalidModel("empty subset in collective rates".into()));
        }
        let set: BTreeSet<usize> = subset.iter().copied().collect();
        if set.len() != subset.len() || set.iter().any(|&k| k >= n) {
            return Err(Error::InvalidModel(format!("invalid subset {subset:?} for n = {n}")));
        }
        if !(*gamma >= 0.0) {
            return Err(Error::InvalidModel(format!("negative rate {gamma}")));
        }
        let s: Vec<usize> = set.into_iter().collect();
        let w = gamma.sqrt() / (1usize << s.len()) as f64;
        let mut terms = Vec::new();
        for mask in 0..1usize << s.len() {
            let ops: Vec<(usize, Pauli)> = s
                .iter()
                .enumerate()
                .map(|(b, &k)| (k, if mask >> b & 1 == 1 { Pauli::Y } else { Pauli::X }))
                .collect();
            let phase = Phase::from_power(mask.count_ones() as u8);
            terms.push(PauliTerm { axes: on_qubits(n, &ops), phase, weight: w });
        }
        jumps.push(PauliSum { n, terms });
    }
    Lindbladian::new(n, PauliSum::zero(n), jumps)
}

/// Single-qubit amplitude damping `L = √γ σ⁻` with optional `H = hz·Z`.
pub fn amplitude_damping(gamma: f64, hz: f64) -> Result<Lindbladian> {
    let base = scenario_collective_lowering(1, &[(vec![0], gamma)])?;
    if hz != 0.0 {
        let h = PauliSum::from_labels(1, &[("Z", c(hz, 0.0))])?;
        base.with_hamiltonian(h, false)
    } else {
        Ok(base)
    }
}

/// Random model for property tests: `h_terms` Hamiltonian terms and `m`
/// jumps with `k` terms each, weights in `(0.05, 1)` and random phases.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    h_terms: usize,
    m: usize,
    k: usize,
) -> Lindbladian {
    const P: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let term = |rng: &mut R, phases: bool| PauliTerm {
        axes: (0..n).map(|_| P[rng.random_range(0..4)]).collect(),
        phase: if phases { Phase::from_power(rng.random_range(0..4)) } else { Phase::One },
        weight: rng.random_range(0.05..1.0),
    };
    // Hamiltonian terms keep phase ±1 so H stays Hermitian
    let mut h_list = Vec::new();
    for _ in 0..h_terms {
        let mut t = term(rng, false);
        if rng.random_bool(0.5) {
            t.phase = Phase::MinusOne;
        }
        h_list.push(t);
    }
    let jumps = (0..m).map(|_| PauliSum { n, terms: (0..k).map(|_| term(rng, true)).collect() }).collect();
    Lindbladian::new(n, PauliSum { n, terms: h_list }, jumps).expect("consistent qubit counts")
}

// ---------------------------------------------------------------------------
// file format
//
// {
//   "n": 1,
//   "hamiltonian": [{"pauli": "Z", "coeff": 0.5}],
//   "jumps": [[{"pauli": "X", "coeff": 0.5}, {"pauli": "Y", "coeff": "0.5i"}]],
//   "q": 2            (optional, checked against the computed value)
// }

/// Parses `"0.5"`, `"-2"`, `"0.5i"`, `"-i"`, `"0.3-0.4i"` and friends.
pub fn parse_complex(s: &str) -> Option<C64> {
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if t.is_empty() {
        return None;
    }
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not an exponent sign or leading sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().ok()?,
        };
        let re = if re.is_empty() { 0.0 } else { re.parse::<f64>().ok()? };
        Some(c(re, im))
    } else {
        t.parse::<f64>().ok().map(|x| c(x, 0.0))
    }
}

fn line_of(text: &str, needle: &str) -> usize {
    text.lines().position(|l| l.contains(needle)).map(|k| k + 1).unwrap_or(0)
}

fn parse_sum(text: &str, n: usize, v: &Value, what: &str) -> Result<PauliSum> {
    let arr = v.as_array().ok_or_else(|| Error::Parse { line: 0, msg: format!("{what} must be an array") })?;
    let mut terms = Vec::new();
    for item in arr {
        let label = item
            .get("pauli")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("{what}: term without a \"pauli\" string") })?;
        let line = line_of(text, &format!("\"{label}\""));
        let axes = PauliTerm::parse_axes(label).map_err(|_| Error::Parse {
            line,
            msg: format!("{what}: invalid Pauli string \"{label}\""),
        })?;
        if axes.len() != n {
            return Err(Error::Parse {
                line,
                msg: format!("{what}: \"{label}\" has {} qubits, model declares n = {n}", axes.len()),
            });
        }
        let coeff = match item.get("coeff") {
            Some(Value::Number(x)) => c(x.as_f64().unwrap_or(f64::NAN), 0.0),
            Some(Value::String(s)) => parse_complex(s).ok_or_else(|| Error::Parse {
                line,
                msg: format!("{what}: bad coefficient \"{s}\""),
            })?,
            _ => return Err(Error::Parse { line, msg: format!("{what}: missing coefficient for \"{label}\"") }),
        };
        if !coeff.re.is_finite() || !coeff.im.is_finite() {
            return Err(Error::Parse { line, msg: format!("{what}: non-finite coefficient") });
        }
        terms.extend(PauliTerm::from_complex(&axes, coeff));
    }
    Ok(PauliSum { n, terms })
}

pub fn parse_model(text: &str) -> Result<Lindbladian> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    let n = doc
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse { line: line_of(text, "\"n\""), msg: "missing or invalid \"n\"".into() })?
        as usize;
    if n == 0 {
        return Err(Error::Parse { line: line_of(text, "\"n\""), msg: "n must be positive".into() });
    }
    let h = match doc.get("hamiltonian") {
        Some(v) => parse_sum(text, n, v, "hamiltonian")?,
        None => PauliSum::zero(n),
    };
    let mut jumps = Vec::new();
    if let Some(v) = doc.get("jumps") {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse { line: line_of(text, "\"jumps\""), msg: "jumps must be an array".into() })?;
        for (j, l) in arr.iter().enumerate() {
            jumps.push(parse_sum(text, n, l, &format!("jump {j}"))?);
        }
    }
    let model = Lindbladian::new(n, h, jumps)?;
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    if let Some(declared) = doc.get("q") {
        let q = model.derived_params()?.q;
        if declared.as_u64() != Some(q as u64) {
            return Err(Error::Parse {
                line: line_of(text, "\"q\""),
                msg: format!("declared q = {declared} but the model has q = {q}"),
            });
        }
    }
    Ok(model)
}

fn coeff_value(t: &PauliTerm) -> Value {
    match t.phase {
        Phase::One => json!(t.weight),
        Phase::MinusOne => json!(-t.weight),
        Phase::PlusI => json!(format!("{}i", t.weight)),
        Phase::MinusI => json!(format!("-{}i", t.weight)),
    }
}

fn sum_value(s: &PauliSum) -> Value {
    Value::Array(
        s.terms.iter().map(|t| json!({"pauli": t.label(), "coeff": coeff_value(t)})).collect(),
    )
}

pub fn serialize_model(model: &Lindbladian) -> String {
    let mut doc = json!({
        "n": model.n,
        "hamiltonian": sum_value(&model.hamiltonian),
        "jumps": model.jumps.iter().map(sum_value).collect::<Vec<_>>(),
    });
    if let Ok(p) = model.derived_params() {
        doc["q"] = json!(p.q);
    }
    serde_json::to_string_pretty(&doc).expect("serializable")
}
