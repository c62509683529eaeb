//! Phased Pauli strings with nonnegative weights.
//!
//! A [`PauliTerm`] is `weight · phase · σ_{a₀} ⊗ … ⊗ σ_{a_{n-1}}` where axis `k`
//! acts on qubit `k` and qubit `k` is bit `k` of a basis index (little endian).
//! Signs and imaginary units always live in the phase so weights stay ≥ 0.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Option<Pauli> {
        match ch {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn signs(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }
}

/// One of the four unit phases `{+1, +i, −1, −i}`, stored as a power of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    One,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_power(k: u8) -> Phase {
        match k % 4 {
            0 => Phase::One,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn power(self) -> u8 {
        match self {
            Phase::One => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn value(self) -> C64 {
        match self {
            Phase::One => c(1.0, 0.0),
            Phase::PlusI => c(0.0, 1.0),
            Phase::MinusOne => c(-1.0, 0.0),
            Phase::MinusI => c(0.0, -1.0),
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase::from_power(self.power() + other.power())
    }

    pub fn conj(self) -> Phase {
        Phase::from_power(4 - self.power())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub axes: Vec<Pauli>,
    pub phase: Phase,
    pub weight: f64,
}

impl PauliTerm {
    pub fn new(axes: Vec<Pauli>, phase: Phase, weight: f64) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidModel(format!(
                "Pauli weight must be finite and nonnegative, got {weight}"
            )));
        }
        Ok(PauliTerm { axes, phase, weight })
    }

    /// Parses a letter string such as `"XZ"`; character `k` acts on qubit `k`.
    pub fn parse_axes(s: &str) -> Result<Vec<Pauli>> {
        s.chars()
            .map(|ch| {
                Pauli::from_char(ch).ok_or_else(|| Error::Parse {
                    line: 0,
                    msg: format!("invalid Pauli letter '{ch}' in \"{s}\""),
                })
            })
            .collect()
    }

    pub fn from_str_weight(s: &str, phase: Phase, weight: f64) -> Result<Self> {
        PauliTerm::new(PauliTerm::parse_axes(s)?, phase, weight)
    }

    /// Splits a complex coefficient into at most two terms with weight ≥ 0 and
    /// an axis-aligned phase (real part first).
    pub fn from_complex(axes: &[Pauli], coeff: C64) -> Vec<PauliTerm> {
        let mut out = Vec::new();
        if coeff.re != 0.0 {
            let phase = if coeff.re > 0.0 { Phase::One } else { Phase::MinusOne };
            out.push(PauliTerm { axes: axes.to_vec(), phase, weight: coeff.re.abs() });
        }
        if coeff.im != 0.0 {
            let phase = if coeff.im > 0.0 { Phase::PlusI } else { Phase::MinusI };
            out.push(PauliTerm { axes: axes.to_vec(), phase, weight: coeff.im.abs() });
        }
        out
    }

    pub fn num_qubits(&self) -> usize {
        self.axes.len()
    }

    /// `weight · phase` as a complex number.
    pub fn coefficient(&self) -> C64 {
        self.phase.value() * self.weight
    }

    pub fn label(&self) -> String {
        self.axes.iter().map(|p| p.as_char()).collect()
    }

    /// The unit-weight operator `phase · σ` (the unitary part of the term).
    pub fn unitary_part(&self) -> PauliTerm {
        PauliTerm { axes: self.axes.clone(), phase: self.phase, weight: 1.0 }
    }

    /// Hermitian conjugate. Pauli strings are Hermitian, so only the phase
    /// changes.
    pub fn adjoint(&self) -> PauliTerm {
        PauliTerm { axes: self.axes.clone(), phase: self.phase.conj(), weight: self.weight }
    }

    pub fn scaled(&self, factor: f64) -> PauliTerm {
        assert!(factor >= 0.0, "scale factors must be nonnegative");
        PauliTerm { axes: self.axes.clone(), phase: self.phase, weight: self.weight * factor }
    }

    pub fn with_phase(&self, extra: Phase) -> PauliTerm {
        PauliTerm { axes: self.axes.clone(), phase: self.phase.mul(extra), weight: self.weight }
    }

    pub(crate) fn masks(&self) -> (usize, usize, u8) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u8;
        for (k, p) in self.axes.iter().enumerate() {
            if p.flips() {
                x |= 1 << k;
            }
            if p.signs() {
                z |= 1 << k;
            }
            if *p == Pauli::Y {
                ny += 1;
            }
        }
        (x, z, ny)
    }

    /// Dense `2ⁿ × 2ⁿ` realization.
    pub fn to_dense(&self, n: usize) -> Result<CMat> {
        if self.axes.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.axes.len() });
        }
        let d = 1usize << n;
        let (x, z, ny) = self.masks();
        let base = self.phase.mul(Phase::from_power(ny)).value() * self.weight;
        let mut m = CMat::zeros(d, d);
        for j in 0..d {
            let sign = if (j & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[(j ^ x, j)] = base * sign;
        }
        Ok(m)
    }

    /// Applies the term to `targets` of a statevector whose qubit `k` is bit
    /// `k` of the index. `targets[i]` is the qubit acted on by `axes[i]`.
    pub fn apply_to_statevector(&self, psi: &[C64], targets: &[usize]) -> Result<Vec<C64>> {
        if targets.len() != self.axes.len() {
            return Err(Error::DimensionMismatch { expected: self.axes.len(), got: targets.len() });
        }
        let width = psi.len().trailing_zeros() as usize;
        if !psi.len().is_power_of_two() {
            return Err(Error::DimensionMismatch { expected: 1 << width, got: psi.len() });
        }
        for &t in targets {
            if t >= width {
                return Err(Error::QubitOutOfRange { index: t, width });
            }
        }
        let mut out = vec![ZERO; psi.len()];
        let (x, z, coeff) = self.global_masks(targets);
        for (i, amp) in psi.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 1 { -coeff } else { coeff };
            out[i ^ x] = sign * amp;
        }
        Ok(out)
    }

    /// Masks in global qubit numbering plus the scalar factor
    /// `weight · phase · i^{#Y}`.
    pub(crate) fn global_masks(&self, targets: &[usize]) -> (usize, usize, C64) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0u8;
        for (p, &t) in self.axes.iter().zip(targets) {
            if p.flips() {
                x |= 1 << t;
            }
            if p.signs() {
                z |= 1 << t;
            }
            if *p == Pauli::Y {
                ny += 1;
            }
        }
        (x, z, self.phase.mul(Phase::from_power(ny)).value() * self.weight)
    }

    fn canonical_cmp(&self, other: &PauliTerm) -> Ordering {
        self.axes.cmp(&other.axes).then(self.phase.cmp(&other.phase))
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ph = match self.phase {
            Phase::One => "+",
            Phase::PlusI => "+i",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i",
        };
        write!(f, "{ph}{}·{}", self.weight, self.label())
    }
}

/// A linear combination of phased Pauli strings on a fixed qubit count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub n: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        PauliSum { n, terms: Vec::new() }
    }

    pub fn new(n: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for t in &terms {
            if t.axes.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: t.axes.len() });
            }
        }
        Ok(PauliSum { n, terms })
    }

    /// Builds a sum from `(label, complex coefficient)` pairs, normalizing
    /// phases and putting the result in canonical order.
    pub fn from_labels(n: usize, items: &[(&str, C64)]) -> Result<Self> {
        let mut terms = Vec::new();
        for (label, coeff) in items {
            let axes = PauliTerm::parse_axes(label)?;
            if axes.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: axes.len() });
            }
            terms.extend(PauliTerm::from_complex(&axes, *coeff));
        }
        Ok(PauliSum { n, terms }.canonical())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of weights.
    pub fn pauli_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Sorts terms (lexicographic on axes, then phase), merges identical
    /// `(axes, phase)` pairs and drops zero weights.
    pub fn canonical(mut self) -> Self {
        self.terms.sort_by(|a, b| a.canonical_cmp(b));
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            match merged.last_mut() {
                Some(last) if last.axes == t.axes && last.phase == t.phase => last.weight += t.weight,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.weight > 0.0);
        PauliSum { n: self.n, terms: merged }
    }

    pub fn to_dense(&self) -> CMat {
        let d = 1usize << self.n;
        let mut m = CMat::zeros(d, d);
        for t in &self.terms {
            m += t.to_dense(self.n).expect("terms validated at construction");
        }
        m
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum { n: self.n, terms: self.terms.iter().map(|t| t.adjoint()).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, spectral_norm, max_abs};
    use proptest::prelude::*;

    fn term(s: &str, phase: Phase, w: f64) -> PauliTerm {
        PauliTerm::from_str_weight(s, phase, w).unwrap()
    }

    #[test]
    fn identity_term_is_identity() {
        let m = term("I", Phase::One, 1.0).to_dense(1).unwrap();
        assert_eq!(m, identity(2));
    }

    #[test]
    fn phased_x() {
        let m = term("X", Phase::PlusI, 0.5).to_dense(1).unwrap();
        assert_eq!(m[(0, 1)], c(0.0, 0.5));
        assert_eq!(m[(1, 0)], c(0.0, 0.5));
        assert_eq!(m[(0, 0)], ZERO);
    }

    #[test]
    fn zz_is_diagonal() {
        let m = term("ZZ", Phase::One, 2.0).to_dense(2).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| m[(k, k)].re).collect();
        assert_eq!(diag, vec![2.0, -2.0, -2.0, 2.0]);
    }

    #[test]
    fn y_matches_textbook_matrix() {
        let m = term("Y", Phase::One, 1.0).to_dense(1).unwrap();
        assert_eq!(m[(0, 1)], c(0.0, -1.0));
        assert_eq!(m[(1, 0)], c(0.0, 1.0));
    }

    #[test]
    fn qubit_zero_is_least_significant() {
        // X on qubit 0 of two qubits flips bit 0
        let m = term("XI", Phase::One, 1.0).to_dense(2).unwrap();
        assert_eq!(m[(1, 0)], c(1.0, 0.0));
        assert_eq!(m[(2, 0)], ZERO);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(term("XZ", Phase::One, 1.0).to_dense(3).is_err());
    }

    #[test]
    fn pauli_norm_examples() {
        let s = PauliSum::from_labels(2, &[("XI", c(0.3, 0.)), ("ZZ", c(0.7, 0.))]).unwrap();
        assert!((s.pauli_norm() - 1.0).abs() < 1e-15);
        assert_eq!(PauliSum::zero(3).pauli_norm(), 0.0);
        let lowering = PauliSum::from_labels(1, &[("X", c(0.5, 0.)), ("Y", c(0., 0.5))]).unwrap();
        assert!((lowering.pauli_norm() - 1.0).abs() < 1e-15);
        // σ⁻ = |0⟩⟨1|
        let m = lowering.to_dense();
        assert!((m[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(m[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn complex_coefficients_split_into_two_terms() {
        let s = PauliSum::from_labels(1, &[("Z", c(-0.3, 0.4))]).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.terms.iter().all(|t| t.weight >= 0.0));
        assert!((s.to_dense()[(0, 0)] - c(-0.3, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn statevector_examples() {
        let x = term("X", Phase::One, 1.0);
        let out = x.apply_to_statevector(&[c(1., 0.), ZERO], &[0]).unwrap();
        assert_eq!(out, vec![ZERO, c(1., 0.)]);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = term("Z", Phase::One, 1.0);
        let out = z.apply_to_statevector(&[c(h, 0.), c(h, 0.)], &[0]).unwrap();
        assert!((out[1] - c(-h, 0.)).norm() < 1e-15);

        // iY on |0⟩: iY|0⟩ = i·i|1⟩ = −|1⟩, checked against the dense product
        let iy = term("Y", Phase::PlusI, 1.0);
        let out = iy.apply_to_statevector(&[c(1., 0.), ZERO], &[0]).unwrap();
        let dense = iy.to_dense(1).unwrap();
        assert!((out[1] - dense[(1, 0)]).norm() < 1e-15);
        assert!((out[1] - c(-1., 0.)).norm() < 1e-15);
    }

    #[test]
    fn out_of_range_target() {
        let x = term("X", Phase::One, 1.0);
        assert!(matches!(
            x.apply_to_statevector(&[ZERO; 4], &[2]),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    fn arb_term(n: usize) -> impl Strategy<Value = PauliTerm> {
        (
            proptest::collection::vec(0u8..4, n),
            0u8..4,
            0.0f64..2.0,
        )
            .prop_map(move |(ax, ph, w)| PauliTerm {
                axes: ax
                    .into_iter()
                    .map(|a| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][a as usize])
                    .collect(),
                phase: Phase::from_power(ph),
                weight: w,
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn statevector_action_matches_dense(
            n in 1usize..=3,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let axes: Vec<Pauli> = (0..n).map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)]).collect();
            let t = PauliTerm { axes, phase: Phase::from_power(rng.random_range(0..4)), weight: rng.random_range(0.0..2.0) };
            let d = 1 << n;
            let psi: Vec<C64> = (0..d).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let targets: Vec<usize> = (0..n).collect();
            let out = t.apply_to_statevector(&psi, &targets).unwrap();
            let dense = t.to_dense(n).unwrap() * crate::linalg::CVec::from_vec(psi);
            let err = out.iter().zip(dense.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-12);
        }

        #[test]
        fn pauli_norm_bounds_spectral_norm(terms in proptest::collection::vec(arb_term(3), 0..6)) {
            let s = PauliSum::new(3, terms).unwrap();
            prop_assert!(s.pauli_norm() + 1e-12 >= spectral_norm(&s.to_dense()));
        }

        #[test]
        fn dense_term_is_weighted_unitary(t in arb_term(2)) {
            let m = t.to_dense(2).unwrap();
            let u = t.unitary_part().to_dense(2).unwrap();
            prop_assert!(max_abs(&(u.adjoint() * &u - identity(4))) < 1e-12);
            prop_assert!((spectral_norm(&m) - t.weight).abs() < 1e-12);
        }
    }
}
