//! Exact reference machinery: the Liouvillian superoperator, `e^{𝓛t}`,
//! channel representations and distances.
//!
//! Superoperators act on column-stacked density matrices, so a Kraus operator
//! `A` contributes `Ā ⊗ A`.

use crate::error::{Error, Result};
use crate::linalg::{conj, identity, kron, max_abs, trace_norm, unvectorize, vectorize, CMat, CVec, C64, ZERO};
use crate::model::Lindbladian;

/// Largest qubit count the dense oracle accepts (superoperator is `4ⁿ × 4ⁿ`).
pub const ORACLE_MAX_QUBITS: usize = 4;

#[derive(Debug, Clone)]
pub struct ChannelRep {
    pub dim: usize,
    pub superop: CMat,
    pub kraus: Option<Vec<CMat>>,
}

impl ChannelRep {
    pub fn identity(dim: usize) -> Self {
        ChannelRep { dim, superop: identity(dim * dim), kraus: Some(vec![identity(dim)]) }
    }

    pub fn from_kraus(kraus: Vec<CMat>) -> Result<Self> {
        let dim = kraus.first().map(|k| k.nrows()).ok_or_else(|| Error::Degenerate("empty Kraus list".into()))?;
        let mut s = CMat::zeros(dim * dim, dim * dim);
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.nrows().max(k.ncols()) });
            }
            s += kron(&conj(k), k);
        }
        Ok(ChannelRep { dim, superop: s, kraus: Some(kraus) })
    }

    pub fn from_superop(superop: CMat) -> Result<Self> {
        let d2 = superop.nrows();
        let dim = (d2 as f64).sqrt().round() as usize;
        if dim * dim != d2 || !superop.is_square() {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: d2 });
        }
        Ok(ChannelRep { dim, superop, kraus: None })
    }

    /// Builds the superoperator of an arbitrary linear map column by column.
    pub fn from_map(dim: usize, f: impl Fn(&CMat) -> CMat) -> Self {
        let d2 = dim * dim;
        let mut s = CMat::zeros(d2, d2);
        for col in 0..d2 {
            let mut e = CMat::zeros(dim, dim);
            e[(col % dim, col / dim)] = C64::new(1.0, 0.0);
            s.set_column(col, &vectorize(&f(&e)));
        }
        ChannelRep { dim, superop: s, kraus: None }
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        unvectorize(&(&self.superop * vectorize(rho)), self.dim)
    }

    /// `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &ChannelRep) -> ChannelRep {
        ChannelRep { dim: self.dim, superop: &other.superop * &self.superop, kraus: None }
    }

    pub fn power(&self, k: usize) -> ChannelRep {
        let mut result = identity(self.dim * self.dim);
        let mut base = self.superop.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &base * &result;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        ChannelRep { dim: self.dim, superop: result, kraus: None }
    }

    pub fn scaled(&self, w: f64) -> ChannelRep {
        ChannelRep { dim: self.dim, superop: &self.superop * C64::new(w, 0.0), kraus: None }
    }

    /// Unnormalized Choi matrix `Σ_{ab} Φ(|a⟩⟨b|) ⊗ |a⟩⟨b|`.
    pub fn choi(&self) -> CMat {
        let d = self.dim;
        CMat::from_fn(d * d, d * d, |r, col| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (col / d, col % d);
            self.superop[(i + j * d, a + b * d)]
        })
    }

    pub fn from_choi(choi: &CMat) -> Result<Self> {
        let d2 = choi.nrows();
        let d = (d2 as f64).sqrt().round() as usize;
        if d * d != d2 {
            return Err(Error::DimensionMismatch { expected: d * d, got: d2 });
        }
        let s = CMat::from_fn(d2, d2, |r, col| {
            let (i, j) = (r % d, r / d);
            let (a, b) = (col % d, col / d);
            choi[(i * d + a, j * d + b)]
        });
        Ok(ChannelRep { dim: d, superop: s, kraus: None })
    }

    /// Kraus operators from the Choi eigendecomposition; eigenvalues below
    /// `tol` are discarded. Fails when the Choi matrix is not positive.
    pub fn kraus_from_choi(&self, tol: f64) -> Result<Vec<CMat>> {
        let d = self.dim;
        let j = self.choi();
        let h = (&j + j.adjoint()) * C64::new(0.5, 0.0);
        let eig = h.symmetric_eigen();
        let mut out = Vec::new();
        for (k, mu) in eig.eigenvalues.iter().enumerate() {
            if *mu < -tol {
                return Err(Error::Numerical(format!("Choi matrix has eigenvalue {mu}")));
            }
            if *mu <= tol {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            let s = mu.sqrt();
            out.push(CMat::from_fn(d, d, |i, a| v[i * d + a] * s));
        }
        Ok(out)
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        let j = self.choi();
        let h = (&j + j.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Max-abs deviation of `Tr_out J` from the identity.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim;
        let j = self.choi();
        let mut m = CMat::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let mut s = ZERO;
                for i in 0..d {
                    s += j[(i * d + a, i * d + b)];
                }
                m[(a, b)] = s;
            }
        }
        max_abs(&(m - identity(d)))
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.min_choi_eigenvalue() >= -tol && self.trace_preservation_defect() <= tol
    }
}

fn check_qubits(model: &Lindbladian) -> Result<()> {
    if model.n > ORACLE_MAX_QUBITS {
        return Err(Error::CapExceeded(format!(
            "dense oracle supports at most {ORACLE_MAX_QUBITS} qubits, model has {}",
            model.n
        )));
    }
    Ok(())
}

/// Vectorized generator `−i(I⊗H − Hᵀ⊗I) + Σ_j [L̄_j⊗L_j − ½(I⊗L_j†L_j + (L_j†L_j)ᵀ⊗I)]`.
pub fn liouvillian_superop(model: &Lindbladian) -> Result<CMat> {
    check_qubits(model)?;
    let d = model.dim();
    let id = identity(d);
    let h = model.hamiltonian_dense();
    let mi = C64::new(0.0, -1.0);
    let mut s = (kron(&id, &h) - kron(&h.transpose(), &id)) * mi;
    for l in model.jumps_dense() {
        let ldl = l.adjoint() * &l;
        s += kron(&conj(&l), &l);
        s -= (kron(&id, &ldl) + kron(&ldl.transpose(), &id)) * C64::new(0.5, 0.0);
    }
    Ok(s)
}

pub fn exact_channel(model: &Lindbladian, t: f64) -> Result<ChannelRep> {
    if !(t >= 0.0) {
        return Err(Error::InvalidModel(format!("evolution time must be nonnegative, got {t}")));
    }
    let gen = liouvillian_superop(model)? * C64::new(t, 0.0);
    let s = gen.exp();
    if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("matrix exponential did not converge".into()));
    }
    ChannelRep::from_superop(s)
}

/// `I + δ𝓛` (trace preserving, not completely positive in general).
pub fn first_order_map(model: &Lindbladian, delta: f64) -> Result<ChannelRep> {
    let s = liouvillian_superop(model)? * C64::new(delta, 0.0) + identity(model.dim() * model.dim());
    ChannelRep::from_superop(s)
}

/// `(1/d)‖J(A) − J(B)‖₁`, a lower bound on the diamond distance.
pub fn choi_distance(a: &ChannelRep, b: &ChannelRep) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    Ok(trace_norm(&(a.choi() - b.choi())) / a.dim as f64)
}

pub fn state_trace_distance(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), got: sigma.nrows() });
    }
    Ok(0.5 * trace_norm(&(rho - sigma)))
}

/// `|0…0⟩⟨0…0|`, `|+…+⟩⟨+…+|` and `I/d`, the standard test inputs.
pub fn standard_inputs(n: usize) -> Vec<(&'static str, CMat)> {
    let d = 1 << n;
    let mut zero = CMat::zeros(d, d);
    zero[(0, 0)] = C64::new(1.0, 0.0);
    let plus = CVec::from_element(d, C64::new(1.0 / (d as f64).sqrt(), 0.0));
    let plus = &plus * plus.adjoint();
    let mixed = identity(d) * C64::new(1.0 / d as f64, 0.0);
    vec![("zero", zero), ("plus", plus), ("mixed", mixed)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, projector};
    use crate::model::{amplitude_damping, random_model, scenario_depolarizing};
    use crate::pauli::PauliSum;
    use rand::SeedableRng;

    fn pure(v: &[C64]) -> CMat {
        projector(&CVec::from_vec(v.to_vec()))
    }

    #[test]
    fn decay_generator_on_excited_state() {
        let m = amplitude_damping(1.0, 0.0).unwrap();
        let s = liouvillian_superop(&m).unwrap();
        let rho = pure(&[ZERO, c(1., 0.)]);
        let dr = unvectorize(&(s * vectorize(&rho)), 2);
        assert!((dr[(0, 0)] - c(1., 0.)).norm() < 1e-14);
        assert!((dr[(1, 1)] - c(-1., 0.)).norm() < 1e-14);
    }

    #[test]
    fn commutator_case() {
        let h = PauliSum::from_labels(1, &[("Z", c(0.5, 0.))]).unwrap();
        let m = Lindbladian::new(1, h.clone(), vec![]).unwrap();
        let s = liouvillian_superop(&m).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let rho = pure(&[c(r, 0.), c(r, 0.)]);
        let hd = h.to_dense();
        let expect = (&hd * &rho - &rho * &hd) * c(0., -1.);
        let got = unvectorize(&(s * vectorize(&rho)), 2);
        assert!(max_abs(&(got - expect)) < 1e-14);
    }

    #[test]
    fn generator_is_trace_annihilating() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random_model(&mut rng, 2, 2, 2, 2);
            let s = liouvillian_superop(&m).unwrap();
            let d = 4;
            let vid = vectorize(&identity(d));
            let row = vid.adjoint() * &s;
            assert!(row.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
        }
    }

    #[test]
    fn exact_channel_basics() {
        let m = amplitude_damping(1.0, 0.0).unwrap();
        let e0 = exact_channel(&m, 0.0).unwrap();
        assert!(max_abs(&(e0.superop - identity(4))) < 1e-14);

        for &t in &[0.1, 0.5, 1.0, 2.3] {
            let e = exact_channel(&m, t).unwrap();
            let rho = e.apply(&pure(&[ZERO, c(1., 0.)]));
            assert!((rho[(1, 1)].re - (-t as f64).exp()).abs() < 1e-12);
            assert!(e.is_cptp(1e-10));
        }

        let dep = scenario_depolarizing(1, None).unwrap();
        for &t in &[0.2, std::f64::consts::LN_2, 1.5] {
            let e = exact_channel(&dep, t).unwrap();
            let rho0 = pure(&[c(0.6, 0.), c(0., 0.8)]);
            let lt = 1.0 - (-t as f64).exp();
            let expect = &rho0 * c(1.0 - lt, 0.) + identity(2) * c(lt / 2.0, 0.);
            assert!(max_abs(&(e.apply(&rho0) - expect)) < 1e-12);
        }
    }

    #[test]
    fn semigroup_property() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let m = random_model(&mut rng, 2, 2, 2, 2);
            let a = exact_channel(&m, 0.3).unwrap();
            let b = exact_channel(&m, 0.45).unwrap();
            let ab = exact_channel(&m, 0.75).unwrap();
            assert!(max_abs(&(a.then(&b).superop - ab.superop)) < 1e-9);
        }
    }

    #[test]
    fn choi_distance_examples() {
        let id = ChannelRep::identity(2);
        assert!(choi_distance(&id, &id).unwrap() < 1e-14);
        let dep = ChannelRep::from_map(2, |x| identity(2) * (x.trace() * c(0.5, 0.)));
        assert!((choi_distance(&id, &dep).unwrap() - 1.5).abs() < 1e-12);
        assert!((choi_distance(&dep, &id).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn choi_kraus_round_trip() {
        let m = amplitude_damping(1.0, 0.3).unwrap();
        let e = exact_channel(&m, 0.4).unwrap();
        let back = ChannelRep::from_choi(&e.choi()).unwrap();
        assert!(max_abs(&(back.superop.clone() - &e.superop)) < 1e-12);
        let k = e.kraus_from_choi(1e-13).unwrap();
        let rebuilt = ChannelRep::from_kraus(k).unwrap();
        assert!(max_abs(&(rebuilt.superop - &e.superop)) < 1e-10);
    }

    #[test]
    fn state_distances() {
        let z = pure(&[c(1., 0.), ZERO]);
        let o = pure(&[ZERO, c(1., 0.)]);
        assert!(state_trace_distance(&z, &z).unwrap() < 1e-15);
        assert!((state_trace_distance(&z, &o).unwrap() - 1.0).abs() < 1e-14);
        let mixed = identity(2) * c(0.5, 0.);
        assert!((state_trace_distance(&z, &mixed).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn first_order_map_is_trace_preserving() {
        let m = amplitude_damping(1.0, 0.5).unwrap();
        let f0 = first_order_map(&m, 0.0).unwrap();
        assert!(max_abs(&(f0.superop - identity(4))) < 1e-15);
        let f = first_order_map(&m, 0.2).unwrap();
        assert!(f.trace_preservation_defect() < 1e-14);
    }
}
