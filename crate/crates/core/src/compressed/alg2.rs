//! Compressed segment simulation.
//!
//! Each of the `r` slots lives in a `D`-dimensional register. The segment
//! state is stored sparsely: a key is a set of active slot positions (at most
//! `h`) together with one copy index per active slot, and each key carries an
//! amplitude vector over `extra ⊗ system ⊗ input`.
//!
//! Two frames are used. In the computational frame an inactive slot is `|0⟩`
//! and an active copy is a nonzero basis index. In the prepared frame an
//! inactive slot is the trivial direction `π_I` and active copies index an
//! orthonormal basis of its complement, chosen so that `V_c` is diagonal
//! (identity on the rest of the trivial span, `U_b` on nontrivial basis
//! states). `E_ro` is the per-slot frame change by `V_p(G⊗I)`, dropping keys
//! whose weight would exceed `h`; at `h = r` it is exact.

use crate::circuit::alg1::extra_rotation;
use crate::circuit::sim::{dilation_superop, isometry_columns, qubit_cap};
use crate::circuit::{oaa, Circuit, Cond, Gate};
use crate::error::{Error, Result};
use crate::linalg::{c, ceil_log2, complete_unitary, trace, CMat, CVec, C64, ZERO};
use crate::model::Lindbladian;
use crate::oracle::ChannelRep;
use crate::trajectory::Schedule;

use super::encoding::{binomial_tail, cutoff_for, PositionSpace};
use super::structured::StructuredPurification;

type SparseCol = Vec<(usize, C64)>;

fn sparse_columns(m: &CMat) -> Vec<SparseCol> {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).filter(|&i| m[(i, j)].norm() > 1e-15).map(|i| (i, m[(i, j)])).collect())
        .collect()
}

/// Per-slot data shared by every slot of a segment.
#[derive(Debug, Clone)]
pub struct SlotFrames {
    pub dim: usize,
    /// prepared-frame basis as columns of a `D × D` unitary, column 0 = `π_I`
    pub basis: CMat,
    /// computational → prepared coordinates, `B† V_p(G⊗I)`
    pub t: CMat,
    /// computational basis index behind each prepared coordinate (`None` on
    /// the trivial span, where `V_c` is the identity)
    pub vc_index: Vec<Option<usize>>,
    pub blocks: Vec<CMat>,
    pub ctrl_zero: Vec<bool>,
    pub p_trivial: f64,
    fwd: Vec<SparseCol>,
    bwd: Vec<SparseCol>,
}

impl SlotFrames {
    pub fn new(sp: &StructuredPurification) -> Result<Self> {
        let dim = sp.layout.dim();
        let trivial: Vec<usize> = (0..dim).filter(|&b| sp.layout.is_trivial(b)).collect();
        let nontrivial: Vec<usize> = (0..dim).filter(|&b| !sp.layout.is_trivial(b)).collect();
        let pi = sp.trivial_direction();
        let local = CVec::from_fn(trivial.len(), |k, _| pi[trivial[k]]);
        let u = complete_unitary(&local);
        let mut basis = CMat::zeros(dim, dim);
        let mut vc_index = Vec::with_capacity(dim);
        for (col, _) in trivial.iter().enumerate() {
            for (k, &b) in trivial.iter().enumerate() {
                basis[(b, col)] = u[(k, col)];
            }
            vc_index.push(None);
        }
        for (k, &b) in nontrivial.iter().enumerate() {
            basis[(b, trivial.len() + k)] = c(1.0, 0.0);
            vc_index.push(Some(b));
        }
        let prep = sp.prep_matrix();
        let t = basis.adjoint() * &prep;
        let mask = sp.layout.ctrl_mask();
        let fwd = sparse_columns(&t);
        let bwd = sparse_columns(&t.adjoint());
        Ok(SlotFrames {
            dim,
            basis,
            t,
            vc_index,
            blocks: sp.vc_blocks()?,
            ctrl_zero: (0..dim).map(|b| b & mask == 0).collect(),
            p_trivial: sp.p_trivial(),
            fwd,
            bwd,
        })
    }
}

/// Index arithmetic of the key space.
#[derive(Debug, Clone)]
pub struct KeySpace {
    pub positions: PositionSpace,
    /// copies per active slot, `D − 1`
    pub base: usize,
    pub offsets: Vec<usize>,
    pub len: usize,
    pow: Vec<usize>,
}

impl KeySpace {
    pub fn new(r: usize, h: usize, dim: usize) -> Result<Self> {
        let positions = PositionSpace::new(r, h)?;
        let base = dim - 1;
        let pow: Vec<usize> = (0..=positions.h + 1).map(|k| base.pow(k as u32)).collect();
        let mut offsets = Vec::with_capacity(positions.len());
        let mut len = 0usize;
        for &m in &positions.masks {
            offsets.push(len);
            len = len
                .checked_add(pow[m.count_ones() as usize])
                .ok_or_else(|| Error::CapExceeded("key space overflows usize".into()))?;
        }
        Ok(KeySpace { positions, base, offsets, len, pow })
    }

    /// Number of keys for `r`, `h`, `D` without building the tables.
    pub fn count(r: usize, h: usize, dim: usize) -> f64 {
        (0..=h.min(r)).map(|w| super::encoding::binomial(r, w) * ((dim - 1) as f64).powi(w as i32)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct CompressedSegment {
    pub r: usize,
    pub h: usize,
    pub n: usize,
    pub d_in: usize,
    pub frames: SlotFrames,
    pub keys: KeySpace,
    pub extra: CMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Fwd,
    Bwd,
}

impl CompressedSegment {
    pub fn new(sp: &StructuredPurification, r: usize, h: usize) -> Result<Self> {
        let frames = SlotFrames::new(sp)?;
        let d_in = 1usize << sp.n;
        let vd = 2 * d_in * d_in;
        let cap = qubit_cap();
        let limit = 8.0 * 2f64.powi(cap as i32);
        let need = KeySpace::count(r, h, frames.dim) * vd as f64;
        if need > limit {
            return Err(Error::CapExceeded(format!(
                "compressed state needs {need:.3e} amplitudes (r = {r}, h = {h}, D = {}), limit 8·2^{cap} = {limit:.3e}",
                frames.dim
            )));
        }
        let keys = KeySpace::new(r, h, frames.dim)?;
        Ok(CompressedSegment { r, h: h.min(r), n: sp.n, d_in, frames, keys, extra: extra_rotation(sp.p, r)? })
    }

    fn vd(&self) -> usize {
        2 * self.d_in * self.d_in
    }

    fn vidx(&self, e: usize, s: usize, i: usize) -> usize {
        e + 2 * (s + self.d_in * i)
    }

    /// Initial state: no active slots, `extra = 0`, input `i` on the system.
    pub fn initial(&self) -> Vec<C64> {
        let mut v = vec![ZERO; self.keys.len * self.vd()];
        for i in 0..self.d_in {
            v[self.vidx(0, i, i)] = c(1.0, 0.0);
        }
        v
    }

    fn apply_slot(&self, input: &[C64], out: &mut [C64], s: usize, dir: Dir) {
        let cols = match dir {
            Dir::Fwd => &self.frames.fwd,
            Dir::Bwd => &self.frames.bwd,
        };
        let vd = self.vd();
        let base = self.keys.base;
        let pow = &self.keys.pow;
        let ps = &self.keys.positions;
        out.iter_mut().for_each(|z| *z = ZERO);
        let axpy = |out: &mut [C64], at: usize, coef: C64, v: &[C64]| {
            for (o, x) in out[at * vd..(at + 1) * vd].iter_mut().zip(v) {
                *o += coef * x;
            }
        };
        for (k, &mask) in ps.masks.iter().enumerate() {
            let w = mask.count_ones() as usize;
            let off = self.keys.offsets[k];
            let below = (mask & ((1u32 << s) - 1)).count_ones() as usize;
            if mask >> s & 1 == 0 {
                let grown = ps.rank[(mask | 1 << s) as usize];
                let off2 = (grown != usize::MAX).then(|| self.keys.offsets[grown]);
                for cix in 0..pow[w] {
                    let v = &input[(off + cix) * vd..(off + cix + 1) * vd];
                    if v.iter().all(|z| *z == ZERO) {
                        continue;
                    }
                    let (low, high) = (cix % pow[below], cix / pow[below]);
                    for &(a, coef) in &cols[0] {
                        if a == 0 {
                            axpy(out, off + cix, coef, v);
                        } else if let Some(o2) = off2 {
                            axpy(out, o2 + low + (a - 1) * pow[below] + high * pow[below + 1], coef, v);
                        }
                    }
                }
            } else {
                let shrunk = ps.rank[(mask & !(1 << s)) as usize];
                let off2 = self.keys.offsets[shrunk];
                for cix in 0..pow[w] {
                    let v = &input[(off + cix) * vd..(off + cix + 1) * vd];
                    if v.iter().all(|z| *z == ZERO) {
                        continue;
                    }
                    let low = cix % pow[below];
                    let b = (cix / pow[below]) % base;
                    let high = cix / pow[below + 1];
                    for &(a, coef) in &cols[b + 1] {
                        if a == 0 {
                            axpy(out, off2 + low + high * pow[below], coef, v);
                        } else {
                            axpy(out, off + low + (a - 1) * pow[below] + high * pow[below + 1], coef, v);
                        }
                    }
                }
            }
        }
    }

    /// Frame change on every slot; `Fwd` is `E_ro`, `Bwd` its adjoint.
    fn frame_change(&self, state: Vec<C64>, scratch: &mut Vec<C64>, dir: Dir) -> Vec<C64> {
        let mut cur = state;
        for s in 0..self.r {
            self.apply_slot(&cur, scratch, s, dir);
            std::mem::swap(&mut cur, scratch);
        }
        cur
    }

    /// `V_c` on active copies in slot order (reverse order with `U_b†` for
    /// the adjoint).
    fn controlled(&self, state: &mut [C64], adjoint: bool) {
        let vd = self.vd();
        let d = self.d_in;
        let base = self.keys.base;
        let mut tmp = vec![ZERO; d];
        for (k, &mask) in self.keys.positions.masks.iter().enumerate() {
            let w = mask.count_ones() as usize;
            if w == 0 {
                continue;
            }
            let off = self.keys.offsets[k];
            for cix in 0..self.keys.pow[w] {
                let v = &mut state[(off + cix) * vd..(off + cix + 1) * vd];
                let mut digits: Vec<usize> = (0..w).map(|p| (cix / self.keys.pow[p]) % base + 1).collect();
                if adjoint {
                    digits.reverse();
                }
                for a in digits {
                    let Some(b) = self.frames.vc_index[a] else { continue };
                    let u = &self.frames.blocks[b];
                    for i in 0..d {
                        for e in 0..2 {
                            for (so, t) in tmp.iter_mut().enumerate() {
                                let mut acc = ZERO;
                                for si in 0..d {
                                    let coef = if adjoint { u[(si, so)].conj() } else { u[(so, si)] };
                                    acc += coef * v[e + 2 * (si + d * i)];
                                }
                                *t = acc;
                            }
                            for (so, t) in tmp.iter().enumerate() {
                                v[e + 2 * (so + d * i)] = *t;
                            }
                        }
                    }
                }
            }
        }
    }

    fn rotate_extra(&self, state: &mut [C64], adjoint: bool) {
        let u = if adjoint { self.extra.adjoint() } else { self.extra.clone() };
        for pair in state.chunks_exact_mut(2) {
            let (a, b) = (pair[0], pair[1]);
            pair[0] = u[(0, 0)] * a + u[(0, 1)] * b;
            pair[1] = u[(1, 0)] * a + u[(1, 1)] * b;
        }
    }

    /// `I − 2P₀` in the computational frame: `extra = 0` and every active
    /// copy has its control register zero.
    fn reflect_p0(&self, state: &mut [C64]) {
        let vd = self.vd();
        let base = self.keys.base;
        for (k, &mask) in self.keys.positions.masks.iter().enumerate() {
            let w = mask.count_ones() as usize;
            let off = self.keys.offsets[k];
            for cix in 0..self.keys.pow[w] {
                let good = (0..w).all(|p| self.frames.ctrl_zero[(cix / self.keys.pow[p]) % base + 1]);
                if good {
                    for z in state[(off + cix) * vd..(off + cix + 1) * vd].iter_mut().step_by(2) {
                        *z = -*z;
                    }
                }
            }
        }
    }

    /// `I − 2P₁`: `extra = 0` and no active slots.
    fn reflect_p1(&self, state: &mut [C64]) {
        for z in state[..self.vd()].iter_mut().step_by(2) {
            *z = -*z;
        }
    }

    fn apply_w(&self, state: Vec<C64>, scratch: &mut Vec<C64>, adjoint: bool) -> Vec<C64> {
        let mut st = state;
        if !adjoint {
            self.rotate_extra(&mut st, false);
        }
        let mut st = self.frame_change(st, scratch, Dir::Fwd);
        self.controlled(&mut st, adjoint);
        let mut st = self.frame_change(st, scratch, Dir::Bwd);
        if adjoint {
            self.rotate_extra(&mut st, true);
        }
        st
    }

    /// `F = −W R₁ W† R₀ W` applied to the initial state.
    pub fn run(&self) -> Vec<C64> {
        let mut scratch = vec![ZERO; self.keys.len * self.vd()];
        let mut st = self.apply_w(self.initial(), &mut scratch, false);
        self.reflect_p0(&mut st);
        let mut st = self.apply_w(st, &mut scratch, true);
        self.reflect_p1(&mut st);
        let mut st = self.apply_w(st, &mut scratch, false);
        st.iter_mut().for_each(|z| *z = -*z);
        st
    }

    /// Segment superoperator after tracing out every register but the system.
    pub fn channel_from(&self, out: &[C64]) -> CMat {
        let d = self.d_in;
        let vd = self.vd();
        let mut s = CMat::zeros(d * d, d * d);
        for key in out.chunks_exact(vd) {
            for e in 0..2 {
                for i in 0..d {
                    for i2 in 0..d {
                        for so in 0..d {
                            let a = key[self.vidx(e, so, i)];
                            if a == ZERO {
                                continue;
                            }
                            for so2 in 0..d {
                                s[(so + d * so2, i + d * i2)] += a * key[self.vidx(e, so2, i2)].conj();
                            }
                        }
                    }
                }
            }
        }
        s
    }

    pub fn channel(&self) -> CMat {
        self.channel_from(&self.run())
    }

    /// Logical qubits of the compressed registers.
    pub fn logical_qubits(&self) -> usize {
        let slot = self.frames.dim.trailing_zeros() as usize;
        self.h * (ceil_log2(self.r + 1) + slot) + 1 + self.n
    }
}

/// Uncompressed reference: `r` structured slots, an extra qubit, then the
/// system, with `W = R_extra ⊗ Π_k V_p† V_c V_p (G⊗I)` followed by `G†`.
pub fn uncompressed_segment(sp: &StructuredPurification, r: usize) -> Result<(Circuit, usize)> {
    let dw = sp.layout.width();
    let extra = r * dw;
    let state_offset = extra + 1;
    let width = state_offset + sp.n;
    let mut w = Circuit::new(width);
    w.push(Gate::register(extra, 1, extra_rotation(sp.p, r)?, "R_extra"));
    let place = |k: usize| move |q: usize| if q < dw { k * dw + q } else { q - dw + state_offset };
    for k in 0..r {
        for g in &sp.prep.gates {
            w.push(g.remap(&place(k)));
        }
    }
    for k in 0..r {
        for g in &sp.vc.gates {
            w.push(g.remap(&place(k)));
        }
    }
    for k in 0..r {
        for g in &sp.prep.inverse().gates {
            w.push(g.remap(&place(k)));
        }
    }
    let ctrl: Vec<usize> = (0..r)
        .flat_map(|k| sp.layout.inner.ctrl_qubits().into_iter().map(move |q| k * dw + q))
        .chain(std::iter::once(extra))
        .collect();
    let all: Vec<usize> = (0..=extra).collect();
    Ok((oaa(&w, vec![Cond::zeros(&ctrl)], vec![Cond::zeros(&all)]), state_offset))
}

pub fn uncompressed_channel(sp: &StructuredPurification, r: usize) -> Result<CMat> {
    let (f, so) = uncompressed_segment(sp, r)?;
    let cols = isometry_columns(&f, so, sp.n)?;
    Ok(dilation_superop(&cols, so, |_| true))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Alg2Options {
    pub r: Option<usize>,
    pub h: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Alg2Run {
    pub rho: CMat,
    pub schedule: Schedule,
    pub h: usize,
    pub p_trivial: f64,
    /// `P[Bin(r, 1 − p_I) > h]`
    pub tail: f64,
    /// `1 − Tr` of one segment output on the maximally mixed input
    pub norm_loss: f64,
    pub logical_qubits: usize,
    pub keys: usize,
}

/// Default cutoff: smallest `h` whose binomial tail is at most `ε/(2τ)`.
pub fn default_cutoff(p_trivial: f64, r: usize, tau: usize, eps: f64) -> usize {
    cutoff_for(r, 1.0 - p_trivial, eps / (2.0 * tau.max(1) as f64))
}

pub fn run_algorithm2(model: &Lindbladian, t: f64, eps: f64, rho0: &CMat, opts: Alg2Options) -> Result<Alg2Run> {
    let lambda = model.lambda()?;
    let mut sched = Schedule::new(lambda, t, eps)?;
    if let Some(r) = opts.r {
        sched = Schedule::with_tau_r(lambda, t, sched.tau, r);
    }
    let d = model.dim();
    if rho0.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho0.nrows() });
    }
    if sched.tau == 0 {
        return Ok(Alg2Run {
            rho: rho0.clone(),
            schedule: sched,
            h: 0,
            p_trivial: 1.0,
            tail: 0.0,
            norm_loss: 0.0,
            logical_qubits: 0,
            keys: 0,
        });
    }
    let sp = StructuredPurification::with_step(model, sched.lambda_delta())?;
    let p_trivial = sp.p_trivial();
    let h = opts.h.unwrap_or_else(|| default_cutoff(p_trivial, sched.r, sched.tau, eps)).min(sched.r);
    let seg = CompressedSegment::new(&sp, sched.r, h)?;
    let s = seg.channel();
    let ch = ChannelRep { dim: d, superop: s.clone(), kraus: None };
    let mut rho = rho0.clone();
    for _ in 0..sched.tau {
        rho = ch.apply(&rho);
    }
    let mixed = CMat::identity(d, d) * c(1.0 / d as f64, 0.0);
    let norm_loss = 1.0 - trace(&ch.apply(&mixed)).re;
    Ok(Alg2Run {
        rho,
        schedule: sched,
        h,
        p_trivial,
        tail: binomial_tail(sched.r, 1.0 - p_trivial, h),
        norm_loss,
        logical_qubits: seg.logical_qubits(),
        keys: seg.keys.len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, unitarity_defect};
    use crate::model::amplitude_damping;
    use crate::pauli::PauliSum;

    fn pure_decay() -> Lindbladian {
        let l = PauliSum::from_labels(1, &[("X", c(0.5, 0.)), ("Y", c(0., 0.5))]).unwrap();
        Lindbladian::new(1, PauliSum::zero(1), vec![l]).unwrap()
    }

    #[test]
    fn frames_are_unitary_and_diagonalize_vc() {
        let sp = StructuredPurification::with_step(&amplitude_damping(1.0, 0.5).unwrap(), 0.125).unwrap();
        let f = SlotFrames::new(&sp).unwrap();
        assert!(unitarity_defect(&f.basis) < 1e-12);
        assert!(unitarity_defect(&f.t) < 1e-12);
        // T|0⟩ = √p_I e₀ + λ_* B†π*
        assert!((f.t[(0, 0)].norm_sqr() - f.p_trivial).abs() < 1e-12);
        let enc = sp.encoded_prep().unwrap().dense();
        let pstar = f.basis.adjoint() * enc.column(0);
        let ls = sp.lambda_star();
        for a in 1..f.dim {
            assert!((f.t[(a, 0)] - pstar[a] * ls).norm() < 1e-12);
        }
    }

    #[test]
    fn full_cutoff_matches_uncompressed() {
        for model in [amplitude_damping(1.0, 0.5).unwrap(), pure_decay()] {
            let sp = StructuredPurification::with_step(&model, 0.2).unwrap();
            let seg = CompressedSegment::new(&sp, 2, 2).unwrap();
            let got = seg.channel();
            let want = uncompressed_channel(&sp, 2).unwrap();
            assert!(max_abs(&(got - want)) < 1e-10);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let rho = crate::trajectory::pure_density(&crate::trajectory::basis_state(2, 1));
        let run = run_algorithm2(&pure_decay(), 0.0, 0.1, &rho, Alg2Options::default()).unwrap();
        assert_eq!(run.rho, rho);
    }
}
