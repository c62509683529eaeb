//! Position encoding of `r` slots with at most `h` active ones, and the
//! standard-form preparation `E_std` of a truncated product state.
//!
//! A valid position pattern is a sorted list `g₁ < … < g_w` (`w ≤ h`) padded
//! with the sentinel `r`; patterns are indexed by their slot subsets in order
//! of weight, then colex rank.

use crate::error::{Error, Result};
use crate::linalg::{c, complete_unitary, CMat, CVec};

/// `C(n, k)` as `f64` (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `P[Bin(r, q) > h]`.
pub fn binomial_tail(r: usize, q: f64, h: usize) -> f64 {
    let head: f64 = (0..=h.min(r)).map(|w| binomial(r, w) * q.powi(w as i32) * (1.0 - q).powi((r - w) as i32)).sum();
    (1.0 - head).max(0.0)
}

/// Smallest `h` with `P[Bin(r, q) > h] ≤ target`.
pub fn cutoff_for(r: usize, q: f64, target: f64) -> usize {
    (0..=r).find(|&h| binomial_tail(r, q, h) <= target).unwrap_or(r)
}

/// `ε_enc` for a tail mass `tail`: the normalized truncated state differs
/// from the untruncated one by `√(tail + (1 − √(1−tail))²)`.
pub fn encoding_error(tail: f64) -> f64 {
    let keep = (1.0 - tail).max(0.0).sqrt();
    (tail + (1.0 - keep).powi(2)).sqrt()
}

/// All subsets of `0..r` with at most `h` elements, as bitmasks, ordered by
/// weight; `rank[mask]` is the inverse (`usize::MAX` for invalid masks).
#[derive(Debug, Clone)]
pub struct PositionSpace {
    pub r: usize,
    pub h: usize,
    pub masks: Vec<u32>,
    pub rank: Vec<usize>,
}

impl PositionSpace {
    pub fn new(r: usize, h: usize) -> Result<Self> {
        if r == 0 || r > 20 {
            return Err(Error::CapExceeded(format!("position space needs 1 ≤ r ≤ 20, got {r}")));
        }
        let h = h.min(r);
        let mut masks: Vec<u32> = (0..1u32 << r).filter(|m| m.count_ones() as usize <= h).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        let mut rank = vec![usize::MAX; 1 << r];
        for (k, &m) in masks.iter().enumerate() {
            rank[m as usize] = k;
        }
        Ok(PositionSpace { r, h, masks, rank })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Padded register contents `(g₁, …, g_h)` for pattern `k`.
    pub fn registers(&self, k: usize) -> Vec<usize> {
        let m = self.masks[k];
        let mut g: Vec<usize> = (0..self.r).filter(|i| m >> i & 1 == 1).collect();
        g.resize(self.h, self.r);
        g
    }

    /// Index of the padded pattern in the full `(r+1)^h` register space,
    /// `g₁` least significant.
    pub fn register_index(&self, k: usize) -> usize {
        self.registers(k).iter().rev().fold(0, |acc, g| acc * (self.r + 1) + g)
    }
}

/// `E_std`: a unitary on the valid position patterns whose action on the
/// all-sentinel pattern is the normalized weight-`≤ h` part of
/// `(√(1−q)|inactive⟩ + √q|active⟩)^{⊗r}`.
#[derive(Debug, Clone)]
pub struct StdEncoder {
    pub space: PositionSpace,
    pub q: f64,
    pub u: CMat,
    pub tail: f64,
}

impl StdEncoder {
    pub fn new(r: usize, h: usize, q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::Degenerate(format!("active probability {q} outside [0, 1)")));
        }
        let space = PositionSpace::new(r, h)?;
        let first = CVec::from_fn(space.len(), |k, _| {
            let w = space.masks[k].count_ones() as i32;
            c((q.powi(w) * (1.0 - q).powi(r as i32 - w)).sqrt(), 0.0)
        });
        let tail = binomial_tail(r, q, space.h);
        let u = complete_unitary(&first);
        Ok(StdEncoder { space, q, u, tail })
    }

    /// Active probability `1/(r+1)` of `R_{arctan(1/r)}|0⟩`.
    pub fn for_rotation(r: usize, h: usize) -> Result<Self> {
        Self::new(r, h, 1.0 / (r as f64 + 1.0))
    }

    pub fn epsilon(&self) -> f64 {
        encoding_error(self.tail)
    }

    /// Achieved `‖C[target] − E_std C[0]‖` where the target weight-`> h`
    /// mass counts as unencodable.
    pub fn achieved_error(&self) -> f64 {
        let r = self.space.r as i32;
        let mut s = self.tail;
        for k in 0..self.space.len() {
            let w = self.space.masks[k].count_ones() as i32;
            let want = (self.q.powi(w) * (1.0 - self.q).powi(r - w)).sqrt();
            s += (want - self.u[(k, 0)].re).powi(2) + self.u[(k, 0)].im.powi(2);
        }
        s.sqrt()
    }

    /// The unitary on the full `(r+1)^h` register space: `u` on valid
    /// patterns, identity elsewhere.
    pub fn full_matrix(&self) -> CMat {
        let d = (self.space.r + 1).pow(self.space.h as u32);
        let idx: Vec<usize> = (0..self.space.len()).map(|k| self.space.register_index(k)).collect();
        let mut out = crate::linalg::identity(d);
        for &i in &idx {
            out[(i, i)] = c(0.0, 0.0);
        }
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = self.u[(a, b)];
            }
        }
        out
    }
}
