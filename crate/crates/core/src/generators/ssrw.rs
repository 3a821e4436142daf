//! Simple symmetric random walk on `Z^d`, as a vector process and through its norm.

use std::sync::Arc;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::kernel::{ScalarKernel, VectorKernel};
use crate::profile::{MomentProfile, RegimeTag};

/// Lattice point with its squared norm kept exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeState {
    pub z: Vec<i64>,
    pub sq: i64,
}

impl LatticeState {
    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let d = self.z.len() as u64;
        let k = rng.random_range(0..2 * d);
        let j = (k >> 1) as usize;
        if k & 1 == 0 {
            self.sq += 2 * self.z[j] + 1;
            self.z[j] += 1;
        } else {
            self.sq += -2 * self.z[j] + 1;
            self.z[j] -= 1;
        }
    }

    fn norm(&self) -> f64 {
        (self.sq as f64).sqrt()
    }
}

/// `‖S_n‖` for SSRW `S` on `Z^d`.
#[derive(Debug, Clone, Copy)]
pub struct SsrwNorm {
    d: usize,
}

impl SsrwNorm {
    pub fn new(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self { d })
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

/// Writes `n` as a sum of `d` squares, largest first coordinate preferred.
fn sum_of_squares(n: i64, d: usize) -> Option<Vec<i64>> {
    if d == 1 {
        let r = isqrt(n);
        return (r * r == n).then(|| vec![r]);
    }
    let mut a = isqrt(n);
    loop {
        if let Some(mut rest) = sum_of_squares(n - a * a, d - 1) {
            rest.insert(0, a);
            return Some(rest);
        }
        if a == 0 {
            return None;
        }
        a -= 1;
    }
}

fn isqrt(n: i64) -> i64 {
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn lattice_init(d: usize, x0: f64, spec: String) -> Result<LatticeState> {
    let err = || Error::OutsideStateSpace { spec: spec.clone(), x0 };
    if !(x0 >= 0.0 && x0 < 3.0e9) {
        return Err(err());
    }
    let sq = (x0 * x0).round() as i64;
    if ((sq as f64).sqrt() - x0).abs() > 1e-9 * x0.max(1.0) {
        return Err(err());
    }
    let z = sum_of_squares(sq, d).ok_or_else(err)?;
    Ok(LatticeState { z, sq })
}

/// Exact band for the conditional moments of `‖S‖` at radius `r`.
///
/// Stepping along coordinate `j` with `u_j = z_j / r` moves the norm by
/// `g(u_j^2)` on average, where `g(w) = (sqrt(r²+1+2r√w) + sqrt(r²+1-2r√w))/2 - r`
/// is concave in `w`. Averaging over `j` with `Σ u_j² = 1` puts the mean between
/// the vertex value `(g(1) + (d-1) g(0))/d` and the centre value `g(1/d)`. The
/// second moment is then `1 - 2r mu1` exactly.
pub(crate) fn ssrw_norm_profile(d: usize) -> MomentProfile {
    let df = d as f64;
    let g = move |r: f64, w: f64| {
        // sqrt(r²+1±s) - r rewritten as (1±s)/(sqrt(r²+1±s) + r) to avoid cancellation
        let s = 2.0 * r * w.sqrt();
        let up = (1.0 + s) / ((r * r + 1.0 + s).sqrt() + r);
        let down = (1.0 - s) / ((r * r + 1.0 - s).max(0.0).sqrt() + r);
        0.5 * (up + down)
    };
    let lo = move |r: f64| {
        if r < 1.0 {
            1.0
        } else {
            (g(r, 1.0) + (df - 1.0) * g(r, 0.0)) / df
        }
    };
    let hi = move |r: f64| if r < 1.0 { 1.0 } else { g(r, 1.0 / df) };
    let regime = if d >= 3 {
        RegimeTag::TransientManyCutpoints
    } else {
        RegimeTag::Recurrent
    };
    MomentProfile::new(
        Arc::new(lo),
        Arc::new(hi),
        Arc::new(move |r| if r < 1.0 { 1.0 } else { 1.0 - 2.0 * r * hi(r) }),
        Arc::new(move |r| if r < 1.0 { 1.0 } else { 1.0 - 2.0 * r * lo(r) }),
        1.0,
        regime,
    )
}

impl ScalarKernel for SsrwNorm {
    type State = LatticeState;

    fn spec_id(&self) -> String {
        format!("ssrw_norm(d={})", self.d)
    }

    fn profile(&self) -> MomentProfile {
        ssrw_norm_profile(self.d)
    }

    fn jump_bound(&self) -> f64 {
        1.0
    }

    /// Accepts any norm of a lattice point; integers start on the first axis.
    fn init(&self, x0: f64) -> Result<LatticeState> {
        lattice_init(self.d, x0, self.spec_id())
    }

    fn position(&self, state: &LatticeState) -> f64 {
        state.norm()
    }

    fn step<R: Rng + ?Sized>(&self, state: &mut LatticeState, rng: &mut R) {
        state.step(rng);
    }

    fn transitions(&self, state: &LatticeState) -> Result<Vec<(f64, f64)>> {
        let w = 1.0 / (2 * self.d) as f64;
        let mut out: Vec<(i64, f64)> = Vec::with_capacity(2 * self.d);
        for &zj in &state.z {
            for s in [1i64, -1] {
                let sq = state.sq + 2 * s * zj + 1;
                match out.iter_mut().find(|(q, _)| *q == sq) {
                    Some(e) => e.1 += w,
                    None => out.push((sq, w)),
                }
            }
        }
        Ok(out.into_iter().map(|(sq, p)| ((sq as f64).sqrt(), p)).collect())
    }
}

/// SSRW on `Z^d` as a vector process.
#[derive(Debug, Clone, Copy)]
pub struct SsrwLattice {
    d: usize,
}

impl SsrwLattice {
    pub fn new(d: usize) -> Result<Self> {
        if d < 1 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(Self { d })
    }
}

impl VectorKernel for SsrwLattice {
    type State = LatticeState;

    fn spec_id(&self) -> String {
        format!("ssrw_lattice(d={})", self.d)
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn profile(&self) -> MomentProfile {
        ssrw_norm_profile(self.d)
    }

    fn jump_bound(&self) -> f64 {
        1.0
    }

    fn init(&self, x0: &[f64]) -> Result<LatticeState> {
        let bad = || Error::OutsideStateSpace {
            spec: self.spec_id(),
            x0: crate::trajectory::norm(x0),
        };
        if x0.len() != self.d || x0.iter().any(|c| c.fract() != 0.0 || c.abs() > 1e9) {
            return Err(bad());
        }
        let z: Vec<i64> = x0.iter().map(|&c| c as i64).collect();
        let sq = z.iter().map(|c| c * c).sum();
        Ok(LatticeState { z, sq })
    }

    fn write_point(&self, state: &LatticeState, out: &mut [f64]) {
        for (o, &c) in out.iter_mut().zip(&state.z) {
            *o = c as f64;
        }
    }

    fn norm(&self, state: &LatticeState) -> f64 {
        state.norm()
    }

    fn step<R: Rng + ?Sized>(&self, state: &mut LatticeState, rng: &mut R) {
        state.step(rng);
    }
}
