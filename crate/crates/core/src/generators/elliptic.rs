//! Zero-drift walk on `R^d` with constant radial and transverse variances.
//!
//! From `x != 0` the walk takes `±rho x̂` or `±sigma t̂` with probability 1/4
//! each, `t̂` drawn uniformly from a fixed orthonormal basis of `x̂^⊥`. From the
//! origin it steps `±rho e_1`. The radial part of the covariance is
//! `U = rho²/2` and its trace is `V = (rho² + sigma²)/2`, with no error terms.

use std::sync::Arc;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::kernel::{ScalarKernel, VectorKernel};
use crate::profile::{MomentProfile, RegimeTag};
use crate::trajectory::norm;

#[derive(Debug, Clone, Copy)]
pub struct EllipticWalk {
    d: usize,
    rho: f64,
    sigma: f64,
}

impl EllipticWalk {
    pub fn new(d: usize, rho: f64, sigma: f64) -> Result<Self> {
        if d < 2 {
            return Err(invalid("elliptic walk needs d >= 2"));
        }
        if !(rho > 0.0 && rho.is_finite() && sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("rho and sigma must be positive and finite"));
        }
        Ok(Self { d, rho, sigma })
    }

    pub fn u(&self) -> f64 {
        self.rho * self.rho / 2.0
    }

    pub fn v(&self) -> f64 {
        (self.rho * self.rho + self.sigma * self.sigma) / 2.0
    }

    pub fn regime(&self) -> RegimeTag {
        regime(self.rho, self.sigma)
    }

    /// The norm process, which is itself Markov.
    pub fn radial(&self) -> EllipticNorm {
        EllipticNorm {
            rho: self.rho,
            sigma: self.sigma,
        }
    }

    /// Increment `θ` from `x` for the given draw: `radial` chooses the kind
    /// of move, `index` the tangent basis vector, `sign` its direction.
    pub fn increment(&self, x: &[f64], radial: bool, index: usize, sign: f64, out: &mut [f64]) {
        let r = norm(x);
        out.iter_mut().for_each(|o| *o = 0.0);
        if r == 0.0 {
            out[0] = sign * self.rho;
        } else if radial {
            for (o, &c) in out.iter_mut().zip(x) {
                *o = sign * self.rho * c / r;
            }
        } else {
            let t = tangent_basis_vector(x, r, index);
            for (o, c) in out.iter_mut().zip(t) {
                *o = sign * self.sigma * c;
            }
        }
    }
}

fn regime(rho: f64, sigma: f64) -> RegimeTag {
    // V - 2U = (sigma² - rho²)/2
    if sigma > rho {
        RegimeTag::TransientManyCutpoints
    } else if sigma < rho {
        RegimeTag::Recurrent
    } else {
        RegimeTag::Unclassified
    }
}

/// `index`-th vector of the Gram–Schmidt basis of `x̂^⊥` built from the
/// standard basis, skipping the axis where `|x̂_j|` is largest (lowest index on ties).
pub fn tangent_basis_vector(x: &[f64], r: f64, index: usize) -> Vec<f64> {
    let d = x.len();
    if d == 2 {
        return vec![-x[1] / r, x[0] / r];
    }
    let skip = (0..d).fold(0, |best, j| if x[j].abs() > x[best].abs() { j } else { best });
    let mut basis: Vec<Vec<f64>> = vec![x.iter().map(|c| c / r).collect()];
    for j in (0..d).filter(|&j| j != skip) {
        let mut v = vec![0.0; d];
        v[j] = 1.0;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            v.iter_mut().zip(b).for_each(|(a, c)| *a -= dot * c);
        }
        let n = norm(&v);
        v.iter_mut().for_each(|a| *a /= n);
        if basis.len() == index + 1 {
            return v;
        }
        basis.push(v);
    }
    unreachable!("tangent index {index} out of range for d = {d}")
}

impl VectorKernel for EllipticWalk {
    type State = Vec<f64>;

    fn spec_id(&self) -> String {
        format!("elliptic(d={},rho={},sigma={})", self.d, self.rho, self.sigma)
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn profile(&self) -> MomentProfile {
        radial_profile(self.rho, self.sigma)
    }

    fn jump_bound(&self) -> f64 {
        self.rho.max(self.sigma)
    }

    fn init(&self, x0: &[f64]) -> Result<Vec<f64>> {
        if x0.len() != self.d || x0.iter().any(|c| !c.is_finite()) {
            return Err(Error::OutsideStateSpace {
                spec: self.spec_id(),
                x0: norm(x0),
            });
        }
        Ok(x0.to_vec())
    }

    fn write_point(&self, state: &Vec<f64>, out: &mut [f64]) {
        out.copy_from_slice(state);
    }

    fn norm(&self, state: &Vec<f64>) -> f64 {
        norm(state)
    }

    fn step<R: Rng + ?Sized>(&self, state: &mut Vec<f64>, rng: &mut R) {
        let u = rng.next_u64();
        let sign = if u & 1 == 0 { 1.0 } else { -1.0 };
        let radial = u & 2 == 0;
        let index = ((u >> 2) % (self.d as u64 - 1)) as usize;
        let r = norm(state);
        if r == 0.0 {
            state[0] += sign * self.rho;
        } else if radial {
            let s = 1.0 + sign * self.rho / r;
            state.iter_mut().for_each(|c| *c *= s);
        } else if self.d == 2 {
            let (a, b) = (state[0], state[1]);
            let k = sign * self.sigma / r;
            state[0] = a - k * b;
            state[1] = b + k * a;
        } else {
            let t = tangent_basis_vector(state, r, index);
            state.iter_mut().zip(t).for_each(|(c, t)| *c += sign * self.sigma * t);
        }
    }
}

/// `‖Ξ_n‖` for the elliptic walk; depends on the past only through the norm.
#[derive(Debug, Clone, Copy)]
pub struct EllipticNorm {
    rho: f64,
    sigma: f64,
}

impl EllipticNorm {
    pub fn new(rho: f64, sigma: f64) -> Result<Self> {
        EllipticWalk::new(2, rho, sigma).map(|w| w.radial())
    }
}

pub(crate) fn radial_profile(rho: f64, sigma: f64) -> MomentProfile {
    let tangential = move |r: f64| sigma * sigma / ((r * r + sigma * sigma).sqrt() + r);
    let mu1 = move |r: f64| {
        if r == 0.0 {
            rho
        } else if r < rho {
            0.5 * (rho - r) + 0.5 * tangential(r)
        } else {
            0.5 * tangential(r)
        }
    };
    let mu2 = move |r: f64| {
        if r == 0.0 {
            rho * rho
        } else if r < rho {
            0.25 * (rho * rho + (rho - 2.0 * r).powi(2)) + 0.5 * tangential(r).powi(2)
        } else {
            0.5 * rho * rho + 0.5 * tangential(r).powi(2)
        }
    };
    MomentProfile::exact(Arc::new(mu1), Arc::new(mu2), rho.max(sigma), regime(rho, sigma))
}

impl ScalarKernel for EllipticNorm {
    type State = f64;

    fn spec_id(&self) -> String {
        format!("elliptic_norm(rho={},sigma={})", self.rho, self.sigma)
    }

    fn profile(&self) -> MomentProfile {
        radial_profile(self.rho, self.sigma)
    }

    fn jump_bound(&self) -> f64 {
        self.rho.max(self.sigma)
    }

    fn init(&self, x0: f64) -> Result<f64> {
        if !(x0 >= 0.0 && x0.is_finite()) {
            return Err(Error::OutsideStateSpace {
                spec: self.spec_id(),
                x0,
            });
        }
        Ok(x0)
    }

    fn position(&self, state: &f64) -> f64 {
        *state
    }

    fn step<R: Rng + ?Sized>(&self, r: &mut f64, rng: &mut R) {
        let u = rng.next_u64();
        let up = u & 1 == 0;
        *r = if *r == 0.0 {
            self.rho
        } else if u & 2 == 0 {
            if up {
                *r + self.rho
            } else {
                (*r - self.rho).abs()
            }
        } else {
            (*r * *r + self.sigma * self.sigma).sqrt()
        };
    }

    fn transitions(&self, r: &f64) -> Result<Vec<(f64, f64)>> {
        let r = *r;
        if r == 0.0 {
            return Ok(vec![(self.rho, 1.0)]);
        }
        Ok(vec![
            (r + self.rho, 0.25),
            ((r - self.rho).abs(), 0.25),
            ((r * r + self.sigma * self.sigma).sqrt(), 0.5),
        ])
    }
}
