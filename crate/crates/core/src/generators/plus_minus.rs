//! The skip-free chain stepping `+1` or `-2`.

use std::sync::Arc;

use rand::Rng;

use super::birth_death::lattice_point;
use crate::error::{invalid, Error, Result};
use crate::kernel::ScalarKernel;
use crate::profile::{MomentProfile, RegimeTag};

/// Steps `+1` with probability `p(x) = 2/3 + a/(6x)` and `-2` otherwise,
/// for `x >= x_floor`; always `+1` below.
#[derive(Debug, Clone)]
pub struct PlusOneMinusTwo {
    a: f64,
    x_floor: u64,
}

impl PlusOneMinusTwo {
    pub fn new(a: f64, x_floor: u64) -> Result<Self> {
        if !a.is_finite() {
            return Err(invalid("a must be finite"));
        }
        if x_floor < 2 {
            return Err(invalid("x_floor must be at least 2 so that -2 steps stay in Z_+"));
        }
        let this = Self { a, x_floor };
        // p is monotone in x, so the floor and the limit 2/3 bound its range.
        let p = this.up(x_floor);
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("p({x_floor}) = {p} is not a probability")));
        }
        Ok(this)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn up(&self, x: u64) -> f64 {
        self.p_real(x as f64)
    }

    fn p_real(&self, x: f64) -> f64 {
        if x < self.x_floor as f64 {
            1.0
        } else {
            2.0 / 3.0 + self.a / (6.0 * x)
        }
    }

    /// Probability of the two-step (M) witness `x -> x+1 -> x+2`.
    pub fn m_condition_delta(&self, x: u64) -> f64 {
        self.up(x) * self.up(x + 1)
    }

    pub fn regime(&self) -> RegimeTag {
        // 2x mu1 - mu2 -> a - 2
        if self.a > 2.0 {
            RegimeTag::TransientManyCutpoints
        } else if self.a < 2.0 {
            RegimeTag::Recurrent
        } else {
            RegimeTag::Unclassified
        }
    }
}

impl ScalarKernel for PlusOneMinusTwo {
    type State = u64;

    fn spec_id(&self) -> String {
        format!("plus_one_minus_two(a={},x_floor={})", self.a, self.x_floor)
    }

    fn profile(&self) -> MomentProfile {
        let (p1, p2) = (self.clone(), self.clone());
        MomentProfile::exact(
            Arc::new(move |x| 3.0 * p1.p_real(x) - 2.0),
            Arc::new(move |x| 4.0 - 3.0 * p2.p_real(x)),
            2.0,
            self.regime(),
        )
    }

    fn jump_bound(&self) -> f64 {
        2.0
    }

    fn lattice_spacing(&self) -> Option<f64> {
        Some(1.0)
    }

    fn init(&self, x0: f64) -> Result<u64> {
        lattice_point(x0).ok_or_else(|| Error::OutsideStateSpace {
            spec: self.spec_id(),
            x0,
        })
    }

    fn position(&self, state: &u64) -> f64 {
        *state as f64
    }

    fn step<R: Rng + ?Sized>(&self, state: &mut u64, rng: &mut R) {
        let x = *state;
        *state = if x < self.x_floor || rng.random::<f64>() < self.up(x) {
            x + 1
        } else {
            x - 2
        };
    }

    fn transitions(&self, state: &u64) -> Result<Vec<(f64, f64)>> {
        let x = *state;
        let p = self.up(x);
        let mut out = vec![((x + 1) as f64, p)];
        if p < 1.0 {
            out.push(((x - 2) as f64, 1.0 - p));
        }
        Ok(out)
    }
}
