//! Nearest-neighbour birth–death chains on `Z_+`.

use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::ScalarKernel;
use crate::profile::{MomentProfile, RegimeTag};

const TABLE_LEN: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BdLaw {
    /// `p(x) = 1/2 + a/(4x) + c/(4x log x)`.
    Lamperti { a: f64, c: Option<f64> },
    /// `p(x) = p`.
    Homogeneous { p: f64 },
}

/// Up-probability `p(x)` above `x_floor`; forced up-steps below it.
#[derive(Debug, Clone)]
pub struct BirthDeath {
    law: BdLaw,
    x_floor: u64,
    thresholds: Arc<OnceLock<Vec<u64>>>,
}

impl BirthDeath {
    pub fn lamperti(a: f64, c: Option<f64>, x_floor: u64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(invalid(format!("a = {a} must be a finite nonnegative real")));
        }
        if c.is_some_and(|c| !c.is_finite()) {
            return Err(invalid("c must be finite"));
        }
        if x_floor < 2 {
            return Err(invalid("x_floor must be at least 2"));
        }
        let bd = Self::build(BdLaw::Lamperti { a, c }, x_floor);
        // a/(4x) + c/(4x log x) has at most one turning point, so checking the
        // floor and a log-spaced sweep covers its range.
        let mut x = x_floor as f64;
        while x < 1e12 {
            let p = bd.p_real(x);
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("p({x}) = {p} is not a probability")));
            }
            x *= 1.5;
        }
        Ok(bd)
    }

    /// Constant up-probability `p`; `x_floor >= 1` reflects at 0.
    pub fn homogeneous(p: f64, x_floor: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("p = {p} is not a probability")));
        }
        if x_floor < 1 {
            return Err(invalid("x_floor must be at least 1"));
        }
        Ok(Self::build(BdLaw::Homogeneous { p }, x_floor))
    }

    fn build(law: BdLaw, x_floor: u64) -> Self {
        Self {
            law,
            x_floor,
            thresholds: Arc::new(OnceLock::new()),
        }
    }

    pub fn law(&self) -> BdLaw {
        self.law
    }

    pub fn x_floor(&self) -> u64 {
        self.x_floor
    }

    fn p_real(&self, x: f64) -> f64 {
        if x < self.x_floor as f64 {
            return 1.0;
        }
        match self.law {
            BdLaw::Lamperti { a, c } => {
                let mut p = 0.5 + a / (4.0 * x);
                if let Some(c) = c {
                    p += c / (4.0 * x * x.ln());
                }
                p
            }
            BdLaw::Homogeneous { p } => p,
        }
    }

    /// `2p(x) - 1`, computed without cancellation.
    fn drift_real(&self, x: f64) -> f64 {
        if x < self.x_floor as f64 {
            return 1.0;
        }
        match self.law {
            BdLaw::Lamperti { a, c } => a / (2.0 * x) + c.map_or(0.0, |c| c / (2.0 * x * x.ln())),
            BdLaw::Homogeneous { p } => 2.0 * p - 1.0,
        }
    }

    /// Probability of stepping from `x` to `x + 1`.
    pub fn up(&self, x: u64) -> f64 {
        self.p_real(x as f64)
    }

    pub fn down(&self, x: u64) -> f64 {
        1.0 - self.up(x)
    }

    /// `ln(q_i / p_i)`; `-inf` where the chain is forced upward.
    pub fn log_ratio(&self, i: u64) -> f64 {
        let p = self.up(i);
        if p >= 1.0 {
            return f64::NEG_INFINITY;
        }
        // q/p = 1 - (2p - 1)/p
        (-self.drift_real(i as f64) / p).ln_1p()
    }

    /// `2p(x) - 1`.
    pub fn drift(&self, x: u64) -> f64 {
        self.drift_real(x as f64)
    }

    /// Probability of the closed-form (M) witness: one up-step from `x`.
    pub fn m_condition_delta(&self, x: u64) -> f64 {
        self.up(x)
    }

    fn threshold(&self, x: u64) -> u64 {
        let table = self.thresholds.get_or_init(|| {
            (0..TABLE_LEN as u64).map(|i| to_threshold(self.up(i))).collect()
        });
        match table.get(x as usize) {
            Some(&t) => t,
            None => to_threshold(self.up(x)),
        }
    }

    pub(crate) fn sample_step<R: Rng + ?Sized>(&self, x: u64, rng: &mut R) -> u64 {
        if x < self.x_floor || rng.next_u64() < self.threshold(x) {
            x + 1
        } else {
            x - 1
        }
    }

    pub fn regime(&self) -> RegimeTag {
        match self.law {
            BdLaw::Lamperti { a, c } => {
                let c = c.unwrap_or(0.0);
                if a > 1.0 {
                    RegimeTag::TransientManyCutpoints
                } else if a < 1.0 || c < 1.0 {
                    RegimeTag::Recurrent
                } else if c > 1.0 {
                    RegimeTag::CriticalWindow
                } else {
                    RegimeTag::Unclassified
                }
            }
            BdLaw::Homogeneous { p } => {
                if p > 0.5 {
                    RegimeTag::TransientManyCutpoints
                } else {
                    RegimeTag::Recurrent
                }
            }
        }
    }
}

fn to_threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

impl ScalarKernel for BirthDeath {
    type State = u64;

    fn spec_id(&self) -> String {
        match self.law {
            BdLaw::Lamperti { a, c: Some(c) } => format!("bd_lamperti(a={a},c={c},x_floor={})", self.x_floor),
            BdLaw::Lamperti { a, c: None } => format!("bd_lamperti(a={a},x_floor={})", self.x_floor),
            BdLaw::Homogeneous { p } => format!("bd_homogeneous(p={p},x_floor={})", self.x_floor),
        }
    }

    fn profile(&self) -> MomentProfile {
        let this = self.clone();
        MomentProfile::exact(
            Arc::new(move |x| this.drift_real(x)),
            Arc::new(|_| 1.0),
            1.0,
            self.regime(),
        )
    }

    fn jump_bound(&self) -> f64 {
        1.0
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
        *state = self.sample_step(*state, rng);
    }

    fn transitions(&self, state: &u64) -> Result<Vec<(f64, f64)>> {
        let x = *state;
        let p = self.up(x);
        let mut out = vec![((x + 1) as f64, p)];
        if p < 1.0 {
            out.push(((x - 1) as f64, 1.0 - p));
        }
        Ok(out)
    }
}

pub(crate) fn lattice_point(x0: f64) -> Option<u64> {
    (x0 >= 0.0 && x0.fract() == 0.0 && x0 < 9.0e15).then_some(x0 as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive;

    #[test]
    fn rejects_bad_parameters() {
        assert!(BirthDeath::lamperti(-1.0, None, 2).is_err());
        assert!(BirthDeath::lamperti(1.0, None, 1).is_err());
        assert!(BirthDeath::lamperti(3.0, None, 2).is_ok());
        assert!(BirthDeath::lamperti(10.0, None, 2).is_err());
        assert!(BirthDeath::lamperti(1.0, Some(-30.0), 2).is_err());
        assert!(BirthDeath::homogeneous(1.5, 1).is_err());
    }

    #[test]
    fn regime_tags() {
        let tag = |a, c| BirthDeath::lamperti(a, c, 2).unwrap().regime();
        assert_eq!(tag(2.0, None), RegimeTag::TransientManyCutpoints);
        assert_eq!(tag(1.0, Some(2.0)), RegimeTag::CriticalWindow);
        assert_eq!(tag(0.0, None), RegimeTag::Recurrent);
        assert_eq!(tag(1.0, Some(0.5)), RegimeTag::Recurrent);
        assert_eq!(tag(1.0, Some(1.0)), RegimeTag::Unclassified);
    }

    #[test]
    fn forced_up_below_floor_and_support() {
        let bd = BirthDeath::lamperti(2.0, None, 5).unwrap();
        let mut rng = derive(1, 0);
        for _ in 0..100 {
            assert_eq!(bd.sample_step(3, &mut rng), 4);
            let y = bd.sample_step(10, &mut rng);
            assert!(y == 9 || y == 11);
        }
        let t = bd.transitions(&10).unwrap();
        assert!((t[0].1 - (0.5 + 2.0 / 40.0)).abs() < 1e-15);
    }

    #[test]
    fn threshold_table_matches_direct() {
        let bd = BirthDeath::lamperti(1.0, Some(2.0), 2).unwrap();
        for x in [2u64, 17, 1000, (TABLE_LEN as u64) + 5] {
            let t = bd.threshold(x) as f64 / 18_446_744_073_709_551_616.0;
            assert!((t - bd.up(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn m_condition_bound() {
        let bd = BirthDeath::lamperti(2.0, None, 2).unwrap();
        assert!((2..10_000).all(|x| bd.m_condition_delta(x) >= 0.1));
    }
}
