use std::sync::Arc;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::kernel::ScalarKernel;
use crate::profile::{MomentProfile, RegimeTag};

/// Deterministic `x -> max(x + step, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantStep {
    step: f64,
}

impl ConstantStep {
    pub fn new(step: f64) -> Result<Self> {
        if !step.is_finite() || step == 0.0 {
            return Err(invalid("step must be finite and nonzero"));
        }
        Ok(Self { step })
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }
}

impl ScalarKernel for ConstantStep {
    type State = f64;

    fn spec_id(&self) -> String {
        format!("constant(step={})", self.step)
    }

    fn profile(&self) -> MomentProfile {
        let s = self.step;
        let tag = if s > 0.0 {
            RegimeTag::TransientManyCutpoints
        } else {
            RegimeTag::Recurrent
        };
        MomentProfile::exact(
            Arc::new(move |x: f64| (x + s).max(0.0) - x),
            Arc::new(move |x: f64| ((x + s).max(0.0) - x).powi(2)),
            s.abs(),
            tag,
        )
    }

    fn jump_bound(&self) -> f64 {
        self.step.abs()
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

    fn step<R: Rng + ?Sized>(&self, state: &mut f64, _rng: &mut R) {
        *state = (*state + self.step).max(0.0);
    }

    fn transitions(&self, state: &f64) -> Result<Vec<(f64, f64)>> {
        Ok(vec![((*state + self.step).max(0.0), 1.0)])
    }
}
