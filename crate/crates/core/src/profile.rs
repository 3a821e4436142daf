//! Conditional increment moment bounds and regime classification.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub type MomentFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Where a process sits relative to the cutpoint phase transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeTag {
    /// `liminf 2x mu1 - mu2 > 0`: transient with infinitely many strong cutpoints.
    TransientManyCutpoints,
    /// `0 <= 2x mu1 - mu2 <= D / log x` and transient: finitely many cutpoints.
    CriticalWindow,
    Recurrent,
    Unclassified,
}

impl RegimeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeTag::TransientManyCutpoints => "transient-many-cutpoints",
            RegimeTag::CriticalWindow => "critical-window",
            RegimeTag::Recurrent => "recurrent",
            RegimeTag::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bounds `mu1_lower <= E[Δ | F] <= mu1_upper`, `mu2_lower <= E[Δ² | F] <= mu2_upper`
/// as functions of the current position, plus the almost-sure jump bound.
#[derive(Clone)]
pub struct MomentProfile {
    mu1_lower: MomentFn,
    mu1_upper: MomentFn,
    mu2_lower: MomentFn,
    mu2_upper: MomentFn,
    jump_bound: f64,
    regime: RegimeTag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBounds {
    pub mu1: (f64, f64),
    pub mu2: (f64, f64),
}

impl MomentProfile {
    pub fn new(
        mu1_lower: MomentFn,
        mu1_upper: MomentFn,
        mu2_lower: MomentFn,
        mu2_upper: MomentFn,
        jump_bound: f64,
        regime: RegimeTag,
    ) -> Self {
        Self {
            mu1_lower,
            mu1_upper,
            mu2_lower,
            mu2_upper,
            jump_bound,
            regime,
        }
    }

    /// Markov case: the conditional moments are exact functions of position.
    pub fn exact(mu1: MomentFn, mu2: MomentFn, jump_bound: f64, regime: RegimeTag) -> Self {
        Self::new(mu1.clone(), mu1, mu2.clone(), mu2, jump_bound, regime)
    }

    pub fn mu1_lower(&self, x: f64) -> f64 {
        (self.mu1_lower)(x)
    }
    pub fn mu1_upper(&self, x: f64) -> f64 {
        (self.mu1_upper)(x)
    }
    pub fn mu2_lower(&self, x: f64) -> f64 {
        (self.mu2_lower)(x)
    }
    pub fn mu2_upper(&self, x: f64) -> f64 {
        (self.mu2_upper)(x)
    }
    pub fn jump_bound(&self) -> f64 {
        self.jump_bound
    }
    pub fn regime(&self) -> RegimeTag {
        self.regime
    }

    pub fn bounds(&self, x: f64) -> MomentBounds {
        MomentBounds {
            mu1: (self.mu1_lower(x), self.mu1_upper(x)),
            mu2: (self.mu2_lower(x), self.mu2_upper(x)),
        }
    }

    /// Checks the ordering and the `B²` cap at the given positions, returning
    /// the first offending position.
    pub fn check_invariants(&self, xs: &[f64]) -> Result<(), f64> {
        let cap = self.jump_bound * self.jump_bound * (1.0 + 1e-12);
        for &x in xs {
            let b = self.bounds(x);
            let ok = b.mu1.0 <= b.mu1.1 + 1e-15
                && 0.0 <= b.mu2.0
                && b.mu2.0 <= b.mu2.1 + 1e-15
                && b.mu2.1 <= cap;
            if !ok {
                return Err(x);
            }
        }
        Ok(())
    }

    /// `2x mu1_lower(x) - mu2_upper(x)`; positive in the limit means transience.
    pub fn transience_margin(&self, x: f64) -> f64 {
        2.0 * x * self.mu1_lower(x) - self.mu2_upper(x)
    }

    /// `2x mu1_upper(x) - mu2_lower(x)`; negative in the limit means recurrence.
    pub fn recurrence_margin(&self, x: f64) -> f64 {
        2.0 * x * self.mu1_upper(x) - self.mu2_lower(x)
    }
}

impl fmt::Debug for MomentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentProfile")
            .field("jump_bound", &self.jump_bound)
            .field("regime", &self.regime)
            .finish_non_exhaustive()
    }
}

/// Evidence behind a classification, evaluated far out on the half-line.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub tag: RegimeTag,
    /// Limit of `2x mu1 - mu2` (lower-bound version).
    pub limit: f64,
    /// Coefficient `b` in `2x mu1 - mu2 ≈ limit + b / log x`.
    pub log_coefficient: f64,
    /// Limit of `mu2`.
    pub variance: f64,
    /// Limit of `x mu1_upper`.
    pub drift_scale: f64,
}

/// Infers the regime from a profile by fitting `2x mu1 - mu2 ≈ A + b / log x`
/// through two far-out positions.
///
/// `A > 0` gives the many-cutpoint regime. `A < 0` is recurrent. With `A = 0`
/// the second-order coefficient decides: `b > mu2` is the transient critical
/// window, `b < mu2` recurrent, and `b = mu2` is left unclassified.
pub fn classify(profile: &MomentProfile) -> Classification {
    let (x1, x2) = (1e6_f64, 1e12_f64);
    let (l1, l2) = (x1.ln(), x2.ln());
    let fit = |m: &dyn Fn(f64) -> f64| {
        let (m1, m2) = (m(x1), m(x2));
        let a = (m2 * l2 - m1 * l1) / (l2 - l1);
        let b = (m1 - a) * l1;
        (a, b)
    };
    let (a_lo, b_lo) = fit(&|x| profile.transience_margin(x));
    let (a_hi, b_hi) = fit(&|x| profile.recurrence_margin(x));
    let variance = profile.mu2_lower(x2);
    let drift_scale = x2 * profile.mu1_upper(x2);
    let tol = 1e-7;
    let rel = |b: f64| (b - variance) / variance.max(1e-300);

    let tag = if a_lo > tol {
        RegimeTag::TransientManyCutpoints
    } else if a_hi < -tol {
        RegimeTag::Recurrent
    } else if variance <= tol {
        RegimeTag::Unclassified
    } else if rel(b_lo) > 1e-6 && profile.mu1_lower(x2) >= 0.0 {
        RegimeTag::CriticalWindow
    } else if rel(b_hi) < -1e-6 {
        RegimeTag::Recurrent
    } else {
        RegimeTag::Unclassified
    };
    Classification {
        tag,
        limit: a_lo,
        log_coefficient: b_lo,
        variance,
        drift_scale,
    }
}
