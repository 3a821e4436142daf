//! The test functions `f_γ(x) = x^{-γ}` and `g_ν(x) = log^{-ν} x`, their exact
//! one-step drifts under finite-support kernels and the second-order
//! predictions built from a moment profile.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::generators::ScalarSpec;
use crate::profile::MomentProfile;

const E: f64 = std::f64::consts::E;

/// `x^{-γ}` for `x >= 1`, else 1.
pub fn f_gamma(x: f64, gamma: f64) -> Result<f64> {
    Ok(LyapunovFn::f(gamma)?.eval(x))
}

/// `log^{-ν} x` for `x >= e`, else 1.
pub fn g_nu(x: f64, nu: f64) -> Result<f64> {
    Ok(LyapunovFn::g(nu)?.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LyapunovFn {
    F { gamma: f64 },
    G { nu: f64 },
}

impl LyapunovFn {
    pub fn f(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma must be positive"));
        }
        Ok(LyapunovFn::F { gamma })
    }

    pub fn g(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(invalid("nu must be positive"));
        }
        Ok(LyapunovFn::G { nu })
    }

    pub fn param(&self) -> f64 {
        match *self {
            LyapunovFn::F { gamma } => gamma,
            LyapunovFn::G { nu } => nu,
        }
    }

    /// Below this point the function is constant 1.
    pub fn knot(&self) -> f64 {
        match self {
            LyapunovFn::F { .. } => 1.0,
            LyapunovFn::G { .. } => E,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            LyapunovFn::F { gamma } if x >= 1.0 => x.powf(-gamma),
            LyapunovFn::G { nu } if x >= E => x.ln().powf(-nu),
            _ => 1.0,
        }
    }

    /// `φ(y) - φ(x)` without cancellation when both sit on the smooth branch.
    pub fn difference(&self, x: f64, y: f64) -> f64 {
        let k = self.knot();
        if x < k || y < k {
            return self.eval(y) - self.eval(x);
        }
        let u = ((y - x) / x).ln_1p();
        match *self {
            LyapunovFn::F { gamma } => x.powf(-gamma) * (-gamma * u).exp_m1(),
            LyapunovFn::G { nu } => {
                let l = x.ln();
                l.powf(-nu) * (-nu * (u / l).ln_1p()).exp_m1()
            }
        }
    }
}

/// `Σ_y P(x, y) φ(y) - φ(x)` from the kernel's one-step law.
pub fn exact_one_step_drift(spec: &ScalarSpec, func: &LyapunovFn, x: f64) -> Result<f64> {
    let t = spec.transitions_from(x)?;
    Ok(t.iter().map(|&(y, p)| p * func.difference(x, y)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedDrift {
    pub lower: f64,
    pub upper: f64,
    /// Size of the neglected remainder: `x^{-γ-2}` for `f`,
    /// `x^{-2} log^{-ν-2} x` for `g`.
    pub error_scale: f64,
}

impl PredictedDrift {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Distance from `v` to the interval, in units of `error_scale`.
    pub fn excess(&self, v: f64) -> f64 {
        let d = if v < self.lower {
            self.lower - v
        } else if v > self.upper {
            v - self.upper
        } else {
            0.0
        };
        d / self.error_scale
    }
}

/// Second-order Taylor prediction of the drift at `x`, as an interval over
/// the profile's moment bounds.
///
/// For `f`: `-(γ/2) [2xμ1 - (1+γ)μ2] x^{-γ-2}`.
/// For `g`: `-(ν/2) [2xμ1 - μ2] x^{-2} L^{-ν-1} + (ν(ν+1)/2) μ2 x^{-2} L^{-ν-2}`, `L = log x`.
pub fn predicted_drift(profile: &MomentProfile, func: &LyapunovFn, x: f64) -> Result<PredictedDrift> {
    if !(x >= E) {
        return Err(invalid("prediction needs x >= e"));
    }
    let b = profile.bounds(x);
    let (m1, m2) = ((2.0 * x * b.mu1.0, 2.0 * x * b.mu1.1), b.mu2);
    if ![m1.0, m1.1, m2.0, m2.1].iter().all(|v| v.is_finite()) {
        return Err(invalid("profile bounds are not finite at x"));
    }
    Ok(match *func {
        LyapunovFn::F { gamma } => {
            let s = x.powf(-gamma - 2.0);
            let br = (m1.0 - (1.0 + gamma) * m2.1, m1.1 - (1.0 + gamma) * m2.0);
            let k = -0.5 * gamma * s;
            PredictedDrift {
                lower: k * br.1,
                upper: k * br.0,
                error_scale: s,
            }
        }
        LyapunovFn::G { nu } => {
            let l = x.ln();
            let s1 = x.powi(-2) * l.powf(-nu - 1.0);
            let s2 = x.powi(-2) * l.powf(-nu - 2.0);
            // linear in (2xμ1, μ2): coefficients of each
            let c1 = -0.5 * nu * s1;
            let c2 = 0.5 * nu * s1 + 0.5 * nu * (nu + 1.0) * s2;
            let lo = c1 * m1.1 + c2.min(0.0) * m2.1 + c2.max(0.0) * m2.0;
            let hi = c1 * m1.0 + c2.max(0.0) * m2.1 + c2.min(0.0) * m2.0;
            PredictedDrift {
                lower: lo,
                upper: hi,
                error_scale: s2,
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftRow {
    pub x: f64,
    pub param: f64,
    pub exact: f64,
    pub pred_lo: f64,
    pub pred_hi: f64,
}

/// Exact and predicted drifts over `xs` for each function.
pub fn drift_sweep(spec: &ScalarSpec, funcs: &[LyapunovFn], xs: &[f64]) -> Result<Vec<DriftRow>> {
    let profile = spec.profile();
    let mut rows = Vec::with_capacity(funcs.len() * xs.len());
    for f in funcs {
        for &x in xs {
            let p = predicted_drift(&profile, f, x)?;
            rows.push(DriftRow {
                x,
                param: f.param(),
                exact: exact_one_step_drift(spec, f, x)?,
                pred_lo: p.lower,
                pred_hi: p.upper,
            });
        }
    }
    Ok(rows)
}

/// Default parameter grid `2^j`, `-6 <= j <= 6`.
pub fn default_param_grid() -> Vec<f64> {
    (-6..=6).map(|j| 2f64.powi(j)).collect()
}

/// Smallest grid point `y2` such that `sign · drift >= 0` at every grid point
/// `x >= y2` (`sign = -1` asks for a supermartingale). `None` if the last
/// grid point already fails.
pub fn fitted_threshold(spec: &ScalarSpec, func: &LyapunovFn, xs: &[f64], sign: f64) -> Result<Option<f64>> {
    let mut y2 = None;
    for &x in xs.iter().rev() {
        if sign * exact_one_step_drift(spec, func, x)? >= 0.0 {
            y2 = Some(x);
        } else {
            break;
        }
    }
    Ok(y2)
}

/// `(x^{1/2}, 2^{k/2})` style log grid: `n` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::BirthDeath;

    #[test]
    fn definitions() {
        assert_eq!(f_gamma(1.0, 0.7).unwrap(), 1.0);
        assert_eq!(f_gamma(0.5, 0.7).unwrap(), 1.0);
        assert_eq!(f_gamma(4.0, 0.5).unwrap(), 0.5);
        assert_eq!(g_nu(E, 1.0).unwrap(), 1.0);
        assert!((g_nu(E * E, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(f_gamma(2.0, 0.0).is_err());
        assert!(g_nu(2.0, -1.0).is_err());
    }

    #[test]
    fn symmetric_walk_drift_by_hand() {
        let s = ScalarSpec::BirthDeath(BirthDeath::homogeneous(0.5, 1).unwrap());
        let d = exact_one_step_drift(&s, &LyapunovFn::f(1.0).unwrap(), 10.0).unwrap();
        assert!((d - 1.0 / 990.0).abs() < 1e-16);
    }

    #[test]
    fn bracket_examples() {
        let p = MomentProfile::exact(
            std::sync::Arc::new(|x: f64| 1.0 / x),
            std::sync::Arc::new(|_| 1.0),
            1.0,
            crate::profile::RegimeTag::TransientManyCutpoints,
        );
        let x = 100.0;
        let d = predicted_drift(&p, &LyapunovFn::f(0.5).unwrap(), x).unwrap();
        assert!((d.lower - (-0.125 * x.powf(-2.5))).abs() < 1e-18);
        assert_eq!(d.lower, d.upper);
        let z = MomentProfile::exact(
            std::sync::Arc::new(|_| 0.0),
            std::sync::Arc::new(|_| 1.0),
            1.0,
            crate::profile::RegimeTag::Recurrent,
        );
        assert!(predicted_drift(&z, &LyapunovFn::f(1.0).unwrap(), x).unwrap().lower > 0.0);
    }

    #[test]
    fn difference_is_stable() {
        let f = LyapunovFn::f(0.5).unwrap();
        let x = 1e12;
        let d = f.difference(x, x + 1.0);
        assert!((d / (-0.5 * x.powf(-1.5)) - 1.0).abs() < 1e-9);
        let g = LyapunovFn::g(2.0).unwrap();
        let d = g.difference(x, x + 1.0);
        let want = -2.0 * x.ln().powi(-3) / x;
        assert!((d / want - 1.0).abs() < 1e-9);
    }
}
