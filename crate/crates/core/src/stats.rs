//! Binomial intervals, regression and trend tests.
//!
//! Standard errors used by the acceptance thresholds:
//! * a frequency `p̂ = k/n` has `SE = sqrt(p̂(1-p̂)/n)`;
//! * when comparing against a known `p`, use [`se_known`] (`sqrt(p(1-p)/n)`);
//! * a sample mean has `SE = s/sqrt(n)` with the unbiased sample variance `s²`.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

pub const Z95: f64 = 1.959_963_984_540_054;
/// One-sided 99% normal quantile.
pub const Z99_ONE_SIDED: f64 = 2.326_347_874_040_841;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

pub fn se_known(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    Normal,
    Wilson,
}

/// A frequency with a 95% interval: normal approximation when both the
/// success and failure counts are at least 5, Wilson score otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p: f64,
    pub se: f64,
    pub half_width: f64,
    pub method: IntervalMethod,
}

pub fn binomial_interval(successes: u64, trials: u64) -> BinomialEstimate {
    let p = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
    let se = if trials == 0 { f64::INFINITY } else { se_known(p, trials) };
    let (half_width, method) = if successes.min(trials - successes.min(trials)) >= 5 {
        (Z95 * se, IntervalMethod::Normal)
    } else {
        let (lo, hi) = wilson(successes, trials, Z95);
        ((p - lo).max(hi - p), IntervalMethod::Wilson)
    };
    BinomialEstimate {
        successes,
        trials,
        p,
        se,
        half_width,
        method,
    }
}

/// Running mean and variance (Welford), mergeable across replicas.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn se(&self) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthModel {
    /// `y ≈ b log x + a`
    Log,
    /// `y ≈ b log log x + a`
    #[serde(rename = "loglog")]
    LogLog,
    /// `y ≈ b / log² x + a`
    ReciprocalLogSq,
}

impl GrowthModel {
    pub fn transform(self, x: f64) -> f64 {
        match self {
            GrowthModel::Log => x.ln(),
            GrowthModel::LogLog => x.ln().ln(),
            GrowthModel::ReciprocalLogSq => x.ln().powi(-2),
        }
    }
}

/// Ordinary least squares with a t-based 95% interval for the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_se: f64,
    pub slope_ci: (f64, f64),
    pub n: usize,
}

pub fn ols(t: &[f64], y: &[f64]) -> Result<Fit> {
    let n = t.len();
    if n != y.len() || n < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 paired points, got {n}")));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite coordinate".into()));
    }
    let nf = n as f64;
    let tm = t.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let stt: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    if stt <= 1e-300 || stt <= 1e-24 * t.iter().map(|a| a * a).sum::<f64>() {
        return Err(Error::DegenerateFit("regressor has no spread".into()));
    }
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let syy: f64 = y.iter().map(|b| (b - ym).powi(2)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let sse: f64 = t.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>().max(0.0);
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let slope_se = (sse / (nf - 2.0) / stt).sqrt();
    let tq = StudentsT::new(0.0, 1.0, nf - 2.0)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(Fit {
        slope,
        intercept,
        r2,
        slope_se,
        slope_ci: (slope - tq * slope_se, slope + tq * slope_se),
        n,
    })
}

/// Fits `y` against a transform of `x`; `x` must be strictly increasing.
pub fn fit_log_growth(points: &[(f64, f64)], model: GrowthModel) -> Result<Fit> {
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::DegenerateFit("x must be strictly increasing".into()));
    }
    let min_x = match model {
        GrowthModel::Log => 0.0,
        _ => 1.0,
    };
    if points.iter().any(|p| p.0 <= min_x) {
        return Err(Error::DegenerateFit(format!("x must exceed {min_x} for this model")));
    }
    let t: Vec<f64> = points.iter().map(|p| model.transform(p.0)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    ols(&t, &y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendTest {
    pub z: f64,
    /// One-sided p-value against a decreasing trend.
    pub p_value: f64,
}

/// Cochran–Armitage test for a trend in proportions `k_i / n_i` along `scores`,
/// one-sided toward decreasing proportions.
pub fn cochran_armitage_decreasing(groups: &[(u64, u64)], scores: &[f64]) -> Result<TrendTest> {
    if groups.len() != scores.len() || groups.len() < 2 {
        return Err(Error::InvalidParameter("need matching groups and scores, at least two".into()));
    }
    let n_tot: f64 = groups.iter().map(|g| g.1 as f64).sum();
    let k_tot: f64 = groups.iter().map(|g| g.0 as f64).sum();
    let pbar = k_tot / n_tot;
    if pbar <= 0.0 || pbar >= 1.0 {
        return Ok(TrendTest { z: 0.0, p_value: 1.0 });
    }
    let t: f64 = groups
        .iter()
        .zip(scores)
        .map(|(&(k, n), s)| s * (k as f64 - n as f64 * pbar))
        .sum();
    let s1: f64 = groups.iter().zip(scores).map(|(g, s)| g.1 as f64 * s * s).sum();
    let s2: f64 = groups.iter().zip(scores).map(|(g, s)| g.1 as f64 * s).sum();
    let var = pbar * (1.0 - pbar) * (s1 - s2 * s2 / n_tot);
    if var <= 0.0 {
        return Err(Error::InvalidParameter("scores have no spread".into()));
    }
    let z = t / var.sqrt();
    let normal = Normal::standard();
    Ok(TrendTest {
        z,
        p_value: normal.cdf(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn wilson_reference_value() {
        // 0 of 10: upper limit z²/(n+z²)
        let (lo, hi) = wilson(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - Z95 * Z95 / (10.0 + Z95 * Z95)).abs() < 1e-12);
        let b = binomial_interval(2, 100);
        assert_eq!(b.method, IntervalMethod::Wilson);
        let b = binomial_interval(50, 100);
        assert_eq!(b.method, IntervalMethod::Normal);
        assert!((b.half_width - Z95 * 0.05).abs() < 1e-12);
    }

    #[test]
    fn exact_log_fit() {
        let e = std::f64::consts::E;
        let f = fit_log_growth(&[(e, 1.0), (e * e, 2.0), (e * e * e, 3.0)], GrowthModel::Log).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let c = fit_log_growth(&[(2.0, 5.0), (4.0, 5.0), (8.0, 5.0)], GrowthModel::Log).unwrap();
        assert!(c.slope.abs() < 1e-12);
    }

    #[test]
    fn synthetic_regression_covers_truth() {
        let mut rng = crate::rng::derive(42, 0);
        let pts: Vec<(f64, f64)> = (1..=40)
            .map(|i| {
                let x = 1.3f64.powi(i);
                let noise: f64 = (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
                (x, 2.0 * x.ln() + 0.1 * noise)
            })
            .collect();
        let f = fit_log_growth(&pts, GrowthModel::Log).unwrap();
        assert!(f.slope_ci.0 < 2.0 && 2.0 < f.slope_ci.1, "{f:?}");
    }

    #[test]
    fn rejects_degenerate_designs() {
        assert!(fit_log_growth(&[(2.0, 1.0), (3.0, 1.0)], GrowthModel::Log).is_err());
        assert!(fit_log_growth(&[(2.0, 1.0), (2.0, 1.0), (3.0, 2.0)], GrowthModel::Log).is_err());
        assert!(ols(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn trend_direction() {
        let dec = [(60, 1000), (45, 1000), (30, 1000), (20, 1000)];
        let flat = [(40, 1000), (41, 1000), (39, 1000), (40, 1000)];
        let s = [1.0, 2.0, 3.0, 4.0];
        assert!(cochran_armitage_decreasing(&dec, &s).unwrap().p_value < 0.001);
        assert!(cochran_armitage_decreasing(&flat, &s).unwrap().p_value > 0.05);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let all: Moments = xs.iter().copied().collect();
        let a: Moments = xs[..37].iter().copied().collect();
        let b: Moments = xs[37..].iter().copied().collect();
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.variance() - all.variance()).abs() < 1e-12);
    }
}
