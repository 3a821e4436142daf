//! Empirical checks of a generator against its declared profile.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::ScalarSpec;
use crate::profile::MomentProfile;
use crate::rng::StreamId;
use crate::stats::{wilson, Moments, Z99_ONE_SIDED};
use crate::trajectory::ScalarTrajectory;

#[derive(Debug, Clone, Serialize)]
pub struct BinMoments {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// Mean and SE of `Δ`.
    pub delta: (f64, f64),
    /// Mean and SE of `Δ²`.
    pub delta_sq: (f64, f64),
    /// Mean of `2 X Δ` over increments starting in the bin.
    pub two_x_delta: f64,
}

/// Sample moments of the increments `Δ_n = X_{n+1} - X_n`, grouped by the
/// bin containing `X_n`. Bins are `[e_i, e_{i+1})`, the last one closed.
pub fn empirical_increment_moments(traj: &ScalarTrajectory, edges: &[f64]) -> Result<Vec<BinMoments>> {
    if traj.horizon() == 0 {
        return Err(Error::EmptyTrajectory);
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("bin edges must be strictly increasing, at least two".into()));
    }
    let nb = edges.len() - 1;
    let mut acc = vec![(Moments::default(), Moments::default(), 0.0f64); nb];
    let xs = traj.positions();
    for n in 0..traj.horizon() {
        let x = xs[n];
        let b = bin_of(edges, x).ok_or(Error::UncoveredPosition { n, x })?;
        let d = xs[n + 1] - x;
        acc[b].0.push(d);
        acc[b].1.push(d * d);
        acc[b].2 += 2.0 * x * d;
    }
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(i, (m1, m2, s))| BinMoments {
            lo: edges[i],
            hi: edges[i + 1],
            count: m1.n,
            delta: (m1.mean, m1.se()),
            delta_sq: (m2.mean, m2.se()),
            two_x_delta: if m1.n == 0 { f64::NAN } else { s / m1.n as f64 },
        })
        .collect())
}

fn bin_of(edges: &[f64], x: f64) -> Option<usize> {
    let last = edges.len() - 1;
    if x < edges[0] || x > edges[last] {
        return None;
    }
    let i = edges.partition_point(|&e| e <= x);
    Some(i.saturating_sub(1).min(last - 1))
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentViolation {
    pub lo: f64,
    pub hi: f64,
    pub which: &'static str,
    pub observed: f64,
    pub allowed: (f64, f64),
}

/// Compares each well-populated bin with the profile's envelope over the bin
/// (bounds evaluated at both edges and the midpoint) widened by `3·SE`.
pub fn check_moment_consistency(
    profile: &MomentProfile,
    bins: &[BinMoments],
    min_count: u64,
) -> Vec<MomentViolation> {
    let mut out = Vec::new();
    for b in bins.iter().filter(|b| b.count >= min_count) {
        let probes = [b.lo, 0.5 * (b.lo + b.hi), b.hi];
        let env = |lo: &dyn Fn(f64) -> f64, hi: &dyn Fn(f64) -> f64| {
            let l = probes.iter().map(|&x| lo(x)).fold(f64::INFINITY, f64::min);
            let h = probes.iter().map(|&x| hi(x)).fold(f64::NEG_INFINITY, f64::max);
            (l, h)
        };
        let m1 = env(&|x| profile.mu1_lower(x), &|x| profile.mu1_upper(x));
        let m2 = env(&|x| profile.mu2_lower(x), &|x| profile.mu2_upper(x));
        for (which, (obs, se), (l, h)) in [("delta", b.delta, m1), ("delta_sq", b.delta_sq, m2)] {
            let allowed = (l - 3.0 * se, h + 3.0 * se);
            if obs < allowed.0 || obs > allowed.1 {
                out.push(MomentViolation {
                    lo: b.lo,
                    hi: b.hi,
                    which,
                    observed: obs,
                    allowed,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct EllipticityRow {
    pub x: f64,
    pub samples: usize,
    /// `P̂(Δ >= ε)` for the accepted `ε` (or the smallest grid value if none).
    pub p_hat: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ellipticity {
    pub epsilon: f64,
    pub table: Vec<EllipticityRow>,
}

/// Largest `ε = B/2^j`, `j = 1..=30`, such that the one-sided 99% Wilson lower
/// bound for `P(Δ >= ε)` is at least `ε` at every tested position.
pub fn verify_ellipticity(spec: &ScalarSpec, xs: &[f64], samples: usize, seed: u64) -> Result<Ellipticity> {
    if samples == 0 || xs.is_empty() {
        return Err(Error::InvalidParameter("need at least one position and one sample".into()));
    }
    let b = spec.jump_bound();
    let draws: Vec<Vec<f64>> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| spec.sample_increments(x, samples, StreamId::new(seed, i as u64)))
        .collect::<Result<_>>()?;
    let grid: Vec<f64> = (1..=30).map(|j| b / 2f64.powi(j)).collect();
    let row = |x: f64, d: &[f64], eps: f64| {
        let k = d.iter().filter(|&&v| v >= eps).count() as u64;
        EllipticityRow {
            x,
            samples,
            p_hat: k as f64 / samples as f64,
            lower_bound: wilson(k, samples as u64, Z99_ONE_SIDED).0,
        }
    };
    for &eps in &grid {
        let table: Vec<EllipticityRow> = xs.iter().zip(&draws).map(|(&x, d)| row(x, d, eps)).collect();
        if table.iter().all(|r| r.lower_bound >= eps) {
            return Ok(Ellipticity { epsilon: eps, table });
        }
    }
    Err(Error::NoEllipticity {
        smallest: *grid.last().unwrap(),
    })
}
