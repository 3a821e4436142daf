//! First-passage times and Monte Carlo estimates of escape and race
//! probabilities.
//!
//! `τ_{n,x}` is the first time `m >= n` with `X_m <= x`, `η_{n,x}` the first
//! with `X_m > x`. A race "to level `b`" is won on entering `[b, ∞)`.

mod exact;

pub use exact::{bd_exact_race, never_return, RaceLadder};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::generators::{BirthDeath, ScalarSpec};
use crate::kernel::{run_until_exit, Exit, ScalarKernel};
use crate::rng::StreamId;
use crate::stats::{binomial_interval, IntervalMethod};
use crate::with_scalar_kernel;

/// `(τ, η)` from time `n` for level `x`, each `None` if not attained.
pub fn first_passage(xs: &[f64], n: usize, x: f64) -> (Option<usize>, Option<usize>) {
    let tail = xs.get(n..).unwrap_or(&[]);
    let tau = tail.iter().position(|&v| v <= x).map(|i| i + n);
    let eta = tail.iter().position(|&v| v > x).map(|i| i + n);
    (tau, eta)
}

/// A Monte Carlo probability with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeEstimate {
    pub estimate: f64,
    pub se: f64,
    pub half_width: f64,
    pub method: IntervalMethod,
    pub escapes: u64,
    pub returns: u64,
    pub truncations: u64,
    pub replicas: u64,
}

impl EscapeEstimate {
    pub fn from_counts(escapes: u64, returns: u64, truncations: u64) -> Self {
        let replicas = escapes + returns + truncations;
        let b = binomial_interval(escapes, replicas);
        EscapeEstimate {
            estimate: b.p,
            se: b.se,
            half_width: b.half_width,
            method: b.method,
            escapes,
            returns,
            truncations,
            replicas,
        }
    }
}

/// How each replica of a race is realised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum RaceEngine {
    /// Step the kernel until it leaves `(x, x+y)`, giving up after `max_steps`.
    Steps { max_steps: u64 },
    /// Birth–death only: one Bernoulli trial per level via [`RaceLadder`].
    Ladder,
}

impl Default for RaceEngine {
    fn default() -> Self {
        RaceEngine::Steps { max_steps: 1 << 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Escape,
    Return,
    Truncated,
}

fn tally(replicas: u64, f: impl Fn(u64) -> Outcome + Sync) -> EscapeEstimate {
    let (e, r, t) = (0..replicas)
        .into_par_iter()
        .map(|i| match f(i) {
            Outcome::Escape => (1, 0, 0),
            Outcome::Return => (0, 1, 0),
            Outcome::Truncated => (0, 0, 1),
        })
        .reduce(|| (0u64, 0u64, 0u64), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    EscapeEstimate::from_counts(e, r, t)
}

fn check_race(start: f64, x: f64, y: f64, replicas: u64) -> Result<()> {
    if replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    if !(y > 0.0) {
        return Err(invalid("y must be positive"));
    }
    if !(x < start && start <= x + y) {
        return Err(invalid(format!("start {start} must lie in (x, x+y] = ({x}, {}]", x + y)));
    }
    Ok(())
}

fn lattice_u64(v: f64, what: &str) -> Result<u64> {
    if v >= 0.0 && v.fract() == 0.0 && v < 9.0e15 {
        Ok(v as u64)
    } else {
        Err(invalid(format!("{what} = {v} is not a lattice point")))
    }
}

fn ladder_for(spec: &ScalarSpec, x: f64, b: f64) -> Result<(&BirthDeath, RaceLadder)> {
    let bd = spec
        .as_birth_death()
        .ok_or_else(|| invalid("the ladder engine needs a birth-death spec"))?;
    let a = lattice_u64(x, "x")?;
    let b = lattice_u64(b, "x+y")?;
    Ok((bd, RaceLadder::new(bd, a, b)?))
}

/// Estimates `P(η_{x+y} < τ_x)` from `start` over `replicas` independent
/// restarts, replica `r` on stream `(seed, r)`.
pub fn mc_race(
    spec: &ScalarSpec,
    start: f64,
    x: f64,
    y: f64,
    replicas: u64,
    seed: u64,
    engine: RaceEngine,
) -> Result<EscapeEstimate> {
    check_race(start, x, y, replicas)?;
    match engine {
        RaceEngine::Ladder => {
            let (_, ladder) = ladder_for(spec, x, x + y)?;
            let s = lattice_u64(start, "start")?;
            Ok(tally(replicas, |r| {
                let mut rng = StreamId::new(seed, r).rng();
                if ladder.sample(s, &mut rng) {
                    Outcome::Escape
                } else {
                    Outcome::Return
                }
            }))
        }
        RaceEngine::Steps { max_steps } => with_scalar_kernel!(spec, k => {
            let s0 = k.init(start)?;
            Ok(tally(replicas, |r| {
                let mut rng = StreamId::new(seed, r).rng();
                let mut s = s0.clone();
                match run_until_exit(k, &mut s, x, x + y, max_steps, &mut rng) {
                    Exit::Upper => Outcome::Escape,
                    Exit::Lower => Outcome::Return,
                    Exit::Truncated => Outcome::Truncated,
                }
            }))
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeOptions {
    /// The race target is `x + y_cap_mult · x`.
    pub y_cap_mult: f64,
    pub engine: RaceEngine,
    /// Ladder only: on reaching the cap, draw the exact probability of never
    /// returning from there, so the estimate targets `P(τ_x = ∞)` itself.
    pub close_tail: bool,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        EscapeOptions {
            y_cap_mult: 50.0,
            engine: RaceEngine::default(),
            close_tail: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeForever {
    pub estimate: EscapeEstimate,
    pub y_cap: f64,
    /// `P(η_{x+y*} < τ_x) - P(τ_x = ∞)` where an exact value is available
    /// (zero when the tail is closed).
    pub surrogate_bias: Option<f64>,
}

/// Estimates `P(τ_x = ∞)` from `start` through the race to `x + y*`.
pub fn mc_escape_forever(
    spec: &ScalarSpec,
    start: f64,
    x: f64,
    replicas: u64,
    seed: u64,
    opts: EscapeOptions,
) -> Result<EscapeForever> {
    if !(opts.y_cap_mult > 0.0) {
        return Err(invalid("y_cap_mult must be positive"));
    }
    let mut y = opts.y_cap_mult * x.max(1.0);
    if let Some(h) = spec.lattice_spacing() {
        y = (y / h).ceil() * h;
    }
    if start > x + y {
        return Err(invalid("start lies above the surrogate cap"));
    }
    let bias = match spec.as_birth_death() {
        Some(bd) if start.fract() == 0.0 && x.fract() == 0.0 => {
            let (a, s, b) = (x as u64, start as u64, (x + y) as u64);
            let race = if s >= b { 1.0 } else { bd_exact_race(bd, s, a, b)? };
            Some(race - never_return(bd, a, s)?)
        }
        _ => None,
    };
    if opts.close_tail {
        if opts.engine != RaceEngine::Ladder {
            return Err(invalid("closing the tail needs the ladder engine"));
        }
        check_race(start, x, y, replicas)?;
        let (bd, ladder) = ladder_for(spec, x, x + y)?;
        let (a, b) = (ladder.lower(), ladder.upper());
        let stay = never_return(bd, a, b)?;
        let s = lattice_u64(start, "start")?;
        let est = tally(replicas, |r| {
            let mut rng = StreamId::new(seed, r).rng();
            if ladder.sample(s, &mut rng) && rand::Rng::random::<f64>(&mut rng) < stay {
                Outcome::Escape
            } else {
                Outcome::Return
            }
        });
        return Ok(EscapeForever {
            estimate: est,
            y_cap: y,
            surrogate_bias: Some(0.0),
        });
    }
    Ok(EscapeForever {
        estimate: mc_race(spec, start, x, y, replicas, seed, opts.engine)?,
        y_cap: y,
        surrogate_bias: bias,
    })
}

/// Estimates `P(η_{x+y} < τ_x, X_η = x + y)`: win the race and land exactly
/// on the target.
pub fn targeted_entry_probability(
    spec: &ScalarSpec,
    start: f64,
    x: f64,
    y: f64,
    replicas: u64,
    seed: u64,
    max_steps: u64,
) -> Result<EscapeEstimate> {
    check_race(start, x, y, replicas)?;
    let h = spec
        .lattice_spacing()
        .ok_or_else(|| invalid("targeted entry needs a lattice spec"))?;
    for (v, what) in [(x, "x"), (x + y, "x+y")] {
        if (v / h).fract() != 0.0 {
            return Err(invalid(format!("{what} = {v} is not a lattice point")));
        }
    }
    let target = x + y;
    with_scalar_kernel!(spec, k => {
        let s0 = k.init(start)?;
        Ok(tally(replicas, |r| {
            let mut rng = StreamId::new(seed, r).rng();
            let mut s = s0.clone();
            match run_until_exit(k, &mut s, x, target, max_steps, &mut rng) {
                Exit::Upper if k.position(&s) == target => Outcome::Escape,
                Exit::Upper | Exit::Lower => Outcome::Return,
                Exit::Truncated => Outcome::Truncated,
            }
        }))
    })
}
