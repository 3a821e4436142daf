//! Closed forms for nearest-neighbour birth–death chains.
//!
//! With `ρ_i = q_i/p_i` and `W_k = Π_{i=a+1}^{k} ρ_i` the chain started at `s`
//! hits `b` before `a` with probability `Σ_{k=a}^{s-1} W_k / Σ_{k=a}^{b-1} W_k`.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::generators::{BdLaw, BirthDeath};

/// Log-domain accumulator for sums of positive terms.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    scaled: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    fn add(&mut self, lw: f64) {
        if lw == f64::NEG_INFINITY {
            return;
        }
        if lw > self.max {
            self.scaled = self.scaled * (self.max - lw).exp() + 1.0;
            self.max = lw;
        } else {
            self.scaled += (lw - self.max).exp();
        }
    }

    fn ln(&self) -> f64 {
        self.max + self.scaled.ln()
    }
}

fn check_interior(bd: &BirthDeath, a: u64, b: u64) -> Result<()> {
    for i in a + 1..b {
        let p = bd.up(i);
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("p({i}) = {p}: race formula needs 0 < p < 1 strictly inside (a, b)")));
        }
    }
    Ok(())
}

/// `P_start(hit b before a)` for `a < start < b`.
pub fn bd_exact_race(bd: &BirthDeath, start: u64, a: u64, b: u64) -> Result<f64> {
    if !(a < start && start < b) {
        return Err(invalid(format!("need a < start < b, got {a}, {start}, {b}")));
    }
    check_interior(bd, a, b)?;
    let mut num = LogSum::new();
    let mut den = LogSum::new();
    let mut lw = 0.0;
    for k in a..b {
        if k > a {
            lw += bd.log_ratio(k);
        }
        if k < start {
            num.add(lw);
        }
        den.add(lw);
    }
    Ok((num.ln() - den.ln()).exp().min(1.0))
}

/// Explicit terms summed before switching to the asymptotic tail.
fn explicit_len(m: u64) -> u64 {
    (64 * m).max(1 << 16)
}

/// `P_start(never hit [0, m])` for `start > m`, from the series
/// `Σ_{j=m}^{start-1} w_j / Σ_{j>=m} w_j`. The sum is explicit up to
/// `64 m` and the remainder uses the asymptotic form of `w_j`.
pub fn never_return(bd: &BirthDeath, m: u64, start: u64) -> Result<f64> {
    if start <= m {
        return Ok(0.0);
    }
    let end = explicit_len(m).max(start);
    let mut num = LogSum::new();
    let mut den = LogSum::new();
    let mut lw = 0.0;
    for j in m..=end {
        if j > m {
            lw += bd.log_ratio(j);
        }
        if j < start {
            num.add(lw);
        }
        den.add(lw);
    }
    let Some(tail_ratio) = tail_over_last(bd.law(), end) else {
        return Ok(0.0);
    };
    // Σ_{j > end} w_j = w_end · tail_ratio
    den.add(lw + tail_ratio.ln());
    Ok((num.ln() - den.ln()).exp())
}

/// `Σ_{j>J} w_j / w_J` from `w_j ≈ w_J (J/j)^a (log J / log j)^c`, or `None`
/// if the series diverges.
fn tail_over_last(law: BdLaw, j: u64) -> Option<f64> {
    match law {
        BdLaw::Homogeneous { p } => {
            let rho = (1.0 - p) / p;
            (rho < 1.0).then(|| rho / (1.0 - rho))
        }
        BdLaw::Lamperti { a, c } => {
            let c = c.unwrap_or(0.0);
            let jf = j as f64;
            let jm = jf + 0.5;
            let lm = jm.ln();
            // normalise the continuous profile to w_J at J
            let lead = (jf / jm).powf(a) * (jf.ln() / lm).powf(c) * jm;
            if a > 1.0 {
                let k = (a - 1.0) * lm;
                let integral = simpson(|v| (-v).exp() * (1.0 + v / k).powf(-c), 0.0, 60.0, 4000);
                Some(lead * integral / (a - 1.0))
            } else if a == 1.0 && c > 1.0 {
                Some(lead * lm / (c - 1.0))
            } else {
                None
            }
        }
    }
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Per-level loss probabilities `g_u = P_u(hit a before u+1)` for
/// `a < u < b`. Passing level `u` is then an independent Bernoulli(`1 - g_u`)
/// trial by the strong Markov property, so a race from `s` to `b` can be
/// sampled one level at a time.
#[derive(Debug, Clone)]
pub struct RaceLadder {
    a: u64,
    b: u64,
    g: Vec<f64>,
}

impl RaceLadder {
    pub fn new(bd: &BirthDeath, a: u64, b: u64) -> Result<Self> {
        if a + 1 >= b {
            return Err(invalid("ladder needs a + 1 < b"));
        }
        check_interior(bd, a, b)?;
        let mut g = Vec::with_capacity((b - a - 1) as usize);
        let mut prev = 1.0;
        for u in a + 1..b {
            let (p, q) = (bd.up(u), bd.down(u));
            prev = q * prev / (p + q * prev);
            g.push(prev);
        }
        Ok(RaceLadder { a, b, g })
    }

    pub fn lower(&self) -> u64 {
        self.a
    }

    pub fn upper(&self) -> u64 {
        self.b
    }

    /// `P_u(hit a before u+1)`.
    pub fn loss(&self, u: u64) -> f64 {
        self.g[(u - self.a - 1) as usize]
    }

    /// `Π_{u=s}^{b-1} (1 - g_u)`.
    pub fn probability(&self, start: u64) -> f64 {
        if start >= self.b {
            return 1.0;
        }
        if start <= self.a {
            return 0.0;
        }
        self.g[(start - self.a - 1) as usize..].iter().map(|g| (-g).ln_1p()).sum::<f64>().exp()
    }

    /// One race from `start`: `true` when `b` is reached first.
    pub fn sample<R: Rng + ?Sized>(&self, start: u64, rng: &mut R) -> bool {
        if start <= self.a {
            return false;
        }
        let from = (start.min(self.b) - self.a - 1) as usize;
        self.g[from.min(self.g.len())..].iter().all(|&g| rng.random::<f64>() >= g)
    }
}
