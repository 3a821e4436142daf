use serde::{Deserialize, Serialize};

use super::{check_window, ConfirmationStatus, Scanner};
use crate::error::{invalid, Result};

/// Parameters of the "fast climb then no return" event at level `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxParams {
    pub epsilon: f64,
    pub ell: usize,
    /// Start time for the first passage.
    pub n: usize,
    pub h: f64,
    pub k: usize,
    pub jump_bound: f64,
}

impl AxParams {
    pub fn new(epsilon: f64, ell: usize, n: usize, h: f64, k: usize, jump_bound: f64) -> Result<Self> {
        let p = AxParams {
            epsilon,
            ell,
            n,
            h,
            k,
            jump_bound,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.h > 0.0 && self.jump_bound > 0.0) || self.ell == 0 {
            return Err(invalid("epsilon, h, B must be positive and ell >= 1"));
        }
        let need = self.h.max(self.jump_bound * self.k as f64);
        if !(self.width() > need) {
            return Err(invalid(format!(
                "ell*epsilon = {} must exceed max(h, B k) = {need}",
                self.width()
            )));
        }
        Ok(())
    }

    /// Smallest `ℓ` with `ℓε > max(h, Bk)`.
    pub fn minimal_ell(epsilon: f64, h: f64, k: usize, jump_bound: f64) -> usize {
        let need = h.max(jump_bound * k as f64);
        (need / epsilon).floor() as usize + 1
    }

    /// Length `ℓε` of the interval `I_x = [x, x + ℓε]`.
    pub fn width(&self) -> f64 {
        self.ell as f64 * self.epsilon
    }

    /// Spacing `q = max(1, 2ℓε)` making the intervals `I_{qx}` disjoint.
    pub fn q(&self) -> f64 {
        (2.0 * self.width()).max(1.0)
    }

    /// `q, 2q, …, count·q`.
    pub fn default_grid(&self, count: usize) -> Vec<f64> {
        (1..=count).map(|i| i as f64 * self.q()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "status", rename_all = "snake_case")]
pub enum AxOutcome {
    Occurs(ConfirmationStatus),
    Fails,
    /// The horizon ends before `η + 2ℓ`.
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxFlag {
    pub x: f64,
    /// First `m >= n` with `X_m > x`.
    pub eta: Option<usize>,
    pub outcome: AxOutcome,
}

impl AxFlag {
    pub fn occurs(&self) -> bool {
        matches!(self.outcome, AxOutcome::Occurs(_))
    }

    pub fn confirmed(&self) -> bool {
        self.outcome == AxOutcome::Occurs(ConfirmationStatus::Confirmed)
    }
}

/// Evaluates the event at each grid level. Levels must exceed `X_0 + Bn`.
pub fn detect_ax_events(xs: &[f64], params: &AxParams, grid: &[f64], window: f64) -> Result<Vec<AxFlag>> {
    check_window(window)?;
    params.validate()?;
    let Some(&x0) = xs.first() else {
        return Err(crate::error::Error::EmptyTrajectory);
    };
    let floor = x0 + params.jump_bound * params.n as f64;
    if let Some(&bad) = grid.iter().find(|&&x| !(x > floor)) {
        return Err(invalid(format!("grid level {bad} is not above X_0 + Bn = {floor}")));
    }
    let scan = Scanner::new(xs);
    // running maximum from time n, for first passage by bisection
    let tail = xs.get(params.n..).unwrap_or(&[]);
    let mut run = Vec::with_capacity(tail.len());
    let mut m = f64::NEG_INFINITY;
    for &x in tail {
        m = m.max(x);
        run.push(m);
    }
    let two_l = 2 * params.ell;
    Ok(grid
        .iter()
        .map(|&x| {
            let i = run.partition_point(|&v| v <= x);
            if i == run.len() {
                return AxFlag {
                    x,
                    eta: None,
                    outcome: AxOutcome::Unresolved,
                };
            }
            let eta = params.n + i;
            let outcome = if eta + two_l >= xs.len() {
                AxOutcome::Unresolved
            } else if xs[eta..=eta + two_l].windows(2).any(|w| !(w[1] - w[0] > params.epsilon)) {
                AxOutcome::Fails
            } else if scan.suffix_min(eta + two_l) > x + params.width() {
                AxOutcome::Occurs(ConfirmationStatus::from_clearance(scan.max(), x + params.width(), window))
            } else {
                AxOutcome::Fails
            };
            AxFlag {
                x,
                eta: Some(eta),
                outcome,
            }
        })
        .collect())
}

/// Whether every path point in the open interval `(x, x + ℓε)` is a strong
/// cutpoint, with at least `k` of them and `ℓε >= h`.
pub fn interval_is_cut(xs: &[f64], x: f64, params: &AxParams) -> bool {
    let scan = Scanner::new(xs);
    let r = x + params.width();
    let mut count = 0;
    for (n, &v) in xs.iter().enumerate() {
        if x < v && v < r {
            if !scan.is_strong(xs, n) {
                return false;
            }
            count += 1;
        }
    }
    count >= params.k && params.width() >= params.h
}
