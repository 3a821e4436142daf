use serde::{Deserialize, Serialize};

use super::{check_window, ConfirmationStatus, Scanner};
use crate::error::{invalid, Result};
use crate::trajectory::VectorTrajectory;

/// An open annulus `{l < ‖ξ‖ < r}` crossed once by a strictly outward run of
/// visits `ξ_m, …, ξ_{m+visits-1}`, with everything before inside the ball
/// of radius `l` and everything after outside radius `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutAnnulus {
    pub inner: f64,
    pub outer: f64,
    /// Entry time of the run; `None` when no visit lands inside.
    pub entry: Option<usize>,
    pub visits: usize,
    pub status: ConfirmationStatus,
}

/// Cut annuli of a vector path: the cut intervals of its norm process, each
/// checked against the annulus conditions.
pub fn detect_cut_annuli(v: &VectorTrajectory, h: f64, k: usize, window: f64) -> Result<Vec<CutAnnulus>> {
    check_window(window)?;
    if !(h > 0.0) {
        return Err(invalid("h must be positive"));
    }
    if v.dim() < 2 {
        return Err(invalid("cut annuli need d >= 2"));
    }
    let norms = v.norms();
    let xs = norms.positions();
    let scan = Scanner::new(xs);
    let out = scan
        .cut_intervals(xs, h, k, window)
        .into_iter()
        .map(|ci| {
            let entry = ci.points.iter().map(|&(_, n)| n).min();
            if let Some(m) = entry {
                debug_assert!(is_annulus_run(xs, ci.l, ci.r, m, ci.k_obs));
            }
            CutAnnulus {
                inner: ci.l,
                outer: ci.r,
                entry,
                visits: ci.k_obs,
                status: ci.status,
            }
        })
        .collect();
    Ok(out)
}

/// Direct check of the annulus conditions on the norms `xs` for the run of
/// `visits` points starting at time `m`.
pub fn is_annulus_run(xs: &[f64], l: f64, r: f64, m: usize, visits: usize) -> bool {
    if visits == 0 || m + visits > xs.len() {
        return false;
    }
    let run = &xs[m..m + visits];
    run.iter().all(|&x| l < x && x < r)
        && run.windows(2).all(|w| w[0] < w[1])
        && xs[..m].iter().all(|&x| x <= l)
        && xs[m + visits..].iter().all(|&x| x >= r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_ray_is_one_annulus() {
        let coords: Vec<f64> = (0..=40).flat_map(|n| [n as f64, 0.0]).collect();
        let v = VectorTrajectory::from_coords(2, coords, "ray").unwrap();
        let a = detect_cut_annuli(&v, 2.0, 2, 0.0).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!((a[0].inner, a[0].outer, a[0].entry, a[0].visits), (0.0, 40.0, Some(1), 39));
        let xs = v.norms();
        assert!(is_annulus_run(xs.positions(), 0.0, 40.0, 1, 39));
    }

    #[test]
    fn equal_norms_break_the_run() {
        // (3,0) -> (0,3) keeps the norm at 3
        let pts = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [0.0, 3.0], [0.0, 4.0], [0.0, 5.0], [0.0, 6.0]];
        let v = VectorTrajectory::from_coords(2, pts.concat(), "tie").unwrap();
        let a = detect_cut_annuli(&v, 0.5, 1, 0.0).unwrap();
        assert!(a.iter().all(|a| !(a.inner < 3.0 && 3.0 < a.outer)));
        assert!(a.iter().any(|a| a.inner == 3.0));
        assert!(a.iter().any(|a| a.outer == 3.0));
    }
}
