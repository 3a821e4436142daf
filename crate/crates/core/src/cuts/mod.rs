//! Cutpoints, strong cutpoints, separating points, cut times and cut intervals
//! of a finite path.
//!
//! The definitions quantify over the whole infinite future; on a path observed
//! up to time `N` every structure is first a CANDIDATE (the defining clauses
//! hold up to `N`). It is CONFIRMED when, in addition, the path has climbed at
//! least `W` above it by time `N`.
//!
//! All detectors run in `O(N)` from the prefix maxima `PM[n] = max_{m<=n} X_m`
//! and suffix minima `SM[n] = min_{m>=n} X_m`.

mod annuli;
mod events;

pub use annuli::{detect_cut_annuli, is_annulus_run, CutAnnulus};
pub use events::{detect_ax_events, interval_is_cut, AxFlag, AxOutcome, AxParams};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConfirmationStatus {
    Confirmed,
    Candidate,
}

impl ConfirmationStatus {
    pub fn from_clearance(max_x: f64, level: f64, window: f64) -> Self {
        if max_x >= level + window {
            ConfirmationStatus::Confirmed
        } else {
            ConfirmationStatus::Candidate
        }
    }

    pub fn is_confirmed(self) -> bool {
        self == ConfirmationStatus::Confirmed
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConfirmationStatus::Confirmed => "CONFIRMED",
            ConfirmationStatus::Candidate => "CANDIDATE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutpoint {
    pub x: f64,
    pub n0: usize,
    pub strong: bool,
    pub status: ConfirmationStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutTime {
    pub n: usize,
    pub status: ConfirmationStatus,
}

/// One component of the separating set: `(lo, hi)`, or `[lo, hi)` when
/// `lo_closed` (only for the component touching 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SepInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
}

impl SepInterval {
    pub fn contains(&self, x: f64) -> bool {
        (self.lo < x || (self.lo_closed && x == self.lo)) && x < self.hi
    }

    /// Lebesgue measure of the intersection with `[a, b]`.
    pub fn measure_in(&self, a: f64, b: f64) -> f64 {
        (self.hi.min(b) - self.lo.max(a)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingSet {
    /// Disjoint components in increasing order; the last one is unbounded.
    pub intervals: Vec<SepInterval>,
    pub max_x: f64,
    pub window: f64,
}

impl SeparatingSet {
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn measure_in(&self, a: f64, b: f64) -> f64 {
        self.intervals.iter().map(|i| i.measure_in(a, b)).sum()
    }

    /// Measure within `[0, max X]`.
    pub fn candidate_measure(&self) -> f64 {
        self.measure_in(0.0, self.max_x)
    }

    /// Measure within `[0, max X - W]`.
    pub fn confirmed_measure(&self) -> f64 {
        if self.max_x < self.window {
            0.0
        } else {
            self.measure_in(0.0, self.max_x - self.window)
        }
    }

    /// Components meeting `[0, max X - W]`, clipped to it.
    pub fn confirmed_intervals(&self) -> Vec<SepInterval> {
        let top = self.max_x - self.window;
        self.intervals
            .iter()
            .filter(|i| i.lo < top || (i.lo_closed && i.lo <= top))
            .map(|i| SepInterval {
                hi: i.hi.min(top),
                ..*i
            })
            .collect()
    }

    pub fn sup(&self) -> f64 {
        self.intervals.last().map_or(f64::NEG_INFINITY, |i| i.hi)
    }
}

/// A maximal interval whose interior holds only strong cutpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutInterval {
    pub l: f64,
    pub r: f64,
    /// Number of path points in `(l, r)`.
    pub k_obs: usize,
    /// `(x, n0)` of the interior points, in increasing order.
    pub points: Vec<(f64, usize)>,
    pub status: ConfirmationStatus,
}

/// Prefix-max / suffix-min tables, reusable across paths.
#[derive(Debug, Default, Clone)]
pub struct Scanner {
    pm: Vec<f64>,
    sm: Vec<f64>,
    max: f64,
}

impl Scanner {
    pub fn new(xs: &[f64]) -> Self {
        let mut s = Scanner::default();
        s.load(xs);
        s
    }

    pub fn load(&mut self, xs: &[f64]) {
        let n = xs.len();
        self.pm.clear();
        self.sm.clear();
        self.pm.reserve(n);
        self.sm.resize(n, 0.0);
        let mut m = f64::NEG_INFINITY;
        for &x in xs {
            m = m.max(x);
            self.pm.push(m);
        }
        let mut m = f64::INFINITY;
        for i in (0..n).rev() {
            m = m.min(xs[i]);
            self.sm[i] = m;
        }
        self.max = self.pm.last().copied().unwrap_or(f64::NEG_INFINITY);
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    fn pm_before(&self, n: usize) -> f64 {
        if n == 0 {
            f64::NEG_INFINITY
        } else {
            self.pm[n - 1]
        }
    }

    /// `min_{m >= n} X_m`, `+∞` past the end.
    pub fn suffix_min(&self, n: usize) -> f64 {
        self.sm.get(n).copied().unwrap_or(f64::INFINITY)
    }

    fn sm_after(&self, n: usize) -> f64 {
        self.sm.get(n + 1).copied().unwrap_or(f64::INFINITY)
    }

    /// Whether the visit at time `n` makes `X_n` a cutpoint.
    #[inline]
    pub fn is_cut(&self, xs: &[f64], n: usize) -> bool {
        self.pm[n] == xs[n] && self.sm_after(n) > xs[n]
    }

    /// Whether the visit at time `n` makes `X_n` a strong cutpoint.
    #[inline]
    pub fn is_strong(&self, xs: &[f64], n: usize) -> bool {
        self.pm_before(n) < xs[n] && self.sm_after(n) > xs[n]
    }

    pub fn cutpoints(&self, xs: &[f64], window: f64, out: &mut Vec<Cutpoint>) {
        out.clear();
        for n in 0..xs.len() {
            if self.is_cut(xs, n) {
                out.push(Cutpoint {
                    x: xs[n],
                    n0: n,
                    strong: self.pm_before(n) < xs[n],
                    status: ConfirmationStatus::from_clearance(self.max, xs[n], window),
                });
            }
        }
    }

    pub fn cut_times(&self, window: f64, out: &mut Vec<CutTime>) {
        out.clear();
        let n_last = self.pm.len().saturating_sub(1);
        for n in 0..n_last {
            if self.pm[n] < self.sm[n + 1] {
                out.push(CutTime {
                    n,
                    status: ConfirmationStatus::from_clearance(self.max, self.pm[n], window),
                });
            }
        }
    }

    /// Merged windows `(PM[n0-1], SM[n0+1])` over `n0 = 0..=N`, intersected with `[0, ∞)`.
    pub fn separating_set(&self, window: f64) -> SeparatingSet {
        let mut intervals: Vec<SepInterval> = Vec::new();
        for n0 in 0..self.pm.len() {
            let (lo, hi) = (self.pm_before(n0), self.sm_after(n0));
            if !(lo < hi) || hi <= 0.0 {
                continue;
            }
            let w = if lo < 0.0 {
                SepInterval { lo: 0.0, hi, lo_closed: true }
            } else {
                SepInterval { lo, hi, lo_closed: false }
            };
            match intervals.last_mut() {
                Some(cur) if w.lo < cur.hi => cur.hi = cur.hi.max(w.hi),
                _ => intervals.push(w),
            }
        }
        SeparatingSet {
            intervals,
            max_x: self.max,
            window,
        }
    }

    pub fn cut_intervals(&self, xs: &[f64], h: f64, k: usize, window: f64) -> Vec<CutInterval> {
        let mut blockers: Vec<f64> = Vec::new();
        let mut strong: Vec<(f64, usize)> = Vec::new();
        for (n, &x) in xs.iter().enumerate() {
            if self.is_strong(xs, n) {
                strong.push((x, n));
            } else {
                blockers.push(x);
            }
        }
        blockers.sort_by(f64::total_cmp);
        blockers.dedup();
        strong.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut bounds = Vec::with_capacity(blockers.len() + 2);
        if blockers.first() != Some(&0.0) {
            bounds.push(0.0);
        }
        bounds.extend_from_slice(&blockers);
        if bounds.last() != Some(&self.max) {
            bounds.push(self.max);
        }
        let mut out = Vec::new();
        let mut si = 0;
        for pair in bounds.windows(2) {
            let (l, r) = (pair[0], pair[1]);
            while si < strong.len() && strong[si].0 <= l {
                si += 1;
            }
            let start = si;
            while si < strong.len() && strong[si].0 < r {
                si += 1;
            }
            let k_obs = si - start;
            if r - l >= h && k_obs >= k {
                out.push(CutInterval {
                    l,
                    r,
                    k_obs,
                    points: strong[start..si].to_vec(),
                    status: ConfirmationStatus::from_clearance(self.max, r, window),
                });
            }
        }
        out
    }
}

/// Everything the detectors report for one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutReport {
    pub cutpoints: Vec<Cutpoint>,
    pub separating_set: SeparatingSet,
    pub cut_times: Vec<CutTime>,
    pub horizon: usize,
    pub window: f64,
}

impl CutReport {
    pub fn new(xs: &[f64], window: f64) -> Result<Self> {
        check_window(window)?;
        let s = Scanner::new(xs);
        let mut cutpoints = Vec::new();
        let mut cut_times = Vec::new();
        s.cutpoints(xs, window, &mut cutpoints);
        s.cut_times(window, &mut cut_times);
        Ok(CutReport {
            cutpoints,
            separating_set: s.separating_set(window),
            cut_times,
            horizon: xs.len().saturating_sub(1),
            window,
        })
    }

    pub fn strong_cutpoints(&self) -> impl Iterator<Item = &Cutpoint> + '_ {
        self.cutpoints.iter().filter(|c| c.strong)
    }
}

fn check_window(w: f64) -> Result<()> {
    if !(w >= 0.0) {
        return Err(invalid("confirmation window must be nonnegative"));
    }
    Ok(())
}

pub fn detect_cutpoints(xs: &[f64], window: f64) -> Result<Vec<Cutpoint>> {
    check_window(window)?;
    let mut out = Vec::new();
    Scanner::new(xs).cutpoints(xs, window, &mut out);
    Ok(out)
}

pub fn detect_cut_times(xs: &[f64], window: f64) -> Result<Vec<CutTime>> {
    check_window(window)?;
    let mut out = Vec::new();
    Scanner::new(xs).cut_times(window, &mut out);
    Ok(out)
}

pub fn detect_separating_set(xs: &[f64], window: f64) -> Result<SeparatingSet> {
    check_window(window)?;
    Ok(Scanner::new(xs).separating_set(window))
}

pub fn detect_cut_intervals(xs: &[f64], h: f64, k: usize, window: f64) -> Result<Vec<CutInterval>> {
    check_window(window)?;
    if !(h > 0.0) {
        return Err(invalid("h must be positive"));
    }
    Ok(Scanner::new(xs).cut_intervals(xs, h, k, window))
}

/// Finite-horizon checks of the elementary relations between the structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LemmaChecks {
    pub cutpoints: usize,
    pub cut_times: usize,
    /// `#C >= #T`.
    pub count_inequality: bool,
    /// Every window `(PM[n0-1], SM[n0+1])` meeting the confirmed part of the
    /// separating set has `n0 - 1` or `n0` as a cut time. Time `-1`, with an
    /// empty past, counts as a cut time.
    pub separating_witness: bool,
    /// The largest strong cutpoint is at most `sup S`.
    pub strong_below_sup: bool,
}

pub fn lemma_checks(xs: &[f64], window: f64) -> LemmaChecks {
    let s = Scanner::new(xs);
    let mut cps = Vec::new();
    let mut ts = Vec::new();
    s.cutpoints(xs, window, &mut cps);
    s.cut_times(window, &mut ts);
    let sep = s.separating_set(window);
    let top = s.max - window;
    let mut is_time = vec![false; xs.len()];
    for t in &ts {
        is_time[t.n] = true;
    }
    let witness = (0..xs.len()).all(|n0| {
        let (lo, hi) = (s.pm_before(n0), s.sm_after(n0));
        let meets = lo < hi && hi > 0.0 && lo.max(0.0) < top;
        !meets || n0 == 0 || is_time[n0] || is_time[n0 - 1]
    });
    let max_strong = cps.iter().filter(|c| c.strong).map(|c| c.x).fold(f64::NEG_INFINITY, f64::max);
    LemmaChecks {
        cutpoints: cps.len(),
        cut_times: ts.len(),
        count_inequality: cps.len() >= ts.len(),
        separating_witness: witness,
        strong_below_sup: max_strong <= sep.sup(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doubled(k: usize) -> Vec<f64> {
        (0..=k).flat_map(|i| [i as f64, i as f64]).collect()
    }

    #[test]
    fn doubled_staircase_has_cutpoints_but_no_strong_ones() {
        let xs = doubled(10);
        let c = detect_cutpoints(&xs, 0.0).unwrap();
        assert_eq!(c.len(), 11);
        assert!(c.iter().all(|c| !c.strong && c.n0 % 2 == 1));
        assert!(detect_cut_intervals(&xs, 0.5, 0, 0.0).unwrap().iter().all(|i| i.k_obs == 0));
        assert!(detect_cut_intervals(&xs, 0.5, 1, 0.0).unwrap().is_empty());
    }

    #[test]
    fn increasing_path() {
        let n = 30;
        let xs: Vec<f64> = (0..=n).map(f64::from).collect();
        let c = detect_cutpoints(&xs, 5.0).unwrap();
        assert_eq!(c.len(), 31);
        assert!(c.iter().all(|c| c.strong));
        assert_eq!(c.iter().filter(|c| !c.status.is_confirmed()).count(), 5);
        let t = detect_cut_times(&xs, 0.0).unwrap();
        assert_eq!(t.iter().map(|t| t.n).collect::<Vec<_>>(), (0..30).collect::<Vec<_>>());
        let iv = detect_cut_intervals(&xs, 3.0, 2, 0.0).unwrap();
        assert_eq!(iv.len(), 1);
        assert_eq!((iv[0].l, iv[0].r, iv[0].k_obs), (0.0, 30.0, 29));
    }

    #[test]
    fn even_path_separating_measure() {
        let n = 25;
        let xs: Vec<f64> = (0..=n).map(|i| 2.0 * i as f64).collect();
        let s = detect_separating_set(&xs, 0.0).unwrap();
        assert_eq!(s.intervals.len(), 1);
        assert_eq!(s.candidate_measure(), 2.0 * n as f64);
        assert!(s.contains(0.0) && s.contains(17.3) && s.contains(1e9));
    }

    #[test]
    fn first_passage_semantics_on_known_path() {
        // 0, 2, 1, 3, 2.5, 4
        let xs = [0.0, 2.0, 1.0, 3.0, 2.5, 4.0];
        let r = CutReport::new(&xs, 0.0).unwrap();
        let cps: Vec<f64> = r.cutpoints.iter().map(|c| c.x).collect();
        assert_eq!(cps, vec![0.0, 4.0]);
        let ts: Vec<usize> = r.cut_times.iter().map(|t| t.n).collect();
        assert_eq!(ts, vec![0, 2, 4]);
        let l = lemma_checks(&xs, 0.0);
        assert!(!l.count_inequality);
        assert!(l.separating_witness);
    }

    #[test]
    fn window_validation() {
        assert!(detect_cutpoints(&[0.0], -1.0).is_err());
        assert!(detect_cut_intervals(&[0.0], 0.0, 1, 0.0).is_err());
    }
}
