//! Brute-force oracles: direct quantifier scans over a finite path, written
//! from the definitions and sharing no code with the detectors.

#![allow(dead_code)]

/// Visits `n0` at which `X_n0` is a cutpoint of the observed path.
pub fn cut_visits(xs: &[f64]) -> Vec<usize> {
    (0..xs.len())
        .filter(|&n0| {
            let x = xs[n0];
            (0..=n0).all(|n| xs[n] <= x) && (n0 + 1..xs.len()).all(|n| xs[n] > x)
        })
        .collect()
}

/// Visits `n0` at which `X_n0` is a strong cutpoint of the observed path.
pub fn strong_visits(xs: &[f64]) -> Vec<usize> {
    (0..xs.len())
        .filter(|&n0| {
            let x = xs[n0];
            (0..n0).all(|n| xs[n] < x) && (n0 + 1..xs.len()).all(|n| xs[n] > x)
        })
        .collect()
}

pub fn is_strong_value(xs: &[f64], x: f64) -> bool {
    strong_visits(xs).iter().any(|&n| xs[n] == x)
}

/// Times `n < N` whose past maximum lies strictly below every later value.
pub fn cut_times(xs: &[f64]) -> Vec<usize> {
    let last = xs.len().saturating_sub(1);
    (0..last)
        .filter(|&n| {
            let m = xs[..=n].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            xs[n + 1..].iter().all(|&v| m < v)
        })
        .collect()
}

/// Whether `x >= 0` separates the observed path at some time. Only visits up
/// to the first one reaching `x` can have an all-below prefix; checking the
/// suffix first keeps each probe linear.
pub fn separates(xs: &[f64], x: f64) -> bool {
    let Some(last) = xs.len().checked_sub(1) else { return false };
    let first = xs.iter().position(|&v| v >= x).unwrap_or(last);
    x >= 0.0 && (0..=first).any(|n0| xs[n0 + 1..].iter().all(|&v| v > x) && xs[..n0].iter().all(|&v| v < x))
}

/// Breakpoints of the separating set inside `[0, top]`: 0, every path value
/// in range, and `top`, sorted without duplicates.
pub fn breakpoints(xs: &[f64], top: f64) -> Vec<f64> {
    let mut b: Vec<f64> = xs.iter().copied().filter(|&v| v > 0.0 && v < top).collect();
    b.push(0.0);
    b.push(top);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Lebesgue measure of the separating set within `[0, top]`: membership is
/// constant between consecutive breakpoints, so testing midpoints suffices.
pub fn separating_measure(xs: &[f64], top: f64) -> f64 {
    if top <= 0.0 {
        return 0.0;
    }
    breakpoints(xs, top)
        .windows(2)
        .filter(|w| separates(xs, 0.5 * (w[0] + w[1])))
        .map(|w| w[1] - w[0])
        .sum()
}

/// Whether `(l, r)` is an `(h, k)` cut interval of the observed path.
pub fn is_cut_interval(xs: &[f64], l: f64, r: f64, h: f64, k: usize) -> bool {
    is_cut_interval_given(xs, &strong_flags(xs), l, r, h, k)
}

fn strong_flags(xs: &[f64]) -> Vec<bool> {
    let mut f = vec![false; xs.len()];
    for n in strong_visits(xs) {
        f[n] = true;
    }
    f
}

fn is_cut_interval_given(xs: &[f64], strong: &[bool], l: f64, r: f64, h: f64, k: usize) -> bool {
    let inside: Vec<usize> = (0..xs.len()).filter(|&n| l < xs[n] && xs[n] < r).collect();
    r - l >= h && inside.len() >= k && inside.iter().all(|&n| strong[n])
}

/// Maximal cut intervals inside `[0, max X]`: the gaps between consecutive
/// values that are visited but not strong, with 0 and `max X` as outer ends.
/// Returns `(l, r, interior visit count)`.
pub fn maximal_cut_intervals(xs: &[f64], h: f64, k: usize) -> Vec<(f64, f64, usize)> {
    let strong = strong_flags(xs);
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut ends: Vec<f64> = (0..xs.len()).filter(|&n| !strong[n]).map(|n| xs[n]).collect();
    ends.push(0.0);
    ends.push(max);
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    ends.windows(2)
        .filter(|w| is_cut_interval_given(xs, &strong, w[0], w[1], h, k))
        .map(|w| (w[0], w[1], xs.iter().filter(|&&v| w[0] < v && v < w[1]).count()))
        .collect()
}

pub fn path_max(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// All paths of length `len` over `alphabet`, in lexicographic order.
pub fn all_paths(alphabet: &[f64], len: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    let a = alphabet.len();
    let total = a.pow(len as u32);
    (0..total).map(move |mut i| {
        let mut p = vec![0.0; len];
        for slot in p.iter_mut().rev() {
            *slot = alphabet[i % a];
            i /= a;
        }
        p
    })
}

/// `P_start(hit b before a)` for a nearest-neighbour chain with up
/// probabilities `up(i)` on `a < i < b`, by solving the tridiagonal system
/// `h(i) = p_i h(i+1) + q_i h(i-1)`, `h(a) = 0`, `h(b) = 1`.
pub fn race_by_linear_solve(up: impl Fn(u64) -> f64, a: u64, b: u64, start: u64) -> f64 {
    let n = (b - a - 1) as usize;
    if n == 0 {
        return if start >= b { 1.0 } else { 0.0 };
    }
    // row j (level a+1+j): -q h(j-1) + h(j) - p h(j+1) = 0
    let mut diag = vec![1.0; n];
    let mut rhs = vec![0.0; n];
    let lower: Vec<f64> = (0..n).map(|j| -(1.0 - up(a + 1 + j as u64))).collect();
    let upper: Vec<f64> = (0..n).map(|j| -up(a + 1 + j as u64)).collect();
    rhs[n - 1] = up(b - 1);
    // Thomas algorithm
    for j in 1..n {
        let m = lower[j] / diag[j - 1];
        diag[j] -= m * upper[j - 1];
        rhs[j] -= m * rhs[j - 1];
    }
    let mut h = vec![0.0; n];
    h[n - 1] = rhs[n - 1] / diag[n - 1];
    for j in (0..n - 1).rev() {
        h[j] = (rhs[j] - upper[j] * h[j + 1]) / diag[j];
    }
    h[(start - a - 1) as usize]
}

/// First disagreement between the five detectors and the oracles above on
/// one path, or `None`.
pub fn oracle_mismatch(xs: &[f64], w: f64, h: f64, k: usize) -> Option<String> {
    use cutwalk::cuts::{detect_cut_intervals, CutReport};
    let max = path_max(xs);
    let report = CutReport::new(xs, w).ok()?;
    let got: Vec<usize> = report.cutpoints.iter().map(|c| c.n0).collect();
    if got != cut_visits(xs) {
        return Some(format!("cutpoints {got:?}"));
    }
    let got: Vec<usize> = report.strong_cutpoints().map(|c| c.n0).collect();
    if got != strong_visits(xs) {
        return Some(format!("strong cutpoints {got:?}"));
    }
    if report.cutpoints.iter().any(|c| c.status.is_confirmed() != (max >= c.x + w)) {
        return Some("cutpoint status".into());
    }
    let got: Vec<usize> = report.cut_times.iter().map(|t| t.n).collect();
    if got != cut_times(xs) {
        return Some(format!("cut times {got:?}"));
    }
    let sep = &report.separating_set;
    let mut probes = breakpoints(xs, max + 1.0);
    let mids: Vec<f64> = probes.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    probes.extend(mids);
    if let Some(x) = probes.iter().find(|&&x| sep.contains(x) != separates(xs, x)) {
        return Some(format!("separating set at {x}"));
    }
    if (sep.candidate_measure() - separating_measure(xs, max)).abs() > 1e-9
        || (sep.confirmed_measure() - separating_measure(xs, max - w)).abs() > 1e-9
    {
        return Some("separating measure".into());
    }
    let ints = detect_cut_intervals(xs, h, k, w).ok()?;
    let got: Vec<(f64, f64, usize)> = ints.iter().map(|c| (c.l, c.r, c.k_obs)).collect();
    if got != maximal_cut_intervals(xs, h, k) {
        return Some(format!("cut intervals {got:?}"));
    }
    if ints.iter().any(|c| c.status.is_confirmed() != (max >= c.r + w)) {
        return Some("cut interval status".into());
    }
    None
}
