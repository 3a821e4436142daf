//! Replica experiments over the cut structure. Each run reduces to a table
//! with one row per checkpoint, plus fits and a config echo.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cuts::{detect_ax_events, detect_cut_annuli, interval_is_cut, AxParams, ConfirmationStatus, Scanner};
use crate::error::{invalid, Error, Result};
use crate::generators::{BirthDeath, GeneratorConfig, ScalarSpec, Spec, VectorSpec};
use crate::moments::verify_ellipticity;
use crate::profile::RegimeTag;
use crate::rng::StreamId;
use crate::skeleton::CutSkeleton;
use crate::stats::{binomial_interval, cochran_armitage_decreasing, fit_log_growth, Fit, GrowthModel, Moments, TrendTest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorParams {
    #[serde(default = "one_f64")]
    pub h: f64,
    #[serde(default = "one_usize")]
    pub k: usize,
    /// Ellipticity constant; estimated from the generator when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Climb length; the smallest admissible value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    /// Confirmation window; `50 B` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            h: 1.0,
            k: 1,
            epsilon: None,
            ell: None,
            window: None,
        }
    }
}

fn one_f64() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

/// How paths are produced.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Step-by-step simulation over a finite horizon.
    #[default]
    Steps,
    /// Exact infinite-horizon cut structure, birth–death chains only.
    Skeleton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Start point; `0` or the origin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub detector: DetectorParams,
    #[serde(default = "dyadic_checkpoints")]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub engine: Engine,
    /// Levels (or radii) below this are excluded from trend tests and
    /// "beyond burn-in" counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    #[serde(default)]
    pub exploratory: bool,
    /// Output directory for tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_replicas() -> u64 {
    200
}

fn default_steps() -> usize {
    1_000_000
}

/// `2^7, …, 2^17`.
pub fn dyadic_checkpoints() -> Vec<f64> {
    (7..=17).map(|j| 2f64.powi(j)).collect()
}

impl ExperimentConfig {
    pub fn new(generator: GeneratorConfig) -> Self {
        ExperimentConfig {
            generator,
            replicas: default_replicas(),
            steps: default_steps(),
            seed: 0,
            start: None,
            detector: DetectorParams::default(),
            checkpoints: dyadic_checkpoints(),
            engine: Engine::Steps,
            burn_in: None,
            exploratory: false,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 || self.steps == 0 {
            return Err(invalid("replicas and steps must be positive"));
        }
        if self.checkpoints.is_empty() {
            return Err(invalid("at least one checkpoint is needed"));
        }
        if self.checkpoints.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(invalid("checkpoints must be positive and finite"));
        }
        if self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("checkpoints must be strictly increasing"));
        }
        if !(self.detector.h > 0.0) {
            return Err(invalid("h must be positive"));
        }
        if let Some(w) = self.detector.window {
            if !(w >= 0.0) {
                return Err(invalid("window must be nonnegative"));
            }
        }
        Ok(())
    }

    fn window(&self, jump_bound: f64) -> f64 {
        self.detector.window.unwrap_or(50.0 * jump_bound)
    }

    fn stream(&self, r: u64) -> StreamId {
        StreamId::new(self.seed, r)
    }

    fn scalar_start(&self) -> Result<f64> {
        match self.start.as_deref() {
            None => Ok(0.0),
            Some([x]) => Ok(*x),
            Some(_) => Err(invalid("scalar start must have one coordinate")),
        }
    }

    fn scalar_spec(&self) -> Result<ScalarSpec> {
        match self.generator.build()? {
            Spec::Scalar(s) => Ok(s),
            Spec::Vector(v) => v.radial(),
        }
    }

    fn replicas_par<T: Send>(&self, f: impl Fn(StreamId) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.replicas).into_par_iter().map(|r| f(self.stream(r))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub spec_id: String,
    pub regime: RegimeTag,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fit: Option<Fit>,
    pub trend: Option<TrendTest>,
    pub summary: BTreeMap<String, f64>,
}

impl ExperimentResult {
    fn new(experiment: &str, spec_id: String, regime: RegimeTag, config: &ExperimentConfig, columns: &[&str]) -> Self {
        ExperimentResult {
            experiment: experiment.into(),
            spec_id,
            regime,
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fit: None,
            trend: None,
            summary: BTreeMap::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn summary_value(&self, key: &str) -> Option<f64> {
        self.summary.get(key).copied()
    }

    /// The table as CSV, one row per checkpoint.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Fit and summary values as `key,value` CSV.
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        let mut put = |k: &str, v: f64| s.push_str(&format!("{k},{v}\n"));
        if let Some(f) = &self.fit {
            put("fit_slope", f.slope);
            put("fit_intercept", f.intercept);
            put("fit_r2", f.r2);
            put("fit_slope_lo", f.slope_ci.0);
            put("fit_slope_hi", f.slope_ci.1);
            put("fit_points", f.n as f64);
        }
        if let Some(t) = &self.trend {
            put("trend_z", t.z);
            put("trend_p", t.p_value);
        }
        for (k, v) in &self.summary {
            put(k, *v);
        }
        s
    }
}

fn mean_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let m: Moments = values.collect();
    (m.mean, if m.n > 1 { m.se() } else { 0.0 })
}

fn refuse_recurrent(cfg: &ExperimentConfig, regime: RegimeTag) -> Result<()> {
    if regime == RegimeTag::Recurrent && !cfg.exploratory {
        return Err(Error::Refused(
            "generator is recurrent, so the cutpoint count is a.s. finite; set exploratory to run anyway".into(),
        ));
    }
    Ok(())
}

fn skeleton_bd(cfg: &ExperimentConfig, spec: &ScalarSpec) -> Result<BirthDeath> {
    spec.as_birth_death()
        .cloned()
        .ok_or_else(|| invalid(format!("the skeleton engine needs a birth-death chain, got {}", spec.spec_id())))
        .and_then(|bd| {
            if cfg.scalar_start()? != 0.0 {
                return Err(invalid("the skeleton engine starts at 0"));
            }
            Ok(bd)
        })
}

/// Per-checkpoint counts for one replica of the growth experiment.
struct GrowthCounts {
    strong_confirmed: Vec<u32>,
    strong_candidate: Vec<u32>,
    intervals_confirmed: Vec<u32>,
    intervals_candidate: Vec<u32>,
    covered: Vec<bool>,
}

fn count_upto(sorted: &[f64], x: f64) -> u32 {
    sorted.partition_point(|&v| v <= x) as u32
}

/// Mean number of strong cutpoints in `[0, x]` and of `(h, k)` cut intervals
/// inside `[0, x]`, with a fit of the confirmed mean against `log x` over the
/// checkpoints that at least 90% of replicas clear by `W`.
pub fn run_cutpoint_growth(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let spec = cfg.scalar_spec()?;
    refuse_recurrent(cfg, spec.regime())?;
    let w = cfg.window(spec.jump_bound());
    let (h, k) = (cfg.detector.h, cfg.detector.k);
    let cps = &cfg.checkpoints;
    let per: Vec<GrowthCounts> = match cfg.engine {
        Engine::Steps => {
            let x0 = cfg.scalar_start()?;
            cfg.replicas_par(|id| {
                let traj = spec.simulate(x0, cfg.steps, id)?;
                let xs = traj.positions();
                let scan = Scanner::new(xs);
                let mut conf = Vec::new();
                let mut cand = Vec::new();
                for (n, &x) in xs.iter().enumerate() {
                    if scan.is_strong(xs, n) {
                        cand.push(x);
                        if ConfirmationStatus::from_clearance(scan.max(), x, w).is_confirmed() {
                            conf.push(x);
                        }
                    }
                }
                conf.sort_by(f64::total_cmp);
                cand.sort_by(f64::total_cmp);
                let ints = scan.cut_intervals(xs, h, k, w);
                let mut int_conf: Vec<f64> = ints.iter().filter(|c| c.status.is_confirmed()).map(|c| c.r).collect();
                let mut int_cand: Vec<f64> = ints.iter().map(|c| c.r).collect();
                int_conf.sort_by(f64::total_cmp);
                int_cand.sort_by(f64::total_cmp);
                Ok(GrowthCounts {
                    strong_confirmed: cps.iter().map(|&x| count_upto(&conf, x)).collect(),
                    strong_candidate: cps.iter().map(|&x| count_upto(&cand, x)).collect(),
                    intervals_confirmed: cps.iter().map(|&x| count_upto(&int_conf, x)).collect(),
                    intervals_candidate: cps.iter().map(|&x| count_upto(&int_cand, x)).collect(),
                    covered: cps.iter().map(|&x| scan.max() - w >= x).collect(),
                })
            })?
        }
        Engine::Skeleton => {
            let bd = skeleton_bd(cfg, &spec)?;
            let top = cps.last().unwrap().ceil() as u64;
            let skel = CutSkeleton::new(&bd, top + 2);
            let stay = skel.stay_probability(top + 1)?;
            cfg.replicas_par(|id| {
                let block = skel.sample_block_given(0, top, stay, &mut id.rng())?;
                let strong: Vec<f64> = block.strong_cutpoints().map(|c| c as f64).collect();
                let ends = level_cut_intervals(&block.strong, h, k);
                let counts = |v: &[f64]| cps.iter().map(|&x| count_upto(v, x)).collect::<Vec<_>>();
                Ok(GrowthCounts {
                    strong_confirmed: counts(&strong),
                    strong_candidate: counts(&strong),
                    intervals_confirmed: counts(&ends),
                    intervals_candidate: counts(&ends),
                    covered: vec![true; cps.len()],
                })
            })?
        }
    };

    let mut res = ExperimentResult::new(
        "cutpoint_growth",
        spec.spec_id(),
        spec.regime(),
        cfg,
        &[
            "x",
            "mean_strong_confirmed",
            "se_strong_confirmed",
            "mean_strong_candidate",
            "mean_intervals_confirmed",
            "mean_intervals_candidate",
            "frac_zero_strong_confirmed",
            "frac_positive_intervals_confirmed",
            "coverage",
        ],
    );
    let r = cfg.replicas as f64;
    let mut fit_points = Vec::new();
    for (i, &x) in cps.iter().enumerate() {
        let (msc, se) = mean_se(per.iter().map(|p| p.strong_confirmed[i] as f64));
        let (mca, _) = mean_se(per.iter().map(|p| p.strong_candidate[i] as f64));
        let (mic, _) = mean_se(per.iter().map(|p| p.intervals_confirmed[i] as f64));
        let (mia, _) = mean_se(per.iter().map(|p| p.intervals_candidate[i] as f64));
        let zero = per.iter().filter(|p| p.strong_confirmed[i] == 0).count() as f64 / r;
        let pos = per.iter().filter(|p| p.intervals_confirmed[i] > 0).count() as f64 / r;
        let cov = per.iter().filter(|p| p.covered[i]).count() as f64 / r;
        if cov >= 0.9 {
            fit_points.push((x, msc));
        }
        res.rows.push(vec![x, msc, se, mca, mic, mia, zero, pos, cov]);
    }
    res.fit = fit_log_growth(&fit_points, GrowthModel::Log).ok();
    res.summary.insert("window".into(), w);
    res.summary.insert("fit_candidates".into(), fit_points.len() as f64);
    Ok(res)
}

/// Right ends of the `(h, k)` cut intervals of a lattice path from its
/// strong-cutpoint flags on levels `0..`: maximal runs of strong levels
/// between non-strong ones, bounded below by 0 as in the path detector.
fn level_cut_intervals(strong: &[bool], h: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut left = 0usize;
    let mut run = 0usize;
    for (level, &s) in strong.iter().enumerate() {
        if s {
            if level > left {
                run += 1;
            }
            continue;
        }
        if level > left && (level - left) as f64 >= h && run >= k {
            out.push(level as f64);
        }
        left = level;
        run = 0;
    }
    out
}

/// Per-block statistics for one replica.
struct BlockStats {
    hit: Vec<bool>,
    measure: Vec<f64>,
    covered: Vec<bool>,
}

/// For each block `x`: the frequency of a cutpoint in `[x, 2x]`, the mean
/// separating-set measure in `[x/2, 2x]` and its mean on that event.
///
/// A one-sided Cochran–Armitage test for a decreasing frequency runs over the
/// blocks at or above the burn-in, and the frequency is fitted against
/// `1/log² x`.
pub fn run_dyadic_block_stats(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let spec = cfg.scalar_spec()?;
    let w = cfg.window(spec.jump_bound());
    let cps = &cfg.checkpoints;
    let per: Vec<BlockStats> = match cfg.engine {
        Engine::Steps => {
            let x0 = cfg.scalar_start()?;
            cfg.replicas_par(|id| {
                let traj = spec.simulate(x0, cfg.steps, id)?;
                let xs = traj.positions();
                let scan = Scanner::new(xs);
                let mut cuts: Vec<f64> = (0..xs.len())
                    .filter(|&n| scan.is_cut(xs, n) && scan.max() >= xs[n] + w)
                    .map(|n| xs[n])
                    .collect();
                cuts.sort_by(f64::total_cmp);
                let sep = scan.separating_set(w).confirmed_intervals();
                Ok(BlockStats {
                    hit: cps
                        .iter()
                        .map(|&x| {
                            let i = cuts.partition_point(|&c| c < x);
                            i < cuts.len() && cuts[i] <= 2.0 * x
                        })
                        .collect(),
                    measure: cps.iter().map(|&x| sep.iter().map(|s| s.measure_in(x / 2.0, 2.0 * x)).sum()).collect(),
                    covered: cps.iter().map(|&x| scan.max() - w >= 2.0 * x).collect(),
                })
            })?
        }
        Engine::Skeleton => {
            let bd = skeleton_bd(cfg, &spec)?;
            let top = (2.0 * cps.last().unwrap()).ceil() as u64;
            let skel = CutSkeleton::new(&bd, top + 2);
            let blocks: Vec<(u64, u64, f64)> = cps
                .iter()
                .map(|&x| {
                    let (lo, hi) = ((x / 2.0).floor() as u64, (2.0 * x).ceil() as u64);
                    Ok((lo, hi, skel.stay_probability(hi + 1)?))
                })
                .collect::<Result<_>>()?;
            cfg.replicas_par(|id| {
                let mut st = BlockStats {
                    hit: Vec::new(),
                    measure: Vec::new(),
                    covered: vec![true; cps.len()],
                };
                for (i, (&x, &(lo, hi, stay))) in cps.iter().zip(&blocks).enumerate() {
                    let b = skel.sample_block_given(lo, hi, stay, &mut id.child(i as u64).rng())?;
                    st.hit.push(b.has_cut_in(x, 2.0 * x));
                    st.measure.push(b.separating_measure(x / 2.0, 2.0 * x));
                }
                Ok(st)
            })?
        }
    };

    let mut res = ExperimentResult::new(
        "dyadic_block_stats",
        spec.spec_id(),
        spec.regime(),
        cfg,
        &[
            "x", "log2_x", "hits", "replicas", "p_hat", "se", "ci_lo", "ci_hi", "mean_m", "se_m", "mean_m_on_e", "m_log_x", "coverage",
        ],
    );
    let n = cfg.replicas;
    let burn = cfg.burn_in.unwrap_or(0.0);
    let mut groups = Vec::new();
    let mut scores = Vec::new();
    let mut fit_points = Vec::new();
    let mut envelope = 0.0f64;
    let mut p_min = f64::INFINITY;
    for (i, &x) in cps.iter().enumerate() {
        let hits = per.iter().filter(|p| p.hit[i]).count() as u64;
        let est = binomial_interval(hits, n);
        let (mm, sem) = mean_se(per.iter().map(|p| p.measure[i]));
        let (mme, _) = mean_se(per.iter().map(|p| if p.hit[i] { p.measure[i] } else { 0.0 }));
        let cov = per.iter().filter(|p| p.covered[i]).count() as f64 / n as f64;
        let lx = x.ln();
        res.rows.push(vec![
            x,
            x.log2(),
            hits as f64,
            n as f64,
            est.p,
            est.se,
            (est.p - est.half_width).max(0.0),
            (est.p + est.half_width).min(1.0),
            mm,
            sem,
            mme,
            mm * lx,
            cov,
        ]);
        if x >= burn {
            groups.push((hits, n));
            scores.push(x.log2());
            if x > 1.0 {
                fit_points.push((x, est.p));
            }
            if x > 1.0 {
                envelope = envelope.max(mm * lx);
            }
            p_min = p_min.min(est.p);
        }
    }
    if groups.len() >= 2 {
        res.trend = Some(cochran_armitage_decreasing(&groups, &scores)?);
    }
    res.fit = fit_log_growth(&fit_points, GrowthModel::ReciprocalLogSq).ok();
    res.summary.insert("window".into(), w);
    res.summary.insert("envelope_c".into(), envelope);
    res.summary.insert("p_hat_min".into(), p_min);
    Ok(res)
}

/// Grid, parameters and scaling used by [`run_ax_frequency`].
pub fn ax_params(cfg: &ExperimentConfig, spec: &ScalarSpec) -> Result<AxParams> {
    let b = spec.jump_bound();
    let (h, k) = (cfg.detector.h, cfg.detector.k);
    let epsilon = match cfg.detector.epsilon {
        Some(e) => e,
        None => verify_ellipticity(spec, &cfg.checkpoints, 10_000, cfg.seed)?.epsilon,
    };
    let ell = cfg.detector.ell.unwrap_or_else(|| AxParams::minimal_ell(epsilon, h, k, b));
    AxParams::new(epsilon, ell, 0, h, k, b)
}

/// Frequency of the fast-climb event at the levels `q⌈c/q⌉` for checkpoints
/// `c`, scaled by `x` (or `x log x` in the critical window), with the spread
/// of the scaled values around their median.
pub fn run_ax_frequency(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let spec = cfg.scalar_spec()?;
    let params = ax_params(cfg, &spec)?;
    let w = cfg.window(spec.jump_bound());
    let x0 = cfg.scalar_start()?;
    let q = params.q();
    let grid: Vec<f64> = cfg.checkpoints.iter().map(|&c| q * (c / q).ceil()).collect();
    if grid.windows(2).any(|g| g[1] <= g[0]) {
        return Err(invalid(format!("checkpoints collapse on the spacing q = {q}")));
    }
    let critical = spec.regime() == RegimeTag::CriticalWindow;
    // (confirmed, any occurrence, unresolved) per grid level, and lemma violations
    let per: Vec<(Vec<(bool, bool, bool)>, u64)> = cfg.replicas_par(|id| {
        let traj = spec.simulate(x0, cfg.steps, id)?;
        let xs = traj.positions();
        let flags = detect_ax_events(xs, &params, &grid, w)?;
        let bad = flags
            .iter()
            .filter(|f| f.confirmed() && !interval_is_cut(xs, f.x, &params))
            .count() as u64;
        let out = flags
            .iter()
            .map(|f| (f.confirmed(), f.occurs(), f.outcome == crate::cuts::AxOutcome::Unresolved))
            .collect();
        Ok((out, bad))
    })?;

    let mut res = ExperimentResult::new(
        "ax_frequency",
        spec.spec_id(),
        spec.regime(),
        cfg,
        &["x", "occurs_confirmed", "occurs_candidate", "unresolved", "replicas", "p_hat", "se", "p_hat_candidate", "scaled"],
    );
    let n = cfg.replicas;
    let mut scaled = Vec::new();
    for (i, &x) in grid.iter().enumerate() {
        let conf = per.iter().filter(|p| p.0[i].0).count() as u64;
        let cand = per.iter().filter(|p| p.0[i].1).count() as u64;
        let unres = per.iter().filter(|p| p.0[i].2).count() as u64;
        let est = binomial_interval(conf, n);
        let s = if critical { x * x.ln() * est.p } else { x * est.p };
        scaled.push((x, s));
        res.rows.push(vec![x, conf as f64, cand as f64, unres as f64, n as f64, est.p, est.se, cand as f64 / n as f64, s]);
    }
    let mut sorted: Vec<f64> = scaled.iter().map(|s| s.1).collect();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let stable = median > 0.0 && lo >= median / 3.0 && hi <= 3.0 * median;
    res.fit = fit_log_growth(&scaled, GrowthModel::Log).ok();
    res.summary.insert("epsilon".into(), params.epsilon);
    res.summary.insert("ell".into(), params.ell as f64);
    res.summary.insert("q".into(), q);
    res.summary.insert("window".into(), w);
    res.summary.insert("scaled_median".into(), median);
    res.summary.insert("scaled_min_ratio".into(), if median > 0.0 { lo / median } else { 0.0 });
    res.summary.insert("scaled_max_ratio".into(), if median > 0.0 { hi / median } else { f64::INFINITY });
    res.summary.insert("window_stable".into(), if stable { 1.0 } else { 0.0 });
    res.summary.insert("lemma_violations".into(), per.iter().map(|p| p.1).sum::<u64>() as f64);
    Ok(res)
}

/// Confirmed `(h, k)` cut annuli per checkpoint radius (inner radius at most
/// the checkpoint), and the fraction of replicas with none beyond the burn-in
/// radius (default 100).
pub fn run_annuli_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let spec: VectorSpec = match cfg.generator.build()? {
        Spec::Vector(v) => v,
        Spec::Scalar(s) => return Err(invalid(format!("annuli need a vector generator, got {}", s.spec_id()))),
    };
    if spec.dim() < 2 {
        return Err(invalid("annuli need d >= 2"));
    }
    let regime = spec.regime();
    if regime == RegimeTag::Unclassified && !cfg.exploratory {
        return Err(Error::Refused("generator is unclassified (2U = V); set exploratory to run anyway".into()));
    }
    let w = cfg.window(spec.jump_bound());
    let (h, k) = (cfg.detector.h, cfg.detector.k);
    let burn = cfg.burn_in.unwrap_or(100.0);
    let x0 = match &cfg.start {
        Some(p) if p.len() == spec.dim() => p.clone(),
        Some(_) => return Err(invalid("start must have the generator's dimension")),
        None => vec![0.0; spec.dim()],
    };
    let cps = &cfg.checkpoints;
    // (counts per checkpoint, any confirmed annulus beyond burn-in, max norm)
    let per: Vec<(Vec<u32>, bool, f64)> = cfg.replicas_par(|id| {
        let v = spec.simulate(&x0, cfg.steps, id)?;
        let mut inner: Vec<f64> = detect_cut_annuli(&v, h, k, w)?
            .iter()
            .filter(|a| a.status.is_confirmed())
            .map(|a| a.inner)
            .collect();
        inner.sort_by(f64::total_cmp);
        let max = v.norms().max();
        let beyond = inner.last().is_some_and(|&l| l >= burn);
        Ok((cps.iter().map(|&x| count_upto(&inner, x)).collect(), beyond, max))
    })?;

    let mut res = ExperimentResult::new(
        "annuli",
        spec.spec_id(),
        regime,
        cfg,
        &["radius", "mean_count", "se_count", "frac_positive", "coverage"],
    );
    let r = cfg.replicas as f64;
    let mut fit_points = Vec::new();
    for (i, &x) in cps.iter().enumerate() {
        let (m, se) = mean_se(per.iter().map(|p| p.0[i] as f64));
        let pos = per.iter().filter(|p| p.0[i] > 0).count() as f64 / r;
        let cov = per.iter().filter(|p| p.2 - w >= x).count() as f64 / r;
        if cov >= 0.9 {
            fit_points.push((x, m));
        }
        res.rows.push(vec![x, m, se, pos, cov]);
    }
    res.fit = fit_log_growth(&fit_points, GrowthModel::Log).ok();
    res.summary.insert("window".into(), w);
    res.summary.insert("burn_in".into(), burn);
    res.summary.insert(
        "frac_zero_beyond_burn_in".into(),
        per.iter().filter(|p| !p.1).count() as f64 / r,
    );
    let (mmax, _) = mean_se(per.iter().map(|p| p.2));
    res.summary.insert("mean_max_norm".into(), mmax);
    Ok(res)
}

/// Dispatches on an experiment name.
pub fn run_named(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    match name {
        "cutpoint_growth" | "growth" => run_cutpoint_growth(cfg),
        "dyadic_block_stats" | "blocks" => run_dyadic_block_stats(cfg),
        "ax_frequency" | "ax" => run_ax_frequency(cfg),
        "annuli" => run_annuli_experiment(cfg),
        other => Err(invalid(format!("unknown experiment {other:?}"))),
    }
}
