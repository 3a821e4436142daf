use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use cutwalk::cuts::{detect_cut_annuli, detect_cut_intervals, lemma_checks, CutReport};
use cutwalk::experiments::{run_named, ExperimentConfig};
use cutwalk::generators::{GeneratorConfig, Spec};
use cutwalk::hitting::{mc_escape_forever, mc_race, EscapeOptions, RaceEngine};
use cutwalk::io::{hitting_csv, read_binary, read_csv, report_csv, report_json, write_csv, Trajectory};
use cutwalk::lyapunov::{default_param_grid, drift_sweep, log_grid, LyapunovFn};
use cutwalk::profile::classify;
use cutwalk::rng::StreamId;

#[derive(Parser)]
#[command(name = "cutwalk", version, about = "Cutpoints, cut times and hitting estimates for random walks")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for tables and the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and write them as CSV.
    Simulate(Common),
    /// Run the cut detectors on a trajectory file (CSV or binary).
    Detect {
        /// Trajectory file; `.bin` is read as binary, anything else as CSV.
        #[arg(long)]
        input: PathBuf,
        /// Confirmation window; defaults to 50 times the largest observed jump.
        #[arg(long)]
        window: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate race and escape probabilities.
    Hit(Common),
    /// Run a named experiment: growth, blocks, ax or annuli.
    Experiment {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Tag the regime of a generator from its moment profile.
    Classify(Common),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    generator: GeneratorConfig,
    #[serde(default = "default_sim_steps")]
    steps: usize,
    #[serde(default = "one")]
    replicas: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    start: Option<Vec<f64>>,
}

fn default_sim_steps() -> usize {
    10_000
}

fn one() -> u64 {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HitConfig {
    generator: GeneratorConfig,
    /// Lower levels `x`.
    xs: Vec<f64>,
    /// Race widths `y`; empty means escape to infinity through the surrogate.
    #[serde(default)]
    ys: Vec<f64>,
    /// Start at `x + delta`.
    #[serde(default = "unit")]
    delta: f64,
    #[serde(default = "default_hit_replicas")]
    replicas: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    engine: RaceEngine,
    #[serde(default)]
    escape: Option<EscapeOptions>,
}

fn unit() -> f64 {
    1.0
}

fn default_hit_replicas() -> u64 {
    10_000
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, Value)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let echo: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let cfg = serde_json::from_value(echo.clone()).with_context(|| format!("invalid config {}", path.display()))?;
    Ok((cfg, echo))
}

/// Collects the tables of one command and writes them with a manifest.
struct Outputs {
    dir: Option<PathBuf>,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: Option<PathBuf>) -> Self {
        Outputs { dir, files: Vec::new() }
    }

    fn add(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), body));
    }

    fn finish(self, command: &str, config: Value, started: Instant) -> Result<()> {
        let Some(dir) = self.dir else {
            for (name, body) in &self.files {
                println!("# {name}");
                print!("{body}");
            }
            return Ok(());
        };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, body) in &self.files {
            fs::write(dir.join(name), body).with_context(|| format!("writing {name}"))?;
        }
        let manifest = json!({
            "command": command,
            "config": config,
            "version": env!("CARGO_PKG_VERSION"),
            "outputs": self.files.iter().map(|f| &f.0).collect::<Vec<_>>(),
            "started_unix": SystemTime::now().duration_since(UNIX_EPOCH)?.as_secs_f64() - started.elapsed().as_secs_f64(),
            "wall_clock_seconds": started.elapsed().as_secs_f64(),
        });
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
        eprintln!("wrote {} file(s) and manifest.json to {}", self.files.len(), dir.display());
        Ok(())
    }
}

fn csv_string(t: &Trajectory) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(t, &mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn simulate(c: Common, started: Instant) -> Result<()> {
    let (mut cfg, mut echo): (SimulateConfig, Value) = read_config(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
        echo["seed"] = json!(s);
    }
    let spec = cfg.generator.build()?;
    let mut out = Outputs::new(c.out);
    for r in 0..cfg.replicas {
        let id = StreamId::new(cfg.seed, r);
        let t: Trajectory = match &spec {
            Spec::Scalar(s) => {
                let x0 = match cfg.start.as_deref() {
                    None => 0.0,
                    Some([x]) => *x,
                    Some(_) => bail!("scalar generators take a one-coordinate start"),
                };
                s.simulate(x0, cfg.steps, id)?.into()
            }
            Spec::Vector(v) => {
                let x0 = cfg.start.clone().unwrap_or_else(|| vec![0.0; v.dim()]);
                v.simulate(&x0, cfg.steps, id)?.into()
            }
        };
        out.add(format!("trajectory_{r}.csv"), csv_string(&t)?);
    }
    out.finish("simulate", echo, started)
}

fn detect(input: PathBuf, window: Option<f64>, h: f64, k: usize, dir: Option<PathBuf>, started: Instant) -> Result<()> {
    let file = fs::File::open(&input).with_context(|| format!("opening {}", input.display()))?;
    let t = if input.extension().is_some_and(|e| e == "bin") {
        read_binary(std::io::BufReader::new(file))?
    } else {
        read_csv(file)?
    };
    let scalar = t.scalar();
    let xs = scalar.positions();
    let jump = scalar.increments().fold(0.0f64, |m, d| m.max(d.abs()));
    let w = window.unwrap_or(50.0 * jump.max(f64::MIN_POSITIVE));
    let report = CutReport::new(xs, w)?;
    let mut out = Outputs::new(dir);
    out.add("cutpoints.csv", report_csv(&report));
    out.add("report.json", report_json(&report)?);
    let mut iv = String::from("l,r,k_obs,status\n");
    for c in detect_cut_intervals(xs, h, k, w)? {
        iv.push_str(&format!("{},{},{},{}\n", c.l, c.r, c.k_obs, c.status.as_str()));
    }
    out.add("cut_intervals.csv", iv);
    if let Trajectory::Vector(v) = &t {
        let mut an = String::from("inner,outer,visits,status\n");
        for a in detect_cut_annuli(v, h, k, w)? {
            an.push_str(&format!("{},{},{},{}\n", a.inner, a.outer, a.visits, a.status.as_str()));
        }
        out.add("cut_annuli.csv", an);
    }
    let l = lemma_checks(xs, w);
    let echo = json!({ "input": input, "window": w, "h": h, "k": k, "lemma_checks": l });
    out.finish("detect", echo, started)
}

fn hit(c: Common, started: Instant) -> Result<()> {
    let (mut cfg, mut echo): (HitConfig, Value) = read_config(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
        echo["seed"] = json!(s);
    }
    let spec = match cfg.generator.build()? {
        Spec::Scalar(s) => s,
        Spec::Vector(v) => v.radial()?,
    };
    let mut rows = Vec::new();
    let mut stream = cfg.seed;
    for &x in &cfg.xs {
        let start = x + cfg.delta;
        if cfg.ys.is_empty() {
            let opts = cfg.escape.unwrap_or(EscapeOptions {
                engine: cfg.engine,
                ..Default::default()
            });
            let e = mc_escape_forever(&spec, start, x, cfg.replicas, stream, opts)?;
            rows.push((x, e.y_cap, e.estimate));
        } else {
            for &y in &cfg.ys {
                rows.push((x, y, mc_race(&spec, start, x, y, cfg.replicas, stream, cfg.engine)?));
            }
        }
        // distinct levels draw from distinct seeds
        stream = stream.wrapping_add(0x9e37_79b9);
    }
    let mut out = Outputs::new(c.out);
    out.add("hitting.csv", hitting_csv(&rows));
    out.finish("hit", echo, started)
}

fn experiment(name: &str, c: Common, started: Instant) -> Result<()> {
    let (mut cfg, mut echo): (ExperimentConfig, Value) = read_config(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
        echo["seed"] = json!(s);
    }
    let dir = c.out.or_else(|| cfg.output.clone().map(PathBuf::from));
    let res = run_named(name, &cfg)?;
    let mut out = Outputs::new(dir);
    out.add(format!("{}.csv", res.experiment), res.to_csv());
    out.add(format!("{}_summary.csv", res.experiment), res.summary_csv());
    let extra = json!({ "fit": res.fit, "trend": res.trend, "spec_id": res.spec_id, "regime": res.regime });
    out.add(format!("{}_diagnostics.json", res.experiment), serde_json::to_string_pretty(&extra)?);
    echo["resolved"] = serde_json::to_value(&cfg)?;
    out.finish("experiment", echo, started)
}

fn classify_cmd(c: Common, started: Instant) -> Result<()> {
    let (gen, echo): (GeneratorConfig, Value) = read_config(&c.config)?;
    let spec = gen.build()?;
    let cls = classify(&spec.profile());
    let mut out = Outputs::new(c.out);
    let body = json!({ "spec_id": spec.spec_id(), "declared": spec.regime(), "classification": cls });
    out.add("classification.json", serde_json::to_string_pretty(&body)? + "\n");
    if let Spec::Scalar(s) = &spec {
        if s.lattice_spacing() == Some(1.0) {
            let xs: Vec<f64> = log_grid(10.0, 1e6, 11).into_iter().map(f64::round).collect();
            let funcs: Vec<LyapunovFn> = default_param_grid().into_iter().map(LyapunovFn::f).collect::<Result<_, _>>()?;
            out.add("drift.csv", cutwalk::io::drift_csv(&drift_sweep(s, &funcs, &xs)?));
        }
    }
    out.finish("classify", echo, started)
}

fn main() -> Result<()> {
    let started = Instant::now();
    match Cli::parse().cmd {
        Command::Simulate(c) => simulate(c, started),
        Command::Detect { input, window, h, k, out } => detect(input, window, h, k, out, started),
        Command::Hit(c) => hit(c, started),
        Command::Experiment { name, common } => experiment(&name, common, started),
        Command::Classify(c) => classify_cmd(c, started),
    }
}
