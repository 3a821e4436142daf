//! File formats.
//!
//! Binary trajectories: `b"CUTL"`, version `u16`, dimension `u16`, point
//! count `u64`, then `count · dimension` little-endian `f64` coordinates.
//! CSV trajectories have header `n,x` (scalar) or `n,x1,…,xd`.

use std::io::{Read, Write};

use serde::Serialize;

use crate::cuts::{ConfirmationStatus, CutReport};
use crate::error::{Error, Result};
use crate::hitting::EscapeEstimate;
use crate::lyapunov::DriftRow;
use crate::trajectory::{ScalarTrajectory, VectorTrajectory};

pub const MAGIC: &[u8; 4] = b"CUTL";
pub const VERSION: u16 = 1;

/// A trajectory of either kind, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Scalar(ScalarTrajectory),
    Vector(VectorTrajectory),
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        match self {
            Trajectory::Scalar(_) => 1,
            Trajectory::Vector(v) => v.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Trajectory::Scalar(s) => s.len(),
            Trajectory::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coords(&self) -> &[f64] {
        match self {
            Trajectory::Scalar(s) => s.positions(),
            Trajectory::Vector(v) => v.coords(),
        }
    }

    /// The scalar path itself, or the norms of a vector path.
    pub fn scalar(&self) -> ScalarTrajectory {
        match self {
            Trajectory::Scalar(s) => s.clone(),
            Trajectory::Vector(v) => v.norms(),
        }
    }

    fn from_parts(dim: usize, coords: Vec<f64>, spec_id: String) -> Result<Self> {
        if dim == 1 {
            Ok(Trajectory::Scalar(ScalarTrajectory::from_positions(coords, spec_id)?))
        } else {
            Ok(Trajectory::Vector(VectorTrajectory::from_coords(dim, coords, spec_id)?))
        }
    }
}

impl From<ScalarTrajectory> for Trajectory {
    fn from(t: ScalarTrajectory) -> Self {
        Trajectory::Scalar(t)
    }
}

impl From<VectorTrajectory> for Trajectory {
    fn from(t: VectorTrajectory) -> Self {
        Trajectory::Vector(t)
    }
}

pub fn write_binary<W: Write>(t: &Trajectory, mut w: W) -> Result<()> {
    let dim = u16::try_from(t.dim()).map_err(|_| Error::Format("dimension exceeds u16".into()))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&dim.to_le_bytes())?;
    w.write_all(&(t.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(t.coords().len() * 8);
    for c in t.coords() {
        buf.extend_from_slice(&c.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Trajectory> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head).map_err(|_| Error::Format("truncated header".into()))?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([head[4], head[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u16::from_le_bytes([head[6], head[7]]) as usize;
    let count = u64::from_le_bytes(head[8..16].try_into().unwrap());
    if dim == 0 {
        return Err(Error::Format("zero dimension".into()));
    }
    let n = (count as usize)
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| Error::Format("size overflow".into()))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != n {
        return Err(Error::Format(format!("expected {n} payload bytes, found {}", body.len())));
    }
    let coords = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    Trajectory::from_parts(dim, coords, "file".into())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_csv<W: Write>(t: &Trajectory, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let d = t.dim();
    let mut header = vec!["n".to_string()];
    if d == 1 {
        header.push("x".into());
    } else {
        header.extend((1..=d).map(|i| format!("x{i}")));
    }
    out.write_record(&header).map_err(csv_err)?;
    for (n, p) in t.coords().chunks_exact(d).enumerate() {
        let mut rec = vec![n.to_string()];
        rec.extend(p.iter().map(|c| c.to_string()));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Trajectory> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    let d = header.len().saturating_sub(1);
    if d == 0 || &header[0] != "n" {
        return Err(Error::Format("header must start with n".into()));
    }
    let mut coords = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let n: usize = rec[0].trim().parse().map_err(|_| Error::Format(format!("bad index on row {i}")))?;
        if n != i {
            return Err(Error::Format(format!("row {i} has index {n}")));
        }
        for f in rec.iter().skip(1) {
            coords.push(f.trim().parse::<f64>().map_err(|_| Error::Format(format!("bad number {f:?}")))?);
        }
    }
    Trajectory::from_parts(d, coords, "file".into())
}

#[derive(Serialize)]
struct PointJson {
    x: f64,
    n0: usize,
    status: ConfirmationStatus,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    horizon: usize,
    window: f64,
    cutpoints: Vec<PointJson>,
    strong_cutpoints: Vec<PointJson>,
    separating_set: &'a crate::cuts::SeparatingSet,
    separating_measure: f64,
    confirmed_separating_measure: f64,
    cut_times: &'a [crate::cuts::CutTime],
}

pub fn report_json(r: &CutReport) -> Result<String> {
    let pt = |c: &crate::cuts::Cutpoint| PointJson {
        x: c.x,
        n0: c.n0,
        status: c.status,
    };
    let j = ReportJson {
        horizon: r.horizon,
        window: r.window,
        cutpoints: r.cutpoints.iter().map(pt).collect(),
        strong_cutpoints: r.strong_cutpoints().map(pt).collect(),
        separating_set: &r.separating_set,
        separating_measure: r.separating_set.candidate_measure(),
        confirmed_separating_measure: r.separating_set.confirmed_measure(),
        cut_times: &r.cut_times,
    };
    Ok(serde_json::to_string_pretty(&j)?)
}

/// `x,n0,strong,status` per cutpoint.
pub fn report_csv(r: &CutReport) -> String {
    let mut s = String::from("x,n0,strong,status\n");
    for c in &r.cutpoints {
        s.push_str(&format!("{},{},{},{}\n", c.x, c.n0, c.strong, c.status.as_str()));
    }
    s
}

/// `x,y,estimate,ci,escapes,returns,truncations`; `ci` is the 95% half-width.
pub fn hitting_csv(rows: &[(f64, f64, EscapeEstimate)]) -> String {
    let mut s = String::from("x,y,estimate,ci,escapes,returns,truncations\n");
    for (x, y, e) in rows {
        s.push_str(&format!(
            "{x},{y},{},{},{},{},{}\n",
            e.estimate, e.half_width, e.escapes, e.returns, e.truncations
        ));
    }
    s
}

/// `x,param,exact,pred_lo,pred_hi`.
pub fn drift_csv(rows: &[DriftRow]) -> String {
    let mut s = String::from("x,param,exact,pred_lo,pred_hi\n");
    for r in rows {
        s.push_str(&format!("{},{},{:e},{:e},{:e}\n", r.x, r.param, r.exact, r.pred_lo, r.pred_hi));
    }
    s
}
