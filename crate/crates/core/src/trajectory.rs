use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A realized path `X_0..X_N` on the half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarTrajectory {
    positions: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    pub spec_id: String,
}

impl ScalarTrajectory {
    /// Wraps externally produced positions, checking they are finite and nonnegative.
    pub fn from_positions(positions: Vec<f64>, spec_id: impl Into<String>) -> Result<Self> {
        Self::with_meta(positions, 0, 0, spec_id.into())
    }

    pub(crate) fn with_meta(positions: Vec<f64>, seed: u64, stream: u64, spec_id: String) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if let Some((n, &x)) = positions.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::InvalidParameter(format!("position {x} at step {n} is not a finite nonnegative real")));
        }
        Ok(Self {
            positions,
            seed,
            stream,
            spec_id,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn into_positions(self) -> Vec<f64> {
        self.positions
    }

    /// Horizon `N` (number of increments).
    pub fn horizon(&self) -> usize {
        self.positions.len() - 1
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.positions.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max(&self) -> f64 {
        self.positions.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First step whose increment exceeds `bound`, if any.
    pub fn jump_violation(&self, bound: f64) -> Option<usize> {
        let tol = bound * 1e-12;
        self.positions.windows(2).position(|w| (w[1] - w[0]).abs() > bound + tol)
    }
}

/// A realized path in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorTrajectory {
    dim: usize,
    coords: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    pub spec_id: String,
}

impl VectorTrajectory {
    pub fn from_coords(dim: usize, coords: Vec<f64>, spec_id: impl Into<String>) -> Result<Self> {
        Self::with_meta(dim, coords, 0, 0, spec_id.into())
    }

    pub(crate) fn with_meta(dim: usize, coords: Vec<f64>, seed: u64, stream: u64, spec_id: String) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if coords.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        Ok(Self {
            dim,
            coords,
            seed,
            stream,
            spec_id,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> usize {
        self.len() - 1
    }

    pub fn point(&self, n: usize) -> &[f64] {
        &self.coords[n * self.dim..(n + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// The radial process `‖ξ_n‖`.
    pub fn norms(&self) -> ScalarTrajectory {
        let positions = self.points().map(norm).collect();
        ScalarTrajectory {
            positions,
            seed: self.seed,
            stream: self.stream,
            spec_id: format!("norm({})", self.spec_id),
        }
    }

    pub fn jump_violation(&self, bound: f64) -> Option<usize> {
        let tol = bound * 1e-12;
        (0..self.horizon()).find(|&n| {
            let d: f64 = self
                .point(n)
                .iter()
                .zip(self.point(n + 1))
                .map(|(a, b)| (b - a) * (b - a))
                .sum();
            d.sqrt() > bound + tol
        })
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}
