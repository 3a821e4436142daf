//! One-step transition laws and the simulation loop.

use rand::Rng;

use crate::error::{Error, Result};
use crate::profile::MomentProfile;
use crate::rng::StreamId;
use crate::trajectory::{ScalarTrajectory, VectorTrajectory};

/// Default cap on stored positions (coordinates for vector paths): 512 MiB of f64.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 26;

/// A Markov kernel on the half-line, possibly driven by a richer hidden state
/// (e.g. the lattice point behind a norm).
pub trait ScalarKernel: Send + Sync {
    type State: Clone + Send;

    fn spec_id(&self) -> String;
    fn profile(&self) -> MomentProfile;
    fn jump_bound(&self) -> f64;
    /// Lattice spacing if the state set is a lattice in `R_+`.
    fn lattice_spacing(&self) -> Option<f64> {
        None
    }
    fn init(&self, x0: f64) -> Result<Self::State>;
    fn position(&self, state: &Self::State) -> f64;
    fn step<R: Rng + ?Sized>(&self, state: &mut Self::State, rng: &mut R);
    /// The one-step law from `state` as `(next position, probability)` pairs.
    fn transitions(&self, state: &Self::State) -> Result<Vec<(f64, f64)>>;
}

pub trait VectorKernel: Send + Sync {
    type State: Clone + Send;

    fn spec_id(&self) -> String;
    fn dim(&self) -> usize;
    /// Moment profile of the norm process.
    fn profile(&self) -> MomentProfile;
    fn jump_bound(&self) -> f64;
    fn init(&self, x0: &[f64]) -> Result<Self::State>;
    fn write_point(&self, state: &Self::State, out: &mut [f64]);
    fn norm(&self, state: &Self::State) -> f64;
    fn step<R: Rng + ?Sized>(&self, state: &mut Self::State, rng: &mut R);
}

fn check_budget(requested: usize, budget: usize) -> Result<()> {
    if requested > budget {
        return Err(Error::MemoryBudget { requested, budget });
    }
    Ok(())
}

/// Runs `n_steps` steps from `x0` on stream `id`, storing every position.
pub fn simulate_scalar<K: ScalarKernel>(
    kernel: &K,
    x0: f64,
    n_steps: usize,
    id: StreamId,
    budget: usize,
) -> Result<ScalarTrajectory> {
    check_budget(n_steps.saturating_add(1), budget)?;
    let mut state = kernel.init(x0)?;
    let mut rng = id.rng();
    let mut positions = Vec::with_capacity(n_steps + 1);
    positions.push(kernel.position(&state));
    for _ in 0..n_steps {
        kernel.step(&mut state, &mut rng);
        positions.push(kernel.position(&state));
    }
    ScalarTrajectory::with_meta(positions, id.seed, id.stream, kernel.spec_id())
}

pub fn simulate_vector<K: VectorKernel>(
    kernel: &K,
    x0: &[f64],
    n_steps: usize,
    id: StreamId,
    budget: usize,
) -> Result<VectorTrajectory> {
    let d = kernel.dim();
    check_budget(n_steps.saturating_add(1).saturating_mul(d), budget)?;
    let mut state = kernel.init(x0)?;
    let mut rng = id.rng();
    let mut coords = vec![0.0; (n_steps + 1) * d];
    kernel.write_point(&state, &mut coords[..d]);
    for n in 1..=n_steps {
        kernel.step(&mut state, &mut rng);
        kernel.write_point(&state, &mut coords[n * d..(n + 1) * d]);
    }
    VectorTrajectory::with_meta(d, coords, id.seed, id.stream, kernel.spec_id())
}

/// Outcome of running a kernel until it leaves an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// Reached `[upper, ∞)`.
    Upper,
    /// Reached `[0, lower]`.
    Lower,
    Truncated,
}

/// Steps from `state` until the position is `>= upper` or `<= lower`.
pub fn run_until_exit<K: ScalarKernel, R: Rng + ?Sized>(
    kernel: &K,
    state: &mut K::State,
    lower: f64,
    upper: f64,
    max_steps: u64,
    rng: &mut R,
) -> Exit {
    let mut x = kernel.position(state);
    let mut steps = 0u64;
    loop {
        if x >= upper {
            return Exit::Upper;
        }
        if x <= lower {
            return Exit::Lower;
        }
        if steps == max_steps {
            return Exit::Truncated;
        }
        kernel.step(state, rng);
        x = kernel.position(state);
        steps += 1;
    }
}
