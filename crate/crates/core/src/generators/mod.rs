//! Concrete process families and their configuration.

mod birth_death;
mod constant;
mod elliptic;
mod plus_minus;
mod ssrw;

pub use birth_death::{BdLaw, BirthDeath};
pub use constant::ConstantStep;
pub use elliptic::{tangent_basis_vector, EllipticNorm, EllipticWalk};
pub use plus_minus::PlusOneMinusTwo;
pub use ssrw::{LatticeState, SsrwLattice, SsrwNorm};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::{simulate_scalar, simulate_vector, ScalarKernel, VectorKernel, DEFAULT_MEMORY_BUDGET};
use crate::profile::{MomentProfile, RegimeTag};
use crate::rng::StreamId;
use crate::trajectory::{ScalarTrajectory, VectorTrajectory};

/// Generator selection as it appears in config files, e.g.
/// `{"family":"bd_lamperti","a":1.0,"c":2.0,"x_floor":2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    BdLamperti {
        a: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default = "default_floor")]
        x_floor: u64,
    },
    BdHomogeneous {
        p: f64,
        #[serde(default = "one")]
        x_floor: u64,
    },
    PlusOneMinusTwo {
        a: f64,
        #[serde(default = "default_floor")]
        x_floor: u64,
    },
    SsrwNorm {
        d: usize,
    },
    Elliptic {
        d: usize,
        rho: f64,
        sigma: f64,
    },
    EllipticNorm {
        rho: f64,
        sigma: f64,
    },
    SsrwLattice {
        d: usize,
    },
    Constant {
        step: f64,
    },
}

fn default_floor() -> u64 {
    2
}

fn one() -> u64 {
    1
}

impl GeneratorConfig {
    pub fn build(&self) -> Result<Spec> {
        use GeneratorConfig as G;
        Ok(match *self {
            G::BdLamperti { a, c, x_floor } => Spec::Scalar(ScalarSpec::BirthDeath(BirthDeath::lamperti(a, c, x_floor)?)),
            G::BdHomogeneous { p, x_floor } => Spec::Scalar(ScalarSpec::BirthDeath(BirthDeath::homogeneous(p, x_floor)?)),
            G::PlusOneMinusTwo { a, x_floor } => Spec::Scalar(ScalarSpec::PlusOneMinusTwo(PlusOneMinusTwo::new(a, x_floor)?)),
            G::SsrwNorm { d } => Spec::Scalar(ScalarSpec::SsrwNorm(SsrwNorm::new(d)?)),
            G::EllipticNorm { rho, sigma } => Spec::Scalar(ScalarSpec::EllipticNorm(EllipticNorm::new(rho, sigma)?)),
            G::Constant { step } => Spec::Scalar(ScalarSpec::Constant(ConstantStep::new(step)?)),
            G::Elliptic { d, rho, sigma } => Spec::Vector(VectorSpec::Elliptic(EllipticWalk::new(d, rho, sigma)?)),
            G::SsrwLattice { d } => Spec::Vector(VectorSpec::SsrwLattice(SsrwLattice::new(d)?)),
        })
    }
}

/// A scalar process family with its parameters fixed.
#[derive(Debug, Clone)]
pub enum ScalarSpec {
    BirthDeath(BirthDeath),
    PlusOneMinusTwo(PlusOneMinusTwo),
    SsrwNorm(SsrwNorm),
    EllipticNorm(EllipticNorm),
    Constant(ConstantStep),
}

/// Runs `$body` with `$k` bound to the concrete kernel inside a [`ScalarSpec`].
#[macro_export]
macro_rules! with_scalar_kernel {
    ($spec:expr, $k:ident => $body:expr) => {
        match $spec {
            $crate::generators::ScalarSpec::BirthDeath($k) => $body,
            $crate::generators::ScalarSpec::PlusOneMinusTwo($k) => $body,
            $crate::generators::ScalarSpec::SsrwNorm($k) => $body,
            $crate::generators::ScalarSpec::EllipticNorm($k) => $body,
            $crate::generators::ScalarSpec::Constant($k) => $body,
        }
    };
}

/// Runs `$body` with `$k` bound to the concrete kernel inside a [`VectorSpec`].
#[macro_export]
macro_rules! with_vector_kernel {
    ($spec:expr, $k:ident => $body:expr) => {
        match $spec {
            $crate::generators::VectorSpec::Elliptic($k) => $body,
            $crate::generators::VectorSpec::SsrwLattice($k) => $body,
        }
    };
}

impl ScalarSpec {
    pub fn spec_id(&self) -> String {
        with_scalar_kernel!(self, k => k.spec_id())
    }

    pub fn profile(&self) -> MomentProfile {
        with_scalar_kernel!(self, k => k.profile())
    }

    pub fn jump_bound(&self) -> f64 {
        with_scalar_kernel!(self, k => k.jump_bound())
    }

    pub fn regime(&self) -> RegimeTag {
        self.profile().regime()
    }

    pub fn lattice_spacing(&self) -> Option<f64> {
        with_scalar_kernel!(self, k => k.lattice_spacing())
    }

    /// Whether upward moves are single lattice steps (so first passage above a
    /// level lands exactly one step above it).
    pub fn upward_skip_free(&self) -> bool {
        match self {
            ScalarSpec::BirthDeath(_) | ScalarSpec::PlusOneMinusTwo(_) => true,
            ScalarSpec::Constant(c) => c.step_size() == 1.0,
            _ => false,
        }
    }

    pub fn as_birth_death(&self) -> Option<&BirthDeath> {
        match self {
            ScalarSpec::BirthDeath(b) => Some(b),
            _ => None,
        }
    }

    pub fn simulate(&self, x0: f64, n_steps: usize, id: StreamId) -> Result<ScalarTrajectory> {
        self.simulate_with_budget(x0, n_steps, id, DEFAULT_MEMORY_BUDGET)
    }

    pub fn simulate_with_budget(&self, x0: f64, n_steps: usize, id: StreamId, budget: usize) -> Result<ScalarTrajectory> {
        with_scalar_kernel!(self, k => simulate_scalar(k, x0, n_steps, id, budget))
    }

    /// One-step law from the canonical state at `x`.
    pub fn transitions_from(&self, x: f64) -> Result<Vec<(f64, f64)>> {
        with_scalar_kernel!(self, k => k.transitions(&k.init(x)?))
    }

    /// `n` independent one-step increments from the canonical state at `x`.
    pub fn sample_increments(&self, x: f64, n: usize, id: StreamId) -> Result<Vec<f64>> {
        with_scalar_kernel!(self, k => {
            let s0 = k.init(x)?;
            let x0 = k.position(&s0);
            let mut rng = id.rng();
            Ok((0..n)
                .map(|_| {
                    let mut s = s0.clone();
                    k.step(&mut s, &mut rng);
                    k.position(&s) - x0
                })
                .collect())
        })
    }
}

#[derive(Debug, Clone)]
pub enum VectorSpec {
    Elliptic(EllipticWalk),
    SsrwLattice(SsrwLattice),
}

impl VectorSpec {
    pub fn spec_id(&self) -> String {
        with_vector_kernel!(self, k => k.spec_id())
    }

    pub fn dim(&self) -> usize {
        with_vector_kernel!(self, k => k.dim())
    }

    pub fn profile(&self) -> MomentProfile {
        with_vector_kernel!(self, k => k.profile())
    }

    pub fn jump_bound(&self) -> f64 {
        with_vector_kernel!(self, k => k.jump_bound())
    }

    pub fn regime(&self) -> RegimeTag {
        self.profile().regime()
    }

    pub fn simulate(&self, x0: &[f64], n_steps: usize, id: StreamId) -> Result<VectorTrajectory> {
        with_vector_kernel!(self, k => simulate_vector(k, x0, n_steps, id, DEFAULT_MEMORY_BUDGET))
    }

    /// The scalar spec whose paths have the law of this spec's norms.
    pub fn radial(&self) -> Result<ScalarSpec> {
        Ok(match self {
            VectorSpec::Elliptic(w) => ScalarSpec::EllipticNorm(w.radial()),
            VectorSpec::SsrwLattice(s) => ScalarSpec::SsrwNorm(SsrwNorm::new(s.dim())?),
        })
    }
}

#[derive(Debug, Clone)]
pub enum Spec {
    Scalar(ScalarSpec),
    Vector(VectorSpec),
}

impl Spec {
    pub fn spec_id(&self) -> String {
        match self {
            Spec::Scalar(s) => s.spec_id(),
            Spec::Vector(v) => v.spec_id(),
        }
    }

    pub fn profile(&self) -> MomentProfile {
        match self {
            Spec::Scalar(s) => s.profile(),
            Spec::Vector(v) => v.profile(),
        }
    }

    pub fn regime(&self) -> RegimeTag {
        self.profile().regime()
    }

    pub fn jump_bound(&self) -> f64 {
        match self {
            Spec::Scalar(s) => s.jump_bound(),
            Spec::Vector(v) => v.jump_bound(),
        }
    }
}
