//! Three-dimensional wide-angle parabolic-equation solver for underwater
//! acoustic propagation.
//!
//! The field `u(r, θ, z)` is marched outward in range. Each range step is an
//! operator-split Crank–Nicolson update: one tri-diagonal solve in depth per
//! azimuth, then one (possibly cyclic) tri-diagonal solve in azimuth per
//! depth. Work inside a step is spread over columns; independent source
//! frequencies are spread over workers. Every parallel path reproduces the
//! sequential result bit for bit.

// Input checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod config;
pub mod env;
pub mod error;
pub mod grid;
pub mod marching;
pub mod operators;
pub mod parallel;
pub mod slab;
pub mod tridiag;

pub use cases::HomogeneousCase;
pub use config::{load_config, parse_config, Mode, Problem, RunOptions, TlFormat};
pub use env::{Absorber, Bathymetry, Environment, SourceSpec, TL_FLOOR_DB};
pub use error::{Error, Result};
pub use grid::{AzimuthTopology, Grid3D};
pub use marching::{run_frequency, FrequencyResult, MarchState, Marcher};
pub use operators::StepCoefficients;
pub use parallel::{
    frequency_farm, scaling_harness, ExecutorSpec, FarmOutcome, HarnessOutcome, IntraExecutor,
    TimingRecord,
};
pub use slab::FieldSlab;
pub use tridiag::{Topology, TriDiagSystem};
