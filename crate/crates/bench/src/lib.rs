//! Fixtures shared by the benchmarks, seeded so every run measures the same
//! inputs.

use pe3d::env::{gaussian_starter, wavenumber};
use pe3d::tridiag::{random_dominant_system, SolveBatch};
use pe3d::{HomogeneousCase, Problem, Result, StepCoefficients, Topology, TriDiagSystem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 42;

/// `count` random diagonally dominant systems of size `n`, individually and
/// packed for the batched solver.
pub fn systems(count: usize, n: usize, topology: Topology) -> Result<(Vec<TriDiagSystem>, SolveBatch)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let systems: Vec<_> = (0..count)
        .map(|_| random_dominant_system(&mut rng, n, topology))
        .collect();
    let batch = SolveBatch::from_systems(&systems)?;
    Ok((systems, batch))
}

/// Everything one range step needs on an isovelocity problem.
pub struct StepFixture {
    pub problem: Problem,
    pub k0: f64,
    pub coeffs: StepCoefficients,
    pub start: pe3d::FieldSlab,
}

pub fn step_fixture(n_azimuth: usize, n_depth: usize) -> Result<StepFixture> {
    let mut case = HomogeneousCase::new(10, n_azimuth, n_depth, 5.0, 1.0);
    case.source_depth = n_depth as f64 / 4.0;
    let problem = case.build()?;
    let k0 = wavenumber(50.0, problem.environment.reference_speed)?;
    let coeffs = StepCoefficients::new(k0, problem.grid.delta_r)?;
    let start = gaussian_starter(&problem.grid, &problem.source, k0)?;
    Ok(StepFixture {
        problem,
        k0,
        coeffs,
        start,
    })
}
