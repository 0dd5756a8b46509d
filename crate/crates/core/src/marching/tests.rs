use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cases::HomogeneousCase;
use crate::env::Absorber;

fn random_slab(grid: &Grid3D, seed: u64, range: f64) -> FieldSlab {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.slab_len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    FieldSlab::from_values(grid.n_azimuth, grid.n_depth, values, range).unwrap()
}

fn rel_err(a: &FieldSlab, b: &FieldSlab) -> f64 {
    let num = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    num / b.max_abs().max(f64::MIN_POSITIVE)
}

fn energy(slab: &FieldSlab) -> f64 {
    slab.values().iter().map(|v| v.norm_sqr()).sum()
}

#[test]
fn boundary_zeroes_surface_and_is_idempotent() {
    let problem = HomogeneousCase::new(5, 6, 7, 10.0, 1.0).build().unwrap();
    let grid = &problem.grid;
    let original = random_slab(grid, 1, grid.r_start);
    let mut once = original.clone();
    apply_boundary(&mut once, grid);
    for m in 0..grid.n_azimuth {
        assert_eq!(once.get(m, 0), Complex64::new(0.0, 0.0));
        for l in 1..grid.n_depth {
            assert_eq!(once.get(m, l), original.get(m, l));
        }
    }
    let mut twice = once.clone();
    apply_boundary(&mut twice, grid);
    assert_eq!(once, twice);
}

#[test]
fn sector_boundary_zeroes_edge_columns() {
    let mut case = HomogeneousCase::new(5, 6, 7, 10.0, 1.0);
    case.topology = AzimuthTopology::Sector;
    let problem = case.build().unwrap();
    let grid = &problem.grid;
    let mut slab = random_slab(grid, 2, grid.r_start);
    apply_boundary(&mut slab, grid);
    assert!(slab.column(0).iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    assert!(slab.column(5).iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    assert!(slab.column(2)[1..].iter().all(|v| *v != Complex64::new(0.0, 0.0)));
}

#[test]
fn zero_range_step_is_identity() {
    for topology in [AzimuthTopology::Periodic, AzimuthTopology::Sector] {
        let mut case = HomogeneousCase::new(5, 9, 17, 10.0, 1.0);
        case.topology = topology;
        case.absorber.max_attenuation = 0.05;
        let problem = case.build().unwrap();
        let grid = &problem.grid;
        let exec = IntraExecutor::sequential();
        let k0 = wavenumber(50.0, 1500.0).unwrap();
        let coeffs = StepCoefficients::new(k0, 0.0).unwrap();
        let marcher = Marcher::new(grid, &problem.environment, k0, coeffs, &exec);
        let mut slab = random_slab(grid, 3, grid.r_start);
        apply_boundary(&mut slab, grid);
        let next = marcher
            .range_step(MarchState { slab: slab.clone(), step: 0 })
            .unwrap();
        assert_eq!(next.step, 1);
        assert_eq!(next.slab.range.to_bits(), slab.range.to_bits());
        for (a, b) in next.slab.values().iter().zip(slab.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}

fn compare_with_dense(case: &HomogeneousCase, seed: u64, step: usize) -> f64 {
    let problem = case.build().unwrap();
    let grid = &problem.grid;
    let exec = IntraExecutor::sequential();
    let k0 = wavenumber(case.frequencies[0], case.speed).unwrap();
    let coeffs = StepCoefficients::new(k0, grid.delta_r).unwrap();
    let marcher = Marcher::new(grid, &problem.environment, k0, coeffs, &exec);
    let slab = random_slab(grid, seed, marcher.range_at(step));
    let fast = marcher
        .range_step(MarchState { slab: slab.clone(), step })
        .unwrap();
    let dense = dense_range_step(grid, &problem.environment, k0, &coeffs, &slab, step).unwrap();
    assert_eq!(fast.slab.range, dense.range);
    rel_err(&fast.slab, &dense)
}

#[test]
fn three_by_three_step_matches_dense_realization() {
    for topology in [AzimuthTopology::Periodic, AzimuthTopology::Sector] {
        let mut case = HomogeneousCase::new(4, 3, 3, 5.0, 2.0);
        case.topology = topology;
        case.absorber.max_attenuation = 0.0;
        case.source_depth = 2.0;
        for seed in 0..5 {
            let err = compare_with_dense(&case, seed, 0);
            assert!(err <= 1e-10, "{topology:?} seed {seed}: {err:e}");
        }
    }
}

#[test]
fn absorbing_step_matches_dense_realization() {
    let mut case = HomogeneousCase::new(6, 6, 12, 3.0, 1.5);
    case.absorber = Absorber {
        start_depth: 6.0,
        max_attenuation: 0.2,
    };
    case.frequencies = vec![120.0];
    for step in [0, 3] {
        let err = compare_with_dense(&case, 11 + step as u64, step);
        assert!(err <= 1e-10, "step {step}: {err:e}");
    }
}

#[test]
fn homogeneous_run_keeps_azimuthal_symmetry() {
    let mut case = HomogeneousCase::new(41, 16, 64, 5.0, 1.0);
    case.frequencies = vec![100.0];
    case.source_depth = 20.0;
    let problem = case.build().unwrap();
    let result = run_frequency(&problem, 100.0, &IntraExecutor::sequential()).unwrap();
    let slab = &result.final_slab;
    let max = slab.max_abs();
    assert!(max > 0.0);
    for l in 0..slab.n_depth() {
        let row = slab.row(l);
        let mags: Vec<f64> = row.iter().map(|v| v.norm()).collect();
        let spread = mags.iter().cloned().fold(f64::MIN, f64::max) - mags.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 1e-9 * max, "depth {l}: spread {spread:e}");
    }
}

#[test]
fn lossless_steps_preserve_energy() {
    let mut case = HomogeneousCase::new(51, 8, 80, 5.0, 1.0);
    case.absorber.max_attenuation = 0.0;
    case.source_depth = 30.0;
    let problem = case.build().unwrap();
    let exec = IntraExecutor::sequential();
    let k0 = wavenumber(50.0, 1500.0).unwrap();
    let coeffs = StepCoefficients::new(k0, problem.grid.delta_r).unwrap();
    let marcher = Marcher::new(&problem.grid, &problem.environment, k0, coeffs, &exec);
    let mut state = MarchState {
        slab: gaussian_starter(&problem.grid, &problem.source, k0).unwrap(),
        step: 0,
    };
    let e0 = energy(&state.slab);
    for _ in 0..50 {
        state = marcher.range_step(state).unwrap();
        let e = energy(&state.slab);
        assert!(e.is_finite());
        assert!(e <= e0 * (1.0 + 1e-9), "energy grew: {e} > {e0}");
    }
}

#[test]
fn absorber_removes_energy() {
    let mut case = HomogeneousCase::new(101, 4, 80, 10.0, 1.0);
    case.absorber = Absorber {
        start_depth: 40.0,
        max_attenuation: 0.05,
    };
    case.source_depth = 30.0;
    let problem = case.build().unwrap();
    let result = run_frequency(&problem, 50.0, &IntraExecutor::sequential()).unwrap();
    let k0 = wavenumber(50.0, 1500.0).unwrap();
    let start = gaussian_starter(&problem.grid, &problem.source, k0).unwrap();
    assert!(energy(&result.final_slab) < energy(&start));
}

#[test]
fn reruns_are_bitwise_identical() {
    let mut case = HomogeneousCase::new(21, 8, 40, 5.0, 1.0);
    case.source_depth = 10.0;
    let problem = case.build().unwrap();
    let exec = IntraExecutor::sequential();
    let a = run_frequency(&problem, 75.0, &exec).unwrap();
    let b = run_frequency(&problem, 75.0, &exec).unwrap();
    assert!(a.same_field(&b));
}

#[test]
fn thread_count_does_not_change_bits() {
    for topology in [AzimuthTopology::Periodic, AzimuthTopology::Sector] {
        let mut case = HomogeneousCase::new(21, 13, 37, 5.0, 1.0);
        case.topology = topology;
        case.source_depth = 10.0;
        case.output_stride = 4;
        let problem = case.build().unwrap();
        let one = run_frequency(&problem, 60.0, &IntraExecutor::sequential()).unwrap();
        for threads in [2, 3, 8] {
            let many = run_frequency(&problem, 60.0, &IntraExecutor::new(threads).unwrap()).unwrap();
            assert!(one.same_field(&many), "{topology:?} threads {threads}");
        }
    }
}

#[test]
fn zero_step_run_keeps_only_the_starter() {
    let mut case = HomogeneousCase::new(5, 4, 30, 10.0, 1.0);
    case.max_range = Some(10.0);
    let problem = case.build().unwrap();
    assert_eq!(problem.step_count(), 0);
    let result = run_frequency(&problem, 50.0, &IntraExecutor::sequential()).unwrap();
    assert_eq!(result.ranges, vec![10.0]);
    assert_eq!(result.tl.len(), problem.grid.slab_len());
    let k0 = wavenumber(50.0, 1500.0).unwrap();
    let mut start = gaussian_starter(&problem.grid, &problem.source, k0).unwrap();
    apply_boundary(&mut start, &problem.grid);
    assert_eq!(result.final_slab, start);
}

#[test]
fn stride_selects_samples() {
    let mut case = HomogeneousCase::new(11, 4, 30, 10.0, 1.0);
    case.output_stride = 3;
    let problem = case.build().unwrap();
    let result = run_frequency(&problem, 50.0, &IntraExecutor::sequential()).unwrap();
    assert_eq!(result.ranges, vec![10.0, 40.0, 70.0, 100.0]);
    assert_eq!(result.tl.len(), 4 * problem.grid.slab_len());
    assert!(result.tl.iter().all(|v| v.is_finite()));
}

#[test]
fn surface_row_is_zero_after_each_step() {
    let problem = HomogeneousCase::new(8, 5, 20, 10.0, 1.0).build().unwrap();
    let exec = IntraExecutor::sequential();
    let k0 = wavenumber(50.0, 1500.0).unwrap();
    let coeffs = StepCoefficients::new(k0, 10.0).unwrap();
    let marcher = Marcher::new(&problem.grid, &problem.environment, k0, coeffs, &exec);
    let mut state = MarchState {
        slab: random_slab(&problem.grid, 9, problem.grid.r_start),
        step: 0,
    };
    for _ in 0..5 {
        state = marcher.range_step(state).unwrap();
        assert!(state.slab.row(0).iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }
}

#[test]
fn stepping_past_the_grid_is_refused() {
    let problem = HomogeneousCase::new(3, 4, 10, 10.0, 1.0).build().unwrap();
    let exec = IntraExecutor::sequential();
    let k0 = wavenumber(50.0, 1500.0).unwrap();
    let coeffs = StepCoefficients::new(k0, 10.0).unwrap();
    let marcher = Marcher::new(&problem.grid, &problem.environment, k0, coeffs, &exec);
    let slab = FieldSlab::for_grid(&problem.grid, 10.0);
    assert!(marcher.range_step(MarchState { slab, step: 2 }).is_err());
}
