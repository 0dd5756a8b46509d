use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn cv(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| c(x)).collect()
}

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.norm()).fold(0.0, f64::max).max(1e-300);
    num / den
}

#[test]
fn thomas_identity() {
    let sys = TriDiagSystem::open(cv(&[0., 0.]), cv(&[1., 1., 1.]), cv(&[0., 0.]), cv(&[3., 4., 5.])).unwrap();
    assert_eq!(solve_thomas(&sys).unwrap(), cv(&[3., 4., 5.]));
}

#[test]
fn thomas_second_difference() {
    let sys = TriDiagSystem::open(cv(&[-1., -1.]), cv(&[2., 2., 2.]), cv(&[-1., -1.]), cv(&[1., 0., 1.])).unwrap();
    let x = solve_thomas(&sys).unwrap();
    let oracle = dense_oracle_solve(&sys).unwrap();
    assert!(rel_err(&x, &cv(&[1., 1., 1.])) < 1e-15);
    assert!(rel_err(&oracle, &cv(&[1., 1., 1.])) < 1e-15);
}

#[test]
fn thomas_matches_dense_n64() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let sys = random_dominant_system(&mut rng, 64, Topology::Open);
    let x = solve_thomas(&sys).unwrap();
    assert!(rel_err(&x, &dense_oracle_solve(&sys).unwrap()) <= 1e-10);
}

#[test]
fn thomas_single_unknown() {
    let sys = TriDiagSystem::open(vec![], cv(&[4.]), vec![], cv(&[2.])).unwrap();
    assert_eq!(solve_thomas(&sys).unwrap(), cv(&[0.5]));
}

#[test]
fn zero_pivot_reports_index() {
    // second pivot: 1 - 1 * 1 = 0
    let sys = TriDiagSystem::open(cv(&[1., 0.]), cv(&[1., 1., 1.]), cv(&[1., 0.]), cv(&[1., 1., 1.])).unwrap();
    match solve_thomas(&sys) {
        Err(Error::Singular { index, .. }) => assert_eq!(index, 1),
        other => panic!("expected singular, got {other:?}"),
    }
}

#[test]
fn topology_and_shape_checks() {
    assert!(TriDiagSystem::open(cv(&[1.]), cv(&[1., 1., 1.]), cv(&[1., 1.]), cv(&[1., 1., 1.])).is_err());
    assert!(TriDiagSystem::cyclic(cv(&[1., 1.]), cv(&[1., 1.]), cv(&[1., 1.]), cv(&[1., 1.])).is_err());
    let open = TriDiagSystem::open(cv(&[0.; 2]), cv(&[1.; 3]), cv(&[0.; 2]), cv(&[1.; 3])).unwrap();
    assert!(solve_cyclic(&open).is_err());
}

#[test]
fn cyclic_row_sums() {
    let sys = TriDiagSystem::cyclic(cv(&[-1.; 3]), cv(&[3.; 3]), cv(&[-1.; 3]), cv(&[1.; 3])).unwrap();
    let x = solve_cyclic(&sys).unwrap();
    assert!(rel_err(&x, &cv(&[1.; 3])) < 1e-14);
    assert!(rel_err(&dense_oracle_solve(&sys).unwrap(), &cv(&[1.; 3])) < 1e-14);
}

#[test]
fn cyclic_with_zero_corners_equals_open() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let open = random_dominant_system(&mut rng, 17, Topology::Open);
    let mut sub = open.sub.clone();
    sub.push(c(0.0));
    let mut sup = open.sup.clone();
    sup.push(c(0.0));
    let cyc = TriDiagSystem::cyclic(sub, open.main.clone(), sup, open.rhs.clone()).unwrap();
    let a = solve_cyclic(&cyc).unwrap();
    let b = solve_thomas(&open).unwrap();
    assert!(rel_err(&a, &b) < 1e-13);
}

#[test]
fn cyclic_matches_dense_n32() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let sys = random_dominant_system(&mut rng, 32, Topology::Cyclic);
    let x = solve_cyclic(&sys).unwrap();
    assert!(rel_err(&x, &dense_oracle_solve(&sys).unwrap()) <= 1e-10);
}

#[test]
fn cyclic_with_zero_leading_diagonal() {
    // main[0] = 0 forces the fallback shift; the matrix itself is nonsingular
    let sys = TriDiagSystem::cyclic(cv(&[1., 1., 1., 1.]), cv(&[0., 4., 4., 4.]), cv(&[1., 1., 1., 1.]), cv(&[1., 2., 3., 4.])).unwrap();
    let x = solve_cyclic(&sys).unwrap();
    assert!(sys.residual_inf(&x) < 1e-12);
}

#[test]
fn dense_oracle_cases() {
    let id = TriDiagSystem::open(cv(&[0.; 3]), cv(&[1.; 4]), cv(&[0.; 3]), cv(&[1., 2., 3., 4.])).unwrap();
    assert_eq!(dense_oracle_solve(&id).unwrap(), cv(&[1., 2., 3., 4.]));
    let two = TriDiagSystem::open(cv(&[0.]), cv(&[1., 1.]), cv(&[1.]), cv(&[2., 1.])).unwrap();
    assert!(rel_err(&dense_oracle_solve(&two).unwrap(), &cv(&[1., 1.])) < 1e-15);
    let singular = TriDiagSystem::open(cv(&[1.]), cv(&[1., 1.]), cv(&[1.]), cv(&[2., 1.])).unwrap();
    assert!(matches!(dense_oracle_solve(&singular), Err(Error::Singular { .. })));
}

#[test]
fn batch_of_one_equals_scalar() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for topology in [Topology::Open, Topology::Cyclic] {
        let sys = random_dominant_system(&mut rng, 20, topology);
        let batch = SolveBatch::from_systems(std::slice::from_ref(&sys)).unwrap();
        assert_eq!(solve_batch(&batch, 4).unwrap(), vec![solve(&sys).unwrap()]);
        assert_eq!(batch.member(0), sys);
    }
}

#[test]
fn batch_of_identical_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sys = random_dominant_system(&mut rng, 33, Topology::Cyclic);
    let batch = SolveBatch::from_systems(&vec![sys.clone(); 100]).unwrap();
    let out = solve_batch(&batch, 3).unwrap();
    assert_eq!(out.len(), 100);
    assert!(out.iter().all(|x| *x == out[0]));
    assert_eq!(out[0], solve_cyclic(&sys).unwrap());
}

#[test]
fn batch_bitwise_independent_of_hint() {
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    for topology in [Topology::Open, Topology::Cyclic] {
        let systems: Vec<_> = (0..900).map(|_| random_dominant_system(&mut rng, 24, topology)).collect();
        let batch = SolveBatch::from_systems(&systems).unwrap();
        let serial: Vec<_> = systems.iter().map(|s| solve(s).unwrap()).collect();
        let one = solve_batch(&batch, 1).unwrap();
        let eight = solve_batch(&batch, 8).unwrap();
        assert_eq!(one, serial);
        assert_eq!(eight, serial);
    }
}

#[test]
fn batch_reports_failing_member() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut systems: Vec<_> = (0..10).map(|_| random_dominant_system(&mut rng, 5, Topology::Open)).collect();
    systems[6].main[2] = c(0.0);
    systems[6].sub[1] = c(0.0);
    systems[8].main[0] = c(0.0);
    let batch = SolveBatch::from_systems(&systems).unwrap();
    for hint in [1, 4] {
        match solve_batch(&batch, hint) {
            Err(Error::BatchMember { member, .. }) => assert_eq!(member, 6),
            other => panic!("expected member error, got {other:?}"),
        }
    }
}

#[test]
fn batch_rejects_mixed_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let a = random_dominant_system(&mut rng, 5, Topology::Open);
    let b = random_dominant_system(&mut rng, 6, Topology::Open);
    let cyc = random_dominant_system(&mut rng, 5, Topology::Cyclic);
    assert!(SolveBatch::from_systems(&[a.clone(), b]).is_err());
    assert!(SolveBatch::from_systems(&[a, cyc]).is_err());
    assert!(SolveBatch::from_systems(&[]).is_err());
}

#[test]
fn factor_interleaved_matches_scalar() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sys = random_dominant_system(&mut rng, 12, Topology::Cyclic);
    let f = CyclicFactor::new(&sys.sub, &sys.main, &sys.sup).unwrap();
    let width = 5;
    let rhs: Vec<Vec<Complex64>> = (0..width)
        .map(|_| random_dominant_system(&mut rng, 12, Topology::Cyclic).rhs)
        .collect();
    let mut interleaved: Vec<Complex64> = (0..12).flat_map(|i| rhs.iter().map(move |r| r[i])).collect();
    f.solve_interleaved(&mut interleaved, width);
    for (k, r) in rhs.iter().enumerate() {
        let mut x = r.clone();
        f.solve_in_place(&mut x);
        let lane: Vec<_> = (0..12).map(|i| interleaved[i * width + k]).collect();
        assert_eq!(lane, x);
    }
}

fn topology_strategy() -> impl Strategy<Value = Topology> {
    prop_oneof![Just(Topology::Open), Just(Topology::Cyclic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn residual_and_oracle_agreement(seed in any::<u64>(), n in 3usize..=128, topology in topology_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_dominant_system(&mut rng, n, topology);
        let x = solve(&sys).unwrap();
        let rhs_norm = sys.rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(sys.residual_inf(&x) <= 1e-10 * rhs_norm.max(1.0));
        prop_assert!(rel_err(&x, &dense_oracle_solve(&sys).unwrap()) <= 1e-10);
    }

    #[test]
    fn solve_is_linear(seed in any::<u64>(), n in 3usize..=64, topology in topology_strategy(),
                       a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s1 = random_dominant_system(&mut rng, n, topology);
        let mut s2 = s1.clone();
        s2.rhs = random_dominant_system(&mut rng, n, topology).rhs;
        let alpha = Complex64::new(a, 0.5);
        let beta = Complex64::new(b, -0.25);
        let mut mix = s1.clone();
        mix.rhs = s1.rhs.iter().zip(&s2.rhs).map(|(x, y)| alpha * x + beta * y).collect();
        let x1 = solve(&s1).unwrap();
        let x2 = solve(&s2).unwrap();
        let combo: Vec<_> = x1.iter().zip(&x2).map(|(x, y)| alpha * x + beta * y).collect();
        prop_assert!(rel_err(&solve(&mix).unwrap(), &combo) <= 1e-10);
    }
}
