use pe3d::parallel::{static_assignment, Scheduling};
use pe3d::tridiag::{random_dominant_system, solve_batch, SolveBatch};
use pe3d::{frequency_farm, ExecutorSpec, HomogeneousCase, Problem, Topology, TimingRecord};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn problem() -> &'static Problem {
    static PROBLEM: OnceLock<Problem> = OnceLock::new();
    PROBLEM.get_or_init(|| {
        let mut case = HomogeneousCase::new(7, 4, 20, 10.0, 1.0);
        case.source_depth = 6.0;
        case.output_stride = 3;
        case.build().unwrap()
    })
}

proptest! {
    #[test]
    fn static_assignment_law(jobs in 0usize..200, workers in 1usize..40) {
        let ranges = static_assignment(jobs, workers);
        prop_assert_eq!(ranges.len(), workers);
        let mut next = 0;
        for r in &ranges {
            prop_assert_eq!(r.start, next);
            next = r.end;
        }
        prop_assert_eq!(next, jobs);
        let max = ranges.iter().map(|r| r.len()).max().unwrap();
        prop_assert_eq!(max, jobs.div_ceil(workers));
    }

    #[test]
    fn timing_metrics_recompute_from_wall_times(
        base in 1e-3f64..1e3, wall in 1e-3f64..1e3, threads in 1usize..16, workers in 1usize..16,
    ) {
        let baseline = TimingRecord::new("t1w1", 1, 1, 4, (10, 4, 20), base).unwrap();
        let record = TimingRecord::new("run", threads, workers, 4, (10, 4, 20), wall).unwrap();
        prop_assert_eq!(record.speedup(&baseline), base / wall);
        prop_assert_eq!(record.efficiency(&baseline), base / wall / (threads * workers) as f64);
        prop_assert_eq!(baseline.speedup(&baseline), 1.0);
    }

    #[test]
    fn batch_solution_ignores_the_parallel_hint(
        seed in any::<u64>(), count in 1usize..40, n in 3usize..48, hint in 1usize..9, cyclic in any::<bool>(),
    ) {
        let topology = if cyclic { Topology::Cyclic } else { Topology::Open };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let systems: Vec<_> = (0..count).map(|_| random_dominant_system(&mut rng, n, topology)).collect();
        let batch = SolveBatch::from_systems(&systems).unwrap();
        prop_assert_eq!(solve_batch(&batch, hint).unwrap(), solve_batch(&batch, 1).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn farm_results_follow_input_order_bitwise(
        freqs in prop::collection::vec(10.0f64..120.0, 1..7), threads in 1usize..3, workers in 1usize..5,
        dynamic in any::<bool>(),
    ) {
        let problem = problem();
        let reference = frequency_farm(problem, &freqs, &ExecutorSpec::default()).unwrap();
        let spec = ExecutorSpec {
            intra_threads: threads,
            freq_workers: workers,
            scheduling: if dynamic { Scheduling::Dynamic } else { Scheduling::Static },
            ..ExecutorSpec::default()
        };
        let outcome = frequency_farm(problem, &freqs, &spec).unwrap();
        prop_assert_eq!(outcome.results.len(), freqs.len());
        for ((got, want), f) in outcome.results.iter().zip(&reference.results).zip(&freqs) {
            let (got, want) = (got.as_ref().unwrap(), want.as_ref().unwrap());
            prop_assert_eq!(got.frequency, *f);
            prop_assert!(got.same_field(want));
        }
    }
}
