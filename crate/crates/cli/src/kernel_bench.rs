//! Tri-diagonal kernel throughput: systems solved per second against batch
//! size, for one-at-a-time scalar solves and for the interleaved batch path.

use std::fmt::Write as _;
use std::time::Instant;

use pe3d::tridiag::{random_dominant_system, solve, solve_batch, SolveBatch};
use pe3d::{Result, Topology};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const KERNEL_CSV_HEADER: &str = "topology,n,batch,scalar_systems_per_s,batch_systems_per_s";
pub const DEFAULT_BATCH_SIZES: &[usize] = &[1, 4, 16, 64, 256, 1024];

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSample {
    pub topology: Topology,
    pub n: usize,
    pub batch: usize,
    pub scalar_systems_per_s: f64,
    pub batch_systems_per_s: f64,
}

/// Times `min_systems` or more solves per batch size and path, keeping the
/// best of three passes.
pub fn kernel_benchmark(
    n: usize,
    batch_sizes: &[usize],
    topology: Topology,
    min_systems: usize,
    seed: u64,
) -> Result<Vec<KernelSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(batch_sizes.len());
    for &batch in batch_sizes {
        let systems: Vec<_> = (0..batch.max(1))
            .map(|_| random_dominant_system(&mut rng, n, topology))
            .collect();
        let packed = SolveBatch::from_systems(&systems)?;
        let rounds = min_systems.div_ceil(systems.len()).max(1);
        let solved = (rounds * systems.len()) as f64;
        let mut best_scalar = f64::INFINITY;
        let mut best_batch = f64::INFINITY;
        for _ in 0..3 {
            let t = Instant::now();
            for _ in 0..rounds {
                for s in &systems {
                    std::hint::black_box(solve(s)?);
                }
            }
            best_scalar = best_scalar.min(t.elapsed().as_secs_f64());
            let t = Instant::now();
            for _ in 0..rounds {
                std::hint::black_box(solve_batch(&packed, 1)?);
            }
            best_batch = best_batch.min(t.elapsed().as_secs_f64());
        }
        out.push(KernelSample {
            topology,
            n,
            batch: systems.len(),
            scalar_systems_per_s: solved / best_scalar.max(1e-9),
            batch_systems_per_s: solved / best_batch.max(1e-9),
        });
    }
    Ok(out)
}

pub fn kernel_csv(samples: &[KernelSample]) -> String {
    let mut s = String::from(KERNEL_CSV_HEADER);
    s.push('\n');
    for k in samples {
        let _ = writeln!(
            s,
            "{},{},{},{:.1},{:.1}",
            topology_name(k.topology),
            k.n,
            k.batch,
            k.scalar_systems_per_s,
            k.batch_systems_per_s
        );
    }
    s
}

pub fn kernel_table(samples: &[KernelSample]) -> String {
    let mut s = format!("{:<8} {:>5} {:>6} {:>16} {:>16}\n", "topology", "n", "batch", "scalar sys/s", "batch sys/s");
    for k in samples {
        let _ = writeln!(
            s,
            "{:<8} {:>5} {:>6} {:>16.0} {:>16.0}",
            topology_name(k.topology),
            k.n,
            k.batch,
            k.scalar_systems_per_s,
            k.batch_systems_per_s
        );
    }
    s
}

fn topology_name(t: Topology) -> &'static str {
    match t {
        Topology::Open => "open",
        Topology::Cyclic => "cyclic",
    }
}
