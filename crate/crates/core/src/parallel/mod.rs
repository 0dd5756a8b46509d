//! Two levels of parallelism: fork-join over independent columns inside a
//! range step, and independent frequency jobs across workers. Every parallel
//! path is required to reproduce the sequential result bit for bit.

mod farm;
mod harness;

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use farm::{frequency_farm, static_assignment, FarmOutcome, FrequencyFailure};
pub use harness::{
    available_cores, read_timing_csv, record_label, scaling_harness, write_timing_csv,
    HarnessOutcome, TimingRecord, TimingRow, VoidedRun, TIMING_CSV_HEADER,
};

use crate::error::{Error, Result};
use crate::slab::FieldSlab;
use crate::tridiag::batch_ranges;

/// Thread placement request. Recorded only; the OS scheduler decides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pinning {
    #[default]
    None,
    Compact,
}

/// How frequency jobs are handed to workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduling {
    /// Contiguous blocks fixed up front; at most `ceil(F / W)` jobs per worker.
    #[default]
    Static,
    /// Workers pull the next job from a shared counter.
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutorSpec {
    pub intra_threads: usize,
    pub freq_workers: usize,
    pub pinning: Pinning,
    pub scheduling: Scheduling,
}

impl Default for ExecutorSpec {
    fn default() -> Self {
        Self {
            intra_threads: 1,
            freq_workers: 1,
            pinning: Pinning::None,
            scheduling: Scheduling::Static,
        }
    }
}

impl ExecutorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.intra_threads < 1 {
            return Err(Error::invariant("intra_threads >= 1", "got 0"));
        }
        if self.freq_workers < 1 {
            return Err(Error::invariant("freq_workers >= 1", "got 0"));
        }
        Ok(())
    }

    /// Total threads requested across both levels.
    pub fn total_concurrency(&self) -> usize {
        self.intra_threads * self.freq_workers
    }
}

/// Fork-join pool for work inside one range step. With one thread, work runs
/// inline on the caller.
pub struct IntraExecutor {
    threads: usize,
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for IntraExecutor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntraExecutor")
            .field("threads", &self.threads)
            .finish()
    }
}

impl IntraExecutor {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(Error::invariant("intra_threads >= 1", "got 0"));
        }
        let pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .thread_name(|i| format!("pe3d-intra-{i}"))
                    .build()
                    .map_err(|e| Error::Other(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self { threads, pool })
    }

    pub fn sequential() -> Self {
        Self {
            threads: 1,
            pool: None,
        }
    }

    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Contiguous index blocks, one per thread.
    pub fn blocks(&self, len: usize) -> Vec<Range<usize>> {
        batch_ranges(len, self.threads.min(len.max(1)))
    }

    /// Runs `task(first_column, block)` over contiguous blocks of whole
    /// columns of length `column_len`. Returns the per-column errors in column
    /// order.
    pub fn for_each_column_block<E, F>(
        &self,
        data: &mut [Complex64],
        column_len: usize,
        task: F,
    ) -> Vec<(usize, E)>
    where
        E: Send,
        F: Fn(usize, &mut [Complex64]) -> Vec<(usize, E)> + Sync,
    {
        let columns = data.len() / column_len;
        let ranges = self.blocks(columns);
        match &self.pool {
            None => ranges
                .into_iter()
                .flat_map(|r| task(r.start, &mut data[r.start * column_len..r.end * column_len]))
                .collect(),
            Some(pool) => {
                let mut slices = Vec::with_capacity(ranges.len());
                let mut rest = data;
                for r in &ranges {
                    let (head, tail) = rest.split_at_mut(r.len() * column_len);
                    slices.push((r.start, head));
                    rest = tail;
                }
                let per_block: Vec<Vec<(usize, E)>> = pool.install(|| {
                    slices
                        .into_par_iter()
                        .map(|(start, block)| task(start, block))
                        .collect()
                });
                per_block.into_iter().flatten().collect()
            }
        }
    }

    /// Evaluates `task` on each block of `0..len` and returns the outputs in
    /// block order.
    pub fn map_blocks<T, F>(&self, len: usize, task: F) -> Vec<(Range<usize>, T)>
    where
        T: Send,
        F: Fn(Range<usize>) -> T + Sync,
    {
        let ranges = self.blocks(len);
        match &self.pool {
            None => ranges.into_iter().map(|r| (r.clone(), task(r))).collect(),
            Some(pool) => pool.install(|| {
                ranges
                    .into_par_iter()
                    .map(|r| (r.clone(), task(r)))
                    .collect()
            }),
        }
    }
}

/// Applies a pure per-column task to every azimuth column (a full depth
/// column) of `slab`, partitioning columns into contiguous blocks across the
/// executor's threads. On any failure the result is discarded and the failing
/// column indices are reported.
pub fn parallel_map_columns<F>(slab: &FieldSlab, exec: &IntraExecutor, task: F) -> Result<FieldSlab>
where
    F: Fn(usize, &mut [Complex64]) -> Result<()> + Sync,
{
    let mut out = slab.clone();
    let n_depth = slab.n_depth();
    let failures = exec.for_each_column_block(out.values_mut(), n_depth, |first, block| {
        block
            .chunks_exact_mut(n_depth)
            .enumerate()
            .filter_map(|(k, col)| task(first + k, col).err().map(|e| (first + k, e)))
            .collect()
    });
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(Error::Columns {
            columns: failures.iter().map(|f| f.0).collect(),
            first: failures[0].1.to_string(),
        })
    }
}
