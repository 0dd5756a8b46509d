use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{ExecutorSpec, IntraExecutor, Scheduling};
use crate::config::Problem;
use crate::error::{Error, Result};
use crate::marching::{run_frequency, FrequencyResult};

/// Contiguous job blocks for `workers` workers over `jobs` jobs. Block sizes
/// differ by at most one, so no worker holds more than `ceil(jobs / workers)`.
/// Always returns `workers` ranges; trailing ones may be empty.
pub fn static_assignment(jobs: usize, workers: usize) -> Vec<Range<usize>> {
    let workers = workers.max(1);
    let base = jobs / workers;
    let extra = jobs % workers;
    let mut start = 0;
    (0..workers)
        .map(|w| {
            let size = base + usize::from(w < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFailure {
    pub index: usize,
    pub frequency: f64,
    pub message: String,
}

#[derive(Debug)]
pub struct FarmOutcome {
    /// One entry per input frequency, in input order.
    pub results: Vec<std::result::Result<FrequencyResult, FrequencyFailure>>,
    /// Job indices each worker ran, in the order it ran them.
    pub worker_jobs: Vec<Vec<usize>>,
}

impl FarmOutcome {
    pub fn failures(&self) -> Vec<&FrequencyFailure> {
        self.results.iter().filter_map(|r| r.as_ref().err()).collect()
    }

    pub fn successes(&self) -> Vec<&FrequencyResult> {
        self.results.iter().filter_map(|r| r.as_ref().ok()).collect()
    }

    /// Largest number of jobs any worker ran.
    pub fn max_jobs_per_worker(&self) -> usize {
        self.worker_jobs.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Solves each frequency as an independent job across `spec.freq_workers`
/// workers, each owning an intra-step pool of `spec.intra_threads`. Results
/// come back in input order; failures are collected per frequency.
pub fn frequency_farm(problem: &Problem, frequencies: &[f64], spec: &ExecutorSpec) -> Result<FarmOutcome> {
    if frequencies.is_empty() {
        return Err(Error::Domain("frequency farm needs at least one frequency".into()));
    }
    spec.validate()?;
    let workers = spec.freq_workers.min(frequencies.len());
    let slots: Vec<Mutex<Option<std::result::Result<FrequencyResult, FrequencyFailure>>>> =
        frequencies.iter().map(|_| Mutex::new(None)).collect();

    let run_job = |exec: &IntraExecutor, index: usize| {
        let frequency = frequencies[index];
        let outcome = run_frequency(problem, frequency, exec).map_err(|e| FrequencyFailure {
            index,
            frequency,
            message: e.to_string(),
        });
        *slots[index].lock().expect("result slot poisoned") = Some(outcome);
    };
    let make_exec = || {
        IntraExecutor::new(spec.intra_threads).expect("intra_threads validated above")
    };

    let worker_jobs: Vec<Vec<usize>> = match spec.scheduling {
        Scheduling::Static => {
            let blocks = static_assignment(frequencies.len(), workers);
            if workers == 1 {
                let exec = make_exec();
                blocks[0].clone().for_each(|i| run_job(&exec, i));
                vec![blocks[0].clone().collect()]
            } else {
                std::thread::scope(|scope| {
                    let handles: Vec<_> = blocks
                        .iter()
                        .map(|block| {
                            let block = block.clone();
                            let run_job = &run_job;
                            scope.spawn(move || {
                                let exec = make_exec();
                                block.clone().for_each(|i| run_job(&exec, i));
                                block.collect::<Vec<_>>()
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("frequency worker panicked"))
                        .collect()
                })
            }
        }
        Scheduling::Dynamic => {
            let next = AtomicUsize::new(0);
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers)
                    .map(|_| {
                        let (next, run_job) = (&next, &run_job);
                        scope.spawn(move || {
                            let exec = make_exec();
                            let mut done = Vec::new();
                            loop {
                                let i = next.fetch_add(1, Ordering::Relaxed);
                                if i >= frequencies.len() {
                                    break done;
                                }
                                run_job(&exec, i);
                                done.push(i);
                            }
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("frequency worker panicked"))
                    .collect()
            })
        }
    };

    let results = slots
        .into_iter()
        .map(|s| s.into_inner().expect("result slot poisoned").expect("every job ran"))
        .collect();
    Ok(FarmOutcome {
        results,
        worker_jobs,
    })
}
