use std::io::{Read, Write};
use std::time::Instant;

use super::{frequency_farm, ExecutorSpec};
use crate::config::Problem;
use crate::error::{Error, Result};

/// Column layout of the timing CSV. Fixed; readers check it verbatim.
pub const TIMING_CSV_HEADER: &str = "label,threads,workers,nfreq,nr,ntheta,nz,wall_s,speedup,efficiency";

/// One measured configuration. Only raw measurements are stored; speedup and
/// efficiency are recomputed against a baseline record on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub label: String,
    pub intra_threads: usize,
    pub freq_workers: usize,
    pub frequency_count: usize,
    /// (range, azimuth, depth) points.
    pub grid_dims: (usize, usize, usize),
    pub wall_seconds: f64,
}

impl TimingRecord {
    pub fn new(
        label: impl Into<String>,
        intra_threads: usize,
        freq_workers: usize,
        frequency_count: usize,
        grid_dims: (usize, usize, usize),
        wall_seconds: f64,
    ) -> Result<Self> {
        if !(wall_seconds > 0.0 && wall_seconds.is_finite()) {
            return Err(Error::invariant("wall_seconds > 0", format!("got {wall_seconds}")));
        }
        if intra_threads < 1 || freq_workers < 1 {
            return Err(Error::invariant("counts >= 1", format!("threads {intra_threads}, workers {freq_workers}")));
        }
        Ok(Self {
            label: label.into(),
            intra_threads,
            freq_workers,
            frequency_count,
            grid_dims,
            wall_seconds,
        })
    }

    /// Cores requested: threads per worker times workers.
    pub fn resources(&self) -> usize {
        self.intra_threads * self.freq_workers
    }

    /// `T_base / T`.
    pub fn speedup(&self, baseline: &TimingRecord) -> f64 {
        baseline.wall_seconds / self.wall_seconds
    }

    /// Speedup divided by the resource ratio against the baseline.
    pub fn efficiency(&self, baseline: &TimingRecord) -> f64 {
        let ratio = self.resources() as f64 / baseline.resources() as f64;
        self.speedup(baseline) / ratio
    }

    /// Whether this configuration asks for more threads than `cores`.
    pub fn oversubscribed(&self, cores: usize) -> bool {
        self.resources() > cores
    }
}

/// A configuration whose measurement failed; the sweep carries on.
#[derive(Debug, Clone, PartialEq)]
pub struct VoidedRun {
    pub label: String,
    pub intra_threads: usize,
    pub freq_workers: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct HarnessOutcome {
    /// Successful measurements in sweep order; the (1,1) baseline is first.
    pub records: Vec<TimingRecord>,
    pub voided: Vec<VoidedRun>,
    /// Cores visible to the process when the sweep ran.
    pub available_cores: usize,
}

impl HarnessOutcome {
    /// The (1 thread, 1 worker) record, if it was measured.
    pub fn baseline(&self) -> Option<&TimingRecord> {
        self.records
            .iter()
            .find(|r| r.intra_threads == 1 && r.freq_workers == 1)
    }

    pub fn find(&self, threads: usize, workers: usize) -> Option<&TimingRecord> {
        self.records
            .iter()
            .find(|r| r.intra_threads == threads && r.freq_workers == workers)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let baseline = self
            .baseline()
            .ok_or_else(|| Error::Other("no baseline record to compare against".into()))?;
        write_timing_csv(out, &self.records, baseline)
    }

    /// Plain-text table of speedup and efficiency per configuration, with
    /// oversubscribed configurations and voided runs called out.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let Some(base) = self.baseline() else {
            s.push_str("no baseline record; nothing to compare\n");
            return s;
        };
        s.push_str(&format!(
            "{:<12} {:>7} {:>7} {:>5} {:>12} {:>9} {:>10}\n",
            "label", "threads", "workers", "nfreq", "wall_s", "speedup", "efficiency"
        ));
        for r in &self.records {
            let note = if r.oversubscribed(self.available_cores) { "  (oversubscribed)" } else { "" };
            s.push_str(&format!(
                "{:<12} {:>7} {:>7} {:>5} {:>12.6} {:>9.3} {:>10.3}{}\n",
                r.label,
                r.intra_threads,
                r.freq_workers,
                r.frequency_count,
                r.wall_seconds,
                r.speedup(base),
                r.efficiency(base),
                note
            ));
        }
        if self.records.iter().any(|r| r.oversubscribed(self.available_cores)) {
            s.push_str(&format!(
                "note: {} core(s) available; oversubscribed configurations share cores and their timings are not a scaling measurement\n",
                self.available_cores
            ));
        }
        for v in &self.voided {
            s.push_str(&format!(
                "voided {} (threads {}, workers {}): {}\n",
                v.label, v.intra_threads, v.freq_workers, v.reason
            ));
        }
        s
    }
}

pub fn record_label(threads: usize, workers: usize) -> String {
    format!("t{threads}w{workers}")
}

/// Times every (threads, workers) pair on the problem's full frequency list.
/// The (1,1) baseline is always measured first. Each configuration gets one
/// discarded warm-up run, then the minimum over `repeats` timed runs.
pub fn scaling_harness(
    problem: &Problem,
    thread_counts: &[usize],
    worker_counts: &[usize],
    repeats: usize,
) -> Result<HarnessOutcome> {
    if repeats < 1 {
        return Err(Error::invariant("repeats >= 1", "got 0"));
    }
    if thread_counts.is_empty() || worker_counts.is_empty() {
        return Err(Error::Domain("sweep lists must be nonempty".into()));
    }
    if let Some(bad) = thread_counts.iter().chain(worker_counts).find(|&&c| c < 1) {
        return Err(Error::invariant("counts >= 1", format!("got {bad}")));
    }
    problem.validate()?;

    let mut pairs = vec![(1, 1)];
    for &t in thread_counts {
        for &w in worker_counts {
            if !pairs.contains(&(t, w)) {
                pairs.push((t, w));
            }
        }
    }

    let frequencies = &problem.source.frequencies;
    let grid_dims = (problem.grid.n_range, problem.grid.n_azimuth, problem.grid.n_depth);
    let mut records = Vec::new();
    let mut voided = Vec::new();
    for (threads, workers) in pairs {
        let label = record_label(threads, workers);
        let spec = ExecutorSpec {
            intra_threads: threads,
            freq_workers: workers,
            ..problem.options.executor
        };
        match time_configuration(problem, frequencies, &spec, repeats)
            .and_then(|t| TimingRecord::new(&label, threads, workers, frequencies.len(), grid_dims, t))
        {
            Ok(record) => records.push(record),
            Err(e) => voided.push(VoidedRun {
                label,
                intra_threads: threads,
                freq_workers: workers,
                reason: e.to_string(),
            }),
        }
    }
    Ok(HarnessOutcome {
        records,
        voided,
        available_cores: available_cores(),
    })
}

fn time_configuration(problem: &Problem, frequencies: &[f64], spec: &ExecutorSpec, repeats: usize) -> Result<f64> {
    let run_once = || -> Result<f64> {
        let start = Instant::now();
        let outcome = frequency_farm(problem, frequencies, spec)?;
        let elapsed = start.elapsed().as_secs_f64();
        if let Some(f) = outcome.failures().first() {
            return Err(Error::Other(format!(
                "frequency {} Hz failed: {}",
                f.frequency, f.message
            )));
        }
        // Guard against clock granularity on tiny problems.
        Ok(elapsed.max(1e-9))
    };
    run_once()?;
    let mut best = f64::INFINITY;
    for _ in 0..repeats {
        best = best.min(run_once()?);
    }
    Ok(best)
}

pub fn available_cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Writes records under [`TIMING_CSV_HEADER`], deriving speedup and
/// efficiency against `baseline`.
pub fn write_timing_csv<W: Write>(out: W, records: &[TimingRecord], baseline: &TimingRecord) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Other(format!("timing csv: {e}"));
    w.write_record(TIMING_CSV_HEADER.split(',')).map_err(io_err)?;
    for r in records {
        w.write_record([
            r.label.clone(),
            r.intra_threads.to_string(),
            r.freq_workers.to_string(),
            r.frequency_count.to_string(),
            r.grid_dims.0.to_string(),
            r.grid_dims.1.to_string(),
            r.grid_dims.2.to_string(),
            format!("{:.9}", r.wall_seconds),
            format!("{:.6}", r.speedup(baseline)),
            format!("{:.6}", r.efficiency(baseline)),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Other(format!("timing csv: {e}")))?;
    Ok(())
}

/// One parsed timing CSV row, derived columns included as written.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub record: TimingRecord,
    pub speedup: f64,
    pub efficiency: f64,
}

/// Parses a timing CSV, rejecting any header other than [`TIMING_CSV_HEADER`].
pub fn read_timing_csv<R: Read>(input: R) -> Result<Vec<TimingRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let bad = |msg: String| Error::Parse {
        path: "timing csv".into(),
        message: msg,
    };
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    let header = header.iter().collect::<Vec<_>>().join(",");
    if header != TIMING_CSV_HEADER {
        return Err(bad(format!("header {header:?} does not match {TIMING_CSV_HEADER:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 10 {
            return Err(bad(format!("row {}: expected 10 fields, got {}", i + 1, rec.len())));
        }
        let int = |k: usize| -> Result<usize> {
            rec[k].parse().map_err(|_| bad(format!("row {}: field {k} not an integer: {:?}", i + 1, &rec[k])))
        };
        let real = |k: usize| -> Result<f64> {
            rec[k].parse().map_err(|_| bad(format!("row {}: field {k} not a number: {:?}", i + 1, &rec[k])))
        };
        let record = TimingRecord::new(
            rec[0].to_string(),
            int(1)?,
            int(2)?,
            int(3)?,
            (int(4)?, int(5)?, int(6)?),
            real(7)?,
        )?;
        rows.push(TimingRow {
            record,
            speedup: real(8)?,
            efficiency: real(9)?,
        });
    }
    Ok(rows)
}
