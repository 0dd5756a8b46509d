//! The three subcommands. Each returns a process exit status and writes its
//! human-readable report to the supplied streams.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pe3d::parallel::{scaling_harness, HarnessOutcome};
use pe3d::{frequency_farm, parse_config, Error, Problem, Result, TlFormat, Topology};

use crate::kernel_bench::{kernel_benchmark, kernel_csv, kernel_table, DEFAULT_BATCH_SIZES};
use crate::output::{
    render_tl_binary, render_tl_csv, sha256_hex, tl_file_name, write_file, Manifest, ManifestFailure,
    ManifestTiming,
};
use crate::selftest::{run_selftest, SelftestOptions};

/// Default intra-step thread count when no flag is given.
pub const THREADS_ENV: &str = "PE3D_THREADS";
/// Default frequency worker count when no flag is given.
pub const WORKERS_ENV: &str = "PE3D_WORKERS";

pub const EXIT_OK: i32 = 0;
/// Some frequencies or benchmark runs failed; the rest were written.
pub const EXIT_PARTIAL: i32 = 1;
/// Nothing was computed: bad configuration, arguments or output location.
pub const EXIT_USAGE: i32 = 2;

/// Values taken from the process environment, injectable for tests.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnvDefaults {
    pub threads: Option<String>,
    pub workers: Option<String>,
}

impl EnvDefaults {
    pub fn from_process() -> Self {
        Self {
            threads: std::env::var(THREADS_ENV).ok(),
            workers: std::env::var(WORKERS_ENV).ok(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOverrides {
    pub threads: Option<usize>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub stride: Option<usize>,
    pub tl_format: Option<TlFormat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub threads_sweep: Vec<usize>,
    pub workers_sweep: Vec<usize>,
    pub repeats: usize,
    pub output: Option<PathBuf>,
    /// Kernel micro-benchmark batch sizes; empty skips it.
    pub kernel_batch_sizes: Vec<usize>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            threads_sweep: vec![1],
            workers_sweep: vec![1],
            repeats: 3,
            output: None,
            kernel_batch_sizes: DEFAULT_BATCH_SIZES.to_vec(),
        }
    }
}

/// Flag, then environment variable, then configuration value.
pub fn resolve_count(flag: Option<usize>, env_value: Option<&str>, env_name: &str, configured: usize) -> Result<usize> {
    let value = match (flag, env_value) {
        (Some(v), _) => v,
        (None, Some(text)) => text.trim().parse().map_err(|_| {
            Error::Domain(format!("{env_name}={text:?} is not a positive integer"))
        })?,
        (None, None) => configured,
    };
    if value < 1 {
        return Err(Error::invariant("counts >= 1", format!("resolved 0 from {env_name} or flag")));
    }
    Ok(value)
}

/// Reads and validates a configuration, returning it with the digest of the
/// exact bytes read.
pub fn load_problem(path: &Path) -> Result<(Problem, String)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        message: "configuration is not UTF-8".into(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let problem = parse_config(&text, base, path)?;
    Ok((problem, sha256_hex(&bytes)))
}

fn apply_overrides(problem: &mut Problem, o: &RunOverrides, env: &EnvDefaults) -> Result<()> {
    let ex = &mut problem.options.executor;
    ex.intra_threads = resolve_count(o.threads, env.threads.as_deref(), THREADS_ENV, ex.intra_threads)?;
    ex.freq_workers = resolve_count(o.workers, env.workers.as_deref(), WORKERS_ENV, ex.freq_workers)?;
    if let Some(dir) = &o.output {
        problem.options.output_dir = dir.clone();
    }
    if let Some(stride) = o.stride {
        problem.options.output_stride = stride;
    }
    if let Some(format) = o.tl_format {
        problem.options.tl_format = format;
    }
    problem.validate()
}

fn format_name(f: TlFormat) -> &'static str {
    match f {
        TlFormat::Csv => "csv",
        TlFormat::Binary => "binary",
    }
}

/// `run`: solves every configured frequency and writes one TL file per
/// frequency plus `manifest.json` into the output directory.
pub fn cmd_run(config: &Path, overrides: &RunOverrides, env: &EnvDefaults, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let prepared = load_problem(config).and_then(|(mut p, digest)| {
        apply_overrides(&mut p, overrides, env)?;
        Ok((p, digest))
    });
    let (problem, digest) = match prepared {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let dir = problem.options.output_dir.clone();
    if let Err(e) = fs::create_dir_all(&dir) {
        let _ = writeln!(err, "error: cannot create output directory {}: {e}", dir.display());
        return EXIT_USAGE;
    }

    let started = Instant::now();
    let freqs = problem.source.frequencies.clone();
    let farm = match frequency_farm(&problem, &freqs, &problem.options.executor) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };

    let stride = problem.options.output_stride;
    let format = problem.options.tl_format;
    let mut files = Vec::new();
    let mut timings = Vec::new();
    let mut failures = Vec::new();
    for (i, result) in farm.results.iter().enumerate() {
        match result {
            Ok(r) => {
                let bytes = match format {
                    TlFormat::Csv => render_tl_csv(r, &problem.grid, stride).into_bytes(),
                    TlFormat::Binary => render_tl_binary(r, &problem.grid, stride),
                };
                let name = tl_file_name(i, r.frequency, format);
                match write_file(&dir, &name, &bytes, Some(r.frequency)) {
                    Ok(entry) => {
                        let _ = writeln!(
                            out,
                            "{:>10} Hz  {} samples  {:.3} s  -> {}{}",
                            r.frequency,
                            r.ranges.len(),
                            r.wall_seconds,
                            dir.join(&name).display(),
                            if r.clamped > 0 {
                                format!("  ({} samples at the TL floor)", r.clamped)
                            } else {
                                String::new()
                            }
                        );
                        files.push(entry);
                        timings.push(ManifestTiming {
                            frequency_hz: r.frequency,
                            wall_s: r.wall_seconds,
                        });
                    }
                    Err(e) => failures.push(ManifestFailure {
                        frequency_hz: r.frequency,
                        error: e.to_string(),
                    }),
                }
            }
            Err(f) => failures.push(ManifestFailure {
                frequency_hz: f.frequency,
                error: f.message.clone(),
            }),
        }
    }

    let manifest = Manifest {
        tool: "pe3d".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_path: config.display().to_string(),
        config_sha256: digest,
        intra_threads: problem.options.executor.intra_threads,
        freq_workers: problem.options.executor.freq_workers,
        tl_format: format_name(format).into(),
        output_stride: stride,
        files,
        timings,
        failures: failures.clone(),
        total_wall_s: started.elapsed().as_secs_f64(),
    };
    if let Err(e) = manifest.write(&dir) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_PARTIAL;
    }
    for f in &failures {
        let _ = writeln!(err, "failed {} Hz: {}", f.frequency_hz, f.error);
    }
    if failures.is_empty() {
        EXIT_OK
    } else {
        let _ = writeln!(err, "{} of {} frequencies failed", failures.len(), freqs.len());
        EXIT_PARTIAL
    }
}

/// `bench`: timing sweep over (threads, workers), summary table, timing CSV
/// and the kernel micro-benchmark.
pub fn cmd_bench(config: &Path, options: &BenchOptions, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (mut problem, _) = match load_problem(config) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(dir) = &options.output {
        problem.options.output_dir = dir.clone();
    }
    let dir = problem.options.output_dir.clone();
    if let Err(e) = fs::create_dir_all(&dir) {
        let _ = writeln!(err, "error: cannot create output directory {}: {e}", dir.display());
        return EXIT_USAGE;
    }
    let harness = match scaling_harness(&problem, &options.threads_sweep, &options.workers_sweep, options.repeats) {
        Ok(h) => h,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let status = match write_bench_reports(&harness, &dir, out) {
        Ok(()) => {
            if harness.voided.is_empty() {
                EXIT_OK
            } else {
                EXIT_PARTIAL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_PARTIAL
        }
    };

    if !options.kernel_batch_sizes.is_empty() {
        let mut samples = Vec::new();
        let mut cases = vec![(Topology::Open, problem.grid.n_depth)];
        if problem.grid.azimuth_topology == pe3d::AzimuthTopology::Periodic {
            cases.push((Topology::Cyclic, problem.grid.n_azimuth));
        }
        for (topology, n) in cases {
            match kernel_benchmark(n.max(3), &options.kernel_batch_sizes, topology, 2048, 7) {
                Ok(s) => samples.extend(s),
                Err(e) => {
                    let _ = writeln!(err, "kernel benchmark ({topology:?}, n={n}) failed: {e}");
                }
            }
        }
        let _ = writeln!(out, "\ntri-diagonal kernel throughput\n{}", kernel_table(&samples));
        let path = dir.join("kernel.csv");
        if let Err(e) = fs::write(&path, kernel_csv(&samples)) {
            let _ = writeln!(err, "error: {}", Error::io(&path, e));
            return EXIT_PARTIAL;
        }
    }
    status
}

fn write_bench_reports(harness: &HarnessOutcome, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let summary = harness.summary_table();
    let _ = write!(out, "{summary}");
    let csv_path = dir.join("timing.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    harness.write_csv(file)?;
    let txt_path = dir.join("summary.txt");
    fs::write(&txt_path, &summary).map_err(|e| Error::io(&txt_path, e))?;
    let _ = writeln!(out, "wrote {} and {}", csv_path.display(), txt_path.display());
    Ok(())
}

/// `selftest`: runs the bundled property suite and prints one line per
/// property.
pub fn cmd_selftest(options: &SelftestOptions, out: &mut dyn Write) -> i32 {
    let report = run_selftest(options);
    let _ = write!(out, "{}", report.render());
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    }
}
