use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use pe3d::TlFormat;

use crate::commands::{cmd_bench, cmd_run, cmd_selftest, BenchOptions, EnvDefaults, RunOverrides};
use crate::kernel_bench::DEFAULT_BATCH_SIZES;
use crate::selftest::{SelftestOptions, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "pe3d", version, about = "3-D wide-angle parabolic-equation propagation solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    #[value(alias = "binary-grid")]
    Binary,
}

impl From<FormatArg> for TlFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => TlFormat::Csv,
            FormatArg::Binary => TlFormat::Binary,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every configured frequency and write TL grids plus a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Threads inside each range step [env: PE3D_THREADS]
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        threads: Option<u64>,
        /// Concurrent frequency workers [env: PE3D_WORKERS]
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        workers: Option<u64>,
        /// Output directory (overrides the configuration)
        #[arg(long)]
        output: Option<PathBuf>,
        /// Keep every K-th range step
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        stride: Option<u64>,
        /// TL file layout
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Time the configured problem across thread and worker counts.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        threads_sweep: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        workers_sweep: Vec<usize>,
        /// Timed runs per configuration after one warm-up run
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Batch sizes for the kernel micro-benchmark; 0 alone skips it
        #[arg(long, value_delimiter = ',')]
        kernel_sizes: Option<Vec<usize>>,
    },
    /// Run the bundled invariant suite.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

/// Runs a parsed command line and returns the exit status.
pub fn dispatch(cli: Cli, env: &EnvDefaults, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Run {
            config,
            threads,
            workers,
            output,
            stride,
            format,
        } => {
            let overrides = RunOverrides {
                threads: threads.map(|v| v as usize),
                workers: workers.map(|v| v as usize),
                output,
                stride: stride.map(|v| v as usize),
                tl_format: format.map(Into::into),
            };
            cmd_run(&config, &overrides, env, out, err)
        }
        Command::Bench {
            config,
            threads_sweep,
            workers_sweep,
            repeats,
            output,
            kernel_sizes,
        } => {
            let kernel_batch_sizes = match kernel_sizes {
                Some(v) if v == [0] => Vec::new(),
                Some(v) => v,
                None => DEFAULT_BATCH_SIZES.to_vec(),
            };
            let options = BenchOptions {
                threads_sweep,
                workers_sweep,
                repeats,
                output,
                kernel_batch_sizes,
            };
            cmd_bench(&config, &options, out, err)
        }
        Command::Selftest { seed } => cmd_selftest(
            &SelftestOptions {
                seed,
                ..SelftestOptions::default()
            },
            out,
        ),
    }
}
