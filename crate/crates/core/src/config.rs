//! TOML run configuration.
//!
//! ```toml
//! [grid]
//! n_range = 401
//! n_azimuth = 16
//! n_depth = 301
//! delta_r_m = 10.0
//! delta_theta_deg = 22.5          # optional when periodic: 360 / n_azimuth
//! delta_z_m = 2.0
//! r_start_m = 10.0                # optional, defaults to delta_r_m
//! azimuth_topology = "periodic"   # or "sector"
//!
//! [environment]
//! reference_speed_mps = 1500.0
//! water_depth_m = 600.0           # or a table [[range_m, depth_m], ...]
//! interpolation = "linear-depth"  # or "nearest"
//! sound_speed = [[0.0, 1500.0], [600.0, 1500.0]]   # (depth_m, speed_mps)
//! # sound_speed_file = "ssp.txt"  # two columns, relative to this file
//! # [[environment.profiles]]      # range/azimuth dependent profiles
//! # range_m = 0.0
//! # azimuth_deg = 0.0             # optional
//! # points = [[0.0, 1500.0]]      # or file = "..."
//!
//! [environment.absorber]
//! start_depth_m = 450.0
//! max_attenuation = 0.01
//!
//! [source]
//! frequencies_hz = [50.0]
//! depth_m = 100.0
//! starter = "gaussian"
//!
//! [run]                           # every key optional
//! mode = "run"                    # run | bench | selftest
//! output_dir = "out"
//! output_stride = 1               # default keeps <= 512 range samples
//! tl_format = "csv"               # csv | binary
//! intra_threads = 1
//! freq_workers = 1
//! pinning = "none"                # none | compact
//! scheduling = "static"           # static | dynamic
//! max_range_m = 4000.0            # stop marching before the grid end
//! ```
//!
//! Angles are degrees in the file and radians in memory.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::{
    Absorber, Bathymetry, Environment, Interpolation, SoundSpeedField, SoundSpeedProfile,
    SourceSpec, StarterKind,
};
use crate::error::{Error, Result};
use crate::grid::{AzimuthTopology, Grid3D};
use crate::parallel::{ExecutorSpec, Pinning, Scheduling};

/// Most range samples kept by the default output stride.
pub const DEFAULT_MAX_RANGE_SAMPLES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Run,
    Bench,
    Selftest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TlFormat {
    #[default]
    Csv,
    /// Compact binary grid.
    #[serde(alias = "binary-grid")]
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub mode: Mode,
    pub output_dir: PathBuf,
    /// Keep every k-th range step.
    pub output_stride: usize,
    pub tl_format: TlFormat,
    pub executor: ExecutorSpec,
    /// Marching stops once the range reaches this value (meters).
    pub max_range: Option<f64>,
}

/// A fully validated problem, with all environment data in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub grid: Grid3D,
    pub environment: Environment,
    pub source: SourceSpec,
    pub options: RunOptions,
}

impl Problem {
    /// Checks every constraint across the four sections.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.environment.validate(&self.grid)?;
        self.source.validate(&self.grid, &self.environment)?;
        self.options.executor.validate()?;
        if self.options.output_stride < 1 {
            return Err(Error::invariant("output_stride >= 1", "got 0"));
        }
        if let Some(max) = self.options.max_range {
            if !(max >= self.grid.r_start && max <= self.grid.max_range() + 1e-9 * max.abs()) {
                return Err(Error::invariant(
                    "r_start <= max_range <= grid max range",
                    format!("max_range {max} m, grid [{}, {}]", self.grid.r_start, self.grid.max_range()),
                ));
            }
        }
        Ok(())
    }

    /// Number of range steps the marcher will take.
    pub fn step_count(&self) -> usize {
        let limit = self.grid.n_range - 1;
        match self.options.max_range {
            None => limit,
            Some(max) => {
                let eps = 1e-9 * self.grid.delta_r;
                (0..=limit)
                    .take_while(|&j| self.grid.range(j) < max - eps)
                    .count()
                    .min(limit)
            }
        }
    }
}

/// Default stride keeping at most [`DEFAULT_MAX_RANGE_SAMPLES`] range samples.
pub fn default_output_stride(n_range: usize) -> usize {
    let steps = n_range.saturating_sub(1);
    steps.div_ceil(DEFAULT_MAX_RANGE_SAMPLES - 1).max(1)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: RawGrid,
    environment: RawEnvironment,
    source: RawSource,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n_range: usize,
    n_azimuth: usize,
    n_depth: usize,
    delta_r_m: f64,
    delta_theta_deg: Option<f64>,
    delta_z_m: f64,
    r_start_m: Option<f64>,
    azimuth_topology: AzimuthTopology,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    reference_speed_mps: f64,
    water_depth_m: Bathymetry,
    #[serde(default)]
    interpolation: Interpolation,
    sound_speed: Option<Vec<(f64, f64)>>,
    sound_speed_file: Option<PathBuf>,
    #[serde(default)]
    profiles: Vec<RawProfile>,
    absorber: RawAbsorber,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    range_m: f64,
    azimuth_deg: Option<f64>,
    points: Option<Vec<(f64, f64)>>,
    file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAbsorber {
    start_depth_m: f64,
    max_attenuation: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    frequencies_hz: Vec<f64>,
    depth_m: f64,
    #[serde(default)]
    starter: StarterKind,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default)]
    mode: Mode,
    output_dir: Option<PathBuf>,
    output_stride: Option<usize>,
    #[serde(default)]
    tl_format: TlFormat,
    intra_threads: Option<usize>,
    freq_workers: Option<usize>,
    #[serde(default)]
    pinning: Pinning,
    #[serde(default)]
    scheduling: Scheduling,
    max_range_m: Option<f64>,
}

/// Reads and validates a configuration file. Referenced profile files are
/// resolved relative to the configuration's directory and read immediately.
pub fn load_config(path: impl AsRef<Path>) -> Result<Problem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base, path)
}

/// Parses configuration text. `label` names the source in diagnostics.
pub fn parse_config(text: &str, base_dir: &Path, label: &Path) -> Result<Problem> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        path: label.to_path_buf(),
        message: e.to_string(),
    })?;

    let g = raw.grid;
    let delta_theta = match (g.delta_theta_deg, g.azimuth_topology) {
        (Some(deg), _) => deg.to_radians(),
        (None, AzimuthTopology::Periodic) if g.n_azimuth > 0 => TAU / g.n_azimuth as f64,
        (None, _) => {
            return Err(Error::invariant(
                "delta_theta_deg given for sector grids",
                "missing [grid].delta_theta_deg",
            ))
        }
    };
    let grid = Grid3D {
        n_range: g.n_range,
        n_azimuth: g.n_azimuth,
        n_depth: g.n_depth,
        delta_r: g.delta_r_m,
        delta_theta,
        delta_z: g.delta_z_m,
        r_start: g.r_start_m.unwrap_or(g.delta_r_m),
        azimuth_topology: g.azimuth_topology,
    };

    let e = raw.environment;
    let mut profiles = Vec::new();
    match (e.sound_speed, e.sound_speed_file) {
        (Some(points), None) => profiles.push(SoundSpeedProfile::new(0.0, None, &points)?),
        (None, Some(file)) => {
            profiles.push(SoundSpeedProfile::new(0.0, None, &read_profile_file(&base_dir.join(file))?)?)
        }
        (Some(_), Some(_)) => {
            return Err(Error::invariant(
                "one of sound_speed / sound_speed_file",
                "both given",
            ))
        }
        (None, None) => {}
    }
    for p in e.profiles {
        let points = match (p.points, p.file) {
            (Some(points), None) => points,
            (None, Some(file)) => read_profile_file(&base_dir.join(file))?,
            _ => {
                return Err(Error::invariant(
                    "profile has exactly one of points / file",
                    format!("profile at range {} m", p.range_m),
                ))
            }
        };
        profiles.push(SoundSpeedProfile::new(
            p.range_m,
            p.azimuth_deg.map(f64::to_radians),
            &points,
        )?);
    }
    let environment = Environment {
        reference_speed: e.reference_speed_mps,
        sound_speed: SoundSpeedField::new(profiles, e.interpolation)?,
        water_depth: e.water_depth_m,
        absorber: Absorber {
            start_depth: e.absorber.start_depth_m,
            max_attenuation: e.absorber.max_attenuation,
        },
    };

    let source = SourceSpec {
        frequencies: raw.source.frequencies_hz,
        depth: raw.source.depth_m,
        starter: raw.source.starter,
    };

    let r = raw.run;
    let options = RunOptions {
        mode: r.mode,
        output_dir: r.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        output_stride: r
            .output_stride
            .unwrap_or_else(|| default_output_stride(grid.n_range)),
        tl_format: r.tl_format,
        executor: ExecutorSpec {
            intra_threads: r.intra_threads.unwrap_or(1),
            freq_workers: r.freq_workers.unwrap_or(1),
            pinning: r.pinning,
            scheduling: r.scheduling,
        },
        max_range: r.max_range_m,
    };

    let problem = Problem {
        grid,
        environment,
        source,
        options,
    };
    problem.validate()?;
    Ok(problem)
}

/// Two-column `(depth_m, speed_mps)` text; whitespace or comma separated,
/// `#` starts a comment.
pub fn read_profile_file(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| s.parse::<f64>().ok();
        match fields.as_slice() {
            [z, c] => match (parse(z), parse(c)) {
                (Some(z), Some(c)) => rows.push((z, c)),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        message: format!("line {}: expected two numbers, got `{line}`", i + 1),
                    })
                }
            },
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {}: expected two columns, got `{line}`", i + 1),
                })
            }
        }
    }
    Ok(rows)
}
