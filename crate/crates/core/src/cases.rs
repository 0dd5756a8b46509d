//! Programmatic construction of homogeneous-water problems, for tests,
//! benchmarks and the self-test suite.

use std::f64::consts::TAU;
use std::path::PathBuf;

use crate::config::{Problem, RunOptions, Mode, TlFormat};
use crate::env::{Absorber, Bathymetry, Environment, Interpolation, SoundSpeedField, SourceSpec, StarterKind};
use crate::error::Result;
use crate::grid::{AzimuthTopology, Grid3D};
use crate::parallel::ExecutorSpec;

/// Isovelocity water over the full grid depth.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousCase {
    pub n_range: usize,
    pub n_azimuth: usize,
    pub n_depth: usize,
    /// meters
    pub delta_r: f64,
    /// meters
    pub delta_z: f64,
    /// meters; `None` uses `delta_r`
    pub r_start: Option<f64>,
    pub topology: AzimuthTopology,
    /// radians; only read for a sector
    pub sector_delta_theta: f64,
    pub frequencies: Vec<f64>,
    /// meters
    pub source_depth: f64,
    /// m/s
    pub speed: f64,
    pub absorber: Absorber,
    pub output_stride: usize,
    pub tl_format: TlFormat,
    pub executor: ExecutorSpec,
    pub max_range: Option<f64>,
}

impl HomogeneousCase {
    /// Periodic azimuth, 50 Hz, source at a quarter of the depth span and an
    /// absorber over the bottom fifth.
    pub fn new(n_range: usize, n_azimuth: usize, n_depth: usize, delta_r: f64, delta_z: f64) -> Self {
        let bottom = (n_depth.max(2) - 1) as f64 * delta_z;
        Self {
            n_range,
            n_azimuth,
            n_depth,
            delta_r,
            delta_z,
            r_start: None,
            topology: AzimuthTopology::Periodic,
            sector_delta_theta: 1.0_f64.to_radians(),
            frequencies: vec![50.0],
            source_depth: 0.25 * bottom,
            speed: 1500.0,
            absorber: Absorber {
                start_depth: 0.8 * bottom,
                max_attenuation: 0.01,
            },
            output_stride: 1,
            tl_format: TlFormat::Csv,
            executor: ExecutorSpec::default(),
            max_range: None,
        }
    }

    pub fn grid(&self) -> Grid3D {
        let delta_theta = match self.topology {
            AzimuthTopology::Periodic => TAU / self.n_azimuth as f64,
            AzimuthTopology::Sector => self.sector_delta_theta,
        };
        Grid3D {
            n_range: self.n_range,
            n_azimuth: self.n_azimuth,
            n_depth: self.n_depth,
            delta_r: self.delta_r,
            delta_theta,
            delta_z: self.delta_z,
            r_start: self.r_start.unwrap_or(self.delta_r),
            azimuth_topology: self.topology,
        }
    }

    /// The validated problem.
    pub fn build(&self) -> Result<Problem> {
        let grid = self.grid();
        let problem = Problem {
            environment: Environment {
                reference_speed: self.speed,
                sound_speed: SoundSpeedField::new(
                    vec![crate::env::SoundSpeedProfile::homogeneous(self.speed)?],
                    Interpolation::LinearDepth,
                )?,
                water_depth: Bathymetry::Flat(grid.bottom_depth()),
                absorber: self.absorber,
            },
            source: SourceSpec {
                frequencies: self.frequencies.clone(),
                depth: self.source_depth,
                starter: StarterKind::Gaussian,
            },
            options: RunOptions {
                mode: Mode::Run,
                output_dir: PathBuf::from("out"),
                output_stride: self.output_stride,
                tl_format: self.tl_format,
                executor: self.executor,
                max_range: self.max_range,
            },
            grid,
        };
        problem.validate()?;
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_case_is_valid() {
        let p = HomogeneousCase::new(5, 8, 101, 10.0, 2.0).build().unwrap();
        assert_eq!(p.step_count(), 4);
        assert_eq!(p.grid.r_start, 10.0);
        assert!((p.grid.n_azimuth as f64 * p.grid.delta_theta - TAU).abs() < 1e-12);
    }

    #[test]
    fn sector_case_is_valid() {
        let mut c = HomogeneousCase::new(5, 8, 101, 10.0, 2.0);
        c.topology = AzimuthTopology::Sector;
        c.build().unwrap();
    }
}
