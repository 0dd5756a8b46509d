//! Cylindrical discretization of the marching domain.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the azimuth axis closes on itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AzimuthTopology {
    /// Full circle; index `n_azimuth` wraps back to 0.
    Periodic,
    /// Open sector with pressure-release edges.
    Sector,
}

/// Range/azimuth/depth grid. Depth index 0 is the sea surface; azimuth index
/// `m` sits at `m * delta_theta`; range index `j` sits at `r_start + j * delta_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    pub n_range: usize,
    pub n_azimuth: usize,
    pub n_depth: usize,
    /// meters
    pub delta_r: f64,
    /// radians
    pub delta_theta: f64,
    /// meters
    pub delta_z: f64,
    /// First marching range in meters, strictly positive.
    pub r_start: f64,
    pub azimuth_topology: AzimuthTopology,
}

impl Grid3D {
    /// Checks every structural constraint of the grid.
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("n_range >= 3", self.n_range),
            ("n_azimuth >= 3", self.n_azimuth),
            ("n_depth >= 3", self.n_depth),
        ] {
            if n < 3 {
                return Err(Error::invariant(name, format!("got {n}")));
            }
        }
        for (name, v) in [
            ("delta_r > 0", self.delta_r),
            ("delta_theta > 0", self.delta_theta),
            ("delta_z > 0", self.delta_z),
            ("r_start > 0", self.r_start),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invariant(name, format!("got {v}")));
            }
        }
        if self.azimuth_topology == AzimuthTopology::Periodic {
            let span = self.n_azimuth as f64 * self.delta_theta;
            if ((span - TAU) / TAU).abs() > 1e-9 {
                return Err(Error::invariant(
                    "n_azimuth * delta_theta = 2*pi (periodic)",
                    format!(
                        "{} * {} rad = {span} rad",
                        self.n_azimuth, self.delta_theta
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn range(&self, j: usize) -> f64 {
        self.r_start + j as f64 * self.delta_r
    }

    pub fn azimuth(&self, m: usize) -> f64 {
        m as f64 * self.delta_theta
    }

    pub fn depth(&self, l: usize) -> f64 {
        l as f64 * self.delta_z
    }

    /// Depth of the last grid row.
    pub fn bottom_depth(&self) -> f64 {
        self.depth(self.n_depth - 1)
    }

    /// Range of the last grid column.
    pub fn max_range(&self) -> f64 {
        self.range(self.n_range - 1)
    }

    pub fn slab_len(&self) -> usize {
        self.n_azimuth * self.n_depth
    }

    /// Whether `theta` lies inside the azimuthal extent.
    pub fn contains_azimuth(&self, theta: f64) -> bool {
        match self.azimuth_topology {
            AzimuthTopology::Periodic => theta.is_finite(),
            AzimuthTopology::Sector => {
                let last = self.azimuth(self.n_azimuth - 1);
                theta >= -1e-12 && theta <= last + 1e-12 * last.max(1.0)
            }
        }
    }
}
