use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid3D;

/// Complex field on one (azimuth x depth) slice at a fixed range.
///
/// Storage is row-major by azimuth: the depth column for azimuth index `m`
/// occupies `values[m * n_depth..(m + 1) * n_depth]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSlab {
    n_azimuth: usize,
    n_depth: usize,
    values: Vec<Complex64>,
    /// meters
    pub range: f64,
}

impl FieldSlab {
    pub fn zeros(n_azimuth: usize, n_depth: usize, range: f64) -> Self {
        Self {
            n_azimuth,
            n_depth,
            values: vec![Complex64::new(0.0, 0.0); n_azimuth * n_depth],
            range,
        }
    }

    pub fn for_grid(grid: &Grid3D, range: f64) -> Self {
        Self::zeros(grid.n_azimuth, grid.n_depth, range)
    }

    pub fn from_values(
        n_azimuth: usize,
        n_depth: usize,
        values: Vec<Complex64>,
        range: f64,
    ) -> Result<Self> {
        if values.len() != n_azimuth * n_depth {
            return Err(Error::Shape(format!(
                "{} values for a {n_azimuth}x{n_depth} slab",
                values.len()
            )));
        }
        Ok(Self {
            n_azimuth,
            n_depth,
            values,
            range,
        })
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    pub fn n_depth(&self) -> usize {
        self.n_depth
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn get(&self, m: usize, l: usize) -> Complex64 {
        self.values[m * self.n_depth + l]
    }

    pub fn set(&mut self, m: usize, l: usize, v: Complex64) {
        self.values[m * self.n_depth + l] = v;
    }

    /// Depth column at azimuth index `m`.
    pub fn column(&self, m: usize) -> &[Complex64] {
        &self.values[m * self.n_depth..(m + 1) * self.n_depth]
    }

    pub fn column_mut(&mut self, m: usize) -> &mut [Complex64] {
        &mut self.values[m * self.n_depth..(m + 1) * self.n_depth]
    }

    /// Copy of the azimuth row at depth index `l`.
    pub fn row(&self, l: usize) -> Vec<Complex64> {
        (0..self.n_azimuth).map(|m| self.get(m, l)).collect()
    }

    pub fn check_grid(&self, grid: &Grid3D) -> Result<()> {
        if self.n_azimuth != grid.n_azimuth || self.n_depth != grid.n_depth {
            return Err(Error::Shape(format!(
                "slab is {}x{}, grid is {}x{}",
                self.n_azimuth, self.n_depth, grid.n_azimuth, grid.n_depth
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
