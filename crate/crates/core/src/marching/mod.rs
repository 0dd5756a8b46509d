//! Per-frequency range marching.
//!
//! Each step advances `u` from `r^j` to `r^{j+1}`: boundary values are
//! applied, the implicit matrices are rebuilt at `r^{j+1}`, the explicit side
//! is formed from `u^j`, one depth system is solved per azimuth (giving the
//! intermediate `v`), then one azimuth system per depth, and the boundary is
//! applied again.
//!
//! Boundary points (the surface row, and the edge columns of a sector) are
//! held at zero inside the solves: their rows are identity rows with a zero
//! right-hand side, so interior points see an exact zero neighbour. Solving
//! them as free unknowns and zeroing afterwards leaks an O(dr) value into the
//! neighbouring row every step and spoils the range accuracy of the scheme.

mod oracle;

pub use oracle::{dense_range_step, DENSE_STEP_MAX_POINTS};

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;

use crate::config::Problem;
use crate::env::{gaussian_starter, hankel_factor, transmission_loss, wavenumber, Environment, MediumTable};
use crate::error::{Error, Result};
use crate::grid::{AzimuthTopology, Grid3D};
use crate::operators::{
    azimuth_scale, depth_scale, identity_plus_diagonal, x_factor_column, y_factor_column,
    StepCoefficients,
};
use crate::parallel::IntraExecutor;
use crate::slab::FieldSlab;
use crate::tridiag::{CyclicFactor, ThomasFactor};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pressure-release surface, plus zero sector edges when the azimuth is open.
/// The bottom is left to the absorber and the stencil closure.
pub fn apply_boundary(slab: &mut FieldSlab, grid: &Grid3D) {
    let (na, nd) = (slab.n_azimuth(), slab.n_depth());
    for m in 0..na {
        slab.set(m, 0, ZERO);
    }
    if grid.azimuth_topology == AzimuthTopology::Sector {
        slab.column_mut(0).fill(ZERO);
        slab.column_mut(na - 1).fill(ZERO);
    }
    debug_assert_eq!(slab.values().len(), na * nd);
}

/// Marching state: the field `u^j` and its range index `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarchState {
    pub slab: FieldSlab,
    pub step: usize,
}

enum AzimuthFactor {
    Open(ThomasFactor),
    Cyclic(CyclicFactor),
}

impl AzimuthFactor {
    fn solve_interleaved(&self, data: &mut [Complex64], width: usize) {
        match self {
            AzimuthFactor::Open(f) => f.solve_interleaved(data, width),
            AzimuthFactor::Cyclic(f) => f.solve_interleaved(data, width),
        }
    }
}

/// Range-marching engine for one frequency.
pub struct Marcher<'a> {
    grid: &'a Grid3D,
    k0: f64,
    coeffs: StepCoefficients,
    medium: MediumTable,
    exec: &'a IntraExecutor,
}

impl<'a> Marcher<'a> {
    pub fn new(
        grid: &'a Grid3D,
        env: &Environment,
        k0: f64,
        coeffs: StepCoefficients,
        exec: &'a IntraExecutor,
    ) -> Self {
        Self {
            grid,
            k0,
            coeffs,
            medium: env.depth_table(grid),
            exec,
        }
    }

    pub fn coefficients(&self) -> &StepCoefficients {
        &self.coeffs
    }

    /// Range of index `j` under this marcher's step length.
    pub fn range_at(&self, j: usize) -> f64 {
        self.grid.r_start + j as f64 * self.coeffs.delta_r
    }

    fn medium_columns(&self, r: f64) -> Vec<&[Complex64]> {
        (0..self.grid.n_azimuth)
            .map(|m| self.medium.column(r, self.grid.azimuth(m)))
            .collect()
    }

    /// Advances `state` by one range step.
    pub fn range_step(&self, state: MarchState) -> Result<MarchState> {
        let grid = self.grid;
        if state.step + 1 >= grid.n_range {
            return Err(Error::Domain(format!(
                "step from index {} leaves a grid of {} ranges",
                state.step, grid.n_range
            )));
        }
        state.slab.check_grid(grid)?;
        let (na, nd) = (grid.n_azimuth, grid.n_depth);
        let j = state.step;
        let r_old = self.range_at(j);
        let r_new = self.range_at(j + 1);
        let periodic = grid.azimuth_topology == AzimuthTopology::Periodic;
        let c = &self.coeffs;

        let mut u = state.slab;
        apply_boundary(&mut u, grid);

        // [I + c (op)]^-1 [I + c (op)] = I when both sides see the same
        // coefficient, range and medium.
        let same_range = r_old == r_new;
        let x_cancels = same_range && c.cx_lhs == c.cx_rhs;
        let y_cancels = same_range && c.cy_lhs == c.cy_rhs;

        // implicit-side matrices at r^{j+1}
        let x_scale = depth_scale(self.k0, grid.delta_z);
        let new_medium = self.medium_columns(r_new);
        let old_medium = self.medium_columns(r_old);
        let depth_factors = if x_cancels {
            (Vec::new(), Vec::new())
        } else {
            self.depth_factors(&new_medium, x_scale, j)?
        };
        let azimuth_factor = if y_cancels {
            None
        } else {
            Some(self.azimuth_factor(r_new, periodic, j)?)
        };

        // explicit side: azimuth factor row-wise from u^j
        let mut work = if y_cancels {
            u.into_values()
        } else {
            let y_scale = azimuth_scale(self.k0, r_old, grid.delta_theta);
            let src = u.values();
            let mut out = vec![ZERO; na * nd];
            self.exec.for_each_column_block::<(), _>(&mut out, nd, |first, block| {
                for (k, col) in block.chunks_exact_mut(nd).enumerate() {
                    y_factor_column(src, na, nd, first + k, c.cy_rhs, y_scale, periodic, col);
                }
                Vec::new()
            });
            out
        };

        // depth factor column-wise, then one depth solve per azimuth: v^{j+1}
        if !x_cancels {
            let (factors, index_of) = &depth_factors;
            let mut scratch = vec![ZERO; na * nd];
            std::mem::swap(&mut scratch, &mut work);
            let temp = scratch;
            self.exec.for_each_column_block::<(), _>(&mut work, nd, |first, block| {
                for (k, col) in block.chunks_exact_mut(nd).enumerate() {
                    let m = first + k;
                    x_factor_column(&temp[m * nd..(m + 1) * nd], old_medium[m], c.cx_rhs, x_scale, col);
                    col[0] = ZERO;
                    factors[index_of[m]].solve_in_place(col);
                }
                Vec::new()
            });
        }

        // one azimuth solve per depth: u^{j+1}
        if let Some(factor) = &azimuth_factor {
            if !periodic {
                work[..nd].fill(ZERO);
                work[(na - 1) * nd..].fill(ZERO);
            }
            self.solve_azimuth(factor, &mut work);
        }

        let mut next = FieldSlab::from_values(na, nd, work, r_new)?;
        apply_boundary(&mut next, grid);
        Ok(MarchState {
            slab: next,
            step: j + 1,
        })
    }

    /// Factors of `I + cx_lhs X` for each distinct medium column.
    #[allow(clippy::type_complexity)]
    fn depth_factors(
        &self,
        medium: &[&[Complex64]],
        x_scale: f64,
        j: usize,
    ) -> Result<(Vec<ThomasFactor>, Vec<usize>)> {
        let mut seen: BTreeMap<*const Complex64, usize> = BTreeMap::new();
        let mut factors = Vec::new();
        let mut index_of = Vec::with_capacity(medium.len());
        let coeff = self.coeffs.cx_lhs;
        let off = coeff * x_scale;
        for (m, col) in medium.iter().enumerate() {
            let key = col.as_ptr();
            let idx = match seen.get(&key) {
                Some(&i) => i,
                None => {
                    let mut main: Vec<Complex64> = col
                        .iter()
                        .map(|t| identity_plus_diagonal(coeff, *t, x_scale))
                        .collect();
                    let sub = vec![off; main.len() - 1];
                    let mut sup = sub.clone();
                    // surface row: u = 0
                    main[0] = ONE;
                    sup[0] = ZERO;
                    let f = ThomasFactor::new(&sub, &main, &sup).map_err(|e| Error::Step {
                        step: j,
                        location: format!("depth system, azimuth index m = {m}"),
                        source: Box::new(e),
                    })?;
                    factors.push(f);
                    seen.insert(key, factors.len() - 1);
                    factors.len() - 1
                }
            };
            index_of.push(idx);
        }
        Ok((factors, index_of))
    }

    fn azimuth_factor(&self, r_new: f64, periodic: bool, j: usize) -> Result<AzimuthFactor> {
        let na = self.grid.n_azimuth;
        let y_scale = azimuth_scale(self.k0, r_new, self.grid.delta_theta);
        let coeff = self.coeffs.cy_lhs;
        let main = vec![identity_plus_diagonal(coeff, ZERO, y_scale); na];
        let off = coeff * y_scale;
        let wrap = |e: Error| Error::Step {
            step: j,
            location: "azimuth systems, depth index l = 0".into(),
            source: Box::new(e),
        };
        if periodic {
            let offs = vec![off; na];
            CyclicFactor::new(&offs, &main, &offs)
                .map(AzimuthFactor::Cyclic)
                .map_err(wrap)
        } else {
            // sector edges: u = 0
            let mut main = main;
            let mut sub = vec![off; na - 1];
            let mut sup = sub.clone();
            main[0] = ONE;
            main[na - 1] = ONE;
            sup[0] = ZERO;
            sub[na - 2] = ZERO;
            ThomasFactor::new(&sub, &main, &sup)
                .map(AzimuthFactor::Open)
                .map_err(wrap)
        }
    }

    /// Every depth row shares the azimuth matrix, so the slab (azimuth-major)
    /// is already an interleaved batch with one lane per depth index.
    fn solve_azimuth(&self, factor: &AzimuthFactor, work: &mut [Complex64]) {
        let (na, nd) = (self.grid.n_azimuth, self.grid.n_depth);
        if self.exec.threads() == 1 {
            factor.solve_interleaved(work, nd);
            return;
        }
        let src: &[Complex64] = work;
        let strips = self.exec.map_blocks(nd, |lanes| {
            let w = lanes.len();
            let mut strip = Vec::with_capacity(na * w);
            for m in 0..na {
                strip.extend_from_slice(&src[m * nd + lanes.start..m * nd + lanes.end]);
            }
            factor.solve_interleaved(&mut strip, w);
            strip
        });
        self.exec.for_each_column_block::<(), _>(work, nd, |first, block| {
            for (k, row) in block.chunks_exact_mut(nd).enumerate() {
                let m = first + k;
                for (lanes, strip) in &strips {
                    let w = lanes.len();
                    row[lanes.clone()].copy_from_slice(&strip[m * w..(m + 1) * w]);
                }
            }
            Vec::new()
        });
    }
}

/// Output of one frequency run.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResult {
    /// Hz
    pub frequency: f64,
    /// Ranges of the stored samples, meters.
    pub ranges: Vec<f64>,
    pub n_azimuth: usize,
    pub n_depth: usize,
    /// TL in dB, indexed `[(sample * n_azimuth + m) * n_depth + l]`.
    pub tl: Vec<f64>,
    /// Samples held at the TL floor.
    pub clamped: usize,
    pub final_slab: FieldSlab,
    pub wall_seconds: f64,
}

impl FrequencyResult {
    pub fn tl_at(&self, sample: usize, m: usize, l: usize) -> f64 {
        self.tl[(sample * self.n_azimuth + m) * self.n_depth + l]
    }

    /// Equality of everything except the wall time.
    pub fn same_field(&self, other: &Self) -> bool {
        self.frequency.to_bits() == other.frequency.to_bits()
            && self.ranges == other.ranges
            && self.n_azimuth == other.n_azimuth
            && self.n_depth == other.n_depth
            && self.clamped == other.clamped
            && self.final_slab == other.final_slab
            && self.tl.len() == other.tl.len()
            && self.tl.iter().zip(&other.tl).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn push_tl(
    slab: &FieldSlab,
    k0: f64,
    tl: &mut Vec<f64>,
    ranges: &mut Vec<f64>,
    clamped: &mut usize,
) -> Result<()> {
    let w = hankel_factor(k0, slab.range)?;
    ranges.push(slab.range);
    for v in slab.values() {
        let s = transmission_loss(*v, w);
        *clamped += usize::from(s.clamped);
        tl.push(s.db);
    }
    Ok(())
}

/// Marches one frequency from the starter to the configured maximum range,
/// storing TL every `output_stride` steps (the starter is always stored).
pub fn run_frequency(problem: &Problem, frequency: f64, exec: &IntraExecutor) -> Result<FrequencyResult> {
    let started = Instant::now();
    let grid = &problem.grid;
    let env = &problem.environment;
    let k0 = wavenumber(frequency, env.reference_speed)?;
    let coeffs = StepCoefficients::new(k0, grid.delta_r)?;
    let marcher = Marcher::new(grid, env, k0, coeffs, exec);
    let stride = problem.options.output_stride.max(1);
    let steps = problem.step_count();

    let mut state = MarchState {
        slab: gaussian_starter(grid, &problem.source, k0)?,
        step: 0,
    };
    apply_boundary(&mut state.slab, grid);

    let samples = steps / stride + 1;
    let mut tl = Vec::with_capacity(samples * grid.slab_len());
    let mut ranges = Vec::with_capacity(samples);
    let mut clamped = 0;
    push_tl(&state.slab, k0, &mut tl, &mut ranges, &mut clamped)?;
    for _ in 0..steps {
        state = marcher.range_step(state)?;
        if state.step % stride == 0 {
            push_tl(&state.slab, k0, &mut tl, &mut ranges, &mut clamped)?;
        }
    }
    Ok(FrequencyResult {
        frequency,
        ranges,
        n_azimuth: grid.n_azimuth,
        n_depth: grid.n_depth,
        tl,
        clamped,
        final_slab: state.slab,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests;
