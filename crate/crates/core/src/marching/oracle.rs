//! Dense reference realization of one range step, built entry by entry from
//! the operator definitions and solved by Gaussian elimination. Independent of
//! the tri-diagonal path; only practical for small grids.

use num_complex::Complex64;

use super::apply_boundary;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::grid::{AzimuthTopology, Grid3D};
use crate::operators::StepCoefficients;
use crate::slab::FieldSlab;
use crate::tridiag::dense_solve;

/// Largest slab (azimuth x depth points) the dense step accepts.
pub const DENSE_STEP_MAX_POINTS: usize = 1024;

struct Dense {
    n: usize,
    a: Vec<Complex64>,
}

impl Dense {
    fn identity(n: usize) -> Self {
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, a }
    }

    fn add(&mut self, i: usize, j: usize, v: Complex64) {
        self.a[i * self.n + j] += v;
    }

    fn mul(&self, other: &Dense) -> Dense {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * other.a[k * n + j];
                }
            }
        }
        Dense { n, a: out }
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.a[i * n + j] * x[j]).sum())
            .collect()
    }
}

/// `I + coeff X` over the whole slab, with the medium sampled at range `r`.
fn depth_bracket(grid: &Grid3D, env: &Environment, k0: f64, r: f64, coeff: Complex64) -> Result<Dense> {
    let (na, nd) = (grid.n_azimuth, grid.n_depth);
    let s = 1.0 / (k0 * grid.delta_z).powi(2);
    let mut m_out = Dense::identity(na * nd);
    for m in 0..na {
        for l in 0..nd {
            let i = m * nd + l;
            let n = env.refraction_index(grid, r, grid.azimuth(m), grid.depth(l))?;
            m_out.add(i, i, coeff * (n * n - 1.0 - 2.0 * s));
            if l > 0 {
                m_out.add(i, i - 1, coeff * s);
            }
            if l + 1 < nd {
                m_out.add(i, i + 1, coeff * s);
            }
        }
    }
    Ok(m_out)
}

/// `I + coeff Y` over the whole slab at range `r`.
fn azimuth_bracket(grid: &Grid3D, k0: f64, r: f64, coeff: Complex64) -> Dense {
    let (na, nd) = (grid.n_azimuth, grid.n_depth);
    let s = 1.0 / (k0 * r * grid.delta_theta).powi(2);
    let periodic = grid.azimuth_topology == AzimuthTopology::Periodic;
    let mut m_out = Dense::identity(na * nd);
    for m in 0..na {
        for l in 0..nd {
            let i = m * nd + l;
            m_out.add(i, i, coeff * (-2.0 * s));
            let neighbours = [
                if m > 0 { Some(m - 1) } else if periodic { Some(na - 1) } else { None },
                if m + 1 < na { Some(m + 1) } else if periodic { Some(0) } else { None },
            ];
            for mm in neighbours.into_iter().flatten() {
                m_out.add(i, mm * nd + l, coeff * s);
            }
        }
    }
    m_out
}

/// One range step from index `step` computed densely: boundary, explicit
/// brackets at `r^j`, implicit brackets at `r^{j+1}`, Dirichlet rows for the
/// surface (and sector edges), dense solve, boundary.
pub fn dense_range_step(
    grid: &Grid3D,
    env: &Environment,
    k0: f64,
    coeffs: &StepCoefficients,
    slab: &FieldSlab,
    step: usize,
) -> Result<FieldSlab> {
    slab.check_grid(grid)?;
    let n = grid.slab_len();
    if n > DENSE_STEP_MAX_POINTS {
        return Err(Error::Domain(format!(
            "dense step limited to {DENSE_STEP_MAX_POINTS} points, got {n}"
        )));
    }
    let r_old = grid.r_start + step as f64 * coeffs.delta_r;
    let r_new = grid.r_start + (step + 1) as f64 * coeffs.delta_r;
    let mut u = slab.clone();
    apply_boundary(&mut u, grid);

    let rhs_op = depth_bracket(grid, env, k0, r_old, coeffs.cx_rhs)?
        .mul(&azimuth_bracket(grid, k0, r_old, coeffs.cy_rhs));
    let lhs_op = depth_bracket(grid, env, k0, r_new, coeffs.cx_lhs)?
        .mul(&azimuth_bracket(grid, k0, r_new, coeffs.cy_lhs));
    let mut rhs = rhs_op.apply(u.values());
    let mut lhs = lhs_op.a;
    // Dirichlet points become identity rows with a zero right-hand side.
    let (na, nd) = (grid.n_azimuth, grid.n_depth);
    let sector = grid.azimuth_topology == AzimuthTopology::Sector;
    for m in 0..na {
        for l in 0..nd {
            if l == 0 || (sector && (m == 0 || m == na - 1)) {
                let i = m * nd + l;
                lhs[i * n..(i + 1) * n].fill(Complex64::new(0.0, 0.0));
                lhs[i * n + i] = Complex64::new(1.0, 0.0);
                rhs[i] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let x = dense_solve(lhs, rhs)?;
    let mut out = FieldSlab::from_values(grid.n_azimuth, grid.n_depth, x, r_new)?;
    apply_boundary(&mut out, grid);
    Ok(out)
}
