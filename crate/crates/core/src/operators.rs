//! Difference operators of the split wide-angle step and the assembly of
//! its two tri-diagonal systems.
//!
//! With `delta = i k0 dr`, one range step solves
//!
//! ```text
//! [I + (1/4 - delta/4) X][I - (delta/4) Y] u' = [I + (1/4 + delta/4) X][I + (delta/4) Y] u
//! ```
//!
//! where, on a depth column, `X u = (n^2 - 1) u + (k0 dz)^-2 D2z u`, and on an
//! azimuth row, `Y u = (k0 r dtheta)^-2 D2theta u`. `D2` is the three-point
//! second difference with zero exterior values (periodic wrap in azimuth when
//! the grid is a full circle).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::AzimuthTopology;
use crate::slab::FieldSlab;
use crate::tridiag::TriDiagSystem;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bracket coefficients of one range step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    /// meters; zero is allowed and yields the identity step.
    pub delta_r: f64,
    /// `i k0 dr`
    pub delta: Complex64,
    /// `1/4 - delta/4`
    pub cx_lhs: Complex64,
    /// `1/4 + delta/4`
    pub cx_rhs: Complex64,
    /// `-delta/4`
    pub cy_lhs: Complex64,
    /// `+delta/4`
    pub cy_rhs: Complex64,
}

impl StepCoefficients {
    pub fn new(k0: f64, delta_r: f64) -> Result<Self> {
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::Domain(format!("k0 must be > 0, got {k0}")));
        }
        if !(delta_r >= 0.0 && delta_r.is_finite()) {
            return Err(Error::Domain(format!("delta_r must be >= 0, got {delta_r}")));
        }
        let delta = Complex64::new(0.0, k0 * delta_r);
        let quarter = Complex64::new(0.25, 0.0);
        let d4 = delta / 4.0;
        Ok(Self {
            delta_r,
            delta,
            cx_lhs: quarter - d4,
            cx_rhs: quarter + d4,
            cy_lhs: -d4,
            cy_rhs: d4,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Depth,
    Azimuth,
}

/// One direction of the split operator: a scaled second difference plus a
/// pointwise term.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorStencil {
    pub direction: Direction,
    /// `1/(k0 dz)^2` for depth, `1/(k0 r dtheta)^2` for azimuth.
    pub second_difference_scale: f64,
    /// `n^2 - 1` per depth point; empty (identically zero) for azimuth.
    pub local_term: Vec<Complex64>,
    pub periodic: bool,
}

impl OperatorStencil {
    pub fn depth(n_column: &[Complex64], k0: f64, delta_z: f64) -> Result<Self> {
        check_positive("k0", k0)?;
        check_positive("delta_z", delta_z)?;
        Ok(Self {
            direction: Direction::Depth,
            second_difference_scale: depth_scale(k0, delta_z),
            local_term: n_column.iter().map(|n| n * n - 1.0).collect(),
            periodic: false,
        })
    }

    pub fn azimuth(k0: f64, r: f64, delta_theta: f64, topology: AzimuthTopology) -> Result<Self> {
        check_positive("k0", k0)?;
        check_positive("r", r)?;
        check_positive("delta_theta", delta_theta)?;
        Ok(Self {
            direction: Direction::Azimuth,
            second_difference_scale: azimuth_scale(k0, r, delta_theta),
            local_term: Vec::new(),
            periodic: topology == AzimuthTopology::Periodic,
        })
    }

    /// Matrix-free application.
    pub fn apply(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        if u.len() < 3 {
            return Err(Error::Shape(format!("stencil needs >= 3 points, got {}", u.len())));
        }
        if !self.local_term.is_empty() && self.local_term.len() != u.len() {
            return Err(Error::Shape(format!(
                "vector length {} vs local term {}",
                u.len(),
                self.local_term.len()
            )));
        }
        let s = self.second_difference_scale;
        Ok((0..u.len())
            .map(|i| {
                let lap = second_difference(u, i, self.periodic) * s;
                match self.local_term.get(i) {
                    Some(t) => t * u[i] + lap,
                    None => lap,
                }
            })
            .collect())
    }

    /// `I + coeff * op` as a tri-diagonal matrix carrying `rhs`.
    pub fn assemble(&self, coeff: Complex64, rhs: Vec<Complex64>) -> Result<TriDiagSystem> {
        let n = rhs.len();
        if n < 3 && self.periodic {
            return Err(Error::Shape("periodic system needs n >= 3".into()));
        }
        if !self.local_term.is_empty() && self.local_term.len() != n {
            return Err(Error::Shape(format!("rhs {n} vs local term {}", self.local_term.len())));
        }
        let off = coeff * self.second_difference_scale;
        let main = if self.local_term.is_empty() {
            vec![identity_plus_diagonal(coeff, ZERO, self.second_difference_scale); n]
        } else {
            self.local_term
                .iter()
                .map(|t| identity_plus_diagonal(coeff, *t, self.second_difference_scale))
                .collect()
        };
        if self.periodic {
            TriDiagSystem::cyclic(vec![off; n], main, vec![off; n], rhs)
        } else {
            TriDiagSystem::open(vec![off; n - 1], main, vec![off; n - 1], rhs)
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be > 0, got {v}")))
    }
}

pub(crate) fn depth_scale(k0: f64, delta_z: f64) -> f64 {
    let kdz = k0 * delta_z;
    1.0 / (kdz * kdz)
}

pub(crate) fn azimuth_scale(k0: f64, r: f64, delta_theta: f64) -> f64 {
    let krt = k0 * r * delta_theta;
    1.0 / (krt * krt)
}

/// Main diagonal entry of `I + coeff * (local + scale * D2)`.
#[inline]
pub(crate) fn identity_plus_diagonal(coeff: Complex64, local: Complex64, scale: f64) -> Complex64 {
    ONE + coeff * (local - 2.0 * scale)
}

/// `(u[i+1] + u[i-1]) - 2 u[i]` with zero exterior values, or wrap-around.
#[inline]
fn second_difference(u: &[Complex64], i: usize, periodic: bool) -> Complex64 {
    let n = u.len();
    let (below, above) = if periodic {
        (u[(i + n - 1) % n], u[(i + 1) % n])
    } else {
        (
            if i > 0 { u[i - 1] } else { ZERO },
            if i + 1 < n { u[i + 1] } else { ZERO },
        )
    };
    (above + below) - 2.0 * u[i]
}

/// Depth operator `X` applied to one column.
pub fn apply_x(
    column: &[Complex64],
    n_column: &[Complex64],
    k0: f64,
    delta_z: f64,
) -> Result<Vec<Complex64>> {
    if column.len() != n_column.len() {
        return Err(Error::Shape(format!(
            "column {} vs refraction column {}",
            column.len(),
            n_column.len()
        )));
    }
    OperatorStencil::depth(n_column, k0, delta_z)?.apply(column)
}

/// Azimuth operator `Y` applied to one row.
pub fn apply_y(
    row: &[Complex64],
    k0: f64,
    r: f64,
    delta_theta: f64,
    topology: AzimuthTopology,
) -> Result<Vec<Complex64>> {
    OperatorStencil::azimuth(k0, r, delta_theta, topology)?.apply(row)
}

/// `A = I + coeff X` for one azimuth column, open topology.
pub fn assemble_depth_system(
    coeff: Complex64,
    n_column: &[Complex64],
    k0: f64,
    delta_z: f64,
    rhs_column: Vec<Complex64>,
) -> Result<TriDiagSystem> {
    if rhs_column.len() != n_column.len() {
        return Err(Error::Shape(format!(
            "rhs {} vs refraction column {}",
            rhs_column.len(),
            n_column.len()
        )));
    }
    OperatorStencil::depth(n_column, k0, delta_z)?.assemble(coeff, rhs_column)
}

/// `B = I + coeff Y` for one depth row; cyclic when the azimuth wraps.
pub fn assemble_azimuth_system(
    coeff: Complex64,
    k0: f64,
    r: f64,
    delta_theta: f64,
    topology: AzimuthTopology,
    rhs_row: Vec<Complex64>,
) -> Result<TriDiagSystem> {
    OperatorStencil::azimuth(k0, r, delta_theta, topology)?.assemble(coeff, rhs_row)
}

/// Everything the right-hand side needs besides the field: the current range
/// and the `n^2 - 1` column seen by each azimuth.
#[derive(Debug, Clone)]
pub struct RhsContext<'a> {
    pub k0: f64,
    /// current range r^j, meters
    pub r: f64,
    pub delta_z: f64,
    pub delta_theta: f64,
    pub topology: AzimuthTopology,
    /// `n^2 - 1` per azimuth index
    pub medium: Vec<&'a [Complex64]>,
}

/// Writes column `m` of `u + coeff Y u` into `out`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn y_factor_column(
    u: &[Complex64],
    n_azimuth: usize,
    n_depth: usize,
    m: usize,
    coeff: Complex64,
    scale: f64,
    periodic: bool,
    out: &mut [Complex64],
) {
    let col = &u[m * n_depth..(m + 1) * n_depth];
    let prev = if m > 0 {
        Some(&u[(m - 1) * n_depth..m * n_depth])
    } else if periodic {
        Some(&u[(n_azimuth - 1) * n_depth..])
    } else {
        None
    };
    let next = if m + 1 < n_azimuth {
        Some(&u[(m + 1) * n_depth..(m + 2) * n_depth])
    } else if periodic {
        Some(&u[..n_depth])
    } else {
        None
    };
    for l in 0..n_depth {
        let below = prev.map_or(ZERO, |p| p[l]);
        let above = next.map_or(ZERO, |p| p[l]);
        let lap = ((above + below) - 2.0 * col[l]) * scale;
        out[l] = col[l] + coeff * lap;
    }
}

/// Writes `v + coeff X v` for one depth column into `out`.
pub(crate) fn x_factor_column(
    v: &[Complex64],
    local: &[Complex64],
    coeff: Complex64,
    scale: f64,
    out: &mut [Complex64],
) {
    let n = v.len();
    for l in 0..n {
        let below = if l > 0 { v[l - 1] } else { ZERO };
        let above = if l + 1 < n { v[l + 1] } else { ZERO };
        let lap = ((above + below) - 2.0 * v[l]) * scale;
        out[l] = v[l] + coeff * (local[l] * v[l] + lap);
    }
}

fn check_context(u: &FieldSlab, ctx: &RhsContext<'_>) -> Result<()> {
    if ctx.medium.len() != u.n_azimuth() {
        return Err(Error::Shape(format!(
            "{} medium columns for {} azimuths",
            ctx.medium.len(),
            u.n_azimuth()
        )));
    }
    if let Some(bad) = ctx.medium.iter().position(|c| c.len() != u.n_depth()) {
        return Err(Error::Shape(format!("medium column {bad} has wrong length")));
    }
    if u.n_azimuth() < 3 || u.n_depth() < 3 {
        return Err(Error::Shape("slab must be at least 3x3".into()));
    }
    check_positive("r", ctx.r)?;
    Ok(())
}

/// Explicit side of the step: `[I + cx_rhs X][I + cy_rhs Y] u`, the azimuth
/// factor applied first (row-wise), the depth factor second (column-wise).
pub fn compute_rhs(u: &FieldSlab, coeffs: &StepCoefficients, ctx: &RhsContext<'_>) -> Result<FieldSlab> {
    check_context(u, ctx)?;
    let (na, nd) = (u.n_azimuth(), u.n_depth());
    let periodic = ctx.topology == AzimuthTopology::Periodic;
    let y_scale = azimuth_scale(ctx.k0, ctx.r, ctx.delta_theta);
    let x_scale = depth_scale(ctx.k0, ctx.delta_z);
    let mut temp = vec![ZERO; na * nd];
    for (m, out) in temp.chunks_exact_mut(nd).enumerate() {
        y_factor_column(u.values(), na, nd, m, coeffs.cy_rhs, y_scale, periodic, out);
    }
    let mut rhs = FieldSlab::zeros(na, nd, u.range);
    for m in 0..na {
        x_factor_column(
            &temp[m * nd..(m + 1) * nd],
            ctx.medium[m],
            coeffs.cx_rhs,
            x_scale,
            rhs.column_mut(m),
        );
    }
    Ok(rhs)
}
