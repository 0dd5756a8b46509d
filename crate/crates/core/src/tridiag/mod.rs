//! Complex tri-diagonal direct solvers.
//!
//! Row `i` of an open system reads
//! `sub[i-1] x[i-1] + main[i] x[i] + sup[i] x[i+1] = rhs[i]`, with `sub` and
//! `sup` of length `n - 1`. A cyclic system appends the two wrap entries:
//! `sub[n-1]` couples row 0 to `x[n-1]` and `sup[n-1]` couples row `n-1` to
//! `x[0]`.
//!
//! Elimination never pivots. Pivots with modulus below [`PIVOT_FLOOR`] are
//! reported as [`Error::Singular`].

mod batch;
mod dense;
mod factor;
mod random;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use batch::{batch_ranges, solve_batch, SolveBatch};
pub use dense::{dense_oracle_solve, dense_solve, DENSE_ORACLE_MAX_N};
pub use factor::{CyclicFactor, ThomasFactor};
pub use random::random_dominant_system;

use crate::error::{Error, Result};

/// Smallest pivot modulus accepted by the elimination.
pub const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Open,
    Cyclic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriDiagSystem {
    pub sub: Vec<Complex64>,
    pub main: Vec<Complex64>,
    pub sup: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
    pub topology: Topology,
}

impl TriDiagSystem {
    pub fn open(
        sub: Vec<Complex64>,
        main: Vec<Complex64>,
        sup: Vec<Complex64>,
        rhs: Vec<Complex64>,
    ) -> Result<Self> {
        let sys = Self {
            sub,
            main,
            sup,
            rhs,
            topology: Topology::Open,
        };
        sys.check()?;
        Ok(sys)
    }

    pub fn cyclic(
        sub: Vec<Complex64>,
        main: Vec<Complex64>,
        sup: Vec<Complex64>,
        rhs: Vec<Complex64>,
    ) -> Result<Self> {
        let sys = Self {
            sub,
            main,
            sup,
            rhs,
            topology: Topology::Cyclic,
        };
        sys.check()?;
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.main.len()
    }

    /// Verifies the length rules for the declared topology.
    pub fn check(&self) -> Result<()> {
        let n = self.main.len();
        let off = match self.topology {
            Topology::Open => {
                if n < 1 {
                    return Err(Error::Shape("open system needs n >= 1".into()));
                }
                n - 1
            }
            Topology::Cyclic => {
                if n < 3 {
                    return Err(Error::Shape(format!("cyclic system needs n >= 3, got {n}")));
                }
                n
            }
        };
        if self.sub.len() != off || self.sup.len() != off || self.rhs.len() != n {
            return Err(Error::Shape(format!(
                "{:?} system with n = {n}: sub {}, sup {}, rhs {} (expected {off}, {off}, {n})",
                self.topology,
                self.sub.len(),
                self.sup.len(),
                self.rhs.len()
            )));
        }
        Ok(())
    }

    /// Top-right and bottom-left corner entries (zero for open systems).
    pub fn corners(&self) -> (Complex64, Complex64) {
        match self.topology {
            Topology::Open => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            Topology::Cyclic => {
                let n = self.n();
                (self.sub[n - 1], self.sup[n - 1])
            }
        }
    }

    /// Matrix-vector product `A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        assert_eq!(x.len(), n, "apply: vector length");
        let mut y: Vec<Complex64> = (0..n).map(|i| self.main[i] * x[i]).collect();
        for i in 0..n - 1 {
            y[i] += self.sup[i] * x[i + 1];
            y[i + 1] += self.sub[i] * x[i];
        }
        if self.topology == Topology::Cyclic {
            let (top_right, bottom_left) = self.corners();
            y[0] += top_right * x[n - 1];
            y[n - 1] += bottom_left * x[0];
        }
        y
    }

    /// Full `n x n` matrix, row-major.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.n();
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = self.main[i];
        }
        for i in 0..n - 1 {
            a[i * n + i + 1] = self.sup[i];
            a[(i + 1) * n + i] = self.sub[i];
        }
        if self.topology == Topology::Cyclic {
            let (top_right, bottom_left) = self.corners();
            a[n - 1] += top_right;
            a[(n - 1) * n] += bottom_left;
        }
        a
    }

    /// `||A x - rhs||_inf`.
    pub fn residual_inf(&self, x: &[Complex64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| (ax - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Thomas elimination for an open system.
pub fn solve_thomas(sys: &TriDiagSystem) -> Result<Vec<Complex64>> {
    sys.check()?;
    if sys.topology != Topology::Open {
        return Err(Error::Shape("solve_thomas expects an open system".into()));
    }
    let factor = ThomasFactor::new(&sys.sub, &sys.main, &sys.sup)?;
    let mut x = sys.rhs.clone();
    factor.solve_in_place(&mut x);
    Ok(x)
}

/// Cyclic system by Sherman-Morrison correction of two open solves.
pub fn solve_cyclic(sys: &TriDiagSystem) -> Result<Vec<Complex64>> {
    sys.check()?;
    if sys.topology != Topology::Cyclic {
        return Err(Error::Shape("solve_cyclic expects a cyclic system".into()));
    }
    let factor = CyclicFactor::new(&sys.sub, &sys.main, &sys.sup)?;
    let mut x = sys.rhs.clone();
    factor.solve_in_place(&mut x);
    Ok(x)
}

/// Dispatches on topology.
pub fn solve(sys: &TriDiagSystem) -> Result<Vec<Complex64>> {
    match sys.topology {
        Topology::Open => solve_thomas(sys),
        Topology::Cyclic => solve_cyclic(sys),
    }
}

#[cfg(test)]
mod tests;
