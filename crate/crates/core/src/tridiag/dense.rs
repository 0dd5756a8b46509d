use num_complex::Complex64;

use super::TriDiagSystem;
use crate::error::{Error, Result};

/// Largest system the dense oracle accepts.
pub const DENSE_ORACLE_MAX_N: usize = 4096;

/// Forms the full matrix and solves it by Gaussian elimination with partial
/// pivoting. Reference solver for tests and the self-test.
pub fn dense_oracle_solve(sys: &TriDiagSystem) -> Result<Vec<Complex64>> {
    sys.check()?;
    let n = sys.n();
    if n > DENSE_ORACLE_MAX_N {
        return Err(Error::Domain(format!(
            "dense oracle limited to n <= {DENSE_ORACLE_MAX_N}, got {n}"
        )));
    }
    dense_solve(sys.to_dense(), sys.rhs.clone())
}

/// Solves a row-major dense system in place.
pub fn dense_solve(mut a: Vec<Complex64>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = b.len();
    if a.len() != n * n {
        return Err(Error::Shape(format!("{} entries for n = {n}", a.len())));
    }
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot_abs > scale * 1e-14 * n as f64) || pivot_abs == 0.0 {
            return Err(Error::Singular {
                index: col,
                pivot: pivot_abs,
            });
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let inv = a[col * n + col].inv();
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= factor * v;
            }
            let bc = b[col];
            b[r] -= factor * bc;
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(b)
}
