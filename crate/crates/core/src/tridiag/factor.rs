use num_complex::Complex64;

use super::PIVOT_FLOOR;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// LU factors of an open tri-diagonal matrix, reusable across right-hand sides.
///
/// The scalar and interleaved solves perform the same floating-point
/// operations per lane, so their results agree bitwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ThomasFactor {
    sub: Vec<Complex64>,
    /// `sup[i] / pivot[i]`
    upper: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

impl ThomasFactor {
    pub fn new(sub: &[Complex64], main: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = main.len();
        if n == 0 || sub.len() < n - 1 || sup.len() < n - 1 {
            return Err(Error::Shape(format!(
                "factor: main {n}, sub {}, sup {}",
                sub.len(),
                sup.len()
            )));
        }
        let mut upper = vec![ZERO; n.saturating_sub(1)];
        let mut inv_pivot = vec![ZERO; n];
        let mut pivot = main[0];
        for i in 0..n {
            if i > 0 {
                pivot = main[i] - sub[i - 1] * upper[i - 1];
            }
            if !(pivot.norm() >= PIVOT_FLOOR) {
                return Err(Error::Singular {
                    index: i,
                    pivot: pivot.norm(),
                });
            }
            let inv = pivot.inv();
            inv_pivot[i] = inv;
            if i + 1 < n {
                upper[i] = sup[i] * inv;
            }
        }
        Ok(Self {
            sub: sub[..n - 1].to_vec(),
            upper,
            inv_pivot,
        })
    }

    pub fn n(&self) -> usize {
        self.inv_pivot.len()
    }

    /// Overwrites `d` with the solution of `A x = d`.
    pub fn solve_in_place(&self, d: &mut [Complex64]) {
        let n = self.n();
        debug_assert_eq!(d.len(), n);
        d[0] *= self.inv_pivot[0];
        for i in 1..n {
            d[i] = (d[i] - self.sub[i - 1] * d[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            d[i] -= self.upper[i] * d[i + 1];
        }
    }

    /// Solves `width` right-hand sides stored interleaved as
    /// `data[i * width + lane]`. The inner loops run stride-1 over lanes.
    pub fn solve_interleaved(&self, data: &mut [Complex64], width: usize) {
        let n = self.n();
        debug_assert_eq!(data.len(), n * width);
        if width == 0 {
            return;
        }
        let inv0 = self.inv_pivot[0];
        for v in &mut data[..width] {
            *v *= inv0;
        }
        for i in 1..n {
            let (head, tail) = data.split_at_mut(i * width);
            let prev = &head[(i - 1) * width..];
            let cur = &mut tail[..width];
            let (s, inv) = (self.sub[i - 1], self.inv_pivot[i]);
            for (c, p) in cur.iter_mut().zip(prev) {
                *c = (*c - s * *p) * inv;
            }
        }
        for i in (0..n - 1).rev() {
            let (head, tail) = data.split_at_mut((i + 1) * width);
            let cur = &mut head[i * width..];
            let next = &tail[..width];
            let u = self.upper[i];
            for (c, nx) in cur.iter_mut().zip(next) {
                *c -= u * *nx;
            }
        }
    }
}

/// Factors of a cyclic tri-diagonal matrix written as an open matrix plus a
/// rank-one term, `A = B + u v^T` with `u = (g, 0, .., 0, bl)` and
/// `v = (1, 0, .., 0, tr / g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicFactor {
    open: ThomasFactor,
    /// `B^{-1} u`
    z: Vec<Complex64>,
    /// `tr / g`
    ratio: Complex64,
    /// `1 / (1 + v^T z)`
    inv_denominator: Complex64,
}

impl CyclicFactor {
    /// `sub` and `sup` have length `n`; `sub[n-1]` is the top-right corner and
    /// `sup[n-1]` the bottom-left corner.
    pub fn new(sub: &[Complex64], main: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = main.len();
        if n < 3 || sub.len() != n || sup.len() != n {
            return Err(Error::Shape(format!(
                "cyclic factor: main {n}, sub {}, sup {}",
                sub.len(),
                sup.len()
            )));
        }
        let top_right = sub[n - 1];
        let bottom_left = sup[n - 1];
        let gamma = if main[0].norm() > 0.0 {
            -main[0]
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut reduced = main.to_vec();
        reduced[0] = main[0] - gamma;
        reduced[n - 1] = main[n - 1] - top_right * bottom_left / gamma;
        let open = ThomasFactor::new(&sub[..n - 1], &reduced, &sup[..n - 1])?;

        let mut z = vec![ZERO; n];
        z[0] = gamma;
        z[n - 1] = bottom_left;
        open.solve_in_place(&mut z);

        let ratio = top_right / gamma;
        let denominator = 1.0 + z[0] + ratio * z[n - 1];
        if !(denominator.norm() >= PIVOT_FLOOR) {
            return Err(Error::Singular {
                index: n - 1,
                pivot: denominator.norm(),
            });
        }
        Ok(Self {
            open,
            z,
            ratio,
            inv_denominator: denominator.inv(),
        })
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn solve_in_place(&self, d: &mut [Complex64]) {
        let n = self.n();
        self.open.solve_in_place(d);
        let t = (d[0] + self.ratio * d[n - 1]) * self.inv_denominator;
        for (x, z) in d.iter_mut().zip(&self.z) {
            *x -= t * *z;
        }
    }

    /// Interleaved counterpart of [`CyclicFactor::solve_in_place`].
    pub fn solve_interleaved(&self, data: &mut [Complex64], width: usize) {
        let n = self.n();
        self.open.solve_interleaved(data, width);
        let (first, rest) = data.split_at_mut(width);
        let last_start = (n - 2) * width;
        let mut t = vec![ZERO; width];
        for (lane, t) in t.iter_mut().enumerate() {
            *t = (first[lane] + self.ratio * rest[last_start + lane]) * self.inv_denominator;
        }
        for (row, chunk) in data.chunks_exact_mut(width).enumerate() {
            let z = self.z[row];
            for (x, t) in chunk.iter_mut().zip(&t) {
                *x -= *t * z;
            }
        }
    }
}
