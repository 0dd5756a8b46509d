//! Structure-of-arrays batch of independent tri-diagonal systems.
//!
//! Diagonal `d` of member `b` at row `i` lives at `d[i * count + b]`, so the
//! elimination sweeps rows in the outer loop and members in the stride-1
//! inner loop.

use std::ops::Range;

use num_complex::Complex64;

use super::{Topology, TriDiagSystem, PIVOT_FLOOR};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SolveBatch {
    n: usize,
    count: usize,
    topology: Topology,
    sub: Vec<Complex64>,
    main: Vec<Complex64>,
    sup: Vec<Complex64>,
    rhs: Vec<Complex64>,
}

impl SolveBatch {
    /// Packs systems sharing one size and topology.
    pub fn from_systems(systems: &[TriDiagSystem]) -> Result<Self> {
        let first = systems
            .first()
            .ok_or_else(|| Error::Shape("empty batch".into()))?;
        let n = first.n();
        let topology = first.topology;
        let off = match topology {
            Topology::Open => n - 1,
            Topology::Cyclic => n,
        };
        let count = systems.len();
        let mut batch = Self {
            n,
            count,
            topology,
            sub: vec![ZERO; off * count],
            main: vec![ZERO; n * count],
            sup: vec![ZERO; off * count],
            rhs: vec![ZERO; n * count],
        };
        for (b, sys) in systems.iter().enumerate() {
            sys.check()?;
            if sys.n() != n || sys.topology != topology {
                return Err(Error::Shape(format!(
                    "batch member {b} is {:?} n = {}, batch is {topology:?} n = {n}",
                    sys.topology,
                    sys.n()
                )));
            }
            for i in 0..n {
                batch.main[i * count + b] = sys.main[i];
                batch.rhs[i * count + b] = sys.rhs[i];
            }
            for i in 0..off {
                batch.sub[i * count + b] = sys.sub[i];
                batch.sup[i * count + b] = sys.sup[i];
            }
        }
        Ok(batch)
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Unpacks member `b`.
    pub fn member(&self, b: usize) -> TriDiagSystem {
        let off = self.sub.len() / self.count;
        let pick = |v: &[Complex64], len: usize| (0..len).map(|i| v[i * self.count + b]).collect();
        TriDiagSystem {
            sub: pick(&self.sub, off),
            main: pick(&self.main, self.n),
            sup: pick(&self.sup, off),
            rhs: pick(&self.rhs, self.n),
            topology: self.topology,
        }
    }
}

/// Solves every member, splitting members into `parallel_hint` contiguous
/// blocks. Output is ordered by member index and bitwise equal to solving
/// each member with the scalar solver, for any hint.
pub fn solve_batch(batch: &SolveBatch, parallel_hint: usize) -> Result<Vec<Vec<Complex64>>> {
    if batch.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    let workers = parallel_hint.clamp(1, batch.count);
    let blocks = batch_ranges(batch.count, workers);
    let outcomes: Vec<Result<Vec<Complex64>, (usize, Error)>> = if workers == 1 {
        blocks.iter().map(|r| solve_block(batch, r.clone())).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = blocks
                .iter()
                .map(|r| {
                    let r = r.clone();
                    scope.spawn(move || solve_block(batch, r))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("batch worker panicked"))
                .collect()
        })
    };

    let mut solutions = Vec::with_capacity(batch.count);
    for (range, outcome) in blocks.iter().zip(outcomes) {
        // blocks are in member order, so the first failure is the lowest index
        let block = outcome.map_err(|(member, err)| Error::BatchMember {
            member,
            source: Box::new(err),
        })?;
        let w = range.len();
        for k in 0..w {
            solutions.push((0..batch.n).map(|i| block[i * w + k]).collect());
        }
    }
    Ok(solutions)
}

/// Splits `0..len` into `blocks` contiguous ranges whose sizes differ by at
/// most one, larger blocks first. Empty ranges are dropped.
pub fn batch_ranges(len: usize, blocks: usize) -> Vec<Range<usize>> {
    let blocks = blocks.max(1);
    let base = len / blocks;
    let extra = len % blocks;
    let mut start = 0;
    (0..blocks)
        .map(|b| {
            let size = base + usize::from(b < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .filter(|r| !r.is_empty())
        .collect()
}

/// Interleaved open factors for the lanes of one block.
struct BlockFactor {
    width: usize,
    upper: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

/// Mirrors `ThomasFactor::new` lane by lane. `main_at(i, k)` yields the main
/// diagonal; the first failing row per lane is recorded in `failed`.
fn factor_block(
    batch: &SolveBatch,
    lanes: &Range<usize>,
    main_at: impl Fn(usize, usize) -> Complex64,
    failed: &mut [Option<Error>],
) -> BlockFactor {
    let (n, count, w) = (batch.n, batch.count, lanes.len());
    let mut upper = vec![ZERO; (n - 1) * w];
    let mut inv_pivot = vec![ZERO; n * w];
    for i in 0..n {
        for k in 0..w {
            let b = lanes.start + k;
            let pivot = if i == 0 {
                main_at(0, k)
            } else {
                main_at(i, k) - batch.sub[(i - 1) * count + b] * upper[(i - 1) * w + k]
            };
            if !(pivot.norm() >= PIVOT_FLOOR) && failed[k].is_none() {
                failed[k] = Some(Error::Singular {
                    index: i,
                    pivot: pivot.norm(),
                });
            }
            let inv = pivot.inv();
            inv_pivot[i * w + k] = inv;
            if i + 1 < n {
                upper[i * w + k] = batch.sup[i * count + b] * inv;
            }
        }
    }
    BlockFactor {
        width: w,
        upper,
        inv_pivot,
    }
}

/// Mirrors `ThomasFactor::solve_in_place` on interleaved data.
#[allow(clippy::needless_range_loop)]
fn solve_with(batch: &SolveBatch, lanes: &Range<usize>, f: &BlockFactor, d: &mut [Complex64]) {
    let (n, count, w) = (batch.n, batch.count, f.width);
    for k in 0..w {
        d[k] *= f.inv_pivot[k];
    }
    for i in 1..n {
        for k in 0..w {
            let s = batch.sub[(i - 1) * count + lanes.start + k];
            d[i * w + k] = (d[i * w + k] - s * d[(i - 1) * w + k]) * f.inv_pivot[i * w + k];
        }
    }
    for i in (0..n - 1).rev() {
        for k in 0..w {
            d[i * w + k] -= f.upper[i * w + k] * d[(i + 1) * w + k];
        }
    }
}

fn solve_block(
    batch: &SolveBatch,
    lanes: Range<usize>,
) -> Result<Vec<Complex64>, (usize, Error)> {
    let (n, count, w) = (batch.n, batch.count, lanes.len());
    let mut failed: Vec<Option<Error>> = (0..w).map(|_| None).collect();
    let mut d: Vec<Complex64> = (0..n)
        .flat_map(|i| batch.rhs[i * count + lanes.start..i * count + lanes.end].iter().copied())
        .collect();

    match batch.topology {
        Topology::Open => {
            let f = factor_block(batch, &lanes, |i, k| batch.main[i * count + lanes.start + k], &mut failed);
            first_failure(&lanes, &mut failed)?;
            solve_with(batch, &lanes, &f, &mut d);
        }
        Topology::Cyclic => {
            // mirrors CyclicFactor::new / solve_in_place lane by lane
            let lane = |k: usize| lanes.start + k;
            let top_right: Vec<Complex64> =
                (0..w).map(|k| batch.sub[(n - 1) * count + lane(k)]).collect();
            let bottom_left: Vec<Complex64> =
                (0..w).map(|k| batch.sup[(n - 1) * count + lane(k)]).collect();
            let gamma: Vec<Complex64> = (0..w)
                .map(|k| {
                    let m0 = batch.main[lane(k)];
                    if m0.norm() > 0.0 {
                        -m0
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                })
                .collect();
            let reduced = |i: usize, k: usize| {
                let m = batch.main[i * count + lane(k)];
                if i == 0 {
                    m - gamma[k]
                } else if i == n - 1 {
                    m - top_right[k] * bottom_left[k] / gamma[k]
                } else {
                    m
                }
            };
            let f = factor_block(batch, &lanes, reduced, &mut failed);
            first_failure(&lanes, &mut failed)?;

            let mut z = vec![ZERO; n * w];
            for k in 0..w {
                z[k] = gamma[k];
                z[(n - 1) * w + k] = bottom_left[k];
            }
            solve_with(batch, &lanes, &f, &mut z);

            let mut ratio = vec![ZERO; w];
            let mut inv_denominator = vec![ZERO; w];
            for k in 0..w {
                ratio[k] = top_right[k] / gamma[k];
                let denominator = 1.0 + z[k] + ratio[k] * z[(n - 1) * w + k];
                if !(denominator.norm() >= PIVOT_FLOOR) {
                    failed[k] = Some(Error::Singular {
                        index: n - 1,
                        pivot: denominator.norm(),
                    });
                }
                inv_denominator[k] = denominator.inv();
            }
            first_failure(&lanes, &mut failed)?;

            solve_with(batch, &lanes, &f, &mut d);
            let t: Vec<Complex64> = (0..w)
                .map(|k| (d[k] + ratio[k] * d[(n - 1) * w + k]) * inv_denominator[k])
                .collect();
            for i in 0..n {
                for k in 0..w {
                    d[i * w + k] -= t[k] * z[i * w + k];
                }
            }
        }
    }
    Ok(d)
}

fn first_failure(lanes: &Range<usize>, failed: &mut [Option<Error>]) -> Result<(), (usize, Error)> {
    match failed.iter_mut().position(|f| f.is_some()) {
        Some(k) => Err((lanes.start + k, failed[k].take().expect("present"))),
        None => Ok(()),
    }
}
