//! Ocean environment, source description and the pointwise physics used by
//! the marcher: wavenumber, refraction index, starter field, Hankel envelope
//! and transmission loss.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid3D;
use crate::slab::FieldSlab;

/// Transmission loss assigned to zero-magnitude samples, in dB.
pub const TL_FLOOR_DB: f64 = 300.0;

/// Sanity bounds for sampled sound speeds, m/s (exclusive).
pub const SPEED_BOUNDS: (f64, f64) = (100.0, 100_000.0);

/// How sound speed is read between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Piecewise-linear in depth, nearest profile in range and azimuth.
    #[default]
    LinearDepth,
    /// Nearest sample in depth, range and azimuth.
    Nearest,
}

/// A depth profile of sound speed taken at one range (and optionally one azimuth).
#[derive(Debug, Clone, PartialEq)]
pub struct SoundSpeedProfile {
    /// meters
    pub range: f64,
    /// radians; `None` applies to every azimuth.
    pub azimuth: Option<f64>,
    depths: Vec<f64>,
    speeds: Vec<f64>,
}

impl SoundSpeedProfile {
    /// Builds a profile from `(depth_m, speed_mps)` pairs. Depths must be
    /// strictly increasing.
    pub fn new(range: f64, azimuth: Option<f64>, samples: &[(f64, f64)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invariant(
                "sound speed profile non-empty",
                format!("profile at r = {range} m has no samples"),
            ));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invariant(
                "profile depths strictly increasing",
                format!("profile at r = {range} m"),
            ));
        }
        for &(z, c) in samples {
            if !(c > SPEED_BOUNDS.0 && c < SPEED_BOUNDS.1) {
                return Err(Error::invariant(
                    "100 < sound speed < 100000 m/s",
                    format!("c = {c} at z = {z} m, r = {range} m"),
                ));
            }
        }
        Ok(Self {
            range,
            azimuth,
            depths: samples.iter().map(|s| s.0).collect(),
            speeds: samples.iter().map(|s| s.1).collect(),
        })
    }

    pub fn homogeneous(speed: f64) -> Result<Self> {
        Self::new(0.0, None, &[(0.0, speed)])
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.depths.iter().copied().zip(self.speeds.iter().copied())
    }

    /// Sound speed at depth `z`; held constant outside the sampled interval.
    pub fn speed_at(&self, z: f64, interpolation: Interpolation) -> f64 {
        let n = self.depths.len();
        if n == 1 || z <= self.depths[0] {
            return self.speeds[0];
        }
        if z >= self.depths[n - 1] {
            return self.speeds[n - 1];
        }
        // first index with depth > z; 1..n-1 here
        let hi = self.depths.partition_point(|&d| d <= z);
        let lo = hi - 1;
        let (z0, z1) = (self.depths[lo], self.depths[hi]);
        match interpolation {
            Interpolation::LinearDepth => {
                let t = (z - z0) / (z1 - z0);
                self.speeds[lo] + t * (self.speeds[hi] - self.speeds[lo])
            }
            Interpolation::Nearest => {
                if z - z0 <= z1 - z {
                    self.speeds[lo]
                } else {
                    self.speeds[hi]
                }
            }
        }
    }
}

/// Sampled sound-speed field c(r, theta, z).
#[derive(Debug, Clone, PartialEq)]
pub struct SoundSpeedField {
    profiles: Vec<SoundSpeedProfile>,
    pub interpolation: Interpolation,
}

impl SoundSpeedField {
    pub fn new(profiles: Vec<SoundSpeedProfile>, interpolation: Interpolation) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::invariant(
                "at least one sound speed profile",
                "no profiles given",
            ));
        }
        Ok(Self {
            profiles,
            interpolation,
        })
    }

    pub fn homogeneous(speed: f64) -> Result<Self> {
        Self::new(
            vec![SoundSpeedProfile::homogeneous(speed)?],
            Interpolation::default(),
        )
    }

    pub fn profiles(&self) -> &[SoundSpeedProfile] {
        &self.profiles
    }

    /// Index of the profile governing `(r, theta)`: nearest in range, then
    /// nearest in azimuth among profiles at that range.
    pub fn profile_index(&self, r: f64, theta: f64) -> usize {
        if self.profiles.len() == 1 {
            return 0;
        }
        let key = |p: &SoundSpeedProfile| {
            let dr = (p.range - r).abs();
            let dtheta = p.azimuth.map_or(0.0, |a| angular_distance(a, theta));
            (dr, dtheta)
        };
        let mut best = 0;
        let mut best_key = key(&self.profiles[0]);
        for (i, p) in self.profiles.iter().enumerate().skip(1) {
            let k = key(p);
            if k.0 < best_key.0 || (k.0 == best_key.0 && k.1 < best_key.1) {
                best = i;
                best_key = k;
            }
        }
        best
    }

    pub fn speed(&self, r: f64, theta: f64, z: f64) -> f64 {
        self.profiles[self.profile_index(r, theta)].speed_at(z, self.interpolation)
    }
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Water depth D(r, theta). Lookup only; range tables use the nearest entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bathymetry {
    Flat(f64),
    /// `(range_m, depth_m)` pairs.
    RangeTable(Vec<(f64, f64)>),
}

impl Bathymetry {
    pub fn depth_at(&self, r: f64, _theta: f64) -> f64 {
        match self {
            Bathymetry::Flat(d) => *d,
            Bathymetry::RangeTable(rows) => rows
                .iter()
                .min_by(|a, b| (a.0 - r).abs().total_cmp(&(b.0 - r).abs()))
                .map_or(f64::NAN, |row| row.1),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Bathymetry::Flat(d) => *d > 0.0,
            Bathymetry::RangeTable(rows) => {
                !rows.is_empty() && rows.iter().all(|&(r, d)| r >= 0.0 && d > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invariant("water depth > 0", format!("{self:?}")))
        }
    }
}

/// Attenuating layer above the grid bottom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Absorber {
    /// meters
    pub start_depth: f64,
    /// Imaginary part of the refraction index reached at the grid bottom.
    pub max_attenuation: f64,
}

impl Absorber {
    /// Im(n) at depth `z`: zero above the layer, quadratic ramp to
    /// `max_attenuation` at `bottom`.
    pub fn attenuation(&self, z: f64, bottom: f64) -> f64 {
        if z <= self.start_depth {
            return 0.0;
        }
        let t = ((z - self.start_depth) / (bottom - self.start_depth)).min(1.0);
        self.max_attenuation * t * t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    /// c0, m/s
    pub reference_speed: f64,
    pub sound_speed: SoundSpeedField,
    pub water_depth: Bathymetry,
    pub absorber: Absorber,
}

impl Environment {
    pub fn validate(&self, grid: &Grid3D) -> Result<()> {
        if !(self.reference_speed > 0.0 && self.reference_speed.is_finite()) {
            return Err(Error::invariant(
                "reference_speed > 0",
                format!("got {}", self.reference_speed),
            ));
        }
        self.water_depth.validate()?;
        if !(self.absorber.start_depth < grid.bottom_depth()) {
            return Err(Error::invariant(
                "absorber.start_depth < grid bottom depth",
                format!(
                    "start {} m, bottom {} m",
                    self.absorber.start_depth,
                    grid.bottom_depth()
                ),
            ));
        }
        if !(self.absorber.max_attenuation >= 0.0 && self.absorber.max_attenuation.is_finite()) {
            return Err(Error::invariant(
                "absorber.max_attenuation >= 0",
                format!("got {}", self.absorber.max_attenuation),
            ));
        }
        Ok(())
    }

    /// Complex refraction index at a point inside the grid domain.
    /// `Re(n) = c0 / c`, `Im(n)` follows the absorber ramp.
    pub fn refraction_index(
        &self,
        grid: &Grid3D,
        r: f64,
        theta: f64,
        z: f64,
    ) -> Result<Complex64> {
        let bottom = grid.bottom_depth();
        let eps = 1e-9 * bottom.max(grid.max_range());
        if !(r >= 0.0 && r <= grid.max_range() + eps) {
            return Err(Error::Domain(format!("range {r} m outside [0, {}]", grid.max_range())));
        }
        if !(z >= -eps && z <= bottom + eps) {
            return Err(Error::Domain(format!("depth {z} m outside [0, {bottom}]")));
        }
        if !grid.contains_azimuth(theta) {
            return Err(Error::Domain(format!("azimuth {theta} rad outside sector")));
        }
        Ok(self.index_unchecked(r, theta, z, bottom))
    }

    fn index_unchecked(&self, r: f64, theta: f64, z: f64, bottom: f64) -> Complex64 {
        let c = self.sound_speed.speed(r, theta, z);
        Complex64::new(
            self.reference_speed / c,
            self.absorber.attenuation(z, bottom),
        )
    }

    /// Precomputes `n^2 - 1` on the grid's depth rows for each profile.
    pub fn depth_table(&self, grid: &Grid3D) -> MediumTable {
        let bottom = grid.bottom_depth();
        let columns = self
            .sound_speed
            .profiles
            .iter()
            .map(|p| {
                (0..grid.n_depth)
                    .map(|l| {
                        let z = grid.depth(l);
                        let c = p.speed_at(z, self.sound_speed.interpolation);
                        let n = Complex64::new(
                            self.reference_speed / c,
                            self.absorber.attenuation(z, bottom),
                        );
                        n * n - 1.0
                    })
                    .collect()
            })
            .collect();
        MediumTable {
            columns,
            field: self.sound_speed.clone(),
        }
    }
}

/// `n^2 - 1` depth columns for every sound-speed profile, looked up by
/// `(r, theta)` with the field's nearest-profile rule.
#[derive(Debug, Clone)]
pub struct MediumTable {
    columns: Vec<Vec<Complex64>>,
    field: SoundSpeedField,
}

impl MediumTable {
    pub fn column(&self, r: f64, theta: f64) -> &[Complex64] {
        &self.columns[self.field.profile_index(r, theta)]
    }

    /// True when every azimuth and range sees the same column.
    pub fn is_uniform(&self) -> bool {
        self.columns.windows(2).all(|w| w[0] == w[1])
    }
}

/// Source starter shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StarterKind {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    /// Hz
    pub frequencies: Vec<f64>,
    /// meters below the surface
    pub depth: f64,
    pub starter: StarterKind,
}

impl SourceSpec {
    pub fn validate(&self, grid: &Grid3D, env: &Environment) -> Result<()> {
        if self.frequencies.is_empty() {
            return Err(Error::invariant(
                "at least one source frequency",
                "empty list",
            ));
        }
        if let Some(f) = self.frequencies.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
            return Err(Error::invariant("frequency > 0", format!("got {f} Hz")));
        }
        let water = env.water_depth.depth_at(0.0, 0.0);
        if !(self.depth > 0.0 && self.depth < water) {
            return Err(Error::invariant(
                "0 < source depth < water depth at r = 0",
                format!("z_s = {} m, water depth {water} m", self.depth),
            ));
        }
        if self.depth >= grid.bottom_depth() {
            return Err(Error::invariant(
                "source depth inside the depth grid",
                format!("z_s = {} m, bottom {} m", self.depth, grid.bottom_depth()),
            ));
        }
        Ok(())
    }
}

/// Reference wavenumber `k0 = 2 pi f / c0`.
pub fn wavenumber(frequency: f64, reference_speed: f64) -> Result<f64> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::Domain(format!("frequency must be > 0, got {frequency}")));
    }
    if !(reference_speed > 0.0 && reference_speed.is_finite()) {
        return Err(Error::Domain(format!(
            "reference speed must be > 0, got {reference_speed}"
        )));
    }
    Ok(2.0 * PI * frequency / reference_speed)
}

/// Gaussian starter `sqrt(k0) exp(-(k0^2 / 2)(z - z_s)^2)`, identical in every
/// azimuth, with the surface row forced to zero.
pub fn gaussian_starter(grid: &Grid3D, source: &SourceSpec, k0: f64) -> Result<FieldSlab> {
    if !(source.depth > 0.0 && source.depth < grid.bottom_depth()) {
        return Err(Error::Domain(format!(
            "source depth {} m not inside (0, {})",
            source.depth,
            grid.bottom_depth()
        )));
    }
    let amp = k0.sqrt();
    let column: Vec<Complex64> = (0..grid.n_depth)
        .map(|l| {
            if l == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let d = grid.depth(l) - source.depth;
            Complex64::new(amp * (-0.5 * k0 * k0 * d * d).exp(), 0.0)
        })
        .collect();
    let mut slab = FieldSlab::for_grid(grid, grid.r_start);
    for m in 0..grid.n_azimuth {
        slab.column_mut(m).copy_from_slice(&column);
    }
    Ok(slab)
}

/// Far-field Hankel envelope `exp(i k0 r) / sqrt(r)`.
pub fn hankel_factor(k0: f64, r: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("Hankel factor singular at r = {r}")));
    }
    Ok(Complex64::from_polar(1.0 / r.sqrt(), k0 * r))
}

/// One transmission-loss sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlSample {
    pub db: f64,
    /// True when the pressure magnitude fell below the floor.
    pub clamped: bool,
}

/// `-20 log10 |u w|` relative to unit pressure at 1 m, clamped at
/// [`TL_FLOOR_DB`].
pub fn transmission_loss(u: Complex64, w: Complex64) -> TlSample {
    let mag = (u * w).norm();
    let db = -20.0 * mag.log10();
    if db.is_finite() && db <= TL_FLOOR_DB {
        TlSample { db, clamped: false }
    } else {
        TlSample {
            db: TL_FLOOR_DB,
            clamped: true,
        }
    }
}
