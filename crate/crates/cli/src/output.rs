//! Output files: TL grids (CSV or binary), the run manifest, and digests.
//!
//! TL CSV layout: `# key=value` header lines, then a column header
//! `range_m,azimuth_deg,depth_m,tl_db`, then one row per sample ordered by
//! range sample, azimuth, depth.
//!
//! Binary layout: the 8-byte magic `PE3DTL01`, a little-endian `u64` header
//! length, that many bytes of the same `key=value` lines (newline separated),
//! then every TL sample as a little-endian `f64` in the CSV row order. Ranges
//! are recomputed from `r_start_m`, `delta_r_m` and `output_stride`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use pe3d::{Error, FrequencyResult, Grid3D, Result, TlFormat, TL_FLOOR_DB};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TL_CSV_COLUMNS: &str = "range_m,azimuth_deg,depth_m,tl_db";
pub const TL_BINARY_MAGIC: &[u8; 8] = b"PE3DTL01";
pub const MANIFEST_NAME: &str = "manifest.json";

/// File name for one frequency: index first so names sort in input order.
pub fn tl_file_name(index: usize, frequency: f64, format: TlFormat) -> String {
    let ext = match format {
        TlFormat::Csv => "csv",
        TlFormat::Binary => "tlgrid",
    };
    format!("tl_{index:03}_{frequency}Hz.{ext}")
}

fn header_pairs(result: &FrequencyResult, grid: &Grid3D, stride: usize) -> Vec<(&'static str, String)> {
    vec![
        ("frequency_hz", result.frequency.to_string()),
        ("n_range_samples", result.ranges.len().to_string()),
        ("n_azimuth", grid.n_azimuth.to_string()),
        ("n_depth", grid.n_depth.to_string()),
        ("grid_n_range", grid.n_range.to_string()),
        ("output_stride", stride.to_string()),
        ("r_start_m", grid.r_start.to_string()),
        ("delta_r_m", grid.delta_r.to_string()),
        ("delta_theta_deg", grid.delta_theta.to_degrees().to_string()),
        ("delta_z_m", grid.delta_z.to_string()),
        ("azimuth_topology", format!("{:?}", grid.azimuth_topology).to_lowercase()),
        ("units", "dB re 1 m".to_string()),
        ("tl_floor_db", TL_FLOOR_DB.to_string()),
        ("clamped_samples", result.clamped.to_string()),
    ]
}

/// Renders a TL grid as CSV text.
pub fn render_tl_csv(result: &FrequencyResult, grid: &Grid3D, stride: usize) -> String {
    let mut s = String::new();
    for (k, v) in header_pairs(result, grid, stride) {
        let _ = writeln!(s, "# {k}={v}");
    }
    s.push_str(TL_CSV_COLUMNS);
    s.push('\n');
    let (na, nd) = (result.n_azimuth, result.n_depth);
    for (i, r) in result.ranges.iter().enumerate() {
        for m in 0..na {
            let theta = grid.azimuth(m).to_degrees();
            for l in 0..nd {
                let _ = writeln!(s, "{r},{theta},{},{}", grid.depth(l), result.tl_at(i, m, l));
            }
        }
    }
    s
}

/// Encodes a TL grid in the binary layout.
pub fn render_tl_binary(result: &FrequencyResult, grid: &Grid3D, stride: usize) -> Vec<u8> {
    let mut header = String::new();
    for (k, v) in header_pairs(result, grid, stride) {
        let _ = writeln!(header, "{k}={v}");
    }
    let mut out = Vec::with_capacity(16 + header.len() + 8 * result.tl.len());
    out.extend_from_slice(TL_BINARY_MAGIC);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in &result.tl {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// A TL grid read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TlGrid {
    pub header: BTreeMap<String, String>,
    pub ranges: Vec<f64>,
    pub n_azimuth: usize,
    pub n_depth: usize,
    /// `[(sample * n_azimuth + m) * n_depth + l]`, dB
    pub tl: Vec<f64>,
}

impl TlGrid {
    pub fn at(&self, sample: usize, m: usize, l: usize) -> f64 {
        self.tl[(sample * self.n_azimuth + m) * self.n_depth + l]
    }

    fn header_usize(header: &BTreeMap<String, String>, key: &str, label: &str) -> Result<usize> {
        header_value(header, key, label)?
            .parse()
            .map_err(|_| parse_err(label, format!("header {key} is not a count")))
    }

    fn header_f64(header: &BTreeMap<String, String>, key: &str, label: &str) -> Result<f64> {
        header_value(header, key, label)?
            .parse()
            .map_err(|_| parse_err(label, format!("header {key} is not a number")))
    }
}

fn parse_err(label: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: label.into(),
        message: message.into(),
    }
}

fn header_value<'a>(header: &'a BTreeMap<String, String>, key: &str, label: &str) -> Result<&'a str> {
    header
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| parse_err(label, format!("header lacks {key}")))
}

fn parse_pair(line: &str) -> Option<(String, String)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim().to_string(), v.trim().to_string()))
}

/// Parses TL CSV text, checking the sample count against the header.
pub fn parse_tl_csv(text: &str, label: &str) -> Result<TlGrid> {
    let mut header = BTreeMap::new();
    let mut lines = text.lines();
    let mut columns = None;
    for line in lines.by_ref() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = parse_pair(rest).ok_or_else(|| parse_err(label, format!("bad header line {line:?}")))?;
            header.insert(k, v);
        } else {
            columns = Some(line);
            break;
        }
    }
    if columns != Some(TL_CSV_COLUMNS) {
        return Err(parse_err(label, format!("expected column line {TL_CSV_COLUMNS:?}, got {columns:?}")));
    }
    let ns = TlGrid::header_usize(&header, "n_range_samples", label)?;
    let na = TlGrid::header_usize(&header, "n_azimuth", label)?;
    let nd = TlGrid::header_usize(&header, "n_depth", label)?;
    let mut tl = Vec::with_capacity(ns * na * nd);
    let mut ranges = Vec::with_capacity(ns);
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(label, format!("row {}: expected 4 fields", i + 1)));
        }
        let num = |k: usize| -> Result<f64> {
            fields[k]
                .parse()
                .map_err(|_| parse_err(label, format!("row {}: bad number {:?}", i + 1, fields[k])))
        };
        if i % (na * nd) == 0 {
            ranges.push(num(0)?);
        }
        tl.push(num(3)?);
    }
    if tl.len() != ns * na * nd {
        return Err(parse_err(label, format!("expected {} samples, found {}", ns * na * nd, tl.len())));
    }
    Ok(TlGrid {
        header,
        ranges,
        n_azimuth: na,
        n_depth: nd,
        tl,
    })
}

/// Parses the binary layout.
pub fn parse_tl_binary(bytes: &[u8], label: &str) -> Result<TlGrid> {
    if bytes.len() < 16 || &bytes[..8] != TL_BINARY_MAGIC {
        return Err(parse_err(label, "missing TL grid magic"));
    }
    let hlen = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes
        .get(16..16 + hlen)
        .ok_or_else(|| parse_err(label, "truncated header"))?;
    let text = std::str::from_utf8(body).map_err(|_| parse_err(label, "header is not UTF-8"))?;
    let header: BTreeMap<String, String> = text.lines().filter_map(parse_pair).collect();
    let ns = TlGrid::header_usize(&header, "n_range_samples", label)?;
    let na = TlGrid::header_usize(&header, "n_azimuth", label)?;
    let nd = TlGrid::header_usize(&header, "n_depth", label)?;
    let stride = TlGrid::header_usize(&header, "output_stride", label)?;
    let r0 = TlGrid::header_f64(&header, "r_start_m", label)?;
    let dr = TlGrid::header_f64(&header, "delta_r_m", label)?;
    let data = &bytes[16 + hlen..];
    if data.len() != 8 * ns * na * nd {
        return Err(parse_err(
            label,
            format!("expected {} samples, found {} bytes", ns * na * nd, data.len()),
        ));
    }
    let tl = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let ranges = (0..ns).map(|i| r0 + (i * stride) as f64 * dr).collect();
    Ok(TlGrid {
        header,
        ranges,
        n_azimuth: na,
        n_depth: nd,
        tl,
    })
}

/// Reads a TL file of either layout, chosen by its leading bytes.
pub fn read_tl_file(path: &Path) -> Result<TlGrid> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let label = path.display().to_string();
    if bytes.starts_with(TL_BINARY_MAGIC) {
        parse_tl_binary(&bytes, &label)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| parse_err(&label, "not UTF-8"))?;
        parse_tl_csv(&text, &label)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `bytes` to `dir/name` and returns the manifest entry.
pub fn write_file(dir: &Path, name: &str, bytes: &[u8], frequency: Option<f64>) -> Result<ManifestFile> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&path, e))?;
    Ok(ManifestFile {
        name: name.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
        frequency_hz: frequency,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    /// Relative to the manifest's directory.
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestTiming {
    pub frequency_hz: f64,
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFailure {
    pub frequency_hz: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_path: String,
    pub config_sha256: String,
    pub intra_threads: usize,
    pub freq_workers: usize,
    pub tl_format: String,
    pub output_stride: usize,
    pub files: Vec<ManifestFile>,
    pub timings: Vec<ManifestTiming>,
    pub failures: Vec<ManifestFailure>,
    pub total_wall_s: f64,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Other(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| parse_err(&path.display().to_string(), e.to_string()))
    }

    /// Files whose current content no longer matches the recorded digest,
    /// with the reason.
    pub fn verify(&self, dir: &Path) -> Vec<(String, String)> {
        let mut bad = Vec::new();
        for f in &self.files {
            match fs::read(dir.join(&f.name)) {
                Ok(bytes) if sha256_hex(&bytes) == f.sha256 => {}
                Ok(_) => bad.push((f.name.clone(), "digest mismatch".into())),
                Err(e) => bad.push((f.name.clone(), e.to_string())),
            }
        }
        bad
    }
}
