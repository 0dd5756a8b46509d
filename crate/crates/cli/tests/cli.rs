use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pe3d::parallel::read_timing_csv;
use pe3d_cli::kernel_bench::KERNEL_CSV_HEADER;
use pe3d_cli::output::{read_tl_file, Manifest};

const SMALL: &str = r#"
[grid]
n_range = 21
n_azimuth = 8
n_depth = 61
delta_r_m = 10.0
delta_z_m = 1.0
azimuth_topology = "periodic"

[environment]
reference_speed_mps = 1500.0
water_depth_m = 60.0
sound_speed = [[0.0, 1500.0], [60.0, 1500.0]]

[environment.absorber]
start_depth_m = 45.0
max_attenuation = 0.01

[source]
frequencies_hz = [50.0]
depth_m = 20.0

[run]
output_stride = 5
"#;

fn pe3d(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pe3d"));
    cmd.args(args).env_remove("PE3D_THREADS").env_remove("PE3D_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_one_grid_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("out");
    let o = pe3d(&["run", "--config", s(&config), "--output", s(&out)], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = Manifest::read(&out).unwrap();
    assert_eq!(manifest.files.len(), 1);
    assert_eq!(manifest.files[0].name, "tl_000_50Hz.csv");
    assert!(manifest.verify(&out).is_empty());
    let grid = read_tl_file(&out.join("tl_000_50Hz.csv")).unwrap();
    assert_eq!(grid.ranges, vec![10.0, 60.0, 110.0, 160.0, 210.0]);
    assert_eq!(grid.header["n_azimuth"], "8");
    assert!(grid.tl.iter().all(|v| v.is_finite()));
}

#[test]
fn rerun_is_byte_identical_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "small.toml", SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(pe3d(&["run", "--config", s(&config), "--output", s(&a)], &[]).status.success());
    assert!(pe3d(&["run", "--config", s(&config), "--output", s(&b), "--threads", "3"], &[]).status.success());
    let name = "tl_000_50Hz.csv";
    assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
    // a manifest from one run verifies the other run's files
    assert!(Manifest::read(&a).unwrap().verify(&b).is_empty());
}

#[test]
fn eight_frequencies_give_eight_named_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(
        "frequencies_hz = [50.0]",
        "frequencies_hz = [30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0, 62.5]",
    );
    let config = write_config(dir.path(), "wide.toml", &text);
    let out = dir.path().join("out");
    let o = pe3d(&["run", "--config", s(&config), "--output", s(&out), "--workers", "3"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = Manifest::read(&out).unwrap();
    let names: Vec<&str> = manifest.files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names.len(), 8);
    assert_eq!(names[0], "tl_000_30Hz.csv");
    assert_eq!(names[7], "tl_007_62.5Hz.csv");
    assert_eq!(manifest.freq_workers, 3);
}

#[test]
fn binary_format_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "small.toml", SMALL);
    let (csv, bin) = (dir.path().join("csv"), dir.path().join("bin"));
    assert!(pe3d(&["run", "--config", s(&config), "--output", s(&csv)], &[]).status.success());
    assert!(pe3d(&["run", "--config", s(&config), "--output", s(&bin), "--format", "binary-grid"], &[])
        .status
        .success());
    let a = read_tl_file(&csv.join("tl_000_50Hz.csv")).unwrap();
    let b = read_tl_file(&bin.join("tl_000_50Hz.tlgrid")).unwrap();
    assert_eq!(a.ranges, b.ranges);
    assert_eq!(a.tl, b.tl);
}

#[test]
fn flag_overrides_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("env");
    assert!(pe3d(&["run", "--config", s(&config), "--output", s(&out)], &[("PE3D_THREADS", "2"), ("PE3D_WORKERS", "2")])
        .status
        .success());
    let m = Manifest::read(&out).unwrap();
    assert_eq!((m.intra_threads, m.freq_workers), (2, 2));
    let out = dir.path().join("flag");
    assert!(pe3d(&["run", "--config", s(&config), "--output", s(&out), "--threads", "3"], &[("PE3D_THREADS", "2")])
        .status
        .success());
    assert_eq!(Manifest::read(&out).unwrap().intra_threads, 3);
    let o = pe3d(&["run", "--config", s(&config), "--output", s(&out)], &[("PE3D_THREADS", "lots")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_stop_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.toml", &SMALL.replace("delta_z_m = 1.0", "delta_z_m = -1.0"));
    let out = dir.path().join("out");
    let o = pe3d(&["run", "--config", s(&config), "--output", s(&out)], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("delta_z > 0"), "{err}");
    assert!(!out.exists());
    let o = pe3d(&["run", "--config", s(&dir.path().join("missing.toml"))], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_writes_timing_and_kernel_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("bench");
    let o = pe3d(
        &[
            "bench", "--config", s(&config), "--threads-sweep", "1,2,4", "--workers-sweep", "1",
            "--repeats", "1", "--output", s(&out), "--kernel-sizes", "1,1024",
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("speedup"), "{stdout}");
    let rows = read_timing_csv(fs::File::open(out.join("timing.csv")).unwrap()).unwrap();
    let labels: Vec<&str> = rows.iter().map(|r| r.record.label.as_str()).collect();
    assert_eq!(labels, vec!["t1w1", "t2w1", "t4w1"]);
    assert_eq!(rows[0].speedup, 1.0);
    assert_eq!(rows[0].efficiency, 1.0);
    let kernel = fs::read_to_string(out.join("kernel.csv")).unwrap();
    let mut lines = kernel.lines();
    assert_eq!(lines.next(), Some(KERNEL_CSV_HEADER));
    let batches: Vec<&str> = lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(batches, vec!["1", "1024", "1", "1024"]);
    assert!(out.join("summary.txt").exists());
}

#[test]
fn selftest_passes_and_repeats() {
    let a = pe3d(&["selftest"], &[]);
    let b = pe3d(&["selftest"], &[]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.starts_with("selftest seed="));
    assert!(!text.contains("FAIL"));
    assert_eq!(a.stdout, b.stdout);
}
