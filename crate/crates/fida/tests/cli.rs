//! End-to-end exercises of the command-line surface.

use std::path::{Path, PathBuf};
use std::process::Command;

use fida::denoise::Denoiser;
use fida::io;
use fida::transforms::make_wavelet_basis;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fida"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("failed to run binary");
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn phantom(dir: &Path, name: &str, rows: usize, cols: usize) -> PathBuf {
    let path = dir.join(name);
    run_ok(bin().args([
        "phantom",
        "--rows",
        &rows.to_string(),
        "--cols",
        &cols.to_string(),
        "--seed",
        "11",
        "-o",
        path.to_str().unwrap(),
    ]));
    path
}

#[test]
fn phantom_degrade_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let clean = phantom(dir.path(), "clean.fidb", 32, 32);
    let degraded = dir.path().join("degraded.fidb");
    run_ok(bin().args([
        "degrade",
        "-i",
        clean.to_str().unwrap(),
        "--op",
        "identity",
        "--sigma",
        "0",
        "-o",
        degraded.to_str().unwrap(),
    ]));
    // Identity operator, no noise: degraded equals clean bit-for-bit.
    assert_eq!(
        io::read_fidb(&clean).unwrap(),
        io::read_fidb(&degraded).unwrap()
    );

    let restored = dir.path().join("restored.fidb");
    run_ok(bin().args([
        "solve",
        "-i",
        degraded.to_str().unwrap(),
        "--op",
        "identity",
        "--method",
        "ida",
        "--denoiser",
        "wavelet-soft:taps=4,levels=2",
        "--lambda",
        "0",
        "-o",
        restored.to_str().unwrap(),
    ]));
    assert_eq!(
        io::read_fidb(&degraded).unwrap(),
        io::read_fidb(&restored).unwrap()
    );
}

#[test]
fn psnr_of_identical_images_is_infinite() {
    let dir = tempfile::tempdir().unwrap();
    let img = phantom(dir.path(), "img.fidb", 16, 16);
    let out = run_ok(bin().args(["psnr", img.to_str().unwrap(), img.to_str().unwrap()]));
    assert_eq!(out.trim(), "inf");
}

#[test]
fn solve_fida_with_auto_basis_on_gain() {
    let dir = tempfile::tempdir().unwrap();
    let clean = phantom(dir.path(), "clean.fidb", 32, 32);
    let degraded = dir.path().join("y.fidb");
    run_ok(bin().args([
        "degrade",
        "-i",
        clean.to_str().unwrap(),
        "--op",
        "gain:seed=3",
        "--sigma",
        "5",
        "--seed",
        "9",
        "-o",
        degraded.to_str().unwrap(),
    ]));
    let restored = dir.path().join("x.fidb");
    let trace = dir.path().join("trace.csv");
    run_ok(bin().args([
        "solve",
        "-i",
        degraded.to_str().unwrap(),
        "--op",
        "gain:seed=3",
        "--method",
        "fida",
        "--basis",
        "auto",
        "--denoiser",
        "wavelet-soft:taps=4,levels=2",
        "--lambda",
        "0.5",
        "--max-iters",
        "10",
        "--truth",
        clean.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "-o",
        restored.to_str().unwrap(),
    ]));
    let restored = io::read_fidb(&restored).unwrap();
    assert_eq!(restored.shape(), (32, 32));
    let trace = std::fs::read_to_string(&trace).unwrap();
    assert!(trace.starts_with("iteration,residual,psnr\n"));
    // One row per iteration actually run.
    assert!(trace.lines().count() >= 2);
}

#[test]
fn denoise_subcommand_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = phantom(dir.path(), "in.fidb", 16, 16);
    let output = dir.path().join("out.fidb");
    run_ok(bin().args([
        "denoise",
        "--denoiser",
        "wavelet-soft:taps=4,levels=2",
        input.to_str().unwrap(),
        output.to_str().unwrap(),
        "2.5",
    ]));
    let x = io::read_fidb(&input).unwrap();
    let d = Denoiser::soft(make_wavelet_basis((16, 16), 4, 2).unwrap());
    assert_eq!(io::read_fidb(&output).unwrap(), d.denoise(&x, 2.5).unwrap());
}

#[test]
fn spectrum_subcommand_writes_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("deltas.fidb");
    let stdout = run_ok(bin().args([
        "spectrum",
        "--op",
        "blur:sigma=1.0,radius=2",
        "--basis",
        "dft",
        "--shape",
        "16x16",
        "-o",
        out.to_str().unwrap(),
    ]));
    assert!(stdout.contains("256 coefficients"), "{stdout}");
    let deltas = io::read_fidb(&out).unwrap();
    assert_eq!(deltas.len(), 256);
    // Kernel sums to one, so the DC delta is 1 and nothing exceeds it.
    assert!(deltas
        .data()
        .iter()
        .all(|&d| (0.0..=1.0 + 1e-12).contains(&d)));
}

#[test]
fn sweep_subcommand_emits_reports() {
    let dir = tempfile::tempdir().unwrap();
    let clean = phantom(dir.path(), "clean.fidb", 32, 32);
    let out_dir = dir.path().join("out");
    let stdout = run_ok(bin().args([
        "sweep",
        "--images",
        clean.to_str().unwrap(),
        "--op",
        "blur:sigma=1.0,radius=2",
        "--sigmas",
        "2",
        "--method",
        "ida;denoiser=wavelet-soft:taps=4,levels=2",
        "--lambdas",
        "0.1,1",
        "--runs",
        "2",
        "--max-iters",
        "5",
        "-o",
        out_dir.to_str().unwrap(),
    ]));
    assert!(stdout.contains("best lambda"), "{stdout}");
    assert!(out_dir.join("table.csv").is_file());
    assert!(out_dir.join("runs.csv").is_file());
    let runs = std::fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    // 1 image x 1 sigma x 1 method x 2 lambdas x 2 runs = 4 data rows.
    assert_eq!(runs.lines().count(), 5);
}

#[test]
fn bad_descriptor_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let img = phantom(dir.path(), "img.fidb", 16, 16);
    let out = bin()
        .args([
            "degrade",
            "-i",
            img.to_str().unwrap(),
            "--op",
            "blur:sgima=2",
            "-o",
            dir.path().join("x.fidb").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("sgima"), "{stderr}");
}
