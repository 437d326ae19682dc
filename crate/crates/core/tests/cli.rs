//! End-to-end checks of the command-line interface: exit codes, CSV
//! outputs, and reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

use evenpad::tensor::{Shape, Tensor};

fn evenpad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evenpad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("evenpad_cli_{}_{name}", std::process::id()))
}

#[test]
fn shift_c2_matches_prediction() {
    let out = tmp("traj.csv");
    let res = evenpad(&[
        "shift",
        "--kernel",
        "C2",
        "--depth",
        "16",
        "--size",
        "65",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("predicted"), "{stdout}");
    assert!(stdout.contains("(-8.0000, -8.0000)"), "{stdout}");
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "layer,cy,cx,dy,dx");
    assert_eq!(lines.len(), 1 + 17); // input row plus 16 layers
    let _ = std::fs::remove_file(out);
}

#[test]
fn shift_is_reproducible() {
    let a = tmp("traj_a.csv");
    let b = tmp("traj_b.csv");
    for p in [&a, &b] {
        let res = evenpad(&[
            "shift",
            "--kernel",
            "C2sp",
            "--depth",
            "8",
            "--size",
            "33",
            "--kernel-content",
            "random",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(res.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn gradcheck_default_passes_and_zero_tol_fails() {
    let ok = evenpad(&["gradcheck"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    let fail = evenpad(&["gradcheck", "--tol", "0"]);
    assert_eq!(fail.status.code(), Some(1));
}

#[test]
fn gradcheck_bad_spec_is_usage_error() {
    let res = evenpad(&["gradcheck", "--spec", "nonsense"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn oracle_diff_cases() {
    let ok = evenpad(&["oracle-diff", "--cases", "3"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    let empty = evenpad(&["oracle-diff", "--cases", "0"]);
    assert!(empty.status.success());
    let strict = evenpad(&["oracle-diff", "--cases", "3", "--tol", "0"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn erode_depth_zero_rows() {
    let out = tmp("erode.csv");
    let res = evenpad(&[
        "erode",
        "--kernels",
        "C3",
        "--depth",
        "0",
        "--width",
        "4",
        "--input",
        "8",
        "--seeds",
        "2",
        "--batch",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "tag,seed,layer,q");
    assert_eq!(lines.len(), 1 + 2);
    // depth 0 reports the input Q of standardized noise, strictly positive
    for line in &lines[1..] {
        let q: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(q > 0.5 && q < 1.0, "{line}");
    }
    let _ = std::fs::remove_file(out);
}

#[test]
fn train_untrained_is_chance_level() {
    let out = tmp("metrics.csv");
    let res = evenpad(&[
        "train",
        "--kernel",
        "C3",
        "--epochs",
        "0",
        "--seeds",
        "1",
        "--depth",
        "4",
        "--width",
        "8",
        "--ntrain",
        "64",
        "--ntest",
        "128",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kernel,seed,epoch,train_loss,test_acc");
    assert_eq!(lines.len(), 2);
    let acc: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!((acc - 0.25).abs() <= 0.10, "untrained accuracy {acc}");
    let _ = std::fs::remove_file(out);
}

#[test]
fn heatmap_of_delta_has_single_bright_pixel() {
    let dump = tmp("delta.bin");
    let img = tmp("delta.pgm");
    let mut t = Tensor::zeros(Shape::new(1, 1, 5, 7)).unwrap();
    t.set(0, 0, 2, 3, 1.0);
    t.save(&dump).unwrap();
    let res = evenpad(&[
        "heatmap",
        "--from",
        dump.to_str().unwrap(),
        "--out",
        img.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let bytes = std::fs::read(&img).unwrap();
    let header = b"P5\n7 5\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    let pix = &bytes[header.len()..];
    assert_eq!(pix.len(), 35);
    assert_eq!(pix.iter().filter(|&&b| b == 255).count(), 1);
    assert_eq!(pix.iter().filter(|&&b| b == 0).count(), 34);
    let _ = std::fs::remove_file(dump);
    let _ = std::fs::remove_file(img);
}

#[test]
fn unknown_flags_are_usage_errors() {
    let res = evenpad(&["shift", "--no-such-flag"]);
    assert_eq!(res.status.code(), Some(2));
    let res = evenpad(&["frobnicate"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn env_seed_override_changes_output() {
    let a = tmp("seed_a.csv");
    let b = tmp("seed_b.csv");
    let mk = |path: &PathBuf, env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_evenpad"));
        cmd.args([
            "shift",
            "--kernel",
            "C3",
            "--depth",
            "2",
            "--size",
            "17",
            "--kernel-content",
            "random",
            "--out",
            path.to_str().unwrap(),
        ]);
        if let Some(v) = env {
            cmd.env("EVENPAD_SEED", v);
        }
        let res = cmd.output().unwrap();
        assert!(res.status.success());
    };
    mk(&a, None);
    mk(&b, Some("12345"));
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}
