use std::path::PathBuf;
use std::process::{Command, Output};

use ipmatch_bench::config::OutputFormat;
use ipmatch_bench::report::{read_report, CSV_HEADER};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipmatch-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ipmatch-bench-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const SMALL: [&str; 8] = ["--n", "20", "--m", "25", "--dim", "4", "--trials", "3"];

#[test]
fn csv_has_one_row_per_trial() {
    let out = bench(&[&SMALL[..], &["--no-timing"]].concat());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_report(OutputFormat::Csv, text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.n == 20 && r.m == 25 && r.bound_satisfied == Some(true)));
    assert!(rows.iter().all(|r| r.p50_us.is_none()));
}

#[test]
fn reruns_are_byte_identical() {
    for matcher in ["greedy-ip", "distance", "inner-product", "faster-ip"] {
        let args = [&SMALL[..], &["--matcher", matcher, "--no-timing", "--seed", "5"]].concat();
        let (a, b) = (bench(&args), bench(&args));
        assert!(a.status.success(), "{matcher}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{matcher}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let cfg = scratch("override.cfg");
    std::fs::write(&cfg, "# experiment\nn = 15\ndim = 3\nformat = json\ntrials = 2\n").unwrap();
    let out = bench(&["--config", cfg.to_str().unwrap(), "--n", "9", "--m", "7", "--no-timing"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_report(OutputFormat::Json, out.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.n == 9 && r.d == 3 && r.m == 7));
}

#[test]
fn out_file_receives_the_report() {
    let path = scratch("report.csv");
    let out = bench(&[&SMALL[..], &["--out", path.to_str().unwrap()]].concat());
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let rows = read_report(OutputFormat::Csv, std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.p50_us.is_some()));
}

#[test]
fn sweep_prints_points_and_slopes() {
    let out = bench(&["--sweep", "32,128", "--m", "5", "--dim", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("matcher,n,median_us,p99_us"));
    assert_eq!(text.lines().filter(|l| l.starts_with("# slope")).count(), 2);
}

#[test]
fn bad_settings_exit_with_2() {
    for args in [
        &["--matcher", "nope"][..],
        &["--eps", "1.5"],
        &["--dist", "spiral"],
        &["--sweep", "100,10"],
        &["--config", "/nonexistent/ipmatch.cfg"],
    ] {
        let out = bench(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
