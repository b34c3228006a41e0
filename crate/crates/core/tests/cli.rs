use std::path::Path;
use std::process::{Command, Output};

fn sgek(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgek"))
        .args(args)
        .current_dir(dir)
        .env_remove("SGEK_THREADS")
        .env_remove("SGEK_OUT_DIR")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn sample_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        ok(&sgek(
            &[
                "sample",
                "--function",
                "camelback",
                "--count",
                "15",
                "--seed",
                "4",
                "--out",
                name,
            ],
            dir.path(),
        ));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x_1,x_2,y,dy_1,dy_2");
    assert_eq!(text.lines().count(), 16);
}

#[test]
fn train_predict_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&sgek(
        &[
            "sample",
            "--function",
            "camelback",
            "--count",
            "12",
            "--seed",
            "1",
            "--out",
            "train.csv",
        ],
        d,
    ));
    ok(&sgek(
        &[
            "sample",
            "--dim",
            "2",
            "--count",
            "5",
            "--lower=-2,-1",
            "--upper",
            "2,1",
            "--out",
            "points.csv",
        ],
        d,
    ));
    ok(&sgek(
        &["sensitivity", "train.csv", "--out", "sens.json"],
        d,
    ));
    let sens: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("sens.json")).unwrap()).unwrap();
    assert_eq!(sens["ranking"][0], 0);
    ok(&sgek(
        &[
            "train",
            "train.csv",
            "--variant",
            "sgek1",
            "--slices",
            "4",
            "--starts",
            "2",
            "--max-evals",
            "60",
            "--lower=-2,-1",
            "--upper",
            "2,1",
            "--out",
            "m.json",
        ],
        d,
    ));
    assert!(d.join("m.trace.csv").exists());
    ok(&sgek(
        &["predict", "m.json", "points.csv", "--out", "pred.csv"],
        d,
    ));
    let pred = std::fs::read_to_string(d.join("pred.csv")).unwrap();
    assert_eq!(pred.lines().next().unwrap(), "x_1,x_2,mu,s2");
    assert_eq!(pred.lines().count(), 6);
}

#[test]
fn predict_with_no_points_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&sgek(
        &[
            "sample",
            "--function",
            "oned",
            "--count",
            "6",
            "--out",
            "train.csv",
        ],
        d,
    ));
    ok(&sgek(
        &[
            "train",
            "train.csv",
            "--starts",
            "2",
            "--max-evals",
            "40",
            "--out",
            "m.json",
        ],
        d,
    ));
    std::fs::write(d.join("empty.csv"), "x_1\n").unwrap();
    ok(&sgek(
        &["predict", "m.json", "empty.csv", "--out", "pred.csv"],
        d,
    ));
    assert_eq!(
        std::fs::read_to_string(d.join("pred.csv"))
            .unwrap()
            .trim_end(),
        "x_1,mu,s2"
    );
}

#[test]
fn usage_and_input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        sgek(&["sample", "--function", "nosuch", "--count", "3"], d)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(sgek(&["frobnicate"], d).status.code(), Some(1));
    assert_eq!(sgek(&["train", "missing.csv"], d).status.code(), Some(1));
    assert_eq!(sgek(&["--help"], d).status.code(), Some(0));
    std::fs::write(d.join("bad.csv"), "x_1,y,dy_1\n0.1,abc,1\n").unwrap();
    let out = sgek(&["sensitivity", "bad.csv"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.csv"));
}

#[test]
fn bench_summary_is_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("bench.toml"),
        "function = \"camelback\"\nvariants = [\"gek\", \"sgek2\"]\nsamples = [10]\ntest_samples = 100\nrepetitions = 3\nslices = 3\nstarts = 2\nmax_evals = 40\nseed = 9\n",
    )
    .unwrap();
    ok(&sgek(
        &[
            "--threads",
            "1",
            "bench",
            "bench.toml",
            "--report-dir",
            "one",
        ],
        d,
    ));
    ok(&sgek(
        &[
            "--threads",
            "3",
            "bench",
            "bench.toml",
            "--report-dir",
            "three",
        ],
        d,
    ));
    let a = std::fs::read(d.join("one/summary.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("three/summary.csv")).unwrap());
}
