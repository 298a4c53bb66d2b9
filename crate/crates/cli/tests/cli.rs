use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mfk_core::io::parse_spectrum_csv;
use mfk_core::{estimate, features, gen_selfsimilar, SelfSimilarSpec, SizingPolicy};
use serde_json::Value;
use tempfile::TempDir;

fn mfk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfk"))
        .args(args)
        .env("MFK_NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn cascade_file(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("cascade.txt");
    let out = mfk(&[
        "generate",
        "selfsimilar",
        "--p",
        "0.3",
        "--r",
        "0.5",
        "--depth",
        "13",
        "--S",
        "10000",
        "--seed",
        "7",
        "--out",
        path_str(&path),
    ]);
    assert_eq!(code(&out), 0);
    path
}

fn uniform_file(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("uniform.txt");
    let out = mfk(&[
        "generate",
        "uniform",
        "--S",
        "10000",
        "--mode",
        "equispaced",
        "--out",
        path_str(&path),
    ]);
    assert_eq!(code(&out), 0);
    path
}

#[test]
fn farey_q5_has_eleven_points() {
    let out = mfk(&["generate", "farey", "--Q", "5"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("# kind=farey Q=5\n"));
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[0], "0.0");
    assert_eq!(lines[10], "1.0");
}

#[test]
fn equispaced_uniform_file() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(uniform_file(&dir)).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 10_000);
    assert_eq!(lines[0], "0.00005");
}

#[test]
fn selfsimilar_output_is_deterministic() {
    let args = [
        "generate",
        "selfsimilar",
        "--p",
        "0.3",
        "--r",
        "0.5",
        "--depth",
        "13",
        "--S",
        "10000",
        "--seed",
        "7",
    ];
    let (a, b) = (mfk(&args), mfk(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(
        stdout(&a).starts_with("# kind=selfsimilar p=0.3,0.7 r=0.5,0.5 depth=13 S=10000 seed=7\n")
    );
    assert_ne!(
        a.stdout,
        mfk(&[
            "generate",
            "selfsimilar",
            "--p",
            "0.3",
            "--r",
            "0.5",
            "--depth",
            "13",
            "--S",
            "10000",
            "--seed",
            "8",
        ])
        .stdout
    );
}

#[test]
fn invalid_specs_exit_2() {
    for args in [
        &[
            "generate",
            "selfsimilar",
            "--p",
            "1.3",
            "--r",
            "0.5",
            "--depth",
            "4",
            "--S",
            "10",
        ][..],
        &[
            "generate",
            "selfsimilar",
            "--p",
            "0.5",
            "--r",
            "0.7",
            "--depth",
            "4",
            "--S",
            "10",
        ],
        &[
            "generate",
            "selfsimilar",
            "--p",
            "0.5",
            "--r",
            "0.5",
            "--depth",
            "60",
            "--S",
            "10",
        ],
        &["generate", "farey", "--Q", "1"],
        &["generate", "uniform", "--S", "0"],
        &["generate", "farey"],
    ] {
        let out = mfk(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn spec_file_and_superposition() {
    let dir = TempDir::new().unwrap();
    let a = write(
        &dir,
        "a.json",
        r#"{"probabilities":[0.5,0.5],"ratios":[0.3333333333333333,0.3333333333333333],"depth":10,"sample_size":0,"seed":1}"#,
    );
    let b = write(
        &dir,
        "b.json",
        r#"{"probabilities":[0.5,0.5],"ratios":[0.1111111111111111,0.1111111111111111],"depth":8,"sample_size":0,"seed":2}"#,
    );
    let one = mfk(&[
        "generate",
        "superposed",
        "--spec-a",
        path_str(&a),
        "--spec-b",
        path_str(&b),
        "--S",
        "400",
        "--disjoint",
    ]);
    assert_eq!(code(&one), 0);
    let text = stdout(&one);
    assert_eq!(data_lines(&text).len(), 400);
    assert!(text.contains("placement=disjoint"));
    let two = mfk(&[
        "generate",
        "superposed",
        "--spec-a",
        path_str(&a),
        "--spec-b",
        path_str(&b),
        "--S",
        "400",
        "--disjoint",
    ]);
    assert_eq!(one.stdout, two.stdout);

    let via_file = mfk(&["generate", "selfsimilar", "--spec", path_str(&a)]);
    assert_eq!(code(&via_file), 2, "sample_size 0 is a bad spec");

    let broken = write(&dir, "broken.json", "{\"probabilities\": [0.5]}");
    let out = mfk(&[
        "generate",
        "superposed",
        "--spec-a",
        path_str(&broken),
        "--spec-b",
        path_str(&b),
        "--S",
        "10",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn analyze_uniform_auto_size() {
    let dir = TempDir::new().unwrap();
    let input = uniform_file(&dir);
    for extra in [&["--auto-size"][..], &[]] {
        let mut args = vec!["analyze", path_str(&input)];
        args.extend_from_slice(extra);
        let out = mfk(&args);
        assert_eq!(code(&out), 0);
        let text = stdout(&out);
        assert!(text.starts_with("# sizing=Ok B=100 A=9\n"), "{text}");
        assert_eq!(data_lines(&text), ["alpha,f", "1.0,1.0"]);
        assert!(out.stderr.is_empty());
    }
}

#[test]
fn analyze_warning_band_notifies_and_succeeds() {
    let dir = TempDir::new().unwrap();
    let input = cascade_file(&dir);
    let out = mfk(&["analyze", path_str(&input), "--boxes", "200"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("# sizing=Warning B=200"));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("warning:"), "{err}");
    assert!(!err.contains('\x1b'));
}

#[test]
fn analyze_refuses_violation_unless_forced() {
    let dir = TempDir::new().unwrap();
    let input = cascade_file(&dir);
    let out = mfk(&["analyze", path_str(&input), "--boxes", "5000"]);
    assert_eq!(code(&out), 3);
    assert!(out.stdout.is_empty());

    let csv = dir.path().join("forced.csv");
    let out = mfk(&[
        "analyze",
        path_str(&input),
        "--boxes",
        "5000",
        "--force",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(code(&out), 0);
    assert!(fs::read_to_string(csv)
        .unwrap()
        .starts_with("# sizing=Violation B=5000"));
}

#[test]
fn analyze_matches_library() {
    let dir = TempDir::new().unwrap();
    let input = cascade_file(&dir);
    let out = mfk(&["analyze", path_str(&input), "--boxes", "100", "--bins", "9"]);
    let cli = parse_spectrum_csv(&stdout(&out)).unwrap();
    let dust = gen_selfsimilar(&SelfSimilarSpec::binomial(0.3, 0.5, 13, 10_000, 7)).unwrap();
    let lib = estimate(&dust, 100, 9, SizingPolicy::Enforce).unwrap();
    assert_eq!(cli.points(), lib.points());
}

#[test]
fn analyze_io_and_argument_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&mfk(&["analyze", "/nonexistent/dust.txt"])), 1);
    let bad = write(&dir, "bad.txt", "0.5\nnot-a-number\n");
    let out = mfk(&["analyze", path_str(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
    let input = uniform_file(&dir);
    assert_eq!(
        code(&mfk(&[
            "analyze",
            path_str(&input),
            "--auto-size",
            "--boxes",
            "100"
        ])),
        2
    );
    assert_eq!(code(&mfk(&["analyze", path_str(&input), "--bins", "9"])), 2);
    let tiny = write(&dir, "tiny.txt", "0.1\n0.2\n");
    assert_eq!(code(&mfk(&["analyze", path_str(&tiny)])), 2);
}

#[test]
fn analyze_event_file() {
    let dir = TempDir::new().unwrap();
    let events: String = (0..10_000)
        .map(|k| format!("{}\n", 0.5 + k as f64))
        .collect();
    let input = write(
        &dir,
        "events.txt",
        &format!("# kappa=4.08 t_start=0 t_end=10000\n{events}"),
    );
    let out = mfk(&["analyze", path_str(&input), "--events"]);
    assert_eq!(code(&out), 0);
    assert_eq!(data_lines(&stdout(&out)), ["alpha,f", "1.0,1.0"]);
}

fn crisis_csv() -> String {
    let mut text = String::from("alpha,f\n");
    for k in 0..5 {
        let a = 0.80 + 0.05 * k as f64;
        text += &format!("{a},{}\n", 0.5 * a + 0.2);
    }
    text + "1.05,0.62\n1.1,0.5\n1.15,0.35\n1.2,0.15\n"
}

fn classify_json(args: &[&str]) -> Value {
    let out = mfk(args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn classify_crisis_fixture() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "crisis.csv", &crisis_csv());
    let report = classify_json(&["classify", path_str(&csv)]);
    assert_eq!(report["regime"], "Crisis");
    assert_eq!(report["segment"]["found"], true);
    assert_eq!(report["thresholds"]["residual_tol"], 0.02);
    assert_eq!(report["thresholds"]["min_run"], 5);
    assert!(report["features"]["alpha_M"].is_number());
}

#[test]
fn classify_two_fragments() {
    let dir = TempDir::new().unwrap();
    let csv = write(
        &dir,
        "split.csv",
        "alpha,f\n0.60,0.20\n0.62,0.40\n0.64,0.30\n1.00,0.20\n1.02,0.35\n1.04,0.25\n",
    );
    let report = classify_json(&["classify", path_str(&csv)]);
    assert_eq!(report["regime"], "PostCrisisBiMultifractal");
    assert_eq!(
        report["fragmentation"]["fragments"]
            .as_array()
            .unwrap()
            .len(),
        2
    );

    let merged = classify_json(&["classify", path_str(&csv), "--gap-threshold", "1.0"]);
    assert_eq!(
        merged["fragmentation"]["fragments"]
            .as_array()
            .unwrap()
            .len(),
        1
    );
    assert_eq!(merged["thresholds"]["gap_threshold"], 1.0);
}

#[test]
fn classify_single_point_is_indeterminate() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "one.csv", "alpha,f\n1.0,1.0\n");
    let out_path = dir.path().join("report.json");
    let out = mfk(&["classify", path_str(&csv), "--out", path_str(&out_path)]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(report["regime"], "Indeterminate");
    assert!(report["cap_shape"].is_null());
    assert!(report["thresholds"]["gap_threshold"].is_null());
}

#[test]
fn classify_thresholds_are_applied() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "crisis.csv", &crisis_csv());
    let strict = classify_json(&["classify", path_str(&csv), "--min-run", "6"]);
    assert_eq!(strict["segment"]["found"], false);
    assert_eq!(strict["thresholds"]["min_run"], 6);
    let tight = classify_json(&["classify", path_str(&csv), "--segment-tol", "0"]);
    assert_eq!(tight["thresholds"]["residual_tol"], 0.0);
}

#[test]
fn classify_rejects_malformed_csv() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "bad.csv", "alpha,f\n1.0\n");
    assert_eq!(code(&mfk(&["classify", path_str(&csv)])), 1);
    let header = write(&dir, "header.csv", "x,y\n1.0,1.0\n");
    assert_eq!(code(&mfk(&["classify", path_str(&header)])), 1);
    let csv = write(&dir, "ok.csv", "alpha,f\n1.0,1.0\n");
    assert_eq!(
        code(&mfk(&["classify", path_str(&csv), "--gap-threshold", "-1"])),
        2
    );
}

#[test]
fn sweep_reports_signed_alpha_min_delta() {
    let dir = TempDir::new().unwrap();
    let input = cascade_file(&dir);
    let out_dir = dir.path().join("sweep");
    let out = mfk(&[
        "sweep",
        path_str(&input),
        "--boxes",
        "200,100",
        "--out",
        path_str(&out_dir),
    ]);
    assert_eq!(code(&out), 0);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("sweep.json")).unwrap()).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries[0]["boxes"], 100);
    assert_eq!(entries[1]["boxes"], 200);

    let feat = |b: usize| {
        let text = fs::read_to_string(out_dir.join(format!("spectrum_B{b}.csv"))).unwrap();
        features(&parse_spectrum_csv(&text).unwrap())
    };
    let expected = feat(200).alpha_min - feat(100).alpha_min;
    let delta = report["trends"]["total"]["alpha_min"].as_f64().unwrap();
    assert_eq!(delta, expected);
    assert_eq!(report["trends"]["left_shift"], expected < 0.0);
}

#[test]
fn sweep_with_one_box_count_needs_sweep() {
    let dir = TempDir::new().unwrap();
    let input = cascade_file(&dir);
    let out_dir = dir.path().join("sweep");
    let out = mfk(&[
        "sweep",
        path_str(&input),
        "--boxes",
        "100",
        "--out",
        path_str(&out_dir),
    ]);
    assert_eq!(code(&out), 0);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(report["trends"], "NeedsSweep");
    let csvs = fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "csv")
        })
        .count();
    assert_eq!(csvs, 1);
}

#[test]
fn sweep_marks_failed_entries() {
    let dir = TempDir::new().unwrap();
    let input = cascade_file(&dir);
    let out_dir = dir.path().join("sweep");
    let out = mfk(&[
        "sweep",
        path_str(&input),
        "--boxes",
        "100,5000",
        "--out",
        path_str(&out_dir),
    ]);
    assert_eq!(code(&out), 0);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("sweep.json")).unwrap()).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries[0]["status"], "ok");
    assert_eq!(entries[1]["status"], "failed");
    assert!(entries[1]["error"].as_str().unwrap().contains("sizing"));
    assert!(!out_dir.join("spectrum_B5000.csv").exists());

    let all_bad = dir.path().join("bad");
    let out = mfk(&[
        "sweep",
        path_str(&input),
        "--boxes",
        "5000",
        "--out",
        path_str(&all_bad),
    ]);
    assert_eq!(code(&out), 3);
    assert!(all_bad.join("sweep.json").exists());
}

#[test]
fn plot_single_spectrum() {
    let dir = TempDir::new().unwrap();
    let input = cascade_file(&dir);
    let csv = dir.path().join("s.csv");
    assert_eq!(
        code(&mfk(&[
            "analyze",
            path_str(&input),
            "--out",
            path_str(&csv)
        ])),
        0
    );
    let svg_path = dir.path().join("plot.svg");
    assert_eq!(
        code(&mfk(&[
            "plot",
            path_str(&csv),
            "--out",
            path_str(&svg_path)
        ])),
        0
    );
    let svg = fs::read_to_string(svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches(r#"class="series""#).count(), 1);
    assert_eq!(svg.matches(r#"class="bisectrix""#).count(), 1);
}

#[test]
fn plot_overlays_two_box_counts() {
    let dir = TempDir::new().unwrap();
    let input = cascade_file(&dir);
    let mut csvs = Vec::new();
    for b in ["100", "150"] {
        let csv = dir.path().join(format!("b{b}.csv"));
        assert_eq!(
            code(&mfk(&[
                "analyze",
                path_str(&input),
                "--boxes",
                b,
                "--out",
                path_str(&csv)
            ])),
            0
        );
        csvs.push(csv);
    }
    let svg_path = dir.path().join("plot.svg");
    let out = mfk(&[
        "plot",
        path_str(&csvs[0]),
        path_str(&csvs[1]),
        "--out",
        path_str(&svg_path),
    ]);
    assert_eq!(code(&out), 0);
    let svg = fs::read_to_string(svg_path).unwrap();
    assert_eq!(svg.matches(r#"class="series""#).count(), 2);
    assert!(svg.contains(">B=100</text>"));
    assert!(svg.contains(">B=150</text>"));
}

#[test]
fn plot_splits_fragmented_spectrum() {
    let dir = TempDir::new().unwrap();
    let csv = write(
        &dir,
        "split.csv",
        "alpha,f\n0.60,0.20\n0.62,0.40\n0.64,0.30\n1.00,0.20\n1.02,0.35\n1.04,0.25\n",
    );
    let svg_path = dir.path().join("plot.svg");
    assert_eq!(
        code(&mfk(&[
            "plot",
            path_str(&csv),
            "--out",
            path_str(&svg_path)
        ])),
        0
    );
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches(r#"class="fragment""#).count(), 2);
    assert!(svg.contains(">split</text>"));

    assert_eq!(
        code(&mfk(&[
            "plot",
            path_str(&csv),
            "--gap-threshold",
            "1",
            "--out",
            path_str(&svg_path)
        ])),
        0
    );
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches(r#"class="fragment""#).count(), 1);
}

#[test]
fn generate_analyze_classify_round_trip() {
    let dir = TempDir::new().unwrap();
    let specs: [(&str, &str, &str, &str); 6] = [
        ("0.5", "0.3333333333333333", "9", "2000"),
        ("0.3", "0.5", "10", "1000"),
        ("0.1", "0.45", "6", "500"),
        ("0.9", "0.2", "12", "5000"),
        ("0.5", "0.5", "1", "81"),
        ("0.7", "0.1", "15", "300"),
    ];
    for (i, (p, r, depth, s)) in specs.iter().enumerate() {
        let dust = dir.path().join(format!("d{i}.txt"));
        let csv = dir.path().join(format!("d{i}.csv"));
        let args = [
            "generate",
            "selfsimilar",
            "--p",
            p,
            "--r",
            r,
            "--depth",
            depth,
            "--S",
            s,
            "--seed",
            "3",
            "--out",
            path_str(&dust),
        ];
        assert_eq!(code(&mfk(&args)), 0, "{args:?}");
        assert_eq!(
            code(&mfk(&["analyze", path_str(&dust), "--out", path_str(&csv)])),
            0
        );
        let report = classify_json(&["classify", path_str(&csv)]);
        assert!(report["regime"].is_string());
    }
}

#[test]
fn auto_size_below_81_samples_is_refused() {
    // B = isqrt(S) < 9 but A >= 3, so B >= A^2 cannot hold.
    let dir = TempDir::new().unwrap();
    let points: String = (0..80)
        .map(|k| format!("{}\n", (k as f64 + 0.5) / 80.0))
        .collect();
    let dust = write(&dir, "small.txt", &points);
    let out = mfk(&["analyze", path_str(&dust)]);
    assert_eq!(code(&out), 3);
    let out = mfk(&["analyze", path_str(&dust), "--force"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("# sizing=Violation B=8 A=3"));
}
