//! End-to-end runs of the `aadcurve` binary.

use aadcurve_cli::{run, Cli};
use clap::Parser;
use proptest::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aadcurve"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

const SIM_EST: &[&str] = &[
    "simulate",
    "--rho-att",
    "0.25",
    "--rho-unatt",
    "0.05",
    "--fs",
    "20",
    "--window-s",
    "5",
    "--minutes",
    "3",
    "--seed",
    "11",
    "--out",
    "est.csv",
];

fn simulate_truth(dir: &Path, w: &str) {
    let out = format!("truth_{w}.csv");
    let o = bin(
        dir,
        &[
            "simulate",
            "--rho-att",
            "0.25",
            "--rho-unatt",
            "0.05",
            "--fs",
            "20",
            "--window-s",
            w,
            "--minutes",
            "20",
            "--seed",
            "11",
            "--ground-truth",
            "--out",
            &out,
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

/// The whole pipeline on the small fixture scenario, in `dir`.
fn pipeline(dir: &Path) {
    assert_eq!(code(&bin(dir, SIM_EST)), 0);
    for w in ["10", "5", "2"] {
        simulate_truth(dir, w);
    }
    let steps: [&[&str]; 3] = [
        &[
            "predict",
            "--input",
            "est.csv",
            "--targets",
            "10,5,2",
            "--n-boot",
            "200",
            "--seed",
            "5",
            "--out",
            "expected_curve.csv",
        ],
        &[
            "evaluate",
            "--pred",
            "expected_curve.csv",
            "--truth",
            "truth_10.csv,truth_5.csv,truth_2.csv",
            "--out",
            "expected_eval.json",
            "--truth-out",
            "expected_truth.csv",
        ],
        &[
            "plot",
            "--curve",
            "expected_curve.csv",
            "--truth",
            "expected_truth.csv",
            "--out",
            "expected_plot.svg",
        ],
    ];
    for args in steps {
        let o = bin(dir, args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn golden_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path());
    let bless = std::env::var_os("AADCURVE_BLESS").is_some();
    for name in files(dir.path()) {
        let got = fs::read(dir.path().join(&name)).unwrap();
        let golden = fixtures().join(&name);
        if bless {
            fs::write(&golden, &got).unwrap();
            continue;
        }
        let want = fs::read(&golden).unwrap_or_else(|_| panic!("missing golden file {name}"));
        assert!(got == want, "{name} differs from its golden copy");
    }
}

#[test]
fn pipeline_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    let names = files(a.path());
    assert_eq!(names, files(b.path()));
    for n in names {
        assert_eq!(
            fs::read(a.path().join(&n)).unwrap(),
            fs::read(b.path().join(&n)).unwrap(),
            "{n}"
        );
    }
}

#[test]
fn predict_ninety_pairs_gives_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sim = bin(
        d,
        &[
            "simulate",
            "--rho-att",
            "0.2",
            "--rho-unatt",
            "0.05",
            "--fs",
            "64",
            "--window-s",
            "20",
            "--minutes",
            "30",
            "--out",
            "in.csv",
        ],
    );
    assert_eq!(code(&sim), 0);
    fs::remove_file(d.join("in.meta.json")).unwrap();
    let o = bin(
        d,
        &[
            "predict",
            "--input",
            "in.csv",
            "--window-s",
            "20",
            "--fs",
            "64",
            "--out",
            "curve.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(d.join("curve.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "window_s,accuracy_pct,ci_low_pct,ci_high_pct");
    assert_eq!(lines.len(), 7);
    let windows: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(windows, ["60", "30", "20", "10", "5", "1"]);

    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("curve.json")).unwrap()).unwrap();
    let keys = |v: &serde_json::Value| {
        let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };
    assert_eq!(keys(&report), ["config", "curve", "model", "warnings"]);
    assert_eq!(
        keys(&report["model"]),
        [
            "m_count",
            "mu_diff",
            "n_baseline",
            "rho_att",
            "rho_unatt",
            "sigma_sum_sq"
        ]
    );
    assert_eq!(report["model"]["m_count"], 90);
    assert_eq!(report["model"]["n_baseline"], 1280);
}

#[test]
fn predict_same_seed_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::copy(fixtures().join("est.csv"), d.join("est.csv")).unwrap();
    let mut outs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let o = bin(
            d,
            &[
                "predict",
                "--input",
                "est.csv",
                "--window-s",
                "5",
                "--fs",
                "20",
                "--seed",
                "9",
                "--out",
                name,
            ],
        );
        assert_eq!(code(&o), 0);
        outs.push(fs::read(d.join(name)).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let other = bin(
        d,
        &[
            "predict",
            "--input",
            "est.csv",
            "--window-s",
            "5",
            "--fs",
            "20",
            "--seed",
            "10",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(code(&other), 0);
    assert_ne!(fs::read(d.join("c.csv")).unwrap(), outs[0]);
}

#[test]
fn flags_override_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::copy(fixtures().join("est.csv"), d.join("est.csv")).unwrap();
    fs::copy(fixtures().join("est.meta.json"), d.join("est.meta.json")).unwrap();
    assert_eq!(
        code(&bin(d, &["predict", "--input", "est.csv", "--out", "side.csv"])),
        0
    );
    assert_eq!(
        code(&bin(
            d,
            &["predict", "--input", "est.csv", "--fs", "40", "--out", "flag.csv"]
        )),
        0
    );
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("side.json")).unwrap()).unwrap();
    let flag: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("flag.json")).unwrap()).unwrap();
    assert_eq!(side["model"]["n_baseline"], 100);
    assert_eq!(flag["model"]["n_baseline"], 200);
    assert_eq!(flag["config"]["window_s"], 5.0);
}

#[test]
fn predict_errors_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases: [(&str, &str, i32, &str); 5] = [
        ("empty.csv", "", 2, "empty file"),
        ("header.csv", "r_att,r_unatt\n", 2, "no data rows"),
        (
            "bad.csv",
            "r_att,r_unatt\n0.1,0.0\n0.2,x\n",
            2,
            "row 3, column 2 (r_unatt)",
        ),
        ("one.csv", "r_att,r_unatt\n0.1,0.0\n", 3, "too few samples"),
        (
            "flat.csv",
            "r_att,r_unatt\n0.1,0.0\n0.1,0.0\n0.1,0.0\n",
            3,
            "zero variance",
        ),
    ];
    for (name, text, want, msg) in cases {
        fs::write(d.join(name), text).unwrap();
        let before = files(d);
        let o = bin(
            d,
            &[
                "predict",
                "--input",
                name,
                "--window-s",
                "20",
                "--fs",
                "64",
                "--out",
                "curve.csv",
            ],
        );
        assert_eq!(code(&o), want, "{name}: {}", stderr(&o));
        assert!(stderr(&o).contains(msg), "{name}: {}", stderr(&o));
        assert_eq!(stderr(&o).lines().count(), 1);
        assert_eq!(files(d), before, "{name} left output behind");
    }
    fs::write(d.join("ok.csv"), "r_att,r_unatt\n0.1,0.0\n0.2,0.1\n0.3,0.0\n").unwrap();
    for bad in [["--n-boot", "50"], ["--ci", "0.4"], ["--targets", "5,5"]] {
        let mut args = vec![
            "predict",
            "--input",
            "ok.csv",
            "--window-s",
            "20",
            "--fs",
            "64",
            "--out",
            "curve.csv",
        ];
        args.extend(bad);
        assert_eq!(code(&bin(d, &args)), 2, "{bad:?}");
    }
    let o = bin(d, &["predict", "--input", "ok.csv", "--out", "curve.csv"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("window_s"));
    assert!(!d.join("curve.csv").exists());
}

#[test]
fn long_targets_are_warned_about() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("ok.csv"), "r_att,r_unatt\n0.1,0.0\n0.2,0.1\n0.3,0.0\n").unwrap();
    let o = bin(
        d,
        &[
            "predict",
            "--input",
            "ok.csv",
            "--window-s",
            "20",
            "--fs",
            "64",
            "--targets",
            "120,20",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("c.json")).unwrap()).unwrap();
    let warnings = report["warnings"].as_array().unwrap();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("target 120 s")));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn simulate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bin(
        d,
        &[
            "simulate",
            "--rho-att",
            "0.2",
            "--rho-unatt",
            "0.05",
            "--fs",
            "20",
            "--window-s",
            "20",
            "--minutes",
            "30",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(d.join("s.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("r_att,r_unatt"));
    assert_eq!(csv.lines().count(), 91);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("s.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["scenario"]["rho_att"], 0.2);
    assert_eq!(meta["window_s"], 20.0);

    let bad: [&[&str]; 3] = [
        &[
            "--rho-att",
            "0.9",
            "--rho-unatt",
            "0.5",
            "--fs",
            "20",
            "--window-s",
            "20",
            "--minutes",
            "30",
        ],
        &[
            "--rho-att",
            "0.2",
            "--rho-unatt",
            "0.05",
            "--fs",
            "20",
            "--window-s",
            "60",
            "--minutes",
            "0.5",
        ],
        &[
            "--rho-att",
            "0.2",
            "--rho-unatt",
            "0.05",
            "--fs",
            "20",
            "--window-s",
            "60",
            "--minutes",
            "0.5",
            "--ground-truth",
        ],
    ];
    for args in bad {
        let mut full = vec!["simulate"];
        full.extend(args);
        full.extend(["--out", "bad.csv"]);
        assert_eq!(code(&bin(d, &full)), 2, "{args:?}");
        assert!(!d.join("bad.csv").exists());
    }
}

fn copy_truth(d: &Path) {
    for w in ["10", "5", "2"] {
        for ext in ["csv", "meta.json"] {
            let n = format!("truth_{w}.{ext}");
            fs::copy(fixtures().join(&n), d.join(&n)).unwrap();
        }
    }
}

#[test]
fn evaluate_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    copy_truth(d);
    for n in ["expected_curve.csv", "expected_curve.json"] {
        fs::copy(fixtures().join(n), d.join(n)).unwrap();
    }
    fs::copy(fixtures().join("expected_curve.csv"), d.join("second.csv")).unwrap();
    let truth = "truth_10.csv,truth_5.csv,truth_2.csv";
    let o = bin(
        d,
        &[
            "evaluate",
            "--pred",
            "expected_curve.csv",
            "--pred",
            "second.csv",
            "--truth",
            truth,
            "--out",
            "e.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("e.json")).unwrap()).unwrap();
    let rows = e["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for key in [
        "window_s",
        "true_pct",
        "pred_pct",
        "mean_abs_err_pp",
        "std_abs_err_pp",
        "in_ci_pct",
    ] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }
    assert_eq!(rows[0]["window_s"], serde_json::json!([10.0, 5.0, 2.0]));
    assert_eq!(e["per_point"].as_array().unwrap().len(), 6);
    // Only the first prediction has a sibling report, so the baseline is not common.
    assert!(e["baseline_window_s"].is_null());

    let o = bin(
        d,
        &[
            "evaluate",
            "--pred",
            "expected_curve.csv",
            "--pred",
            "second.csv",
            "--truth",
            truth,
            "--aggregate",
            "mean",
            "--out",
            "m.json",
        ],
    );
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(m["rows"].as_array().unwrap().len(), 1);
    assert_eq!(m["rows"][0]["pred_pct"], rows[0]["pred_pct"]);
    assert_eq!(m["config"]["aggregate"], "mean");
}

#[test]
fn evaluate_self_at_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    copy_truth(d);
    let o = bin(
        d,
        &[
            "predict",
            "--input",
            "truth_5.csv",
            "--targets",
            "5",
            "--n-boot",
            "200",
            "--out",
            "self.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin(
        d,
        &[
            "evaluate",
            "--pred",
            "self.csv",
            "--truth",
            "truth_5.csv",
            "--out",
            "self.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let e: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("self.json")).unwrap()).unwrap();
    assert_eq!(e["baseline_window_s"], 5.0);
    let err = e["mae_pp"].as_f64().unwrap();
    assert!(err.is_finite() && err >= 0.0);
}

#[test]
fn evaluate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    copy_truth(d);
    fs::copy(fixtures().join("expected_curve.csv"), d.join("c.csv")).unwrap();
    let o = bin(
        d,
        &[
            "evaluate",
            "--pred",
            "c.csv",
            "--truth",
            "truth_10.csv,truth_5.csv",
            "--out",
            "e.json",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("2 s"), "{}", stderr(&o));
    let o = bin(
        d,
        &[
            "evaluate",
            "--pred",
            "c.csv",
            "--truth",
            "missing.csv",
            "--out",
            "e.json",
        ],
    );
    assert_eq!(code(&o), 2);
    let o = bin(
        d,
        &[
            "evaluate",
            "--pred",
            "c.csv",
            "--truth",
            "truth_10.csv",
            "--truth",
            "truth_5.csv",
            "--out",
            "e.json",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(!d.join("e.json").exists());
}

#[test]
fn plot_structure() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::copy(fixtures().join("expected_curve.csv"), d.join("c.csv")).unwrap();
    fs::copy(fixtures().join("expected_truth.csv"), d.join("t.csv")).unwrap();
    let o = bin(
        d,
        &[
            "plot", "--curve", "c.csv", "--truth", "t.csv", "--x-axis", "log", "--out", "p.svg",
        ],
    );
    assert_eq!(code(&o), 0);
    let svg = fs::read_to_string(d.join("p.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert_eq!(svg.matches("<polygon").count(), 1);
    assert!(svg.contains(r#"class="chance""#));

    fs::write(
        d.join("flat.csv"),
        "window_s,accuracy_pct,ci_low_pct,ci_high_pct\n10,90,90,90\n5,80,80,80\n",
    )
    .unwrap();
    assert_eq!(code(&bin(d, &["plot", "--curve", "flat.csv", "--out", "f.svg"])), 0);
    assert_eq!(
        fs::read_to_string(d.join("f.svg"))
            .unwrap()
            .matches("<polyline")
            .count(),
        1
    );

    fs::write(d.join("bad.csv"), "window_s,accuracy_pct\n10,90\n").unwrap();
    assert_eq!(code(&bin(d, &["plot", "--curve", "bad.csv", "--out", "b.svg"])), 2);
    assert!(!d.join("b.svg").exists());
}

fn run_args(args: &[String]) -> Result<(), String> {
    let cli = Cli::try_parse_from(std::iter::once("aadcurve".to_string()).chain(args.iter().cloned()))
        .map_err(|e| e.to_string())?;
    run(cli).map_err(|e| e.to_string())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulate_predict_evaluate_round_trip(
        rho_att in -0.6f64..0.6,
        rho_unatt in -0.6f64..0.6,
        fs in prop::sample::select(vec![10.0, 20.0, 64.0]),
        window in prop::sample::select(vec![1.0, 2.0, 5.0]),
        seed in any::<u64>(),
        correlation_mode in any::<bool>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let p = |n: &str| dir.path().join(n).display().to_string();
        let common = |w: f64| {
            vec![
                "simulate".to_string(), "--rho-att".into(), rho_att.to_string(), "--rho-unatt".into(), rho_unatt.to_string(),
                "--fs".into(), fs.to_string(), "--window-s".into(), w.to_string(), "--minutes".into(), "2".into(),
                "--seed".into(), seed.to_string(), "--mode".into(),
                if correlation_mode { "correlation".into() } else { "signal".into() },
            ]
        };
        let mut est = common(window);
        est.extend(["--out".into(), p("est.csv")]);
        run_args(&est).unwrap();
        let mut truth_files = Vec::new();
        for w in [10.0, window] {
            let name = p(&format!("t{w}.csv"));
            let mut a = common(w);
            a.extend(["--ground-truth".into(), "--out".into(), name.clone()]);
            run_args(&a).unwrap();
            truth_files.push(name);
        }
        let predict = ["predict", "--input", &p("est.csv"), "--targets", &format!("10,{window}"), "--n-boot", "100", "--out", &p("c.csv")];
        run_args(&predict.map(String::from)).unwrap();
        let evaluate = ["evaluate", "--pred", &p("c.csv"), "--truth", &truth_files.join(","), "--out", &p("e.json")];
        run_args(&evaluate.map(String::from)).unwrap();
    }
}
