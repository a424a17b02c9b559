//! End-to-end runs of the library runner and the `tenscomp` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tenscomp::metrics::PSNR_CAP;
use tenscomp::solver::generate_mask;
use tenscomp::synthetic::gaussian;
use tenscomp_cli::config::{ExperimentConfig, MaskSource, MethodName, OutputPaths, PeakName, SolverSettings};
use tenscomp_cli::{io, run_experiment, CompletionReport};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/lowrank_20x20x5.dtf")
}

fn config(dir: &Path, method: MethodName, rate: f64) -> ExperimentConfig {
    let tag = format!("{method:?}").to_lowercase();
    ExperimentConfig {
        input: fixture(),
        truth: Some(fixture()),
        mask: MaskSource::Generate { rate, seed: 7 },
        solver: SolverSettings {
            method,
            ..Default::default()
        },
        psnr_peak: PeakName::Band,
        output: OutputPaths {
            completed: dir.join(format!("{tag}.dtf")),
            report: dir.join(format!("{tag}.json")),
            trace: Some(dir.join(format!("{tag}.csv"))),
        },
    }
}

fn tenscomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tenscomp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bundled_fixture_is_recovered_by_bemcp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), MethodName::Bemcp, 0.5);
    let report = run_experiment(&cfg).unwrap();
    assert!(report.converged);
    assert!(report.rel_error.unwrap() <= 1e-2, "{:?}", report.rel_error);
    assert_eq!(report.observed, 1000);
    assert_eq!(report.total, 2000);

    let text = fs::read_to_string(&cfg.output.report).unwrap();
    let parsed = CompletionReport::from_json(&text).unwrap();
    assert_eq!(parsed, report);
    assert_eq!(parsed.to_json(), text);

    let x = io::load_tensor(&cfg.output.completed).unwrap();
    let truth = io::load_tensor(&fixture()).unwrap();
    let mask = generate_mask(truth.shape(), 0.5, 7).unwrap();
    for (k, &obs) in mask.bits().iter().enumerate() {
        if obs {
            assert_eq!(x.data()[k], truth.data()[k]);
        }
    }
}

#[test]
fn three_methods_give_distinct_converged_reports() {
    let dir = tempfile::tempdir().unwrap();
    let reports: Vec<String> = [MethodName::Nmcp, MethodName::Emcp, MethodName::Bemcp]
        .into_iter()
        .map(|m| {
            let cfg = config(dir.path(), m, 0.5);
            let r = run_experiment(&cfg).unwrap();
            assert!(r.converged, "{m:?}");
            assert!(r.iterations < r.config.solver.max_iter);
            fs::read_to_string(&cfg.output.report).unwrap()
        })
        .collect();
    assert_ne!(reports[0], reports[1]);
    assert_ne!(reports[1], reports[2]);
    assert_ne!(reports[0], reports[2]);
}

#[test]
fn full_sampling_reports_the_psnr_sentinel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), MethodName::Bemcp, 1.0);
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.iterations, 0);
    assert!(r.converged);
    assert_eq!(r.psnr, Some(PSNR_CAP));
    assert_eq!(r.rel_error, Some(0.0));
    assert_eq!(r.final_inf_norm_diff, None);
    let trace = fs::read_to_string(cfg.output.trace.unwrap()).unwrap();
    assert_eq!(trace.trim(), "iter,inf_norm_diff,elapsed_s,psnr");
    // +inf must not leak into the JSON
    let text = fs::read_to_string(&cfg.output.report).unwrap();
    assert_eq!(CompletionReport::from_json(&text).unwrap().psnr, Some(999.0));
}

#[test]
fn without_truth_the_metrics_are_null() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), MethodName::Nmcp, 0.5);
    cfg.truth = None;
    cfg.output.trace = None;
    let r = run_experiment(&cfg).unwrap();
    assert!(r.converged);
    assert_eq!((r.psnr, r.ssim, r.ergas, r.rel_error), (None, None, None, None));
    assert!(r.bands.is_none());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cfg.output.report).unwrap()).unwrap();
    assert!(v["psnr"].is_null());
}

#[test]
fn trace_csv_has_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), MethodName::Nmcp, 0.5);
    let r = run_experiment(&cfg).unwrap();
    let mut rdr = csv::Reader::from_path(cfg.output.trace.as_ref().unwrap()).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), r.iterations);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), k + 1);
        assert!(row[1].parse::<f64>().unwrap().is_finite());
        assert!(row[3].parse::<f64>().unwrap() > 0.0);
    }
    let last: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert_eq!(Some(last), r.final_inf_norm_diff);
    assert!(last <= r.config.solver.eps);
}

#[test]
fn binary_complete_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture();
    let run = |tag: &str| {
        let out = dir.path().join(format!("{tag}.dtf"));
        let report = dir.path().join(format!("{tag}.json"));
        let o = tenscomp(&[
            "complete", "--input", s(&fx), "--rate", "0.5", "--seed", "7", "--method", "emcp", "--out", s(&out),
            "--report", s(&report),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.json");
    let out = dir.path().join("x.dtf");
    let report = dir.path().join("r.json");
    fs::write(
        &cfg_path,
        serde_json::json!({
            "input": fixture(),
            "truth": fixture(),
            "mask": {"generate": {"rate": 0.5, "seed": 7}},
            "solver": {"method": "bemcp", "max_iter": 3, "mu": 1.2},
            "output": {"completed": out, "report": "unused.json"}
        })
        .to_string(),
    )
    .unwrap();
    let o = tenscomp(&[
        "complete", "--config", s(&cfg_path), "--method", "nmcp", "--max-iter", "5", "--report", s(&report),
        "--alpha", "0.5,0.25,0.25",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = CompletionReport::from_json(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.config.solver.method, MethodName::Nmcp);
    assert_eq!(r.config.solver.max_iter, 5);
    assert_eq!(r.config.solver.mu, 1.2);
    assert_eq!(r.config.solver.alpha, Some(vec![0.5, 0.25, 0.25]));
    assert_eq!(r.iterations, 5);
    assert!(!r.converged);
    assert!(out.is_file());
}

#[test]
fn mask_file_matches_generated_mask() {
    let dir = tempfile::tempdir().unwrap();
    let mask_path = dir.path().join("m.dtf");
    let o = tenscomp(&["mask", "--shape", "20,20,5", "--rate", "0.5", "--seed", "7", "--out", s(&mask_path)]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "1000 of 2000 entries observed");
    assert_eq!(io::load_mask(&mask_path).unwrap(), generate_mask(&[20, 20, 5], 0.5, 7).unwrap());

    let mut from_file = config(dir.path(), MethodName::Nmcp, 0.5);
    from_file.mask = MaskSource::File(mask_path);
    from_file.output.completed = dir.path().join("file.dtf");
    let generated = config(dir.path(), MethodName::Nmcp, 0.5);
    run_experiment(&from_file).unwrap();
    run_experiment(&generated).unwrap();
    assert_eq!(
        fs::read(&from_file.output.completed).unwrap(),
        fs::read(&generated.output.completed).unwrap()
    );
}

#[test]
fn rank_prints_the_n_tubal_rank() {
    let o = tenscomp(&["rank", "--input", s(&fixture())]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "[2, 5, 5]");
}

#[test]
fn failures_exit_nonzero_without_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dtf");
    fs::write(&bad, b"NOPE\x03\0\0\0").unwrap();
    let report = dir.path().join("r.json");
    let out = dir.path().join("x.dtf");

    let o = tenscomp(&["complete", "--input", s(&bad), "--rate", "0.5", "--seed", "1", "--out", s(&out), "--report", s(&report)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad magic"));

    let o = tenscomp(&["complete", "--input", s(&fixture()), "--rate", "0", "--seed", "1", "--out", s(&out), "--report", s(&report)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside (0, 1]"));

    let o = tenscomp(&["complete", "--input", s(&fixture()), "--out", s(&out), "--report", s(&report)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("mask"));

    let missing = dir.path().join("missing.dtf");
    let o = tenscomp(&["complete", "--input", s(&missing), "--rate", "0.5", "--seed", "1", "--out", s(&out), "--report", s(&report)]);
    assert!(!o.status.success());
    assert!(!report.exists());

    let shape_mismatch = dir.path().join("other.dtf");
    io::save_tensor(&gaussian(&[4, 4, 2], 1).unwrap(), &shape_mismatch).unwrap();
    let o = tenscomp(&[
        "complete", "--input", s(&fixture()), "--truth", s(&shape_mismatch), "--rate", "0.5", "--seed", "1",
        "--out", s(&out), "--report", s(&report),
    ]);
    assert!(!o.status.success());
    assert!(!report.exists());
}

#[test]
fn thread_count_does_not_change_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixture();
    let run = |threads: &str| {
        let out = dir.path().join(format!("t{threads}.dtf"));
        let report = dir.path().join(format!("t{threads}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_tenscomp"))
            .env("TENSCOMP_THREADS", threads)
            .args(["complete", "--input", s(&fx), "--rate", "0.4", "--seed", "3", "--method", "bemcp"])
            .args(["--max-iter", "20", "--out", s(&out), "--report", s(&report)])
            .output()
            .unwrap();
        assert!(o.status.success());
        fs::read(out).unwrap()
    };
    assert_eq!(run("1"), run("4"));
}
