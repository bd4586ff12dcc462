mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use graspmap::cli::{
    load_bundle, main_with_args, BundleManifest, PipelineConfig, EXIT_EVAL, EXIT_OK, EXIT_VALIDATION, MANIFEST,
};
use graspmap::metrics::EvalReport;
use graspmap::reward::format_log;
use graspmap::sgcr::io::read_contact_map;
use graspmap::Error;
use proptest::prelude::*;
use tempfile::TempDir;

use common::episodes;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("graspmap").chain(args.iter().copied()))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, resolution: usize) -> PathBuf {
    let bundle = dir.join("bundle");
    let res = resolution.to_string();
    assert_eq!(
        run(&["synth", "--shape", "sphere", "--resolution", &res, "--out", path(&bundle)]),
        EXIT_OK
    );
    bundle
}

#[test]
fn synth_writes_a_clean_bundle() {
    let tmp = TempDir::new().unwrap();
    let bundle = synth(tmp.path(), 24);
    assert!(bundle.join(MANIFEST).is_file());
    let manifest = BundleManifest::read(&bundle).unwrap();
    assert_eq!(manifest.views.len(), 4);
    let scene = load_bundle(&bundle).unwrap();
    assert_eq!(scene.proposals.intents.len(), 2);
    assert_eq!(run(&["validate", "--bundle", path(&bundle)]), EXIT_OK);
}

#[test]
fn broken_bundle_fails_validation() {
    let tmp = TempDir::new().unwrap();
    let bundle = synth(tmp.path(), 16);
    let manifest = BundleManifest::read(&bundle).unwrap();
    fs::remove_file(manifest.mask_path(&bundle, 0, 0)).unwrap();
    fs::write(bundle.join(&manifest.views[1].depth), b"not a pfm").unwrap();
    assert_eq!(run(&["validate", "--bundle", path(&bundle)]), EXIT_VALIDATION);
    let out = tmp.path().join("out");
    assert_eq!(
        run(&["run", "--bundle", path(&bundle), "--out", path(&out)]),
        EXIT_VALIDATION
    );
    assert!(!out.join("diagnostics.json").exists());
    assert!(matches!(load_bundle(&bundle), Err(Error::Bundle(_))));
}

#[test]
fn run_then_eval() {
    let tmp = TempDir::new().unwrap();
    let bundle = synth(tmp.path(), 24);
    let out = tmp.path().join("out");
    assert_eq!(run(&["run", "--bundle", path(&bundle), "--out", path(&out)]), EXIT_OK);
    for name in [
        "contact_map_0.json",
        "contact_map_0.ply",
        "pseudo_pose_0.json",
        "contact_map_1.json",
        "pseudo_pose_1.json",
        "diagnostics.json",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let map = read_contact_map(&out.join("contact_map_0.json")).unwrap();
    assert_eq!(map.intent_id, 0);
    assert!(!map.points.is_empty());
    assert!(fs::read_dir(&out).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().starts_with(".staging")));

    let logs = tmp.path().join("logs");
    fs::create_dir(&logs).unwrap();
    for log in episodes::boundary_logs() {
        fs::write(logs.join(format!("{}.jsonl", log.name)), format_log(&log)).unwrap();
    }
    let report_path = tmp.path().join("report.json");
    assert_eq!(
        run(&["eval", "--logs", path(&logs), "--maps", path(&out), "--out", path(&report_path)]),
        EXIT_OK
    );
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.episodes, 10);
    assert_eq!(report.gsr, episodes::EXPECTED_GSR);
    assert_eq!(report.sd, Some(episodes::expected_sd()));
}

#[test]
fn single_intent_run() {
    let tmp = TempDir::new().unwrap();
    let bundle = synth(tmp.path(), 16);
    let out = tmp.path().join("out");
    assert_eq!(
        run(&["run", "--bundle", path(&bundle), "--out", path(&out), "--intent", "1"]),
        EXIT_OK
    );
    assert!(out.join("contact_map_1.json").is_file());
    assert!(!out.join("contact_map_0.json").exists());
}

#[test]
fn eval_without_logs_exits_with_eval_code() {
    let tmp = TempDir::new().unwrap();
    let logs = tmp.path().join("logs");
    fs::create_dir(&logs).unwrap();
    assert_eq!(run(&["eval", "--logs", path(&logs), "--maps", path(tmp.path())]), EXIT_EVAL);
    fs::write(logs.join("a.jsonl"), format_log(&episodes::boundary_logs()[0])).unwrap();
    // log names intent 0 but there is no map for it
    assert_eq!(run(&["eval", "--logs", path(&logs), "--maps", path(tmp.path())]), EXIT_EVAL);
}

#[test]
fn config_init_round_trips() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("cfg.json");
    assert_eq!(run(&["config", "init", "--out", path(&file)]), EXIT_OK);
    assert_eq!(PipelineConfig::read(&file).unwrap(), PipelineConfig::default());
}

#[test]
fn bad_config_is_a_validation_failure() {
    let tmp = TempDir::new().unwrap();
    let bundle = synth(tmp.path(), 16);
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"ik": {"iterations": 0}}"#).unwrap();
    let out = tmp.path().join("out");
    assert_eq!(
        run(&["--config", path(&cfg), "run", "--bundle", path(&bundle), "--out", path(&out)]),
        EXIT_VALIDATION
    );
    fs::write(&cfg, r#"{"nonsense": 1}"#).unwrap();
    let err = PipelineConfig::read(&cfg).unwrap_err().to_string();
    assert!(err.contains("cfg.json"), "{err}");
    assert_eq!(run(&["frobnicate"]), EXIT_VALIDATION);
}

#[test]
fn config_comes_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let bundle = synth(tmp.path(), 16);
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"chain": "builtin:nowhere"}"#).unwrap();
    let bin = env!("CARGO_BIN_EXE_graspmap");
    let out = tmp.path().join("out");
    let status = Command::new(bin)
        .args(["run", "--bundle", path(&bundle), "--out", path(&out)])
        .env("GRASPMAP_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_ne!(status.status.code(), Some(EXIT_OK));
    let status = Command::new(bin)
        .args(["run", "--bundle", path(&bundle), "--out", path(&out)])
        .env_remove("GRASPMAP_CONFIG")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&status.stderr));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_documents_round_trip(alpha in 0.01f64..1.0, tau in 1e-4f64..0.1, iters in 1usize..50, beta in 0.0f64..2.0) {
        let mut cfg = PipelineConfig::default();
        cfg.sgcr.alpha = alpha;
        cfg.sgcr.tau = tau;
        cfg.ik.iterations = iters;
        cfg.reward.beta = beta;
        let back = PipelineConfig::parse(&cfg.to_json(), "mem").unwrap();
        prop_assert_eq!(back, cfg);
    }
}
