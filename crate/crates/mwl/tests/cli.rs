//! Contract tests for the command-line interface: the documented example
//! invocations, exit codes, artifact formats, manifests, and configuration
//! precedence. Reproducibility across thread counts is exercised separately
//! in the acceptance suite.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mwl::cli::{manifest_path, RunManifest};
use mwl::grid::{DyadicGrid, StepFunction};
use mwl::inequalities::TheoremId;
use mwl::instance::{FunctionSpec, InstanceSpec, WeightSpec};
use mwl::io::{format_float, read_step_csv, sha256_hex, write_step_csv};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mwl")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin()).args(args).current_dir(dir).output().expect("spawn the mwl binary")
}

fn tmpdir() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn write_ones_weight(dir: &Path, depth: u32) -> PathBuf {
    let grid = DyadicGrid::new(depth).unwrap();
    let path = dir.join("w.csv");
    write_step_csv(&path, &StepFunction::constant(grid, 1.0).unwrap()).unwrap();
    path
}

// ---------------------------------------------------------------------------
// Documented example invocations
// ---------------------------------------------------------------------------

#[test]
fn verify_all_ones_has_ratio_exactly_one() {
    let dir = tmpdir();
    let out = run_in(
        dir.path(),
        &["verify", "--theorem", "MAIN_1_4", "--depth", "4", "--m", "2", "--seed", "1", "--out", "r.json"],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["ratio"].as_f64().unwrap(), 1.0);
    assert_eq!(report["theorem"].as_str().unwrap(), "MAIN_1_4");
    assert!(dir.path().join("r.json.manifest.json").exists());
}

#[test]
fn constants_of_flat_weight_are_exactly_one_in_both_modes() {
    let dir = tmpdir();
    let w = write_ones_weight(dir.path(), 5);
    for mode in ["intervals", "dyadic"] {
        let out_name = format!("c_{mode}.json");
        let out = run_in(
            dir.path(),
            &["constants", "--in", w.to_str().unwrap(), "--mode", mode, "--out", &out_name],
        );
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(&out_name)).unwrap())
                .unwrap();
        assert_eq!(report["a1"]["value"].as_f64().unwrap(), 1.0);
        assert_eq!(report["ainf"]["value"].as_f64().unwrap(), 1.0);
        assert_eq!(report["rhinf"]["value"].as_f64().unwrap(), 1.0);
        for entry in report["ap"].as_array().unwrap() {
            assert_eq!(entry["constant"]["value"].as_f64().unwrap(), 1.0);
        }
    }
}

// ---------------------------------------------------------------------------
// Exit codes
// ---------------------------------------------------------------------------

#[test]
fn exit_codes_follow_the_documented_mapping() {
    let dir = tmpdir();

    // 0: success paths, --help, --version.
    assert_eq!(run_in(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run_in(dir.path(), &["--version"]).status.code(), Some(0));

    // 64: usage errors the argument parser catches.
    assert_eq!(run_in(dir.path(), &["no-such-command"]).status.code(), Some(64));
    assert_eq!(
        run_in(dir.path(), &["verify", "--mode", "weird", "--depth", "4", "--m", "2", "--theorem", "MAIN_1_4"])
            .status
            .code(),
        Some(64)
    );

    // 2: configuration and input errors.
    assert_eq!(
        run_in(dir.path(), &["verify", "--theorem", "NOPE", "--depth", "4", "--m", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(dir.path(), &["constants", "--in", "missing.csv"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(dir.path(), &["maximal", "--set", "bogus=1", "--in", "missing.csv"]).status.code(),
        Some(2)
    );

    // 3: degenerate instances (an identically zero function cannot be
    // normalized).
    let mut spec = InstanceSpec::new(
        TheoremId::Main14,
        vec![FunctionSpec::cube(0, 0), FunctionSpec::cube(0, 0)],
        vec![WeightSpec::Const { value: 1.0 }, WeightSpec::Const { value: 1.0 }],
        WeightSpec::Const { value: 1.0 },
    );
    spec.fs[0].terms[0].0 = 0.0;
    let inst = dir.path().join("zero.json");
    std::fs::write(&inst, spec.describe()).unwrap();
    let out = run_in(
        dir.path(),
        &["verify", "--set", "instance=zero.json", "--depth", "4", "--out", "z.json"],
    );
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

// ---------------------------------------------------------------------------
// Artifact formats
// ---------------------------------------------------------------------------

#[test]
fn step_artifacts_round_trip_through_csv_and_sidecar() {
    let dir = tmpdir();
    let grid = DyadicGrid::new(4).unwrap();
    let f = dir.path().join("f.csv");
    write_step_csv(&f, &StepFunction::from_fn(grid, |x| 1.0 + (x * 7.0).sin().abs()).unwrap())
        .unwrap();
    let out = run_in(dir.path(), &["maximal", "--in", "f.csv", "--out", "m.csv"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // The CSV must declare its grid depth in the sidecar and parse back to a
    // step function on the same grid.
    let m = read_step_csv(&dir.path().join("m.csv")).unwrap();
    assert_eq!(m.grid().depth(), 4);
    let header = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    assert!(header.starts_with("cell_index,value\n"));
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.csv.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["depth"].as_u64().unwrap(), 4);
}

#[test]
fn json_and_csv_outputs_encode_identical_values() {
    let dir = tmpdir();
    let grid = DyadicGrid::new(5).unwrap();
    let w = dir.path().join("w.csv");
    write_step_csv(&w, &StepFunction::from_fn(grid, |x| (1.0 - 0.5 * x).powi(2)).unwrap()).unwrap();

    let json_run = run_in(dir.path(), &["constants", "--in", "w.csv", "--out", "c.json"]);
    assert_eq!(json_run.status.code(), Some(0));
    let csv_run = run_in(
        dir.path(),
        &["constants", "--in", "w.csv", "--format", "csv", "--out", "c.csv"],
    );
    assert_eq!(csv_run.status.code(), Some(0));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    let a1_json = report["a1"]["value"].as_f64().unwrap();

    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let a1_line = csv.lines().find(|l| l.starts_with("a1,")).unwrap();
    let a1_text = a1_line.strip_prefix("a1,").unwrap();
    // 17 significant digits: the decimal text recovers the exact bits.
    assert_eq!(a1_text, format_float(a1_json));
    assert_eq!(a1_text.parse::<f64>().unwrap().to_bits(), a1_json.to_bits());
}

#[test]
fn decompose_emits_summary_decay_table_and_cube_list() {
    let dir = tmpdir();
    // A suite member engineered to stop at three separated sites, so the
    // cube list is guaranteed to be nonempty.
    let spec =
        mwl::suite::main_suite().into_iter().find(|m| m.name == "rich-0").unwrap().spec;
    std::fs::write(dir.path().join("inst.json"), spec.describe()).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "decompose",
            "--set",
            "instance=inst.json",
            "--depth",
            "10",
            "--set",
            "cubes_out=cubes.csv",
            "--out",
            "d.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert!(summary["sparse"]["pass"].as_bool().unwrap());
    let decay = std::fs::read_to_string(dir.path().join("d.decay.csv")).unwrap();
    assert!(decay.starts_with("l,max_ratio\n"));
    let cubes = std::fs::read_to_string(dir.path().join("cubes.csv")).unwrap();
    assert!(cubes.starts_with("k,l,level,index\n"));
    assert!(cubes.lines().count() > 1, "expected at least one stopping cube");
}

#[test]
fn fuzz_writes_result_json_and_trial_csv() {
    let dir = tmpdir();
    let out = run_in(
        dir.path(),
        &[
            "fuzz",
            "--theorem",
            "CONJ_1_6",
            "--seed",
            "5",
            "--depth",
            "5",
            "--set",
            "budget=6",
            "--set",
            "depth_schedule=4,5",
            "--set",
            "max_level=3",
            "--set",
            "max_cascade_levels=3",
            "--out",
            "fz.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fz.json")).unwrap()).unwrap();
    assert_eq!(result["trials_run"].as_u64().unwrap(), 6);
    assert!(result["best"]["report"]["ratio"].as_f64().unwrap().is_finite());
    assert!(!result["best_curve"].as_array().unwrap().is_empty());
    let trials = std::fs::read_to_string(dir.path().join("fz.trials.csv")).unwrap();
    assert!(trials.starts_with("trial,ratio,depth,params\n"));
    assert_eq!(trials.lines().count(), 7, "header plus one row per trial");
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

#[test]
fn manifest_records_effective_config_and_input_hashes() {
    let dir = tmpdir();
    let w = write_ones_weight(dir.path(), 4);
    let out = run_in(
        dir.path(),
        &["constants", "--in", "w.csv", "--mode", "intervals", "--seed", "9", "--out", "c.json"],
    );
    assert_eq!(out.status.code(), Some(0));

    let manifest: RunManifest = serde_json::from_str(
        &std::fs::read_to_string(manifest_path(&dir.path().join("c.json"))).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest.subcommand, "constants");
    assert_eq!(manifest.tool_version, env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest.master_seed, 9);
    assert_eq!(manifest.config.get("mode").map(String::as_str), Some("intervals"));
    assert_eq!(manifest.config.get("seed").map(String::as_str), Some("9"));
    assert_eq!(manifest.inputs.len(), 1);
    assert_eq!(manifest.inputs[0].sha256, sha256_hex(&std::fs::read(&w).unwrap()));
}

// ---------------------------------------------------------------------------
// Configuration precedence
// ---------------------------------------------------------------------------

#[test]
fn flags_override_config_file_values() {
    let dir = tmpdir();
    std::fs::write(
        dir.path().join("run.cfg"),
        "theorem = MAIN_1_4\ndepth = 4\nm = 2\nout = a.json\n",
    )
    .unwrap();

    // Config alone runs at depth 4; a --depth flag must win over the file.
    let out = run_in(dir.path(), &["verify", "--config", "run.cfg", "--depth", "5", "--out", "b.json"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    assert_eq!(report["grid_depth"].as_u64().unwrap(), 5);

    let out = run_in(dir.path(), &["verify", "--config", "run.cfg"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(report["grid_depth"].as_u64().unwrap(), 4);
}

#[test]
fn thread_env_fallback_caps_workers_without_changing_results() {
    let dir = tmpdir();
    let args = [
        "verify", "--theorem", "MAX_1_5", "--depth", "6", "--m", "2", "--seed", "2", "--out",
        "r.json",
    ];
    let plain = run_in(dir.path(), &args);
    assert_eq!(plain.status.code(), Some(0));
    let baseline = std::fs::read(dir.path().join("r.json")).unwrap();

    std::fs::remove_file(dir.path().join("r.json")).unwrap();
    let capped = Command::new(bin())
        .args(args)
        .env("MWL_THREADS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("r.json")).unwrap(), baseline);
}
