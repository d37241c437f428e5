use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shimkit_cli::{ExperimentConfig, ExperimentPreset, RunSummary};
use shimkit_core::{format_text_model, make_buckyball, make_frustrated_loop, ShimState};

fn shimkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shimkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_model(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn summary(dir: &Path) -> RunSummary {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn orbits_of_buckyball_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        "bucky.txt",
        &format_text_model(&make_buckyball()),
    );
    let json = dir.path().join("orbits.json");
    let out = shimkit(&["orbits", &model, "--out", json.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("qubit orbits: 1, coupler orbits: 2\n"));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(doc["qubit_orbits"].as_object().unwrap().len(), 60);
    assert_eq!(doc["coupler_orbits"].as_object().unwrap().len(), 90);
    assert!(doc["opposite_qubit"].is_object() && doc["opposite_coupler"].is_object());
}

#[test]
fn orbits_of_frustrated_loop_are_opposite() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(
        dir.path(),
        "loop.txt",
        &format_text_model(&make_frustrated_loop(6, -1.0).unwrap()),
    );
    let json = dir.path().join("orbits.json");
    let out = shimkit(&["orbits", &model, "--out", json.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("coupler orbits: 2"));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    let opp = doc["opposite_coupler"].as_object().unwrap();
    assert_eq!(opp.len(), 2);
    for (a, b) in opp {
        assert_ne!(a, &b.to_string());
    }
}

#[test]
fn malformed_model_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "bad.txt", "0 1 -1.0\n# fine\n1 2 x\n");
    let out = shimkit(&["orbits", &model]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn missing_model_file_fails() {
    let out = shimkit(&["orbits", "/nonexistent/model.txt"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(shimkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(shimkit(&["run", "no_such_preset"]).status.code(), Some(2));
    let out = shimkit(&["embed", "--pattern", "fm_loop:x", "--hardware", "pegasus:2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn embed_triangle_on_chimera_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_model(dir.path(), "tri.txt", "0 1 1\n1 2 1\n0 2 1\n");
    let out = shimkit(&["embed", "--pattern", &model, "--hardware", "chimera:2,2,4"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn embed_is_deterministic_and_writes_maps() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<_> = ["a.json", "b.json"]
        .iter()
        .map(|name| {
            let path = dir.path().join(name);
            let out = shimkit(&[
                "embed",
                "--pattern",
                "frustrated_loop:16",
                "--hardware",
                "pegasus:6",
                "--seed",
                "5",
                "--max-copies",
                "6",
                "--out",
                path.to_str().unwrap(),
            ]);
            assert!(out.status.success(), "{}", stderr(&out));
            assert!(stdout(&out).starts_with("copies: 6 "));
            fs::read(path).unwrap()
        })
        .collect();
    assert_eq!(files[0], files[1]);
    let maps: Vec<Vec<usize>> = serde_json::from_slice(&files[0]).unwrap();
    assert_eq!(maps.len(), 6);
    assert!(maps.iter().all(|m| m.len() == 16));
}

#[test]
fn embed_64_loop_many_times() {
    let out = shimkit(&[
        "embed",
        "--pattern",
        "fm_loop:64",
        "--hardware",
        "pegasus:16",
        "--budget",
        "1000000",
        "--max-copies",
        "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("copies: 4 "));
}

#[test]
fn embed_cylinder_uses_the_lattice_layout() {
    let out = shimkit(&[
        "embed",
        "--pattern",
        "cylinder:6x6",
        "--hardware",
        "pegasus:8",
        "--max-copies",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("copies: 2 (36 qubits each"));
}

#[test]
fn zero_iterations_echo_the_nominal_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = shimkit(&[
        "run",
        "frustrated_loop",
        "--iterations",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert_eq!(csv, "iter,kind,id,value\n");
    let state: ShimState =
        serde_json::from_str(&fs::read_to_string(dir.path().join("state.json")).unwrap()).unwrap();
    assert_eq!(state.iteration, 0);
    assert!(state.fbo.iter().all(|&p| p == 0.0));
    assert_eq!(state.couplings.len(), 8 * 16);
    assert!(state.couplings.iter().all(|&j| j == -0.9 || j == 0.9));
    let s = summary(dir.path());
    assert_eq!((s.first_window, s.max_coupler_deviation), (None, 0.0));
}

#[test]
fn fm_loop_balancing_reduces_sigma_m() {
    let dir = tempfile::tempdir().unwrap();
    let out = shimkit(&[
        "run",
        "fm_loop_balancing",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("sigma_m: first window"));
    let s = summary(dir.path());
    let (first, last) = (s.first_window.unwrap(), s.last_window.unwrap());
    assert!(last.sigma_m < first.sigma_m, "{first:?} {last:?}");
    assert_eq!((first.iter, last.iter), (9, 99));
    for name in ["config.json", "orbits.json", "series.csv", "state.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let csv = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let sigma_rows = csv.lines().filter(|l| l.contains(",sigma_m,")).count();
    assert_eq!(sigma_rows, 91);
}

#[test]
fn tafm_couplers_stay_near_nominal() {
    let dir = tempfile::tempdir().unwrap();
    let out = shimkit(&[
        "run",
        "tafm_forward_anneal",
        "--seed",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let s = summary(dir.path());
    assert!(
        s.max_coupler_deviation < 0.05,
        "{}",
        s.max_coupler_deviation
    );
    let psi = s.final_mean_abs_psi.unwrap();
    assert!((0.0..=2.0 / 3f64.sqrt() + 1e-12).contains(&psi));
    let psi_csv = fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    assert!(psi_csv.starts_with("iter,read,re,im\n"));
    // 100 iterations, 100 reads of 2 copies
    assert_eq!(psi_csv.lines().count(), 1 + 100 * 200);
}

#[test]
fn ensemble_preset_reduces_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let out = shimkit(&[
        "run",
        "ensemble",
        "--seed",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let e = summary(dir.path()).ensemble.unwrap();
    assert!(e.baseline >= 3.0 * e.shimmed, "{e:?}");
    assert!(dir.path().join("ensemble.csv").exists());
    assert!(dir.path().join("fbo.json").exists());
}

#[test]
fn dump_config_then_run_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = shimkit(&[
        "run",
        "buckyball_orbits",
        "--seed",
        "4",
        "--iterations",
        "12",
        "--dump-config",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let config: ExperimentConfig = serde_json::from_slice(&out.stdout).unwrap();
    let mut expected = ExperimentPreset::BuckyballOrbits.config(4, false);
    expected.iterations = 12;
    assert_eq!(config, expected);

    let path = dir.path().join("config.json");
    fs::write(&path, &out.stdout).unwrap();
    let run_dir = dir.path().join("run");
    let out = shimkit(&[
        "run",
        path.to_str().unwrap(),
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("qubit orbits: 1, coupler orbits: 2"));
    assert_eq!(summary(&run_dir).iterations, 12);
}

#[test]
fn bad_config_files_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentPreset::BuckyballOrbits.config(0, false);
    config.schema = 7;
    let path = dir.path().join("old.json");
    fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();
    let out = shimkit(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("schema"));

    fs::write(&path, "{ not json").unwrap();
    assert_eq!(
        shimkit(&["run", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let out = shimkit(&["run", path.to_str().unwrap(), "--paper-scale"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn noise_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let noise = dir.path().join("noise.json");
    let out = shimkit(&[
        "noise-gen",
        "pegasus:6",
        "--seed",
        "8",
        "--offset-sigma",
        "0.05",
        "--out",
        noise.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let run = |tag: &str, extra: &[&str]| {
        let out_dir = dir.path().join(tag);
        let mut args = vec![
            "run",
            "frustrated_loop",
            "--iterations",
            "3",
            "--out",
            out_dir.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let out = shimkit(&args);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read(out_dir.join("series.csv")).unwrap()
    };
    let with_file = run("file", &["--noise", noise.to_str().unwrap()]);
    assert_eq!(
        with_file,
        run("file_again", &["--noise", noise.to_str().unwrap()])
    );
    assert_ne!(with_file, run("generated", &[]));

    let wrong = dir.path().join("small.json");
    let out = shimkit(&["noise-gen", "pegasus:2", "--out", wrong.to_str().unwrap()]);
    assert!(out.status.success());
    let out = shimkit(&[
        "run",
        "frustrated_loop",
        "--iterations",
        "1",
        "--noise",
        wrong.to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let series: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|threads| {
            let out_dir = dir.path().join(threads);
            let out = shimkit(&[
                "--threads",
                threads,
                "run",
                "frustrated_loop",
                "--iterations",
                "4",
                "--out",
                out_dir.to_str().unwrap(),
            ]);
            assert!(out.status.success(), "{}", stderr(&out));
            fs::read(out_dir.join("series.csv")).unwrap()
        })
        .collect();
    assert_eq!(series[0], series[1]);
}
