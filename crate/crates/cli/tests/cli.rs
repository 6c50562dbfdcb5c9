use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use semicirc::io::{self, RunManifest};

fn semicirc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semicirc")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[test]
fn decay_writes_one_row_per_step_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("decay.csv");
    let o = semicirc(&[
        "decay", "--n", "40", "--p", "0.081", "--q", "0", "--h", "0", "--depth", "400", "--realizations", "50", "--seed",
        "7", "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&out), 401);
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, io::DECAY_COLUMNS.join(","));
    let manifest = RunManifest::parse(&fs::read_to_string(io::manifest_path(&out)).unwrap()).unwrap();
    assert_eq!(manifest.seed, 7);
    assert_eq!(manifest.subcommand, "decay");
    assert_eq!(manifest.config["n"], 40);
    let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn odd_size_is_a_usage_error_and_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("decay.csv");
    let o = semicirc(&["decay", "--n", "41", "--p", "0.081", "--depth", "10", "--seed", "1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("even"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unknown_flags_and_missing_values_are_usage_errors() {
    assert_eq!(semicirc(&["decay", "--bogus"]).status.code(), Some(1));
    assert_eq!(semicirc(&["sweep", "--n-list", "20"]).status.code(), Some(1));
    assert_eq!(semicirc(&["--help"]).status.code(), Some(0));
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = semicirc(&[
            "decay", "--n", "20", "--p", "0.1", "--q", "0.02", "--depth", "60", "--realizations", "20", "--seed", "3",
            "--out", path_str(out),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sweep_grid_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = semicirc(&[
        "sweep", "--n-list", "8,12,16", "--p-list", "0.005,0.1,0.2,0.3,0.5,0.8,1", "--depth", "200", "--realizations", "40",
        "--seed", "5", "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = io::read_sweep(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 21);
    for r in rows.iter().filter(|r| r.p == 0.005) {
        assert!(r.censored_fraction > 0.9, "{r:?}");
    }
    // Everything is erased in the first layer, so S(t0) = 0 for any t0 > 0.
    for r in rows.iter().filter(|r| r.p == 1.0) {
        assert_eq!(r.censored_fraction, 1.0, "{r:?}");
    }
}

#[test]
fn full_erasure_decays_within_one_layer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = semicirc(&[
        "sweep", "--n-list", "8,16", "--p-list", "1", "--t0", "0", "--depth", "10", "--realizations", "5", "--seed", "1",
        "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for r in io::read_sweep(fs::File::open(&out).unwrap()).unwrap() {
        assert!(r.tau_mean > 0.0 && r.tau_mean <= 1.0, "{r:?}");
        assert_eq!(r.censored_fraction, 0.0);
    }
}

#[test]
fn phase_diagram_grid_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phase.csv");
    let o = semicirc(&[
        "phase-diagram", "--n", "24", "--p-grid", "12", "--q-grid", "8", "--depth", "60", "--realizations", "2", "--seed",
        "1", "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&out), 96);
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, io::PHASE_COLUMNS.join(","));
}

#[test]
fn dp_mi_and_perturb_emit_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let dp = dir.path().join("dp.csv");
    let o = semicirc(&["dp", "--n", "16", "--p", "0.1", "--depth", "30", "--trajectories", "50", "--seed", "2", "--out", path_str(&dp)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&dp).unwrap().lines().next().unwrap(), io::DP_COLUMNS.join(","));

    let mi = dir.path().join("mi.csv");
    let o = semicirc(&["mi", "--n-list", "8,12", "--p-list", "0.05,0.1", "--realizations", "10", "--seed", "2", "--out", path_str(&mi)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&mi), 4);

    let pt = dir.path().join("perturb.csv");
    let o = semicirc(&[
        "perturb", "--n", "12", "--sweep", "h", "--values", "0.01,0.02", "--depth", "40", "--realizations", "5", "--seed", "2",
        "--out", path_str(&pt),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&pt), 2 * 41);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 2);
}

#[test]
fn verify_passes_on_a_correct_build() {
    let o = semicirc(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let report = String::from_utf8_lossy(&o.stdout);
    assert_eq!(report.lines().filter(|l| l.starts_with("PASS")).count(), 5, "{report}");
}

#[test]
fn collapse_recovers_planted_exponents_from_shipped_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let input = repo_file("data/synthetic_sweep.csv");
    let o = semicirc(&[
        "collapse", "--in", path_str(&input), "--ansatz", "tau", "--bounds", "z=1:2,nu=0.5:2,pc=0.05:0.12", "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let params: Vec<f64> = fit["params"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (got, want) in params.iter().zip([1.5, 1.1, 0.08]) {
        assert!((got - want).abs() < 0.05 * want, "{params:?}");
    }
    assert!(io::manifest_path(&out).exists());
}

#[test]
fn bad_bounds_are_usage_errors() {
    let input = repo_file("data/synthetic_sweep.csv");
    let o = semicirc(&["collapse", "--in", path_str(&input), "--ansatz", "tau", "--bounds", "zeta=1:2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = semicirc(&["collapse", "--in", path_str(&input), "--ansatz", "tau", "--bounds", "z=2:1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_input_is_a_runtime_failure() {
    let o = semicirc(&["collapse", "--in", "/nonexistent/sweep.csv", "--ansatz", "tau"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("decay.csv");
    let config = dir.path().join("run.toml");
    fs::write(&config, format!("n = 12\np = 0.5\ndepth = 30\nrealizations = 4\nseed = 9\nout = {:?}\n", path_str(&out))).unwrap();
    let o = semicirc(&["decay", "--config", path_str(&config), "--depth", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_rows(&out), 21);
    let manifest = RunManifest::parse(&fs::read_to_string(io::manifest_path(&out)).unwrap()).unwrap();
    assert_eq!(manifest.seed, 9);
    assert_eq!(manifest.config["n"], 12);
}

#[test]
fn manifest_alone_reproduces_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = semicirc(&[
        "sweep", "--n-list", "8,12", "--p-list", "0.2,0.4", "--depth", "50", "--realizations", "10", "--out", path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read(&out).unwrap();
    let manifest_file = dir.path().join("saved.manifest.json");
    fs::rename(io::manifest_path(&out), &manifest_file).unwrap();
    fs::remove_file(&out).unwrap();
    let o = semicirc(&["sweep", "--config", path_str(&manifest_file)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&out).unwrap(), first);
}
