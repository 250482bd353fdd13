//! Contract tests for the command-line surface: exit codes, output files,
//! determinism and overlay consistency.

use std::path::Path;
use std::process::Command;

fn expcli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expcli"))
}

fn run_in(dir: &Path, args: &[&str]) -> std::process::Output {
    expcli()
        .args(args)
        .env("EXPCLI_OUT_DIR", dir)
        .output()
        .expect("spawn expcli")
}

#[test]
fn malformed_ensemble_exits_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "rank", "--family", "xy", "--n", "4", "--ensemble", "sec(1)", "--lmax", "3",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("rank_rows.csv").exists());
    assert!(!dir.path().join("rank_summary.json").exists());
}

#[test]
fn unknown_flags_and_bad_values_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["rank", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run_in(
        dir.path(),
        &["train", "--family", "he", "--n", "two", "--g", "1", "--ensemble", "haar", "--l", "1"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_l_grid_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(
        &cfg,
        "family = he\nn = 2\nensemble = haar\ng_grid = 2\nl_grid =\nreps = 1\n",
    )
    .unwrap();
    let out = expcli()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .env("EXPCLI_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("sweep_rows.csv").exists());
}

#[test]
fn dla_reports_su4_and_truncates_on_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["dla", "--family", "he", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 15);
    assert_eq!(v["truncated"], false);

    let out = run_in(
        dir.path(),
        &["dla", "--family", "he", "--n", "3", "--cap", "10"],
    );
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["truncated"], true);
}

#[test]
fn rank_without_depth_budget_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "rank", "--family", "he", "--n", "2", "--ensemble", "haar", "--lmax", "1",
            "--g-max", "2",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_from_target_converges_at_step_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "train", "--family", "he", "--n", "2", "--g", "3", "--ensemble", "haar",
            "--l", "2", "--theta0-from-target",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = expcli::rows::read_csv(&dir.path().join("train_rows.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].steps_e, Some(0));
    assert_eq!(rows[0].converged, Some(true));
}

#[test]
fn step_limited_train_does_not_converge() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "train", "--family", "he", "--n", "2", "--g", "3", "--ensemble", "haar",
            "--l", "2", "--max-steps", "1", "--seed", "11",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = expcli::rows::read_csv(&dir.path().join("train_rows.csv")).unwrap();
    assert_eq!(rows[0].converged, Some(false));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(&cfg, "family = he\nn = 2\nensemble = haar\nl = 1\ng = 9\n").unwrap();
    let out = expcli()
        .args(["train", "--config"])
        .arg(&cfg)
        .args(["--g", "2", "--theta0-from-target"])
        .env("EXPCLI_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let rows = expcli::rows::read_csv(&dir.path().join("train_rows.csv")).unwrap();
    assert_eq!(rows[0].g, 2, "flag overrides the config file");
    // The resolved copy records the effective value.
    let resolved = std::fs::read_to_string(dir.path().join("train_config.txt")).unwrap();
    assert!(resolved.contains("g = 2"));
}

#[test]
fn sweep_reruns_are_byte_identical_across_worker_counts() {
    let args = [
        "sweep", "--family", "he", "--n", "2", "--ensemble", "haar", "--g-grid", "2,4",
        "--l-grid", "1,2", "--reps", "2", "--seed", "7", "--no-overlay", "--max-steps", "400",
    ];
    let mut bytes = Vec::new();
    for workers in ["1", "2"] {
        let dir = tempfile::tempdir().unwrap();
        let out = expcli()
            .args(args)
            .args(["--workers", workers])
            .env("EXPCLI_OUT_DIR", dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        bytes.push(std::fs::read(dir.path().join("sweep_rows.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn sweep_rows_are_sorted_by_m_l_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sweep", "--family", "he", "--n", "2", "--ensemble", "haar", "--g-grid", "4,2",
            "--l-grid", "2,1", "--reps", "2", "--seed", "3", "--no-overlay",
            "--max-steps", "400",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let rows = expcli::rows::read_csv(&dir.path().join("sweep_rows.csv")).unwrap();
    let keys: Vec<(usize, usize, usize)> = rows.iter().map(|r| (r.m, r.l, r.seed)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn overlay_matches_direct_rank_engine_outputs() {
    use dqfim::ansatz::AnsatzFamily;
    use dqfim::ensembles::{EnsembleKind, EnsembleSpec};
    use dqfim::rank::{saturation_profile, RankProtocol};

    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sweep", "--family", "he", "--n", "2", "--ensemble", "haar", "--g-grid", "2,5",
            "--l-grid", "1,4", "--reps", "1", "--seed", "5", "--overlay-g-max", "24",
            "--max-steps", "400",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let overlay: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("boundary_overlay.json")).unwrap(),
    )
    .unwrap();

    let spec = EnsembleSpec::new(EnsembleKind::Haar, 2).unwrap();
    let protocol = RankProtocol {
        g_max: 24,
        ..RankProtocol::default()
    };
    let profile = saturation_profile(
        AnsatzFamily::HardwareEfficient,
        2,
        &spec,
        &[1, 4, 5],
        &protocol,
        5,
    )
    .unwrap();
    assert_eq!(overlay["l_c"].as_u64().unwrap() as usize, profile.l_c);
    assert_eq!(overlay["r_inf"].as_u64().unwrap() as usize, profile.r_inf);
    for point in overlay["boundary"].as_array().unwrap() {
        let l = point["l"].as_u64().unwrap() as usize;
        let rec = profile.records.iter().find(|r| r.l == l).unwrap();
        assert_eq!(point["m_c"].as_u64().unwrap() as usize, rec.r_l);
        assert_eq!(point["r_l"].as_u64().unwrap() as usize, rec.r_l);
    }
}

#[test]
fn bound_prints_isometry_counts() {
    let out = expcli()
        .args(["bound", "--d", "4", "--lmax", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bounds: Vec<u64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["bound"].as_u64().unwrap())
        .collect();
    assert_eq!(bounds, vec![6, 11, 14, 15, 15]);
}

#[test]
fn rank_summary_contains_dla_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "rank", "--family", "xy", "--n", "4", "--ensemble", "sector:1", "--lmax", "5",
            "--seed", "3",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("rank_summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["r_1"], 6);
    assert_eq!(summary["r_inf"], 15);
    assert_eq!(summary["l_c"], 4);
    assert_eq!(summary["dla_dim"], 31);
    // Every curve row carries the schema version and parses back.
    let rows = expcli::rows::read_csv(&dir.path().join("rank_rows.csv")).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.d_l.is_some()));
}
