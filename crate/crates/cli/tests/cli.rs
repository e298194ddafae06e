//! End-to-end checks of the batch front-end: exit codes, strict config
//! handling, seed determinism, file regeneration, and agreement between the
//! CSV artifacts and direct library calls.

use repulsion_core::experiments::JsonlStore;
use std::path::Path;
use std::process::{Command, Output};

fn repulsion(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repulsion"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("REPULSION_OUT")
        .env_remove("REPULSION_WORKERS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("test.cfg");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const BASE: &str = "[model]\nd = 3\nk = 1\nq = 1.0\n\n[grid]\nl = 8\neps = 0.2\n\n[run]\nseed = 7\n";

#[test]
fn validate_pass_and_fail_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let out = repulsion(&["validate", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("validate.csv").exists());

    // membrane in d = 4 violates the dimension bound: exit 1
    let out = repulsion(
        &["validate", "--config", &cfg, "--model.k", "2", "--model.d", "4"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    assert!(text.contains("dimension_bound,fail"), "{text}");
}

#[test]
fn green_zero_mass_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let out = repulsion(&["green", "--config", &cfg, "--grid.eps", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("zero mode singular"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[model]\nd = 3\nwhatever = 1\n");
    let out = repulsion(&["validate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));

    let cfg2 = write_config(dir.path(), BASE);
    let out = repulsion(&["validate", "--config", &cfg2, "--model.oops", "3"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_flag_determines_outputs_exactly() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let dir_c = tempfile::tempdir().unwrap();
    let cfg_a = write_config(dir_a.path(), BASE);
    let cfg_b = write_config(dir_b.path(), BASE);
    let cfg_c = write_config(dir_c.path(), BASE);
    let args = |cfg: &str| {
        vec![
            "sample".to_string(),
            "--config".to_string(),
            cfg.to_string(),
            "--sample.draws".to_string(),
            "300".to_string(),
        ]
    };
    let run = |cfg: &str, dir: &Path, seed: &str| {
        let mut a: Vec<String> = args(cfg);
        a.push("--seed".into());
        a.push(seed.into());
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        assert!(repulsion(&refs, dir).status.success());
        std::fs::read_to_string(dir.join("sample_cov.csv")).unwrap()
    };
    let a = run(&cfg_a, dir_a.path(), "42");
    let b = run(&cfg_b, dir_b.path(), "42");
    let c = run(&cfg_c, dir_c.path(), "43");
    assert_eq!(a, b, "same seed must give identical artifacts");
    assert_ne!(a, c, "different seed must change the estimates");
}

#[test]
fn rerunning_a_config_regenerates_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let args = [
        "green",
        "--config",
        &cfg,
        "--green.max_displacement",
        "2",
        "--green.radii_min",
        "8",
        "--green.radii_max",
        "16",
    ];
    assert!(repulsion(&args, dir.path()).status.success());
    let first = std::fs::read_to_string(dir.path().join("green.csv")).unwrap();
    let first_ratios = std::fs::read_to_string(dir.path().join("green_ratios.csv")).unwrap();
    assert!(repulsion(&args, dir.path()).status.success());
    let second = std::fs::read_to_string(dir.path().join("green.csv")).unwrap();
    let second_ratios = std::fs::read_to_string(dir.path().join("green_ratios.csv")).unwrap();
    assert_eq!(first, second);
    assert_eq!(first_ratios, second_ratios);
    // the header carries the resolved config
    assert!(first.starts_with("# command = green"));
    assert!(first.contains("# green.max_displacement = 2"));
}

#[test]
fn header_alone_regenerates_the_file() {
    // parse the #-header of an artifact back into flags and re-run from
    // nothing but those: the regenerated file must be identical
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let args = [
        "sample",
        "--config",
        &cfg,
        "--sample.draws",
        "200",
        "--sample.max_displacement",
        "2",
    ];
    assert!(repulsion(&args, dir.path()).status.success());
    let original = std::fs::read_to_string(dir.path().join("sample_cov.csv")).unwrap();

    let mut flags: Vec<String> = vec!["sample".into()];
    for line in original.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        let (key, value) = body.split_once('=').unwrap();
        let (key, value) = (key.trim(), value.trim());
        if key == "command" {
            continue;
        }
        flags.push(format!("--{key}"));
        flags.push(value.to_string());
    }
    let dir2 = tempfile::tempdir().unwrap();
    let refs: Vec<&str> = flags.iter().map(String::as_str).collect();
    let out = repulsion(&refs, dir2.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let regenerated = std::fs::read_to_string(dir2.path().join("sample_cov.csv")).unwrap();
    assert_eq!(original, regenerated);
}

#[test]
fn capacity_csv_matches_direct_library_calls() {
    use repulsion_core::capacity::{solve_obstacle, ObstacleProblem};
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let out = repulsion(
        &[
            "capacity",
            "--config",
            &cfg,
            "--capacity.h_steps",
            "1.0,0.5,0.25",
            "--capacity.radius",
            "4.0",
            "--capacity.radius2",
            "6.0",
            "--capacity.kernel_resolution",
            "6",
            "--capacity.identity_resolution",
            "8",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("capacity.csv")).unwrap();
    // plumbing equivalence: the obstacle rows reproduce direct solves bit
    // for bit
    for &h in &[1.0f64, 0.5, 0.25] {
        let sol = solve_obstacle(&ObstacleProblem::new(1, 3, h, 4.0).unwrap());
        let cell = format!("obstacle,{h:?},4.0,,{:?},true", sol.value);
        assert!(csv.contains(&cell), "missing row `{cell}` in:\n{csv}");
    }
    assert!(dir.path().join("capacity.json").exists());
}

#[test]
fn run_records_accumulate_in_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    assert!(repulsion(&["validate", "--config", &cfg], dir.path())
        .status
        .success());
    assert!(repulsion(
        &["check-c", "--config", &cfg, "--check_c.l", "8", "--check_c.eps_list", "0.5"],
        dir.path()
    )
    .status
    .success());
    let store = JsonlStore::open(dir.path().join("runs.jsonl"));
    let records = store.load_all().unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].kind, "validate");
    assert_eq!(records[1].kind, "check-c");
    assert!(records[1].wall_clock_secs >= 0.0);
    let by_id = store.load("validate-7").unwrap();
    assert_eq!(by_id.kind, "validate");
}

#[test]
fn plot_flag_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let out = repulsion(
        &[
            "conditional",
            "--config",
            &cfg,
            "--plot",
            "--conditional.l_boxes",
            "3,5,7",
            "--conditional.markov_l",
            "9",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("conditional_gl.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn rare_event_with_no_hits_exits_unconverged() {
    // with essentially independent spins, 125 simultaneous positives never
    // happen in 500 draws: the point estimate is withheld and the command
    // reports "unconverged" (exit 2) rather than fabricating a rate
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let out = repulsion(
        &[
            "repulsion",
            "--config",
            &cfg,
            "--grid.l",
            "16",
            "--grid.eps",
            "2.0",
            "--repulsion.n_list",
            "2",
            "--repulsion.draws",
            "500",
            "--repulsion.capacity",
            "2.6",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("repulsion_rates.csv")).unwrap();
    assert!(csv.contains(",true"), "rare-event flag missing:\n{csv}");
}

#[test]
fn worker_count_does_not_change_artifacts() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let cfg_a = write_config(dir_a.path(), BASE);
    let cfg_b = write_config(dir_b.path(), BASE);
    let run = |cfg: &str, dir: &Path, workers: &str| {
        let out = repulsion(
            &[
                "repulsion",
                "--config",
                cfg,
                "--workers",
                workers,
                "--grid.l",
                "12",
                "--grid.eps",
                "0.005",
                "--repulsion.n_list",
                "1",
                "--repulsion.draws",
                "2000",
                "--repulsion.capacity",
                "2.6",
            ],
            dir,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(dir.join("repulsion_rates.csv")).unwrap()
    };
    let a = run(&cfg_a, dir_a.path(), "1");
    let b = run(&cfg_b, dir_b.path(), "2");
    assert_eq!(a, b, "worker count changed the artifact");
}

#[test]
fn env_var_sets_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let out = Command::new(env!("CARGO_BIN_EXE_repulsion"))
        .args(["validate", "--config", &cfg])
        .env("REPULSION_OUT", env_dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.path().join("validate.csv").exists());
}
