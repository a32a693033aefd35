use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ris_core::config::parse_scenario_str;
use ris_core::experiments::preset;

fn ris_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ris-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn file_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn list_presets_prints_six_lines() {
    let o = ris_sim(&["list-presets"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text
        .lines()
        .any(|l| l.starts_with("nlos_sparse") && l.contains("paths=10/10")));
    assert!(text.contains("n_ris=43"));
}

#[test]
fn verify_passes_on_default_instance() {
    let o = ris_sim(&["verify"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("[FAIL]"));
}

#[test]
fn run_writes_csvs_and_manifest() {
    let out = tempfile::tempdir().unwrap();
    let o = ris_sim(&[
        "run",
        "--scenario",
        "nlos_sparse",
        "--out",
        out.path().to_str().unwrap(),
        "--realizations",
        "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("OPT-GEN"));

    let dir = out.path().join("nlos_sparse");
    assert_eq!(
        file_names(&dir),
        ["capacity.csv", "eigs.csv", "manifest.txt", "power.csv", "summary.csv"]
    );
    assert_eq!(file_names(out.path()), ["nlos_sparse"], "staging directory left behind");

    let power = fs::read_to_string(dir.join("power.csv")).unwrap();
    assert_eq!(power.lines().next(), Some("realization,design,sigma2_f"));
    assert_eq!(power.lines().count(), 1 + 3 * 8);

    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    let mut expected = preset("nlos_sparse").unwrap();
    expected.n_realizations = 3;
    assert_eq!(parse_scenario_str(&manifest).unwrap(), expected);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().join("los_sparse");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("keep.txt"), "mine").unwrap();
    let base = [
        "run",
        "--scenario",
        "los_sparse",
        "--out",
        out.path().to_str().unwrap(),
        "--realizations",
        "2",
    ];

    let o = ris_sim(&base);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--force"));
    assert_eq!(file_names(&dir), ["keep.txt"]);

    let mut forced = base.to_vec();
    forced.push("--force");
    let o = ris_sim(&forced);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!dir.join("keep.txt").exists());
    assert!(dir.join("summary.csv").exists());
}

#[test]
fn config_file_with_overrides() {
    let out = tempfile::tempdir().unwrap();
    let cfg = out.path().join("small.cfg");
    fs::write(
        &cfg,
        "# tiny run\npreset = los_rich\nname = tiny\nn_tx = 4\nn_rx = 4\nn_ris = 5\n\
         designs = RAND, OPT-GEN\nsnr_grid_db = -10, 0, 10\n",
    )
    .unwrap();
    let results = out.path().join("results");
    let o = ris_sim(&[
        "run",
        "--scenario",
        cfg.to_str().unwrap(),
        "--out",
        results.to_str().unwrap(),
        "--seed",
        "9",
        "--realizations",
        "4",
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = fs::read_to_string(results.join("tiny/manifest.txt")).unwrap();
    let echoed = parse_scenario_str(&manifest).unwrap();
    assert_eq!(echoed.channel.seed, 9);
    assert_eq!(echoed.n_realizations, 4);
    assert_eq!(echoed.channel.n_ris, 5);
    let capacity = fs::read_to_string(results.join("tiny/capacity.csv")).unwrap();
    assert_eq!(capacity.lines().count(), 1 + 2 * 3);
}

#[test]
fn same_seed_gives_identical_files_across_thread_counts() {
    let out = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for threads in ["1", "3"] {
        let target = out.path().join(threads);
        let o = ris_sim(&[
            "run",
            "--scenario",
            "nlos_rich",
            "--out",
            target.to_str().unwrap(),
            "--realizations",
            "4",
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        dirs.push(target.join("nlos_rich"));
    }
    for name in ["power.csv", "capacity.csv", "eigs.csv", "summary.csv"] {
        assert_eq!(
            fs::read(dirs[0].join(name)).unwrap(),
            fs::read(dirs[1].join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn errors_are_one_line_and_leave_output_untouched() {
    let out = tempfile::tempdir().unwrap();
    let bad = out.path().join("bad.cfg");
    fs::write(&bad, "preset = nlos_sparse\nn_realizations = 0\n").unwrap();
    let results = out.path().join("results");

    let o = ris_sim(&[
        "run",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        results.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("line 2") && err.contains("n_realizations"), "{err}");
    assert!(!results.exists());

    let o = ris_sim(&[
        "run",
        "--scenario",
        "no_such_preset",
        "--out",
        results.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no_such_preset"));
    assert!(!results.exists());
}

#[test]
fn bad_arguments_print_usage() {
    let o = ris_sim(&["run", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
    let o = ris_sim(&["run", "--scenario", "nlos_sparse", "--out", "x", "--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
