//! End-to-end tests of the command-line interface: every subcommand, the
//! happy-path pipeline (simulate → split → augment → train → eval → heatmap),
//! the documented error cases, and byte-identical reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use csiloc::container::load_dataset;
use csiloc::geometry::ArrayGeometry;
use csiloc::sim::SimConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csiloc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> (String, String) {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run_err(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        !out.status.success(),
        "command {args:?} should fail but printed:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A small 8×8 environment with two users so the pipeline tests are quick.
fn tiny_sim_config(seed: u64) -> SimConfig {
    let desk = SimConfig::desk(seed);
    let mut geometry = ArrayGeometry::with_dims(8, 8);
    geometry.array_origin = [3.0 - 3.5 * geometry.antenna_spacing, 5.5];
    geometry.array_axis = [1.0, 0.0];
    SimConfig {
        geometry,
        user_positions: vec![[1.5, 1.5], [4.5, 3.5]],
        samples_per_position: 30,
        ..desk
    }
}

fn write_config(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join("sim.json");
    fs::write(&path, serde_json::to_string_pretty(&tiny_sim_config(seed)).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_owned()
}

#[test]
fn version_names_both_format_versions() {
    let (stdout, _) = run_ok(&["--version"]);
    assert!(stdout.contains(csiloc::VERSION), "{stdout}");
    assert!(stdout.contains("dataset container v1"), "{stdout}");
    assert!(stdout.contains("model checkpoint v1"), "{stdout}");
}

#[test]
fn simulate_writes_dataset_manifest_and_is_rerun_stable() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 9);
    let out = dir.path().join("static.csid");

    let (stdout, _) = run_ok(&["simulate", "--config", &s(&config), "--out", &s(&out)]);
    assert!(
        stdout.contains("wrote 60 samples (8x8 CSI, scenario id 0)"),
        "{stdout}"
    );
    let ds = load_dataset(&out).unwrap();
    assert_eq!((ds.len(), ds.num_antennas(), ds.num_subcarriers()), (60, 8, 8));

    let manifest = out.with_file_name("static.csid.manifest.json");
    let text = fs::read_to_string(&manifest).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["samples"], 60);

    // Identical flags → byte-identical outputs.
    let first = fs::read(&out).unwrap();
    let first_manifest = fs::read(&manifest).unwrap();
    run_ok(&["simulate", "--config", &s(&config), "--out", &s(&out)]);
    assert_eq!(fs::read(&out).unwrap(), first);
    assert_eq!(fs::read(&manifest).unwrap(), first_manifest);
}

#[test]
fn simulate_trajectory_defaults_to_scenario_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 9);
    let traj_path = dir.path().join("walk.json");
    let traj = &SimConfig::desk_trajectories()[0];
    fs::write(&traj_path, serde_json::to_string(traj).unwrap()).unwrap();
    let out = dir.path().join("dynamic.csid");

    let (stdout, _) = run_ok(&[
        "simulate",
        "--config",
        &s(&config),
        "--trajectory",
        &s(&traj_path),
        "--out",
        &s(&out),
    ]);
    assert!(stdout.contains("scenario id 1"), "{stdout}");
    assert_eq!(load_dataset(&out).unwrap().get(0).scenario_id, 1);

    // Scenario id 0 is reserved for the static environment.
    let stderr = run_err(&[
        "simulate",
        "--config",
        &s(&config),
        "--trajectory",
        &s(&traj_path),
        "--scenario-id",
        "0",
        "--out",
        &s(&out),
    ]);
    assert!(stderr.contains("scenario id 0"), "{stderr}");
}

#[test]
fn simulate_missing_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let stderr = run_err(&[
        "simulate",
        "--config",
        &s(&dir.path().join("nope.json")),
        "--out",
        &s(&dir.path().join("x.csid")),
    ]);
    assert!(stderr.contains("cannot read"), "{stderr}");
}

#[test]
fn augment_reports_sizes_and_validates_method() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 10);
    let data = dir.path().join("data.csid");
    run_ok(&["simulate", "--config", &s(&config), "--out", &s(&data)]);

    let vanilla = dir.path().join("vanilla.csid");
    let (stdout, stderr) = run_ok(&[
        "augment", "--in", &s(&data), "--method", "vanilla", "--out", &s(&vanilla),
    ]);
    assert!(stdout.contains("60 + 30 = 90"), "{stdout}");
    assert!(stderr.is_empty(), "{stderr}");
    assert_eq!(load_dataset(&vanilla).unwrap().len(), 90);

    // Attenuation bounds are meaningless for the zeroing method: warn.
    let (_, stderr) = run_ok(&[
        "augment", "--in", &s(&data), "--method", "vanilla", "--min-db", "5",
        "--out", &s(&vanilla),
    ]);
    assert!(stderr.contains("warning"), "{stderr}");
    assert!(stderr.contains("vanilla"), "{stderr}");

    // "ra" and its long alias are the same method.
    let ra = dir.path().join("ra.csid");
    run_ok(&["augment", "--in", &s(&data), "--method", "ra", "--out", &s(&ra)]);
    let ra_alias = dir.path().join("ra2.csid");
    run_ok(&[
        "augment", "--in", &s(&data), "--method", "random_attenuation",
        "--out", &s(&ra_alias),
    ]);
    assert_eq!(fs::read(&ra).unwrap(), fs::read(&ra_alias).unwrap());

    let stderr = run_err(&[
        "augment", "--in", &s(&data), "--method", "dropout", "--out", &s(&ra),
    ]);
    assert!(stderr.contains("unknown method `dropout`"), "{stderr}");
}

#[test]
fn split_partitions_by_the_given_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 11);
    let data = dir.path().join("data.csid");
    run_ok(&["simulate", "--config", &s(&config), "--out", &s(&data)]);

    let (train, val, test) = (
        dir.path().join("train.csid"),
        dir.path().join("val.csid"),
        dir.path().join("test.csid"),
    );
    run_ok(&[
        "split", "--in", &s(&data), "--train", &s(&train), "--val", &s(&val),
        "--test", &s(&test), "--seed", "3",
    ]);
    let (a, b, c) = (
        load_dataset(&train).unwrap().len(),
        load_dataset(&val).unwrap().len(),
        load_dataset(&test).unwrap().len(),
    );
    assert_eq!(a + b + c, 60);
    assert_eq!((a, b), (42, 9));
}

#[test]
fn train_eval_heatmap_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 12);
    let data = dir.path().join("data.csid");
    run_ok(&["simulate", "--config", &s(&config), "--out", &s(&data)]);
    let (train, val, test) = (
        dir.path().join("train.csid"),
        dir.path().join("val.csid"),
        dir.path().join("test.csid"),
    );
    run_ok(&[
        "split", "--in", &s(&data), "--train", &s(&train), "--val", &s(&val),
        "--test", &s(&test),
    ]);

    // Train a small attention model.
    let model_dir = dir.path().join("adn");
    let (stdout, stderr) = run_ok(&[
        "train", "--train", &s(&train), "--val", &s(&val), "--static-test", &s(&test),
        "--model", "adn", "--augment", "ra", "--seeds", "2", "--max-epochs", "4",
        "--patience", "2", "--master-seed", "7", "--out", &s(&model_dir),
    ]);
    assert!(stderr.is_empty(), "{stderr}");
    assert!(stdout.contains("best"), "{stdout}");
    for f in ["model.ckpt", "seeds.csv", "manifest.json"] {
        assert!(model_dir.join(f).exists(), "missing {f}");
    }
    let seeds_csv = fs::read_to_string(model_dir.join("seeds.csv")).unwrap();
    assert!(seeds_csv.lines().count() >= 3, "{seeds_csv}"); // header + 2 runs
    assert!(seeds_csv.contains(",7,"), "init seeds start at the master seed: {seeds_csv}");

    // Omitting --val warns and holds out part of the training split.
    let warn_dir = dir.path().join("noval");
    let (_, stderr) = run_ok(&[
        "train", "--train", &s(&train), "--static-test", &s(&test),
        "--model", "dn", "--seeds", "1", "--max-epochs", "2", "--out", &s(&warn_dir),
    ]);
    assert!(stderr.contains("no --val"), "{stderr}");

    // Evaluate: the model path may be the directory or the checkpoint itself.
    let report = dir.path().join("report");
    let (stdout, _) = run_ok(&[
        "eval", "--model", &s(&model_dir), "--data", &s(&test), "--report", &s(&report),
    ]);
    assert!(stdout.contains("mean"), "{stdout}");
    for f in ["per_sample_errors.csv", "cdf.csv", "manifest.json"] {
        assert!(report.join(f).exists(), "missing {f}");
    }
    let per_sample = fs::read_to_string(report.join("per_sample_errors.csv")).unwrap();
    assert_eq!(per_sample.lines().next().unwrap(), "index,scenario_id,error_mm");
    assert_eq!(per_sample.lines().count(), 1 + 9);

    let report2 = dir.path().join("report2");
    run_ok(&[
        "eval", "--model", &s(&model_dir.join("model.ckpt")), "--data", &s(&test),
        "--report", &s(&report2),
    ]);
    assert_eq!(
        fs::read(report.join("per_sample_errors.csv")).unwrap(),
        fs::read(report2.join("per_sample_errors.csv")).unwrap()
    );

    // Heatmap columns are attention distributions (within CSV precision).
    let hm = dir.path().join("heatmap.csv");
    run_ok(&["heatmap", "--model", &s(&model_dir), "--data", &s(&test), "--out", &s(&hm)]);
    let text = fs::read_to_string(&hm).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("antenna,sample_0"), "{header}");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    for j in 0..rows[0].len() {
        let sum: f64 = rows.iter().map(|r| r[j]).sum();
        assert!((sum - 1.0).abs() < 1e-4, "column {j} sums to {sum}");
    }

    // A model without attention cannot produce one.
    let stderr = run_err(&[
        "heatmap", "--model", &s(&warn_dir), "--data", &s(&test), "--out", &s(&hm),
    ]);
    assert!(stderr.contains("no antenna attention"), "{stderr}");
}

#[test]
fn eval_rejects_mismatched_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 13);
    let data = dir.path().join("data.csid");
    run_ok(&["simulate", "--config", &s(&config), "--out", &s(&data)]);
    let model_dir = dir.path().join("model");
    run_ok(&[
        "train", "--train", &s(&data), "--static-test", &s(&data), "--model", "dn",
        "--seeds", "1", "--max-epochs", "2", "--out", &s(&model_dir),
    ]);

    // A 4×4 dataset cannot feed an 8×8 model.
    let mut small = tiny_sim_config(13);
    small.geometry = {
        let mut j = ArrayGeometry::with_dims(4, 4);
        j.array_origin = [3.0 - 1.5 * j.antenna_spacing, 5.5];
        j.array_axis = [1.0, 0.0];
        j
    };
    let small_path = dir.path().join("small.json");
    fs::write(&small_path, serde_json::to_string(&small).unwrap()).unwrap();
    let small_data = dir.path().join("small.csid");
    run_ok(&["simulate", "--config", &s(&small_path), "--out", &s(&small_data)]);

    let stderr = run_err(&[
        "eval", "--model", &s(&model_dir), "--data", &s(&small_data),
        "--report", &s(&dir.path().join("r")),
    ]);
    assert!(stderr.contains("8x8"), "{stderr}");
    assert!(stderr.contains("4x4"), "{stderr}");
}

#[test]
fn train_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 14);
    let data = dir.path().join("data.csid");
    run_ok(&["simulate", "--config", &s(&config), "--out", &s(&data)]);

    let args = |out: &str| {
        [
            "train", "--train", &s(&data), "--static-test", &s(&data), "--model", "dn",
            "--seeds", "1", "--max-epochs", "3", "--master-seed", "5", "--out", out,
        ]
        .map(String::from)
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok(&args(&s(&a)).iter().map(|x| x.as_str()).collect::<Vec<_>>());
    run_ok(&args(&s(&b)).iter().map(|x| x.as_str()).collect::<Vec<_>>());
    for f in ["model.ckpt", "seeds.csv", "manifest.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
}
