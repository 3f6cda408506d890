//! Command-line interface: `simulate`, `augment`, `split`, `train`, `eval`,
//! `heatmap`, and `run-paper-experiment`.
//!
//! Conventions shared by every subcommand:
//!
//! * datasets travel as CSID files, configs as JSON, reports as CSV;
//! * every run writes a resolved-config manifest next to its outputs
//!   (`<file>.manifest.json` beside file outputs, `manifest.json` inside
//!   directory outputs), so a result can always be traced to its inputs;
//! * identical flags produce byte-identical outputs (single-threaded mode);
//! * exit code 0 iff all outputs were written; otherwise a one-line
//!   diagnostic goes to stderr.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::augment::{augment_dataset, AugmentationMethod, AugmentationSpec};
use crate::container::{load_dataset, write_dataset};
use crate::dataset::{split_dataset, Dataset, Normalizer};
use crate::error::{Error, Result};
use crate::experiment::{
    attention_heatmap, evaluate, run_generalization_experiment, seed_sweep, ExperimentConfig,
    TrainConfig,
};
use crate::model::{load_model, save_model, ModelConfig};
use crate::report;
use crate::seed;
use crate::sim::{simulate_scenario, BlockerTrajectory, SimConfig};

const STREAM_CLI_AUG: u64 = 0x434c_4941; // train --augment corruption draws
const STREAM_CLI_VAL: u64 = 0x434c_4956; // internal validation holdout

/// Version line shown by `--version`: toolkit plus file-format versions.
pub const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (dataset container v1, model checkpoint v1)"
);

#[derive(Debug, Parser)]
#[command(
    name = "csiloc",
    version = LONG_VERSION,
    about = "CSI-based indoor localization: simulate, augment, train, evaluate"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset from a simulation config.
    Simulate(SimulateArgs),
    /// Append corrupted copies of training samples to a dataset.
    Augment(AugmentArgs),
    /// Split a dataset into train/val/test parts.
    Split(SplitArgs),
    /// Train a model with a multi-seed sweep and save the best replica.
    Train(TrainArgs),
    /// Evaluate a trained model on a dataset and write report CSVs.
    Eval(EvalArgs),
    /// Write the antenna-attention heatmap of an adn model over a dataset.
    Heatmap(HeatmapArgs),
    /// Run the full static-vs-dynamic generalization experiment.
    RunPaperExperiment(RunPaperExperimentArgs),
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    /// Simulation config (JSON).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output dataset (CSID).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Blocker trajectory (JSON); omits the blocker when absent.
    #[arg(long, value_name = "FILE")]
    trajectory: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario id stamped on every sample (default: 0 static, 1 dynamic).
    #[arg(long)]
    scenario_id: Option<u32>,
}

#[derive(Debug, clap::Args)]
struct AugmentArgs {
    /// Input dataset (CSID).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// "vanilla" (zero antennas) or "ra" (random attenuation).
    #[arg(long)]
    method: String,
    /// Fraction of samples to corrupt-and-append.
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    /// Minimum attenuation (dB); ra only.
    #[arg(long)]
    min_db: Option<f64>,
    /// Maximum attenuation (dB); ra only.
    #[arg(long)]
    max_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset (CSID).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct SplitArgs {
    /// Input dataset (CSID).
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    train: PathBuf,
    #[arg(long, value_name = "FILE")]
    val: PathBuf,
    #[arg(long, value_name = "FILE")]
    test: PathBuf,
    /// Comma-separated train,val,test ratios.
    #[arg(long, default_value = "0.7,0.15,0.15")]
    ratios: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, clap::Args)]
struct TrainArgs {
    /// Training dataset (CSID).
    #[arg(long, value_name = "FILE")]
    train: PathBuf,
    /// Static test dataset used to rank the seed replicas (CSID).
    #[arg(long, value_name = "FILE")]
    static_test: PathBuf,
    /// "dn" or "adn".
    #[arg(long)]
    model: String,
    /// Replicas to train; init seeds are master-seed, master-seed+1, …
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// "none", "vanilla", or "ra".
    #[arg(long, default_value = "none")]
    augment: String,
    /// Output directory (model.ckpt, seeds.csv, manifest.json).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Validation dataset; without it 15% of --train is held out.
    #[arg(long, value_name = "FILE")]
    val: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 200)]
    max_epochs: usize,
    #[arg(long, default_value_t = 20)]
    patience: usize,
    /// Worker threads for the seed sweep.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, clap::Args)]
struct EvalArgs {
    /// Trained model: a train output directory or a .ckpt file.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Dataset to evaluate (CSID).
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Report directory (per_sample_errors.csv, cdf.csv, manifest.json).
    #[arg(long, value_name = "DIR")]
    report: PathBuf,
}

#[derive(Debug, clap::Args)]
struct HeatmapArgs {
    /// Trained adn model: a train output directory or a .ckpt file.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Dataset whose samples become heatmap columns (CSID).
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Output CSV.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct RunPaperExperimentArgs {
    /// Report directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    /// Worker threads for the seed sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Overrides the desk default (500 samples per user position).
    #[arg(long)]
    samples_per_position: Option<usize>,
    /// Overrides the default replica count per cell.
    #[arg(long)]
    num_seeds: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Suppress progress lines on stderr.
    #[arg(long, default_value_t = false)]
    quiet: bool,
}

/// Runs a parsed invocation. [`Cli`] implements [`Parser`], so
/// `execute(Cli::parse())` is the whole `main`.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Augment(a) => cmd_augment(a),
        Command::Split(a) => cmd_split(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Heatmap(a) => cmd_heatmap(a),
        Command::RunPaperExperiment(a) => cmd_run_paper_experiment(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("invalid {what} {}: {e}", path.display())))
}

fn write_manifest_beside(out: &Path, manifest: &serde_json::Value) -> Result<()> {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    let path = out.with_file_name(name);
    fs::write(path, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

fn parse_method(s: &str) -> Result<AugmentationMethod> {
    match s {
        "vanilla" => Ok(AugmentationMethod::Vanilla),
        "ra" | "random_attenuation" => Ok(AugmentationMethod::RandomAttenuation),
        other => Err(Error::Config(format!(
            "unknown method `{other}` (expected vanilla or ra)"
        ))),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let mut config: SimConfig = read_json(&a.config, "simulation config")?;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    let trajectory: Option<BlockerTrajectory> = match &a.trajectory {
        Some(p) => Some(read_json(p, "trajectory")?),
        None => None,
    };
    let scenario_id = a
        .scenario_id
        .unwrap_or(if trajectory.is_some() { 1 } else { 0 });
    if trajectory.is_some() && scenario_id == 0 {
        return Err(Error::Config(
            "scenario id 0 is reserved for the static (blocker-free) scenario".into(),
        ));
    }

    let ds = simulate_scenario(&config, trajectory.as_ref(), scenario_id)?;
    write_dataset(&ds, &a.out)?;
    write_manifest_beside(
        &a.out,
        &json!({
            "subcommand": "simulate",
            "tool_version": crate::VERSION,
            "config": config,
            "trajectory": trajectory,
            "scenario_id": scenario_id,
            "samples": ds.len(),
            "out": a.out.display().to_string(),
        }),
    )?;
    println!(
        "wrote {} samples ({}x{} CSI, scenario id {}) to {}",
        ds.len(),
        ds.num_antennas(),
        ds.num_subcarriers(),
        scenario_id,
        a.out.display()
    );
    Ok(())
}

fn cmd_augment(a: AugmentArgs) -> Result<()> {
    let method = parse_method(&a.method)?;
    if method == AugmentationMethod::Vanilla && (a.min_db.is_some() || a.max_db.is_some()) {
        eprintln!("warning: --min-db/--max-db are ignored by the vanilla method");
    }
    let spec = AugmentationSpec {
        method,
        sample_fraction: a.fraction,
        min_db: a.min_db.unwrap_or(10.0),
        max_db: a.max_db.unwrap_or(40.0),
        per_antenna: false,
        seed: a.seed,
    };
    let ds = load_dataset(&a.input)?;
    let out = augment_dataset(&ds, &spec)?;
    write_dataset(&out, &a.out)?;
    write_manifest_beside(
        &a.out,
        &json!({
            "subcommand": "augment",
            "tool_version": crate::VERSION,
            "in": a.input.display().to_string(),
            "spec": spec,
            "out": a.out.display().to_string(),
        }),
    )?;
    println!("{} + {} = {}", ds.len(), out.len() - ds.len(), out.len());
    Ok(())
}

fn parse_ratios(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad ratio `{p}` in `{s}`")))
        })
        .collect::<Result<_>>()?;
    if parts.len() != 3 {
        return Err(Error::Config(format!(
            "--ratios needs three comma-separated values, got `{s}`"
        )));
    }
    Ok((parts[0], parts[1], parts[2]))
}

fn cmd_split(a: SplitArgs) -> Result<()> {
    let ratios = parse_ratios(&a.ratios)?;
    let ds = load_dataset(&a.input)?;
    let (train, val, test) = split_dataset(&ds, ratios, a.seed)?;
    write_dataset(&train, &a.train)?;
    write_dataset(&val, &a.val)?;
    write_dataset(&test, &a.test)?;
    write_manifest_beside(
        &a.train,
        &json!({
            "subcommand": "split",
            "tool_version": crate::VERSION,
            "in": a.input.display().to_string(),
            "ratios": [ratios.0, ratios.1, ratios.2],
            "seed": a.seed,
            "train": a.train.display().to_string(),
            "val": a.val.display().to_string(),
            "test": a.test.display().to_string(),
        }),
    )?;
    println!(
        "split {} samples into {} train / {} val / {} test",
        ds.len(),
        train.len(),
        val.len(),
        test.len()
    );
    Ok(())
}

/// Holds out `fraction` of a dataset for validation (seeded shuffle, original
/// order preserved within each part).
fn carve_val(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = ds.len();
    let n_val = (n as f64 * fraction).floor() as usize;
    if n_val == 0 || n_val >= n {
        return Err(Error::Config(format!(
            "training set too small to hold out {:.0}% for validation ({n} samples)",
            fraction * 100.0
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = seed::stream_rng(seed, STREAM_CLI_VAL, 0);
    seed::shuffle(&mut idx, &mut rng);
    let mut val_idx = idx[..n_val].to_vec();
    let mut train_idx = idx[n_val..].to_vec();
    val_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((ds.subset(&train_idx), ds.subset(&val_idx)))
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let full_train = load_dataset(&a.train)?;
    let static_test = load_dataset(&a.static_test)?;
    let (train, val) = match &a.val {
        Some(p) => (full_train, load_dataset(p)?),
        None => {
            eprintln!("warning: no --val given; holding out 15% of the training data");
            carve_val(&full_train, 0.15, a.master_seed)?
        }
    };

    let arch = match a.model.as_str() {
        "dn" => ModelConfig::dn(train.num_antennas(), train.num_subcarriers(), 0),
        "adn" => ModelConfig::adn(train.num_antennas(), train.num_subcarriers(), 0),
        other => {
            return Err(Error::Config(format!(
                "unknown model `{other}` (expected dn or adn)"
            )))
        }
    };

    // Normalizer is fit before augmentation; corrupted copies only shrink
    // entries, so the scale reflects the clean channels.
    let normalizer = Normalizer::fit(&train)?;
    let (train_set, aug_label) = match a.augment.as_str() {
        "none" => (train.clone(), "none".to_string()),
        other => {
            let method = parse_method(other)?;
            let aug_seed = seed::derive_seed(a.master_seed, STREAM_CLI_AUG, 0);
            let spec = match method {
                AugmentationMethod::Vanilla => AugmentationSpec::vanilla(aug_seed),
                AugmentationMethod::RandomAttenuation => {
                    AugmentationSpec::random_attenuation(aug_seed)
                }
            };
            (augment_dataset(&train, &spec)?, method.to_string())
        }
    };

    let tc = TrainConfig {
        learning_rate: a.lr,
        batch_size: a.batch_size,
        max_epochs: a.max_epochs,
        patience: a.patience,
        num_seeds: a.seeds,
        jobs: a.jobs,
    };
    let sweep = seed_sweep(
        &arch,
        &train_set,
        &val,
        &static_test,
        &normalizer,
        &tc,
        a.master_seed,
    )?;

    fs::create_dir_all(&a.out)?;
    save_model(&sweep.model, a.out.join("model.ckpt"))?;
    fs::write(
        a.out.join("seeds.csv"),
        report::seed_runs_csv(&sweep.runs, sweep.best_index, sweep.val_best_index),
    )?;
    let best = &sweep.runs[sweep.best_index];
    fs::write(
        a.out.join("manifest.json"),
        serde_json::to_string_pretty(&json!({
            "subcommand": "train",
            "tool_version": crate::VERSION,
            "train": a.train.display().to_string(),
            "static_test": a.static_test.display().to_string(),
            "val": a.val.as_ref().map(|p| p.display().to_string()),
            "model": arch.kind_name(),
            "augment": aug_label,
            "train_config": tc,
            "master_seed": a.master_seed,
            "train_samples": train_set.len(),
            "val_samples": val.len(),
            "static_test_samples": static_test.len(),
            "normalizer_scale": normalizer.scale,
            "best": best,
        }))?,
    )?;
    println!(
        "best replica: seed index {} (init seed {}), static test error {:.1} mm; saved to {}",
        best.seed_index,
        best.init_seed,
        best.selection_error_mm.unwrap_or(f64::NAN),
        a.out.join("model.ckpt").display()
    );
    Ok(())
}

/// Accepts either a checkpoint file or a train output directory.
fn resolve_model_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("model.ckpt")
    } else {
        p.to_path_buf()
    }
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let model = load_model(resolve_model_path(&a.model))?;
    let ds = load_dataset(&a.data)?;
    let rep = evaluate(&model, &ds)?;
    fs::create_dir_all(&a.report)?;
    fs::write(
        a.report.join("per_sample_errors.csv"),
        report::per_sample_errors_csv(&rep),
    )?;
    fs::write(a.report.join("cdf.csv"), report::cdf_csv(&rep))?;
    fs::write(
        a.report.join("manifest.json"),
        serde_json::to_string_pretty(&json!({
            "subcommand": "eval",
            "tool_version": crate::VERSION,
            "model": a.model.display().to_string(),
            "data": a.data.display().to_string(),
            "samples": rep.per_sample_errors_mm.len(),
            "mean_error_mm": rep.mean_error_mm,
            "median_error_mm": rep.median_error_mm,
            "per_scenario_mean_mm": rep.per_scenario_mean_mm,
        }))?,
    )?;
    println!(
        "mean error {:.1} mm (median {:.1} mm) over {} samples",
        rep.mean_error_mm,
        rep.median_error_mm,
        rep.per_sample_errors_mm.len()
    );
    Ok(())
}

fn cmd_heatmap(a: HeatmapArgs) -> Result<()> {
    let model = load_model(resolve_model_path(&a.model))?;
    let ds = load_dataset(&a.data)?;
    let hm = attention_heatmap(&model, &ds)?;
    fs::write(&a.out, report::heatmap_csv(&hm))?;
    write_manifest_beside(
        &a.out,
        &json!({
            "subcommand": "heatmap",
            "tool_version": crate::VERSION,
            "model": a.model.display().to_string(),
            "data": a.data.display().to_string(),
            "antennas": hm.num_antennas,
            "samples": hm.num_samples,
            "out": a.out.display().to_string(),
        }),
    )?;
    println!(
        "wrote {}x{} heatmap to {}",
        hm.num_antennas,
        hm.num_samples,
        a.out.display()
    );
    Ok(())
}

fn cmd_run_paper_experiment(a: RunPaperExperimentArgs) -> Result<()> {
    let mut config = ExperimentConfig::desk(a.master_seed);
    if let Some(spp) = a.samples_per_position {
        config.sim.samples_per_position = spp;
    }
    if let Some(n) = a.num_seeds {
        config.train.num_seeds = n;
    }
    if let Some(n) = a.max_epochs {
        config.train.max_epochs = n;
    }
    if let Some(n) = a.patience {
        config.train.patience = n;
    }
    config.train.jobs = a.jobs;
    config.verbose = !a.quiet;

    let result = run_generalization_experiment(&config)?;
    report::write_experiment_reports(&a.out, &result, &config)?;

    println!("model  augmentation         dynamic_mm  static_mm");
    for cell in &result.cells {
        println!(
            "{:<6} {:<20} {:>10.1} {:>10.1}",
            cell.model,
            cell.augmentation,
            cell.dynamic.mean_error_mm,
            cell.static_test.mean_error_mm
        );
    }
    println!("reports written to {}", a.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{CsiMatrix, Cpx, CsiSample};
    use crate::geometry::ArrayGeometry;

    #[test]
    fn version_line_matches_format_constants() {
        assert_eq!(crate::container::VERSION, 1);
        assert_eq!(crate::model::MODEL_VERSION, 1);
        assert!(LONG_VERSION.contains("container v1"));
        assert!(LONG_VERSION.contains("checkpoint v1"));
        assert!(LONG_VERSION.starts_with(crate::VERSION));
    }

    #[test]
    fn parse_simulate_flags() {
        let cli = Cli::try_parse_from([
            "csiloc",
            "simulate",
            "--config",
            "cfg.json",
            "--out",
            "data.csid",
            "--trajectory",
            "traj.json",
            "--seed",
            "7",
        ])
        .unwrap();
        match cli.command {
            Command::Simulate(a) => {
                assert_eq!(a.config, PathBuf::from("cfg.json"));
                assert_eq!(a.seed, Some(7));
                assert!(a.trajectory.is_some());
                assert_eq!(a.scenario_id, None);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn parse_train_flags_kebab_case() {
        let cli = Cli::try_parse_from([
            "csiloc",
            "train",
            "--train",
            "a.csid",
            "--static-test",
            "t.csid",
            "--model",
            "adn",
            "--seeds",
            "3",
            "--augment",
            "ra",
            "--out",
            "run/",
            "--master-seed",
            "5",
            "--max-epochs",
            "12",
        ])
        .unwrap();
        match cli.command {
            Command::Train(a) => {
                assert_eq!(a.model, "adn");
                assert_eq!(a.seeds, 3);
                assert_eq!(a.augment, "ra");
                assert_eq!(a.master_seed, 5);
                assert_eq!(a.max_epochs, 12);
                assert_eq!(a.patience, 20); // default
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn run_paper_experiment_subcommand_name() {
        let cli =
            Cli::try_parse_from(["csiloc", "run-paper-experiment", "--out", "reports/"]).unwrap();
        match cli.command {
            Command::RunPaperExperiment(a) => {
                assert_eq!(a.master_seed, 0);
                assert_eq!(a.jobs, 1);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn method_aliases() {
        assert_eq!(parse_method("vanilla").unwrap(), AugmentationMethod::Vanilla);
        assert_eq!(
            parse_method("ra").unwrap(),
            AugmentationMethod::RandomAttenuation
        );
        assert_eq!(
            parse_method("random_attenuation").unwrap(),
            AugmentationMethod::RandomAttenuation
        );
        let err = parse_method("zero").unwrap_err().to_string();
        assert!(err.contains("unknown method"), "{err}");
    }

    #[test]
    fn ratios_parser() {
        assert_eq!(parse_ratios("0.7,0.15,0.15").unwrap(), (0.7, 0.15, 0.15));
        assert_eq!(parse_ratios("0.5, 0.25, 0.25").unwrap(), (0.5, 0.25, 0.25));
        assert!(parse_ratios("0.7,0.3").is_err());
        assert!(parse_ratios("a,b,c").is_err());
    }

    #[test]
    fn carve_val_partitions_and_is_deterministic() {
        let geom = ArrayGeometry::with_dims(2, 2);
        let mut ds = Dataset::new(geom).unwrap();
        for i in 0..20 {
            ds.push(CsiSample {
                csi: CsiMatrix::from_vec(
                    2,
                    2,
                    vec![Cpx::new(i as f32 + 1.0, 0.0); 4],
                )
                .unwrap(),
                position: [i as f32, 0.0],
                scenario_id: 0,
            })
            .unwrap();
        }
        let (train, val) = carve_val(&ds, 0.15, 9).unwrap();
        assert_eq!(val.len(), 3); // floor(20 * 0.15)
        assert_eq!(train.len(), 17);
        let (train2, val2) = carve_val(&ds, 0.15, 9).unwrap();
        assert_eq!(train.samples()[0].position, train2.samples()[0].position);
        assert_eq!(val.samples()[0].position, val2.samples()[0].position);
        // Together they cover every sample exactly once.
        let mut xs: Vec<f32> = train
            .iter()
            .chain(val.iter())
            .map(|s| s.position[0])
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(xs, (0..20).map(|i| i as f32).collect::<Vec<_>>());
        // Too small to carve.
        let tiny = ds.subset(&[0, 1]);
        assert!(carve_val(&tiny, 0.15, 9).is_err());
    }

    #[test]
    fn manifest_lands_beside_output() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("x.csv");
        write_manifest_beside(&out, &json!({"k": 1})).unwrap();
        let manifest = dir.path().join("x.csv.manifest.json");
        let text = fs::read_to_string(manifest).unwrap();
        assert!(text.contains("\"k\": 1"));
    }
}
