//! Report files: the CSV and JSON artifacts an experiment leaves behind.
//!
//! Every writer is deterministic — same inputs, byte-identical files — so
//! repeated runs with the same master seed can be diffed directly.
//!
//! * `comparison.csv` — one row per grid cell: model, augmentation, mean
//!   dynamic error, mean static test error.
//! * `per_sample_errors.csv` — per-sample evaluation detail.
//! * `cdf.csv` — the empirical error CDF.
//! * `heatmap.csv` — antennas × samples attention weights.
//! * `seeds.csv` — the seed-sweep record.
//! * `manifest.json` — seeds, sizes, and headline numbers in one place.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::{
    AttentionHeatmap, EvalReport, ExperimentConfig, ExperimentResult, SeedRun,
};

/// `model,augmentation,mean_error_mm,static_test_mm` — one row per cell, in
/// experiment order, errors to 3 decimals.
pub fn comparison_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("model,augmentation,mean_error_mm,static_test_mm\n");
    for cell in &result.cells {
        writeln!(
            out,
            "{},{},{:.3},{:.3}",
            cell.model,
            cell.augmentation,
            cell.dynamic.mean_error_mm,
            cell.static_test.mean_error_mm
        )
        .expect("write to string");
    }
    out
}

/// `index,scenario_id,error_mm` in dataset order.
pub fn per_sample_errors_csv(report: &EvalReport) -> String {
    let mut out = String::from("index,scenario_id,error_mm\n");
    for (i, (err, sid)) in report
        .per_sample_errors_mm
        .iter()
        .zip(&report.scenario_ids)
        .enumerate()
    {
        writeln!(out, "{i},{sid},{err:.3}").expect("write to string");
    }
    out
}

/// `error_mm,fraction` — sorted errors with cumulative fractions.
pub fn cdf_csv(report: &EvalReport) -> String {
    let mut out = String::from("error_mm,fraction\n");
    for (err, frac) in &report.cdf {
        writeln!(out, "{err:.3},{frac:.6}").expect("write to string");
    }
    out
}

/// `antenna,sample_0,...` — one row per antenna, one column per sample; each
/// column holds that sample's per-antenna attention distribution.
pub fn heatmap_csv(hm: &AttentionHeatmap) -> String {
    let mut out = String::from("antenna");
    for n in 0..hm.num_samples {
        write!(out, ",sample_{n}").expect("write to string");
    }
    out.push('\n');
    for m in 0..hm.num_antennas {
        write!(out, "{m}").expect("write to string");
        for n in 0..hm.num_samples {
            write!(out, ",{:.6}", hm.get(m, n)).expect("write to string");
        }
        out.push('\n');
    }
    out
}

/// Per-replica sweep table. Diverged replicas leave the error cells empty.
/// `selected` marks the replica the sweep kept (lowest selection error) and
/// `val_selected` the one a validation-ranked sweep would have kept, so the
/// two selection rules can be compared from the table alone.
pub fn seed_runs_csv(runs: &[SeedRun], best_index: usize, val_best_index: usize) -> String {
    let mut out = String::from(
        "seed_index,init_seed,val_error_mm,selection_error_mm,epochs_run,status,selected,val_selected\n",
    );
    for (i, r) in runs.iter().enumerate() {
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_default();
        let mark = |cond: bool| if cond { "yes" } else { "" };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.seed_index,
            r.init_seed,
            fmt(r.val_error_mm),
            fmt(r.selection_error_mm),
            r.epochs_run,
            if r.diverged() { "diverged" } else { "ok" },
            mark(i == best_index),
            mark(i == val_best_index),
        )
        .expect("write to string");
    }
    out
}

/// One cell's summary inside [`Manifest`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub model: String,
    pub augmentation: String,
    pub mean_error_mm: f64,
    pub static_test_mm: f64,
    pub median_error_mm: f64,
    /// Samples behind `mean_error_mm` (upper-bound cells use the smaller
    /// held-out dynamic pool).
    pub dynamic_samples: usize,
    pub best_seed_index: usize,
    pub best_init_seed: u64,
    /// Seed a validation-ranked selection would have kept.
    pub val_best_seed_index: usize,
    pub replicas: usize,
}

/// Machine-readable experiment summary: every config and seed that shaped the
/// run, plus the headline numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub master_seed: u64,
    /// The fully resolved experiment configuration.
    pub config: ExperimentConfig,
    /// (train, val, test) sizes of the static split.
    pub static_sizes: (usize, usize, usize),
    /// Full dynamic pool size (grid-cell evaluation set).
    pub dynamic_full_size: usize,
    /// Held-out dynamic pool size (upper-bound evaluation set).
    pub dynamic_test_size: usize,
    pub cells: Vec<ManifestCell>,
}

impl Manifest {
    pub fn from_result(result: &ExperimentResult, config: &ExperimentConfig) -> Manifest {
        Manifest {
            tool_version: crate::VERSION.to_string(),
            master_seed: result.master_seed,
            config: config.clone(),
            static_sizes: result.static_sizes,
            dynamic_full_size: result.dynamic_full_size,
            dynamic_test_size: result.dynamic_test_size,
            cells: result
                .cells
                .iter()
                .map(|c| ManifestCell {
                    model: c.model.clone(),
                    augmentation: c.augmentation.clone(),
                    mean_error_mm: c.dynamic.mean_error_mm,
                    static_test_mm: c.static_test.mean_error_mm,
                    median_error_mm: c.dynamic.median_error_mm,
                    dynamic_samples: c.dynamic.per_sample_errors_mm.len(),
                    best_seed_index: c.runs[c.best_index].seed_index,
                    best_init_seed: c.runs[c.best_index].init_seed,
                    val_best_seed_index: c.runs[c.val_best_index].seed_index,
                    replicas: c.runs.len(),
                })
                .collect(),
        }
    }
}

/// Writes the full report tree for an experiment:
///
/// ```text
/// dir/
///   comparison.csv
///   manifest.json
///   heatmap.csv                  (champion adn cell over the static test set)
///   cells/<model>_<augmentation>/
///     per_sample_errors.csv      (dynamic pool)
///     cdf.csv                    (dynamic pool)
///     seeds.csv
/// ```
pub fn write_experiment_reports<P: AsRef<Path>>(
    dir: P,
    result: &ExperimentResult,
    config: &ExperimentConfig,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("comparison.csv"), comparison_csv(result))?;
    let manifest = Manifest::from_result(result, config);
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;

    for cell in &result.cells {
        let cell_dir = dir
            .join("cells")
            .join(format!("{}_{}", cell.model, cell.augmentation));
        fs::create_dir_all(&cell_dir)?;
        fs::write(
            cell_dir.join("per_sample_errors.csv"),
            per_sample_errors_csv(&cell.dynamic),
        )?;
        fs::write(cell_dir.join("cdf.csv"), cdf_csv(&cell.dynamic))?;
        fs::write(
            cell_dir.join("seeds.csv"),
            seed_runs_csv(&cell.runs, cell.best_index, cell.val_best_index),
        )?;
    }

    // Attention heatmap from the attenuation-augmented adn cell, computed on
    // the static test split (clean channels, so the weights reflect geometry
    // rather than blockage).
    if let Some(cell) = result.cell("adn", "random_attenuation") {
        let hm = crate::experiment::attention_heatmap(&cell.trained, &result.static_test)?;
        fs::write(dir.join("heatmap.csv"), heatmap_csv(&hm))?;
    }
    Ok(())
}
