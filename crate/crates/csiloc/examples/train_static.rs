//! Trains both localization networks on a static desk-scale dataset.
//!
//! Simulates the environment, splits it 70/15/15, fits the normalizer on the
//! training split, trains the plain network (dn) and its attention variant
//! (adn) with a small seed sweep each, evaluates on the test split, and saves
//! the better model as a checkpoint that a fresh process could reload.
//!
//! ```text
//! cargo run --example train_static
//! ```

use std::fs;
use std::path::PathBuf;

use csiloc::dataset::{split_dataset, Normalizer};
use csiloc::experiment::{evaluate, seed_sweep, TrainConfig};
use csiloc::model::{load_model, save_model, ModelConfig};
use csiloc::sim::{simulate, SimConfig};

fn main() -> csiloc::Result<()> {
    let out = PathBuf::from("target/example-output/train_static");
    fs::create_dir_all(&out)?;

    let mut sim = SimConfig::desk(3);
    sim.samples_per_position = 120; // demo-sized; the full config uses 500
    let ds = simulate(&sim, None)?;
    let (train, val, test) = split_dataset(&ds, (0.7, 0.15, 0.15), 3)?;
    println!(
        "dataset: {} samples -> train {}, val {}, test {}",
        ds.len(),
        train.len(),
        val.len(),
        test.len()
    );

    let normalizer = Normalizer::fit(&train)?;
    let tc = TrainConfig {
        max_epochs: 30,
        patience: 6,
        num_seeds: 2,
        ..TrainConfig::default()
    };

    let m = ds.num_antennas();
    let k = ds.num_subcarriers();
    let mut best: Option<(String, csiloc::model::TrainedModel, f64)> = None;
    for config in [ModelConfig::dn(m, k, 0), ModelConfig::adn(m, k, 0)] {
        let kind = config.kind_name().to_string();
        let sweep = seed_sweep(&config, &train, &val, &test, &normalizer, &tc, 1000)?;
        let report = evaluate(&sweep.model, &test)?;
        let run = &sweep.runs[sweep.best_index];
        println!(
            "{kind} ({} params): test mean {:.1} mm, median {:.1} mm \
             (best of {} seeds, init seed {}, {} epochs)",
            sweep.model.network.param_count(),
            report.mean_error_mm,
            report.median_error_mm,
            tc.num_seeds,
            run.init_seed,
            run.epochs_run,
        );
        if best.as_ref().map_or(true, |(_, _, e)| report.mean_error_mm < *e) {
            best = Some((kind, sweep.model, report.mean_error_mm));
        }
    }

    let (kind, model, err) = best.unwrap();
    let path = out.join("model.ckpt");
    save_model(&model, &path)?;
    println!("\nsaved the {kind} ({err:.1} mm) to {}", path.display());

    // Reload and check the roundtrip preserves inference exactly.
    let back = load_model(&path)?;
    let sample = test.get(0);
    let a = model.predict(sample)?;
    let b = back.predict(sample)?;
    assert_eq!(a.position, b.position);
    println!(
        "reloaded checkpoint predicts ({:.3}, {:.3}) m for a user at ({:.3}, {:.3}) m",
        b.position[0], b.position[1], sample.position[0], sample.position[1]
    );
    Ok(())
}
