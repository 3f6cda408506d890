//! Extracts the antenna-attention heatmap from a trained attention network.
//!
//! Trains a small adn on static data, then asks it which antennas it attends
//! to for each test sample. Each heatmap column is the column-mean of the
//! sample's row-stochastic antenna attention matrix, so it is a probability
//! distribution over antennas; users nearer one end of the array should pull
//! attention toward that end.
//!
//! ```text
//! cargo run --example attention_heatmap
//! ```

use std::fs;
use std::path::PathBuf;

use csiloc::dataset::{split_dataset, Normalizer};
use csiloc::experiment::{attention_heatmap, seed_sweep, TrainConfig};
use csiloc::model::ModelConfig;
use csiloc::report::heatmap_csv;
use csiloc::sim::{simulate, SimConfig};

fn main() -> csiloc::Result<()> {
    let out = PathBuf::from("target/example-output/attention_heatmap");
    fs::create_dir_all(&out)?;

    let mut sim = SimConfig::desk(11);
    sim.samples_per_position = 120;
    let ds = simulate(&sim, None)?;
    let (train, val, test) = split_dataset(&ds, (0.7, 0.15, 0.15), 11)?;
    let normalizer = Normalizer::fit(&train)?;

    let tc = TrainConfig {
        max_epochs: 25,
        patience: 6,
        num_seeds: 2,
        ..TrainConfig::default()
    };
    let config = ModelConfig::adn(ds.num_antennas(), ds.num_subcarriers(), 0);
    println!("training an adn on {} static samples...", train.len());
    let sweep = seed_sweep(&config, &train, &val, &test, &normalizer, &tc, 500)?;

    let hm = attention_heatmap(&sweep.model, &test)?;
    let path = out.join("heatmap.csv");
    fs::write(&path, heatmap_csv(&hm))?;
    println!(
        "heatmap: {} antennas x {} samples -> {}\n",
        hm.num_antennas,
        hm.num_samples,
        path.display()
    );

    // Average the columns per user to see where the attention mass sits.
    println!("mean attention per antenna (rows) for each user (columns):");
    let users: Vec<[f32; 2]> = {
        let mut u: Vec<[f32; 2]> = test.iter().map(|s| s.position).collect();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        u.dedup();
        u
    };
    for m in 0..hm.num_antennas {
        let mut cells = String::new();
        for user in &users {
            let cols: Vec<usize> = (0..hm.num_samples)
                .filter(|&j| test.get(j).position == *user)
                .collect();
            let mean: f64 =
                cols.iter().map(|&j| hm.get(m, j)).sum::<f64>() / cols.len() as f64;
            let bar = "#".repeat((mean * 160.0).round() as usize);
            cells.push_str(&format!("  {mean:.3} {bar:<12}"));
        }
        println!("  antenna {m:2}{cells}");
    }
    println!(
        "\nusers, west to east: {:?}",
        users.iter().map(|u| u[0]).collect::<Vec<_>>()
    );

    // Every column must remain a distribution.
    let ok = (0..hm.num_samples).all(|j| {
        let s: f64 = (0..hm.num_antennas).map(|m| hm.get(m, j)).sum();
        (s - 1.0).abs() < 1e-6
    });
    println!("all {} columns sum to 1: {ok}", hm.num_samples);
    Ok(())
}
