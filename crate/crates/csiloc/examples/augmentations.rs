//! Demonstrates the two training-set augmentations.
//!
//! Both pick half the training samples, copy them, corrupt a random antenna
//! subset in each copy, and append the copies with the original position
//! labels: the "vanilla" variant zeroes the chosen rows (a worst-case
//! blocker), the random-attenuation variant scales them by 10^(-A/20) with
//! A drawn from 10–40 dB. The originals are never touched.
//!
//! ```text
//! cargo run --example augmentations
//! ```

use csiloc::augment::{augment_dataset, AugmentationSpec};
use csiloc::sim::{simulate, SimConfig};

fn main() -> csiloc::Result<()> {
    let mut config = SimConfig::desk(7);
    config.samples_per_position = 25;
    config.noise_snr_db = None; // so a copy's source is findable by label
    let train = simulate(&config, None)?;
    println!("training set: {} samples\n", train.len());

    for spec in [
        AugmentationSpec::vanilla(123),
        AugmentationSpec::random_attenuation(123),
    ] {
        let augmented = augment_dataset(&train, &spec)?;
        let added = augmented.len() - train.len();
        println!(
            "{}: {} + {} = {} samples",
            spec.method,
            train.len(),
            added,
            augmented.len()
        );

        // The originals come first and are bit-identical.
        let untouched = augmented
            .iter()
            .take(train.len())
            .zip(train.iter())
            .all(|(a, b)| a.csi.entries() == b.csi.entries());
        println!("  originals untouched: {untouched}");

        // Inspect the appended copies: how hard were the rows hit?
        let mut zeroed_rows = 0usize;
        let mut scaled_rows = 0usize;
        let mut min_factor = f64::INFINITY;
        let mut max_factor = 0.0f64;
        for copy in augmented.iter().skip(train.len()) {
            // A copy keeps its source's label, so find the source by position
            // and compare row magnitudes.
            let source = train
                .iter()
                .find(|s| s.position == copy.position && s.scenario_id == copy.scenario_id)
                .expect("every copy keeps a training label");
            for m in 0..train.num_antennas() {
                let pc: f64 = copy.csi.row(m).iter().map(|z| z.norm_sqr() as f64).sum();
                let ps: f64 = source.csi.row(m).iter().map(|z| z.norm_sqr() as f64).sum();
                if pc == 0.0 && ps > 0.0 {
                    zeroed_rows += 1;
                } else if ps > 0.0 && (pc / ps - 1.0).abs() > 1e-9 {
                    scaled_rows += 1;
                    let factor = (pc / ps).sqrt();
                    min_factor = min_factor.min(factor);
                    max_factor = max_factor.max(factor);
                }
            }
        }
        match spec.method {
            csiloc::augment::AugmentationMethod::Vanilla => {
                println!("  corrupted rows: {zeroed_rows} zeroed\n");
            }
            csiloc::augment::AugmentationMethod::RandomAttenuation => {
                println!(
                    "  corrupted rows: {scaled_rows} attenuated, amplitude factors {:.4}..{:.4}",
                    min_factor, max_factor
                );
                println!(
                    "  (10 dB -> {:.4}, 40 dB -> {:.4})\n",
                    10f64.powf(-10.0 / 20.0),
                    10f64.powf(-40.0 / 20.0)
                );
            }
        }
    }

    // Determinism: the same spec reproduces the same augmented set.
    let spec = AugmentationSpec::vanilla(123);
    let a = augment_dataset(&train, &spec)?;
    let b = augment_dataset(&train, &spec)?;
    let identical = a
        .iter()
        .zip(b.iter())
        .all(|(x, y)| x.csi.entries() == y.csi.entries());
    println!("same seed, same plan: reruns identical = {identical}");
    Ok(())
}
