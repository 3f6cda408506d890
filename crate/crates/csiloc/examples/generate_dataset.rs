//! Simulates the desk-scale environment and writes the datasets to disk.
//!
//! Produces one static scenario (no blocker) and one dynamic scenario per
//! blocker trajectory, stores them in the binary container format, and reads
//! one back to show the roundtrip is lossless.
//!
//! ```text
//! cargo run --example generate_dataset
//! ```

use std::fs;
use std::path::PathBuf;

use csiloc::container::{load_dataset, write_dataset};
use csiloc::sim::{simulate, simulate_scenario, SimConfig};

fn main() -> csiloc::Result<()> {
    let out = PathBuf::from("target/example-output/generate_dataset");
    fs::create_dir_all(&out)?;

    let mut config = SimConfig::desk(42);
    config.samples_per_position = 100; // keep the demo quick

    println!(
        "environment: {}x{} array on the north wall of a {:.0}x{:.0} m room, {} users",
        config.geometry.num_antennas,
        config.geometry.num_subcarriers,
        config.room.width(),
        config.room.height(),
        config.user_positions.len(),
    );

    // Scenario 0: the static environment.
    let static_ds = simulate(&config, None)?;
    let static_path = out.join("static.csid");
    write_dataset(&static_ds, &static_path)?;
    println!(
        "scenario 0 (static): {} samples -> {}",
        static_ds.len(),
        static_path.display()
    );

    // Scenarios 1..: one walking blocker each.
    for (i, traj) in SimConfig::desk_trajectories().iter().enumerate() {
        let id = (i + 1) as u32;
        let ds = simulate_scenario(&config, Some(traj), id)?;
        let path = out.join(format!("dynamic_{id}.csid"));
        write_dataset(&ds, &path)?;
        println!(
            "scenario {id} (blocker {:?} -> {:?}): {} samples -> {}",
            traj.a,
            traj.b,
            ds.len(),
            path.display()
        );
    }

    // Roundtrip check: the container stores CSI bit-exactly.
    let back = load_dataset(&static_path)?;
    assert_eq!(back.len(), static_ds.len());
    let lossless = back
        .iter()
        .zip(static_ds.iter())
        .all(|(a, b)| a.csi.entries() == b.csi.entries() && a.position == b.position);
    assert!(lossless);
    println!("roundtrip: reloaded {} samples bit-exact", back.len());

    // A peek at the data itself.
    let s = static_ds.get(0);
    println!(
        "sample 0: user at ({:.1}, {:.1}) m, |H[0][0]| = {:.4e}, mean power {:.3e}",
        s.position[0],
        s.position[1],
        (s.csi.get(0, 0).re.powi(2) + s.csi.get(0, 0).im.powi(2)).sqrt(),
        s.csi.mean_power(),
    );
    Ok(())
}
