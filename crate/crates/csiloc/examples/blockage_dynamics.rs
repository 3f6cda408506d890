//! Visualizes how a walking blocker shadows the antenna array over time.
//!
//! For each snapshot instant the blocker position is sampled along its
//! back-and-forth walk and the per-antenna line-of-sight occlusion mask is
//! printed as one column of an ASCII timeline (`#` = blocked). The mask
//! repeats with the walk period, which the example verifies numerically.
//!
//! ```text
//! cargo run --example blockage_dynamics
//! ```

use csiloc::sim::{blocked_mask, blocker_position, SimConfig};

fn main() -> csiloc::Result<()> {
    let config = SimConfig::desk(0);
    let traj = &SimConfig::desk_trajectories()[0];
    let user = config.user_positions[2]; // (2.0, 3.5), close to the walk
    let steps = 64;

    println!(
        "blocker walks {:?} -> {:?} at {} m/s (radius {} m, period {:.1} s)",
        traj.a,
        traj.b,
        traj.speed,
        traj.radius,
        traj.period()
    );
    println!(
        "user at ({:.1}, {:.1}); array along the north wall\n",
        user[0], user[1]
    );

    // One mask per snapshot instant.
    let masks: Vec<Vec<bool>> = (0..steps)
        .map(|i| {
            let t = i as f64 * config.sample_interval;
            let bp = blocker_position(traj, t);
            blocked_mask(&config.geometry, user, bp, traj.radius)
        })
        .collect();

    println!("antenna blockage over {steps} snapshots ({}s steps):", config.sample_interval);
    for m in 0..config.geometry.num_antennas {
        let row: String = masks
            .iter()
            .map(|mask| if mask[m] { '#' } else { '.' })
            .collect();
        println!("  antenna {m:2} |{row}|");
    }

    let blocked_snapshots = masks.iter().filter(|m| m.iter().any(|&b| b)).count();
    println!(
        "\n{blocked_snapshots}/{steps} snapshots have at least one shadowed antenna"
    );

    // The walk is periodic, so masks separated by one period are identical.
    let period_steps = (traj.period() / config.sample_interval).round() as usize;
    let t0 = 3;
    let a = &masks[t0];
    let b = {
        let t = (t0 + period_steps) as f64 * config.sample_interval;
        blocked_mask(&config.geometry, user, blocker_position(traj, t), traj.radius)
    };
    assert_eq!(a, &b, "mask should repeat with the walk period");
    println!(
        "mask at step {t0} equals mask at step {} (one period = {period_steps} steps later)",
        t0 + period_steps
    );
    Ok(())
}
