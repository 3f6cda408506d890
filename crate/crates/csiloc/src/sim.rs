//! Deterministic geometric channel simulator.
//!
//! Produces synthetic CSI datasets with known ground truth: a line-of-sight
//! ray per antenna/subcarrier, a handful of static single-bounce reflectors,
//! an optional moving cylindrical blocker that attenuates the antennas it
//! shadows, and complex AWGN calibrated to a target SNR. Everything is driven
//! by ChaCha8 substreams derived from one seed, so a `(config, trajectory,
//! scenario_id)` triple maps to exactly one dataset, byte for byte.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cpx, CsiMatrix, CsiSample, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, SPEED_OF_LIGHT};
use crate::seed;

/// RNG substream tags (see [`seed::derive_seed`]).
const STREAM_RAYS: u64 = 0x5261_7973; // reflector placement (per environment)
const STREAM_SAMPLE: u64 = 0x5361_6d70; // per-sample blocker loss + noise

/// Wavelength (meters) for a carrier frequency in Hz.
pub fn wavelength(carrier_freq: f64) -> Result<f64> {
    if !(carrier_freq > 0.0) || !carrier_freq.is_finite() {
        return Err(Error::Config(format!(
            "carrier frequency must be positive and finite, got {carrier_freq}"
        )));
    }
    Ok(SPEED_OF_LIGHT / carrier_freq)
}

/// The K subcarrier frequencies: evenly spaced across the bandwidth, centered
/// on the carrier, i.e. `f_k = carrier - BW/2 + k * BW/(K-1)`. A single
/// subcarrier sits exactly at the carrier.
pub fn subcarrier_freqs(geometry: &ArrayGeometry) -> Vec<f64> {
    let k = geometry.num_subcarriers;
    if k == 1 {
        return vec![geometry.carrier_freq];
    }
    let start = geometry.carrier_freq - geometry.bandwidth / 2.0;
    let step = geometry.bandwidth / (k - 1) as f64;
    (0..k).map(|i| start + i as f64 * step).collect()
}

/// Axis-aligned rectangular room footprint, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

/// A moving cylindrical blocker: walks the segment `a -> b -> a -> ...` at
/// constant speed, shadowing any antenna whose line of sight to the user
/// passes within `radius` of its center, and attenuating shadowed antennas by
/// a per-sample loss drawn from `loss_db` (uniform).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockerTrajectory {
    /// Walk start point, meters.
    pub a: [f64; 2],
    /// Walk end point, meters.
    pub b: [f64; 2],
    /// Walking speed, m/s.
    pub speed: f64,
    /// Blocker cylinder radius, meters.
    pub radius: f64,
    /// Uniform attenuation range in dB, e.g. (10, 20) for human blockage.
    pub loss_db: (f64, f64),
}

impl BlockerTrajectory {
    pub fn validate(&self) -> Result<()> {
        if !self.a.iter().chain(self.b.iter()).all(|v| v.is_finite()) {
            return Err(Error::Config("trajectory endpoints must be finite".into()));
        }
        let seg = dist2(self.a, self.b);
        if !(seg > 0.0) {
            return Err(Error::Config(
                "trajectory endpoints must be distinct".into(),
            ));
        }
        if !(self.speed > 0.0) || !self.speed.is_finite() {
            return Err(Error::Config(format!(
                "trajectory speed must be positive, got {}",
                self.speed
            )));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Config(format!(
                "blocker radius must be positive, got {}",
                self.radius
            )));
        }
        let (lo, hi) = self.loss_db;
        if !(lo > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!(
                "loss_db must satisfy 0 < min <= max, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// Period of the back-and-forth walk, seconds.
    pub fn period(&self) -> f64 {
        2.0 * dist2(self.a, self.b) / self.speed
    }
}

/// A single-bounce reflector: a static scatter point and its gain in dB
/// relative to the line-of-sight ray (negative = weaker).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub scatter: [f64; 2],
    pub gain_db: f64,
}

/// Full description of one simulated environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub geometry: ArrayGeometry,
    /// Room footprint; users, reflectors, and blocker paths must stay inside.
    pub room: Rect,
    /// Fixed user positions, meters. Pairwise distance must be at least
    /// `min_user_separation`.
    pub user_positions: Vec<[f64; 2]>,
    /// Snapshots captured per user (so a scenario has `users * this` samples).
    pub samples_per_position: usize,
    /// Number of static single-bounce reflectors.
    pub num_reflectors: usize,
    /// Uniform range for reflector gain in dB relative to LoS (negative =
    /// below LoS), e.g. (-20, -10).
    pub reflector_gain_db: (f64, f64),
    /// Per-sample AWGN level as an SNR in dB relative to that sample's clean
    /// mean power; `None` disables noise.
    pub noise_snr_db: Option<f64>,
    /// Seconds between consecutive snapshots of one user; sets the time grid a
    /// blocker trajectory is sampled on.
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    /// Minimum pairwise distance between users, meters.
    #[serde(default = "default_min_separation")]
    pub min_user_separation: f64,
    /// Master seed for reflector placement, blocker losses, and noise.
    pub seed: u64,
}

fn default_sample_interval() -> f64 {
    0.05
}

fn default_min_separation() -> f64 {
    1.5
}

impl SimConfig {
    /// A small "desk-scale" environment that trains in minutes: a 16-antenna,
    /// 16-subcarrier array on the north wall of a 6 m × 6 m room, four users,
    /// three reflectors, 20 dB SNR, and 500 snapshots per user.
    pub fn desk(seed: u64) -> Self {
        let mut geometry = ArrayGeometry::with_dims(16, 16);
        // Center the array on the north wall, antennas running along x.
        geometry.array_origin = [3.0 - 7.5 * geometry.antenna_spacing, 5.5];
        geometry.array_axis = [1.0, 0.0];
        SimConfig {
            geometry,
            room: Rect {
                min: [0.0, 0.0],
                max: [6.0, 6.0],
            },
            user_positions: vec![[1.5, 1.5], [4.5, 1.5], [2.0, 3.5], [4.0, 3.5]],
            samples_per_position: 500,
            num_reflectors: 3,
            reflector_gain_db: (-20.0, -10.0),
            noise_snr_db: Some(20.0),
            sample_interval: 0.05,
            min_user_separation: 1.5,
            seed,
        }
    }

    /// The two blocker walks used by the desk-scale changing-environment
    /// scenarios: one crossing the user–array corridor horizontally, one
    /// cutting vertically through the middle of the room.
    pub fn desk_trajectories() -> Vec<BlockerTrajectory> {
        vec![
            BlockerTrajectory {
                a: [1.0, 4.5],
                b: [5.0, 4.5],
                speed: 0.5,
                radius: 0.3,
                loss_db: (10.0, 20.0),
            },
            BlockerTrajectory {
                a: [3.0, 1.0],
                b: [3.0, 5.0],
                speed: 0.5,
                radius: 0.3,
                loss_db: (10.0, 20.0),
            },
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if !(self.room.width() > 0.0) || !(self.room.height() > 0.0) {
            return Err(Error::Config("room must have positive area".into()));
        }
        if self.user_positions.is_empty() {
            return Err(Error::Config("need at least one user position".into()));
        }
        for (i, p) in self.user_positions.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) || !self.room.contains(*p) {
                return Err(Error::Config(format!(
                    "user {i} at ({}, {}) is outside the room",
                    p[0], p[1]
                )));
            }
        }
        for i in 0..self.user_positions.len() {
            for j in i + 1..self.user_positions.len() {
                let d = dist2(self.user_positions[i], self.user_positions[j]);
                if d < self.min_user_separation {
                    return Err(Error::Config(format!(
                        "users {i} and {j} are {d:.3} m apart; minimum separation is {} m",
                        self.min_user_separation
                    )));
                }
            }
        }
        if self.samples_per_position == 0 {
            return Err(Error::Config("samples_per_position must be positive".into()));
        }
        let (lo, hi) = self.reflector_gain_db;
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!(
                "reflector_gain_db must satisfy min <= max, got ({lo}, {hi})"
            )));
        }
        if let Some(snr) = self.noise_snr_db {
            if !snr.is_finite() {
                return Err(Error::Config(format!(
                    "noise_snr_db must be finite, got {snr}"
                )));
            }
        }
        if !(self.sample_interval > 0.0) || !self.sample_interval.is_finite() {
            return Err(Error::Config(format!(
                "sample_interval must be positive, got {}",
                self.sample_interval
            )));
        }
        if !(self.min_user_separation >= 0.0) || !self.min_user_separation.is_finite() {
            return Err(Error::Config(format!(
                "min_user_separation must be nonnegative, got {}",
                self.min_user_separation
            )));
        }
        Ok(())
    }
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[inline]
fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn user_point(geometry: &ArrayGeometry, user: [f64; 2]) -> [f64; 3] {
    [user[0], user[1], geometry.user_height]
}

/// Amplitude factor for a gain/loss expressed in dB: `10^(db/20)`.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Noiseless line-of-sight CSI for a user: per antenna m and subcarrier k,
/// `h[m][k] = (1/d_m) * exp(-j 2π f_k d_m / c)` with `d_m` the 3D
/// antenna-to-user distance. Fails if the user coincides with an antenna.
pub fn los_csi(geometry: &ArrayGeometry, user: [f64; 2]) -> Result<CsiSample> {
    geometry.validate()?;
    let freqs = subcarrier_freqs(geometry);
    let up = user_point(geometry, user);
    let mut csi = CsiMatrix::zeros(geometry.num_antennas, geometry.num_subcarriers);
    for m in 0..geometry.num_antennas {
        let d = dist3(geometry.antenna_position(m), up);
        if !(d > 0.0) {
            return Err(Error::Config(format!(
                "user at ({}, {}) coincides with antenna {m}",
                user[0], user[1]
            )));
        }
        let amp = 1.0 / d;
        for (k, &f) in freqs.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * f * d / SPEED_OF_LIGHT;
            let z = Complex::from_polar(amp, phase);
            csi.set(m, k, Cpx::new(z.re as f32, z.im as f32));
        }
    }
    Ok(CsiSample {
        csi,
        position: [user[0] as f32, user[1] as f32],
        scenario_id: 0,
    })
}

/// Draws `num_reflectors` scatter points uniformly in the room with gains
/// uniform in `reflector_gain_db`.
pub fn draw_rays(config: &SimConfig, rng: &mut ChaCha8Rng) -> Vec<Ray> {
    (0..config.num_reflectors)
        .map(|_| {
            let x = rng.gen_range(config.room.min[0]..=config.room.max[0]);
            let y = rng.gen_range(config.room.min[1]..=config.room.max[1]);
            let (lo, hi) = config.reflector_gain_db;
            let gain_db = if lo == hi { lo } else { rng.gen_range(lo..hi) };
            Ray {
                scatter: [x, y],
                gain_db,
            }
        })
        .collect()
}

/// Adds single-bounce reflector rays to a sample. Each ray contributes, per
/// antenna m and subcarrier k, an extra term with amplitude `g / d_m` (g the
/// ray's linear gain, `d_m` the antenna-to-user LoS distance) and phase set by
/// the full user→scatter→antenna path length. The scatter point sits midway
/// between user and antenna heights.
pub fn add_rays(sample: &CsiSample, geometry: &ArrayGeometry, rays: &[Ray]) -> Result<CsiSample> {
    if sample.csi.num_antennas() != geometry.num_antennas
        || sample.csi.num_subcarriers() != geometry.num_subcarriers
    {
        return Err(Error::Dim(format!(
            "geometry is {}x{}, sample is {}x{}",
            geometry.num_antennas,
            geometry.num_subcarriers,
            sample.csi.num_antennas(),
            sample.csi.num_subcarriers()
        )));
    }
    let freqs = subcarrier_freqs(geometry);
    let user = user_point(geometry, [sample.position[0] as f64, sample.position[1] as f64]);
    let scatter_height = (geometry.antenna_height + geometry.user_height) / 2.0;
    let mut out = sample.clone();
    for ray in rays {
        let g = db_to_amplitude(ray.gain_db);
        let sp = [ray.scatter[0], ray.scatter[1], scatter_height];
        let d_user_scatter = dist3(user, sp);
        for m in 0..geometry.num_antennas {
            let ap = geometry.antenna_position(m);
            let d_los = dist3(ap, user);
            let path = d_user_scatter + dist3(sp, ap);
            if !(d_los > 0.0) || !(path > 0.0) {
                return Err(Error::Config(
                    "degenerate ray geometry (zero-length path)".into(),
                ));
            }
            let amp = g / d_los;
            for (k, &f) in freqs.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * f * path / SPEED_OF_LIGHT;
                let z = Complex::from_polar(amp, phase);
                let cur = out.csi.get(m, k);
                out.csi.set(
                    m,
                    k,
                    Cpx::new(cur.re + z.re as f32, cur.im + z.im as f32),
                );
            }
        }
    }
    Ok(out)
}

/// Draws reflectors from the config's seed and adds them to the sample — the
/// one-shot convenience form of [`draw_rays`] + [`add_rays`].
pub fn add_multipath(
    sample: &CsiSample,
    config: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CsiSample> {
    let rays = draw_rays(config, rng);
    add_rays(sample, &config.geometry, &rays)
}

/// Blocker position at time `t`: walks `a -> b` and back, repeating.
pub fn blocker_position(traj: &BlockerTrajectory, t: f64) -> [f64; 2] {
    let len = dist2(traj.a, traj.b);
    let travelled = (traj.speed * t).rem_euclid(2.0 * len);
    let s = if travelled <= len {
        travelled
    } else {
        2.0 * len - travelled
    };
    let f = s / len;
    [
        traj.a[0] + f * (traj.b[0] - traj.a[0]),
        traj.a[1] + f * (traj.b[1] - traj.a[1]),
    ]
}

/// Distance from point `p` to the segment `a`–`b` (all 2D, meters).
fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len_sq = ab[0] * ab[0] + ab[1] * ab[1];
    if len_sq == 0.0 {
        return dist2(p, a);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len_sq).clamp(0.0, 1.0);
    dist2(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Which antennas a blocker at `blocker` shadows for a user at `user`: antenna
/// m is blocked iff the 2D distance from the blocker center to the
/// user–antenna segment is at most `radius` (inclusive).
pub fn blocked_mask(
    geometry: &ArrayGeometry,
    user: [f64; 2],
    blocker: [f64; 2],
    radius: f64,
) -> Vec<bool> {
    (0..geometry.num_antennas)
        .map(|m| {
            let ap = geometry.antenna_position(m);
            point_segment_distance(blocker, user, [ap[0], ap[1]]) <= radius
        })
        .collect()
}

/// Applies a blocker to a sample: draws one loss uniformly from the
/// trajectory's `loss_db` range and multiplies every blocked antenna's row by
/// the corresponding amplitude factor. Returns the modified sample and the
/// blocked mask. The loss is drawn even when no antenna is blocked, keeping
/// the RNG stream advance independent of geometry.
pub fn apply_blocker(
    sample: &CsiSample,
    geometry: &ArrayGeometry,
    blocker: [f64; 2],
    traj: &BlockerTrajectory,
    rng: &mut ChaCha8Rng,
) -> Result<(CsiSample, Vec<bool>)> {
    traj.validate()?;
    let user = [sample.position[0] as f64, sample.position[1] as f64];
    let mask = blocked_mask(geometry, user, blocker, traj.radius);
    let (lo, hi) = traj.loss_db;
    let loss_db = if lo == hi { lo } else { rng.gen_range(lo..hi) };
    let g = db_to_amplitude(-loss_db) as f32;
    let mut out = sample.clone();
    for (m, &blocked) in mask.iter().enumerate() {
        if blocked {
            for z in out.csi.row_mut(m) {
                z.re *= g;
                z.im *= g;
            }
        }
    }
    Ok((out, mask))
}

/// One standard normal pair via Box–Muller (hand-rolled so the byte-level
/// output is pinned by this crate, not a distribution crate's algorithm).
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1], avoids ln(0)
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// Adds complex AWGN so that the noise power is `snr_db` below the sample's
/// current mean power (i.e. the per-sample empirical SNR matches `snr_db` in
/// expectation).
pub fn add_noise(sample: &CsiSample, snr_db: f64, rng: &mut ChaCha8Rng) -> CsiSample {
    let p_signal = sample.csi.mean_power();
    let p_noise = p_signal * 10f64.powf(-snr_db / 10.0);
    let sigma = (p_noise / 2.0).sqrt(); // per real component
    let mut out = sample.clone();
    for z in out.csi.entries_mut() {
        let (n_re, n_im) = normal_pair(rng);
        z.re += (sigma * n_re) as f32;
        z.im += (sigma * n_im) as f32;
    }
    out
}

/// Simulates one scenario.
///
/// Sample order is user-major: all `samples_per_position` snapshots of user 0
/// (at times `0, dt, 2dt, ...`), then user 1, and so on. Reflectors are static
/// furniture: they are drawn once from a substream of `config.seed` and shared
/// by every scenario of that environment, so a dynamic scenario differs from
/// the static one only through the walking blocker. Each sample gets its own
/// `scenario_id`-salted substream for the blocker loss draw and the noise, so
/// datasets are independent of evaluation order and different scenarios under
/// one seed get different noise.
///
/// With `trajectory = None` and `noise_snr_db = None`, every snapshot of a
/// user is identical (the environment is static and noiseless).
pub fn simulate_scenario(
    config: &SimConfig,
    trajectory: Option<&BlockerTrajectory>,
    scenario_id: u32,
) -> Result<Dataset> {
    config.validate()?;
    if let Some(traj) = trajectory {
        traj.validate()?;
        for (name, p) in [("start", traj.a), ("end", traj.b)] {
            if !config.room.contains(p) {
                return Err(Error::Config(format!(
                    "trajectory {name} ({}, {}) is outside the room",
                    p[0], p[1]
                )));
            }
        }
    }

    let mut rays_rng = seed::stream_rng(config.seed, STREAM_RAYS, 0);
    let rays = draw_rays(config, &mut rays_rng);

    let mut ds = Dataset::new(config.geometry.clone())?;
    for (u, &user) in config.user_positions.iter().enumerate() {
        // LoS + reflectors are time-invariant: compute once per user.
        let mut base = los_csi(&config.geometry, user)?;
        base = add_rays(&base, &config.geometry, &rays)?;
        base.scenario_id = scenario_id;

        for i in 0..config.samples_per_position {
            let global_idx = (u * config.samples_per_position + i) as u64;
            let mut rng = seed::stream_rng(
                config.seed,
                STREAM_SAMPLE,
                ((scenario_id as u64) << 32) | global_idx,
            );
            let mut s = base.clone();
            if let Some(traj) = trajectory {
                let t = i as f64 * config.sample_interval;
                let bp = blocker_position(traj, t);
                s = apply_blocker(&s, &config.geometry, bp, traj, &mut rng)?.0;
            }
            if let Some(snr) = config.noise_snr_db {
                s = add_noise(&s, snr, &mut rng);
            }
            if !s.csi.is_finite() {
                return Err(Error::NonFinite { op: "simulate" });
            }
            ds.push(s)?;
        }
    }
    Ok(ds)
}

/// Simulates the static environment (scenario id 0).
pub fn simulate(config: &SimConfig, trajectory: Option<&BlockerTrajectory>) -> Result<Dataset> {
    simulate_scenario(config, trajectory, 0)
}
