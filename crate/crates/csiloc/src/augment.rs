//! Blockage-robustness training augmentations.
//!
//! Human blockage shows up in CSI as a strong attenuation of the antennas
//! whose line of sight the person shadows. Both augmentations fake that effect
//! on clean training data: pick a fraction of the training samples, pick a
//! random antenna subset per picked sample, and either zero those antennas
//! outright ("vanilla") or scale them by a random attenuation drawn from the
//! 10–40 dB range that covers measured human blockage. Augmented copies are
//! *appended* — the originals stay — and keep their position labels, because
//! the user did not move; only the environment changed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{CsiSample, Dataset};
use crate::error::{Error, Result};
use crate::seed;

/// Which corruption to apply to the chosen antenna rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationMethod {
    /// Zero the selected antennas (an infinite-attenuation blocker).
    Vanilla,
    /// Scale the selected antennas by 10^(-A/20) with A uniform in
    /// [min_db, max_db].
    RandomAttenuation,
}

impl std::fmt::Display for AugmentationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AugmentationMethod::Vanilla => write!(f, "vanilla"),
            AugmentationMethod::RandomAttenuation => write!(f, "random_attenuation"),
        }
    }
}

/// Full description of one augmentation pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub method: AugmentationMethod,
    /// Fraction of training samples to copy-and-corrupt (0, 1].
    pub sample_fraction: f64,
    /// Attenuation range in dB (random-attenuation only; must satisfy
    /// 0 < min <= max).
    pub min_db: f64,
    pub max_db: f64,
    /// When true, draw a fresh attenuation per selected antenna instead of one
    /// per sample (random-attenuation only).
    pub per_antenna: bool,
    /// Seed for target selection, subset choice, and attenuation draws.
    pub seed: u64,
}

impl AugmentationSpec {
    /// Zero-antennas augmentation on half the training samples.
    pub fn vanilla(seed: u64) -> Self {
        AugmentationSpec {
            method: AugmentationMethod::Vanilla,
            sample_fraction: 0.5,
            min_db: 10.0,
            max_db: 40.0,
            per_antenna: false,
            seed,
        }
    }

    /// 10–40 dB random attenuation on half the training samples.
    pub fn random_attenuation(seed: u64) -> Self {
        AugmentationSpec {
            method: AugmentationMethod::RandomAttenuation,
            ..AugmentationSpec::vanilla(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "sample_fraction must be in (0, 1], got {}",
                self.sample_fraction
            )));
        }
        if !(self.min_db > 0.0) || !(self.max_db >= self.min_db) || !self.max_db.is_finite() {
            return Err(Error::Config(format!(
                "attenuation range must satisfy 0 < min_db <= max_db, got ({}, {})",
                self.min_db, self.max_db
            )));
        }
        Ok(())
    }
}

/// The corruption plan for one augmentation pass: for each chosen sample, its
/// index in the training set and the antennas to corrupt.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub sample_index: usize,
    pub antennas: Vec<usize>,
}

/// Chooses which samples to corrupt and which antennas within each: a
/// distinct-index draw of `floor(N * fraction)` samples, then per sample a
/// subset of size uniform in `1..=M` (never empty — an all-clear copy would
/// teach nothing).
pub fn select_targets(train: &Dataset, spec: &AugmentationSpec, rng: &mut ChaCha8Rng) -> Vec<Target> {
    let n = train.len();
    let m = train.num_antennas();
    let count = (n as f64 * spec.sample_fraction).floor() as usize;
    let mut picked = seed::sample_indices(n, count, rng);
    picked.sort_unstable(); // appended copies follow original dataset order
    picked
        .into_iter()
        .map(|sample_index| {
            let size = rng.gen_range(1..=m);
            let mut antennas = seed::sample_indices(m, size, rng);
            antennas.sort_unstable();
            Target {
                sample_index,
                antennas,
            }
        })
        .collect()
}

fn corrupt_sample(
    sample: &CsiSample,
    target: &Target,
    spec: &AugmentationSpec,
    rng: &mut ChaCha8Rng,
) -> CsiSample {
    let mut out = sample.clone();
    match spec.method {
        AugmentationMethod::Vanilla => {
            for &m in &target.antennas {
                for z in out.csi.row_mut(m) {
                    z.re = 0.0;
                    z.im = 0.0;
                }
            }
        }
        AugmentationMethod::RandomAttenuation => {
            let draw = |rng: &mut ChaCha8Rng| {
                let db = if spec.min_db == spec.max_db {
                    spec.min_db
                } else {
                    rng.gen_range(spec.min_db..spec.max_db)
                };
                10f64.powf(-db / 20.0) as f32
            };
            let sample_g = if spec.per_antenna { None } else { Some(draw(rng)) };
            for &m in &target.antennas {
                let g = sample_g.unwrap_or_else(|| draw(rng));
                for z in out.csi.row_mut(m) {
                    z.re *= g;
                    z.im *= g;
                }
            }
        }
    }
    out
}

fn augment_with(train: &Dataset, spec: &AugmentationSpec) -> Result<Dataset> {
    spec.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let targets = select_targets(train, spec, &mut rng);
    let mut out = train.clone();
    for t in &targets {
        let corrupted = corrupt_sample(train.get(t.sample_index), t, spec, &mut rng);
        out.push(corrupted)?;
    }
    Ok(out)
}

/// Appends zeroed-antenna copies of a sample fraction of the training set.
/// `spec.method` must be [`AugmentationMethod::Vanilla`].
pub fn vanilla_augment(train: &Dataset, spec: &AugmentationSpec) -> Result<Dataset> {
    if spec.method != AugmentationMethod::Vanilla {
        return Err(Error::Config(format!(
            "vanilla_augment called with method {}",
            spec.method
        )));
    }
    augment_with(train, spec)
}

/// Appends randomly-attenuated copies of a sample fraction of the training
/// set. `spec.method` must be [`AugmentationMethod::RandomAttenuation`].
pub fn random_attenuation_augment(train: &Dataset, spec: &AugmentationSpec) -> Result<Dataset> {
    if spec.method != AugmentationMethod::RandomAttenuation {
        return Err(Error::Config(format!(
            "random_attenuation_augment called with method {}",
            spec.method
        )));
    }
    augment_with(train, spec)
}

/// Dispatches on `spec.method`. The returned dataset holds the originals
/// (unchanged, in order) followed by the corrupted copies.
pub fn augment_dataset(train: &Dataset, spec: &AugmentationSpec) -> Result<Dataset> {
    match spec.method {
        AugmentationMethod::Vanilla => vanilla_augment(train, spec),
        AugmentationMethod::RandomAttenuation => random_attenuation_augment(train, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Cpx, CsiMatrix};
    use crate::geometry::ArrayGeometry;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_dataset(n: usize, m: usize, k: usize, seed: u64) -> Dataset {
        let mut rng = seed::stream_rng(seed, 0xA06, 0);
        let geo = ArrayGeometry::with_dims(m, k);
        let samples = (0..n)
            .map(|i| {
                // Nonzero everywhere so attenuation ratios are well-defined.
                let data = (0..m * k)
                    .map(|_| {
                        Cpx::new(
                            rng.gen_range(0.1..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
                            rng.gen_range(0.1..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
                        )
                    })
                    .collect();
                CsiSample {
                    csi: CsiMatrix::from_vec(m, k, data).unwrap(),
                    position: [i as f32 * 0.25, 1.0 + i as f32 * 0.125],
                    scenario_id: 0,
                }
            })
            .collect();
        Dataset::from_samples(geo, samples).unwrap()
    }

    #[test]
    fn vanilla_appends_half_and_zeroes_subsets() {
        let ds = random_dataset(100, 8, 4, 1);
        let spec = AugmentationSpec::vanilla(33);
        let out = vanilla_augment(&ds, &spec).unwrap();
        assert_eq!(out.len(), 150); // 100 + floor(100 * 0.5)

        // Originals are untouched, in order, bit-identical.
        for i in 0..100 {
            assert_eq!(out.get(i), ds.get(i));
        }
        // Every appended copy: some antennas all-zero, the rest bit-identical
        // to some original, and the label preserved.
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let targets = select_targets(&ds, &spec, &mut rng);
        assert_eq!(targets.len(), 50);
        for (t, copy) in targets.iter().zip(out.samples()[100..].iter()) {
            let orig = ds.get(t.sample_index);
            assert_eq!(copy.position, orig.position);
            assert_eq!(copy.scenario_id, orig.scenario_id);
            assert!(!t.antennas.is_empty());
            for m in 0..8 {
                if t.antennas.contains(&m) {
                    assert!(copy.csi.row(m).iter().all(|z| z.re == 0.0 && z.im == 0.0));
                } else {
                    assert_eq!(copy.csi.row(m), orig.csi.row(m));
                }
            }
        }
    }

    #[test]
    fn random_attenuation_scales_by_constant_in_range() {
        let ds = random_dataset(60, 6, 5, 2);
        let spec = AugmentationSpec::random_attenuation(77);
        let out = random_attenuation_augment(&ds, &spec).unwrap();
        assert_eq!(out.len(), 90);

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let targets = select_targets(&ds, &spec, &mut rng);
        let g_lo = 10f64.powf(-40.0 / 20.0) as f32; // 0.01
        let g_hi = 10f64.powf(-10.0 / 20.0) as f32; // ~0.3162

        for (t, copy) in targets.iter().zip(out.samples()[60..].iter()) {
            let orig = ds.get(t.sample_index);
            // One factor per sample: estimate from the first corrupted entry,
            // then check every corrupted entry matches it.
            let m0 = t.antennas[0];
            let g_est = copy.csi.get(m0, 0).re / orig.csi.get(m0, 0).re;
            assert!(
                g_est >= g_lo * 0.999 && g_est <= g_hi * 1.001,
                "factor {g_est} outside [0.01, 0.3162]"
            );
            for m in 0..6 {
                for k in 0..5 {
                    let o = orig.csi.get(m, k);
                    let c = copy.csi.get(m, k);
                    if t.antennas.contains(&m) {
                        assert!((c.re - o.re * g_est).abs() <= o.re.abs() * 1e-5);
                        assert!((c.im - o.im * g_est).abs() <= o.im.abs() * 1e-5);
                    } else {
                        assert_eq!(c, o);
                    }
                }
            }
        }
    }

    #[test]
    fn per_antenna_flag_draws_independent_factors() {
        let ds = random_dataset(30, 8, 3, 3);
        let mut spec = AugmentationSpec::random_attenuation(5);
        spec.per_antenna = true;
        spec.sample_fraction = 1.0;
        let out = augment_dataset(&ds, &spec).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let targets = select_targets(&ds, &spec, &mut rng);
        // Find a target with at least two corrupted antennas and check their
        // factors differ (probability of a collision is ~0).
        let t = targets.iter().find(|t| t.antennas.len() >= 2).unwrap();
        let copy = &out.samples()[30 + targets.iter().position(|x| x == t).unwrap()];
        let orig = ds.get(t.sample_index);
        let g0 = copy.csi.get(t.antennas[0], 0).re / orig.csi.get(t.antennas[0], 0).re;
        let g1 = copy.csi.get(t.antennas[1], 0).re / orig.csi.get(t.antennas[1], 0).re;
        assert!((g0 - g1).abs() > 1e-6, "factors should differ per antenna");
    }

    #[test]
    fn augmentation_is_deterministic_in_seed() {
        let ds = random_dataset(40, 5, 4, 9);
        let spec = AugmentationSpec::random_attenuation(123);
        let a = augment_dataset(&ds, &spec).unwrap();
        let b = augment_dataset(&ds, &spec).unwrap();
        assert_eq!(a, b);
        let mut spec2 = spec.clone();
        spec2.seed = 124;
        let c = augment_dataset(&ds, &spec2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn method_mismatch_and_bad_specs_are_rejected() {
        let ds = random_dataset(10, 4, 4, 0);
        let spec = AugmentationSpec::vanilla(0);
        assert!(random_attenuation_augment(&ds, &spec).is_err());
        assert!(vanilla_augment(&ds, &AugmentationSpec::random_attenuation(0)).is_err());

        let mut bad = AugmentationSpec::vanilla(0);
        bad.sample_fraction = 0.0;
        assert!(augment_dataset(&ds, &bad).is_err());

        let mut bad = AugmentationSpec::random_attenuation(0);
        bad.min_db = 40.0;
        bad.max_db = 10.0;
        assert!(augment_dataset(&ds, &bad).is_err());

        let empty = Dataset::new(ArrayGeometry::with_dims(4, 4)).unwrap();
        assert!(augment_dataset(&empty, &AugmentationSpec::vanilla(0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn augmented_power_never_exceeds_original(
            seed in 0u64..200,
            n in 4usize..40,
            frac in 0.1f64..1.0,
            vanilla in proptest::bool::ANY,
        ) {
            let ds = random_dataset(n, 6, 3, seed);
            let mut spec = if vanilla {
                AugmentationSpec::vanilla(seed ^ 0xF00D)
            } else {
                AugmentationSpec::random_attenuation(seed ^ 0xF00D)
            };
            spec.sample_fraction = frac;
            let out = augment_dataset(&ds, &spec).unwrap();
            let added = (n as f64 * frac).floor() as usize;
            prop_assert_eq!(out.len(), n + added);

            // Labels of appended copies match *some* original, and per-entry
            // magnitude never grows.
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let targets = select_targets(&ds, &spec, &mut rng);
            for (t, copy) in targets.iter().zip(out.samples()[n..].iter()) {
                let orig = ds.get(t.sample_index);
                prop_assert_eq!(copy.position, orig.position);
                for (c, o) in copy.csi.entries().iter().zip(orig.csi.entries()) {
                    let mc = c.re * c.re + c.im * c.im;
                    let mo = o.re * o.re + o.im * o.im;
                    prop_assert!(mc <= mo * (1.0 + 1e-6));
                }
            }
        }
    }
}
