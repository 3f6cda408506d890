//! In-memory CSI datasets: samples, normalization, and splitting.

use num_complex::Complex;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;
use crate::seed;

/// A single complex CSI entry (one antenna, one subcarrier), stored at the
/// measurement precision used on disk.
pub type Cpx = Complex<f32>;

/// Dense M×K complex channel matrix, antenna-major (row = antenna).
#[derive(Debug, Clone, PartialEq)]
pub struct CsiMatrix {
    num_antennas: usize,
    num_subcarriers: usize,
    data: Vec<Cpx>,
}

impl CsiMatrix {
    /// All-zero matrix.
    pub fn zeros(num_antennas: usize, num_subcarriers: usize) -> Self {
        CsiMatrix {
            num_antennas,
            num_subcarriers,
            data: vec![Cpx::new(0.0, 0.0); num_antennas * num_subcarriers],
        }
    }

    /// Builds from an antenna-major flat vector of length M*K.
    pub fn from_vec(num_antennas: usize, num_subcarriers: usize, data: Vec<Cpx>) -> Result<Self> {
        if data.len() != num_antennas * num_subcarriers {
            return Err(Error::Shape(format!(
                "CSI matrix needs {}*{} = {} entries, got {}",
                num_antennas,
                num_subcarriers,
                num_antennas * num_subcarriers,
                data.len()
            )));
        }
        Ok(CsiMatrix {
            num_antennas,
            num_subcarriers,
            data,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    /// Entry for antenna `m`, subcarrier `k`.
    #[inline]
    pub fn get(&self, m: usize, k: usize) -> Cpx {
        self.data[m * self.num_subcarriers + k]
    }

    #[inline]
    pub fn set(&mut self, m: usize, k: usize, v: Cpx) {
        self.data[m * self.num_subcarriers + k] = v;
    }

    /// All K entries of antenna `m`.
    pub fn row(&self, m: usize) -> &[Cpx] {
        &self.data[m * self.num_subcarriers..(m + 1) * self.num_subcarriers]
    }

    pub fn row_mut(&mut self, m: usize) -> &mut [Cpx] {
        &mut self.data[m * self.num_subcarriers..(m + 1) * self.num_subcarriers]
    }

    /// Flat antenna-major view of all entries.
    pub fn entries(&self) -> &[Cpx] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [Cpx] {
        &mut self.data
    }

    /// Mean of |h|^2 over all entries, in f64.
    pub fn mean_power(&self) -> f64 {
        let sum: f64 = self
            .data
            .iter()
            .map(|z| z.re as f64 * z.re as f64 + z.im as f64 * z.im as f64)
            .sum();
        sum / self.data.len() as f64
    }

    /// Largest entry magnitude, computed as sqrt(max |h|^2) in f32.
    pub fn max_magnitude(&self) -> f32 {
        self.data
            .iter()
            .map(|z| z.re * z.re + z.im * z.im)
            .fold(0.0f32, f32::max)
            .sqrt()
    }

    /// True if every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// One CSI snapshot: the channel matrix, the ground-truth user position, and
/// the id of the scenario it was captured in (0 = the static environment).
#[derive(Debug, Clone, PartialEq)]
pub struct CsiSample {
    pub csi: CsiMatrix,
    /// Ground-truth xy position, meters. Stored at f32 so disk round-trips are
    /// bit-exact.
    pub position: [f32; 2],
    pub scenario_id: u32,
}

/// Ordered collection of CSI samples sharing one array geometry.
///
/// Iteration order is stable and equals on-disk order. Note the CSID container
/// persists only the dimensions (M, K) of the geometry; the remaining metadata
/// is documentation for simulation-produced datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    geometry: ArrayGeometry,
    samples: Vec<CsiSample>,
}

impl Dataset {
    /// Empty dataset with the given geometry.
    pub fn new(geometry: ArrayGeometry) -> Result<Self> {
        geometry.validate()?;
        Ok(Dataset {
            geometry,
            samples: Vec::new(),
        })
    }

    /// Builds from samples, validating every matrix against the geometry.
    pub fn from_samples(geometry: ArrayGeometry, samples: Vec<CsiSample>) -> Result<Self> {
        let mut ds = Dataset::new(geometry)?;
        for s in samples {
            ds.push(s)?;
        }
        Ok(ds)
    }

    /// Appends a sample; its matrix must match the dataset's M and K.
    pub fn push(&mut self, sample: CsiSample) -> Result<()> {
        if sample.csi.num_antennas() != self.geometry.num_antennas
            || sample.csi.num_subcarriers() != self.geometry.num_subcarriers
        {
            return Err(Error::Dim(format!(
                "dataset is {}x{}, sample is {}x{}",
                self.geometry.num_antennas,
                self.geometry.num_subcarriers,
                sample.csi.num_antennas(),
                sample.csi.num_subcarriers()
            )));
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    pub fn num_antennas(&self) -> usize {
        self.geometry.num_antennas
    }

    pub fn num_subcarriers(&self) -> usize {
        self.geometry.num_subcarriers
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, i: usize) -> &CsiSample {
        &self.samples[i]
    }

    pub fn samples(&self) -> &[CsiSample] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CsiSample> {
        self.samples.iter()
    }

    /// New dataset containing clones of the samples at `indices`, in the given
    /// order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            geometry: self.geometry.clone(),
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    /// Concatenates datasets in order; all must share M and K. The first
    /// dataset's geometry is kept.
    pub fn concat(parts: &[&Dataset]) -> Result<Dataset> {
        let first = parts.first().ok_or(Error::EmptyDataset)?;
        let mut out = Dataset::new(first.geometry.clone())?;
        for part in parts {
            if part.num_antennas() != first.num_antennas()
                || part.num_subcarriers() != first.num_subcarriers()
            {
                return Err(Error::Dim(format!(
                    "cannot concat {}x{} dataset with {}x{}",
                    first.num_antennas(),
                    first.num_subcarriers(),
                    part.num_antennas(),
                    part.num_subcarriers()
                )));
            }
            out.samples.extend(part.samples.iter().cloned());
        }
        Ok(out)
    }

    /// Sorted list of distinct scenario ids present.
    pub fn scenario_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.samples.iter().map(|s| s.scenario_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Global amplitude scaler fit on the (pre-augmentation) training split: every
/// complex entry is divided by the maximum entry magnitude seen in training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    /// Maximum |h| over the training split; strictly positive.
    pub scale: f32,
}

impl Normalizer {
    /// Fits the scaler. Fails on an empty or all-zero dataset.
    pub fn fit(train: &Dataset) -> Result<Normalizer> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let scale = train
            .iter()
            .map(|s| s.csi.max_magnitude())
            .fold(0.0f32, f32::max);
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::DegenerateNormalizer);
        }
        Ok(Normalizer { scale })
    }

    /// Divides every complex entry by the scale; position and scenario id are
    /// untouched.
    pub fn apply_sample(&self, sample: &CsiSample) -> CsiSample {
        let mut out = sample.clone();
        for z in out.csi.entries_mut() {
            z.re /= self.scale;
            z.im /= self.scale;
        }
        out
    }

    /// Normalizes every sample of a dataset.
    pub fn apply(&self, ds: &Dataset) -> Dataset {
        let samples = ds.iter().map(|s| self.apply_sample(s)).collect();
        Dataset {
            geometry: ds.geometry.clone(),
            samples,
        }
    }
}

/// Splits a dataset into (train, val, test) by a seeded global shuffle.
///
/// Sizes are `floor(N*r)` for train and val; the remainder goes to test, so the
/// three parts always partition the input. Within each part the original
/// dataset order is preserved (so evaluation sets keep simulation time order).
pub fn split_dataset(
    ds: &Dataset,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let (r_train, r_val, r_test) = ratios;
    for (name, r) in [("train", r_train), ("val", r_val), ("test", r_test)] {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Config(format!(
                "split ratio for {name} must be positive, got {r}"
            )));
        }
    }
    if (r_train + r_val + r_test - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split ratios must sum to 1, got {}",
            r_train + r_val + r_test
        )));
    }
    let n = ds.len();
    if n < 3 {
        return Err(Error::Config(format!(
            "need at least 3 samples to split, got {n}"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    seed::shuffle(&mut order, &mut rng);

    let n_train = (n as f64 * r_train).floor() as usize;
    let n_val = (n as f64 * r_val).floor() as usize;

    let mut idx_train: Vec<usize> = order[..n_train].to_vec();
    let mut idx_val: Vec<usize> = order[n_train..n_train + n_val].to_vec();
    let mut idx_test: Vec<usize> = order[n_train + n_val..].to_vec();
    idx_train.sort_unstable();
    idx_val.sort_unstable();
    idx_test.sort_unstable();

    Ok((
        ds.subset(&idx_train),
        ds.subset(&idx_val),
        ds.subset(&idx_test),
    ))
}
