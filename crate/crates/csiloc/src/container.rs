//! CSID: the on-disk CSI dataset container.
//!
//! A little-endian binary layout:
//!
//! ```text
//! magic   4 bytes  "CSID"
//! version u32      currently 1
//! M       u32      antennas per sample
//! K       u32      subcarriers per sample
//! N       u32      sample count
//! pos_dim u32      position components per sample (2 or 3)
//! then N records, each:
//!   scenario_id u32
//!   reserved    u32 (written as 0, ignored on read)
//!   position    pos_dim * f32
//!   csi         M*K complex entries, antenna-major, each (re f32, im f32)
//! ```
//!
//! Total size is `24 + N * (8 + 4*pos_dim + 8*M*K)` bytes. Round-trips are
//! bit-exact at the sample level (complex entries compared as raw 32-bit
//! floats). Geometry metadata beyond M and K is not persisted: loading
//! reconstructs the default geometry with the header's dimensions. Writers
//! always emit `pos_dim = 2`; readers also accept 3 and drop the z component.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::dataset::{Cpx, CsiMatrix, CsiSample, Dataset};
use crate::error::{Error, Result};
use crate::geometry::ArrayGeometry;

/// The 4-byte magic at the start of every CSID file.
pub const MAGIC: [u8; 4] = *b"CSID";
/// Container version this build writes and reads.
pub const VERSION: u32 = 1;

/// Sanity caps applied to header fields before allocating: guards against
/// absurd allocations from corrupt headers.
const MAX_DIM: u32 = 1_000_000;
const MAX_MATRIX_ENTRIES: u64 = 1 << 26;

/// Exact file size in bytes for a dataset of `n` samples with the given dims.
pub fn container_size(m: usize, k: usize, n: usize, pos_dim: usize) -> u64 {
    24 + n as u64 * (8 + 4 * pos_dim as u64 + 8 * (m as u64) * (k as u64))
}

/// Serializes a dataset to any writer. Fails on an empty dataset.
pub fn write_to<W: Write>(ds: &Dataset, w: &mut W) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    w.write_all(&MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(ds.num_antennas() as u32)?;
    w.write_u32::<LittleEndian>(ds.num_subcarriers() as u32)?;
    w.write_u32::<LittleEndian>(ds.len() as u32)?;
    w.write_u32::<LittleEndian>(2)?; // pos_dim
    for s in ds.iter() {
        w.write_u32::<LittleEndian>(s.scenario_id)?;
        w.write_u32::<LittleEndian>(0)?; // reserved
        w.write_f32::<LittleEndian>(s.position[0])?;
        w.write_f32::<LittleEndian>(s.position[1])?;
        for z in s.csi.entries() {
            w.write_f32::<LittleEndian>(z.re)?;
            w.write_f32::<LittleEndian>(z.im)?;
        }
    }
    Ok(())
}

/// Writes a dataset to a CSID file.
pub fn write_dataset<P: AsRef<Path>>(ds: &Dataset, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_to(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

fn truncated_at<T>(what: &str, r: std::io::Result<T>) -> Result<T> {
    r.map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Truncated(format!("file ends inside {what}"))
        } else {
            Error::Io(e)
        }
    })
}

/// Deserializes a dataset from any reader, validating magic, version, declared
/// sizes, and that no payload bytes are missing or left over.
pub fn read_from<R: Read>(r: &mut R) -> Result<Dataset> {
    let mut magic = [0u8; 4];
    truncated_at("the magic", r.read_exact(&mut magic))?;
    if magic != MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = truncated_at("the header", r.read_u32::<LittleEndian>())?;
    if version != VERSION {
        return Err(Error::Version {
            found: version,
            supported: VERSION,
        });
    }
    let m = truncated_at("the header", r.read_u32::<LittleEndian>())?;
    let k = truncated_at("the header", r.read_u32::<LittleEndian>())?;
    let n = truncated_at("the header", r.read_u32::<LittleEndian>())?;
    let pos_dim = truncated_at("the header", r.read_u32::<LittleEndian>())?;

    if m == 0 || k == 0 || n == 0 {
        return Err(Error::SizeMismatch(format!(
            "header declares M={m}, K={k}, N={n}; all must be positive"
        )));
    }
    if m > MAX_DIM || k > MAX_DIM || n > MAX_DIM || (m as u64) * (k as u64) > MAX_MATRIX_ENTRIES {
        return Err(Error::SizeMismatch(format!(
            "header declares implausible dimensions M={m}, K={k}, N={n}"
        )));
    }
    if pos_dim != 2 && pos_dim != 3 {
        return Err(Error::SizeMismatch(format!(
            "pos_dim must be 2 or 3, got {pos_dim}"
        )));
    }

    let entries = (m * k) as usize;
    let geometry = ArrayGeometry::with_dims(m as usize, k as usize);
    let mut ds = Dataset::new(geometry)?;
    for i in 0..n {
        let what = format!("sample {i} of {n}");
        let scenario_id = truncated_at(&what, r.read_u32::<LittleEndian>())?;
        truncated_at(&what, r.read_u32::<LittleEndian>())?; // reserved, ignored
        let mut position = [0.0f32; 2];
        position[0] = truncated_at(&what, r.read_f32::<LittleEndian>())?;
        position[1] = truncated_at(&what, r.read_f32::<LittleEndian>())?;
        if pos_dim == 3 {
            truncated_at(&what, r.read_f32::<LittleEndian>())?; // z dropped
        }
        let mut data = Vec::with_capacity(entries);
        for _ in 0..entries {
            let re = truncated_at(&what, r.read_f32::<LittleEndian>())?;
            let im = truncated_at(&what, r.read_f32::<LittleEndian>())?;
            data.push(Cpx::new(re, im));
        }
        ds.push(CsiSample {
            csi: CsiMatrix::from_vec(m as usize, k as usize, data)?,
            position,
            scenario_id,
        })?;
    }
    // The declared sample count must account for the whole payload.
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(ds),
        _ => Err(Error::SizeMismatch(format!(
            "trailing data after the {n} declared samples"
        ))),
    }
}

/// Loads a dataset from a CSID file.
pub fn load_dataset<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    let mut r = BufReader::new(File::open(path)?);
    read_from(&mut r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    use crate::seed::stream_rng;

    fn random_dataset(n: usize, m: usize, k: usize, seed: u64) -> Dataset {
        let mut rng = stream_rng(seed, 0xDA7A, 0);
        let geo = ArrayGeometry::with_dims(m, k);
        let samples = (0..n)
            .map(|i| {
                let data = (0..m * k)
                    .map(|_| Cpx::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
                    .collect();
                CsiSample {
                    csi: CsiMatrix::from_vec(m, k, data).unwrap(),
                    position: [rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0)],
                    scenario_id: (i % 3) as u32,
                }
            })
            .collect();
        Dataset::from_samples(geo, samples).unwrap()
    }

    fn to_bytes(ds: &Dataset) -> Vec<u8> {
        let mut buf = Vec::new();
        write_to(ds, &mut buf).unwrap();
        buf
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let ds = random_dataset(5, 3, 4, 7);
        let bytes = to_bytes(&ds);
        assert_eq!(bytes.len() as u64, container_size(3, 4, 5, 2));
        let back = read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(back.len(), ds.len());
        for (a, b) in ds.iter().zip(back.iter()) {
            assert_eq!(a.scenario_id, b.scenario_id);
            assert_eq!(a.position[0].to_bits(), b.position[0].to_bits());
            assert_eq!(a.position[1].to_bits(), b.position[1].to_bits());
            for (x, y) in a.csi.entries().iter().zip(b.csi.entries()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn size_formula_matches_observed() {
        // 1 sample, M=2, K=3: 24 + 1*(8 + 8 + 48) = 88 bytes.
        let ds = random_dataset(1, 2, 3, 1);
        assert_eq!(to_bytes(&ds).len(), 88);
        assert_eq!(container_size(2, 3, 1, 2), 88);
        // 10 samples of 4x4.
        let ds = random_dataset(10, 4, 4, 2);
        assert_eq!(to_bytes(&ds).len() as u64, container_size(4, 4, 10, 2));
    }

    #[test]
    fn rejects_bad_magic() {
        let mut bytes = to_bytes(&random_dataset(2, 2, 2, 3));
        bytes[..4].copy_from_slice(b"XXXX");
        let err = read_from(&mut bytes.as_slice()).unwrap_err();
        assert!(err.to_string().contains("bad magic"), "{err}");
    }

    #[test]
    fn rejects_version_mismatch() {
        let mut bytes = to_bytes(&random_dataset(2, 2, 2, 3));
        bytes[4..8].copy_from_slice(&99u32.to_le_bytes());
        let err = read_from(&mut bytes.as_slice()).unwrap_err();
        assert!(matches!(err, Error::Version { found: 99, .. }), "{err}");
    }

    #[test]
    fn rejects_truncation_mid_sample() {
        let bytes = to_bytes(&random_dataset(3, 2, 2, 4));
        let cut = bytes.len() - 10;
        let err = read_from(&mut bytes[..cut].to_vec().as_slice()).unwrap_err();
        assert!(err.to_string().contains("truncated payload"), "{err}");
    }

    #[test]
    fn rejects_trailing_data() {
        let mut bytes = to_bytes(&random_dataset(2, 2, 2, 5));
        bytes.extend_from_slice(&[0u8; 4]);
        let err = read_from(&mut bytes.as_slice()).unwrap_err();
        assert!(err.to_string().contains("size mismatch"), "{err}");
    }

    #[test]
    fn rejects_zero_dims_and_implausible_headers() {
        let mut bytes = to_bytes(&random_dataset(2, 2, 2, 6));
        bytes[12..16].copy_from_slice(&0u32.to_le_bytes()); // K = 0
        assert!(read_from(&mut bytes.as_slice()).is_err());

        let mut bytes = to_bytes(&random_dataset(2, 2, 2, 6));
        bytes[8..12].copy_from_slice(&u32::MAX.to_le_bytes()); // absurd M
        assert!(read_from(&mut bytes.as_slice()).is_err());
    }

    #[test]
    fn accepts_pos_dim_3_and_drops_z() {
        // Hand-build a pos_dim=3 file with one 1x1 sample.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"CSID");
        for v in [1u32, 1, 1, 1, 3] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(&7u32.to_le_bytes()); // scenario
        bytes.extend_from_slice(&0u32.to_le_bytes()); // reserved
        for f in [1.5f32, 2.5, 9.9, 0.25, -0.75] {
            // x, y, z, re, im
            bytes.extend_from_slice(&f.to_le_bytes());
        }
        let ds = read_from(&mut bytes.as_slice()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.get(0).position, [1.5, 2.5]);
        assert_eq!(ds.get(0).csi.get(0, 0), Cpx::new(0.25, -0.75));
        assert_eq!(ds.get(0).scenario_id, 7);
    }

    #[test]
    fn file_roundtrip_via_tempdir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csid");
        let ds = random_dataset(4, 3, 5, 11);
        write_dataset(&ds, &path).unwrap();
        let back = load_dataset(&path).unwrap();
        assert_eq!(back.samples(), ds.samples());
        assert_eq!(
            std::fs::metadata(&path).unwrap().len(),
            container_size(3, 5, 4, 2)
        );
    }

    #[test]
    fn write_rejects_empty_dataset() {
        let ds = Dataset::new(ArrayGeometry::with_dims(2, 2)).unwrap();
        let mut buf = Vec::new();
        assert!(matches!(write_to(&ds, &mut buf), Err(Error::EmptyDataset)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn roundtrip_any_dims(n in 1usize..8, m in 1usize..6, k in 1usize..6, seed in 0u64..500) {
            let ds = random_dataset(n, m, k, seed);
            let bytes = to_bytes(&ds);
            prop_assert_eq!(bytes.len() as u64, container_size(m, k, n, 2));
            let back = read_from(&mut bytes.as_slice()).unwrap();
            prop_assert_eq!(back.samples(), ds.samples());
        }
    }
}
