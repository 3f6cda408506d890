//! Antenna array geometry and the OFDM frequency grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Uniform linear array (ULA) plus the OFDM grid it samples.
///
/// The array sits in the horizontal plane at `antenna_height`, starting at
/// `array_origin` and extending along the unit-normalized `array_axis`;
/// antenna `m` is `m * antenna_spacing` meters along that axis. Users live at
/// `user_height`. All lengths are meters, frequencies Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Number of antennas (M).
    pub num_antennas: usize,
    /// Number of subcarriers (K).
    pub num_subcarriers: usize,
    /// Spacing between adjacent antennas, meters.
    pub antenna_spacing: f64,
    /// Carrier (center) frequency, Hz.
    pub carrier_freq: f64,
    /// Total bandwidth spanned by the subcarrier grid, Hz.
    pub bandwidth: f64,
    /// xy position of antenna 0, meters.
    pub array_origin: [f64; 2],
    /// Direction the array extends in (normalized at validation).
    pub array_axis: [f64; 2],
    /// Height of every antenna above the floor, meters.
    pub antenna_height: f64,
    /// Height of every user antenna above the floor, meters.
    pub user_height: f64,
}

impl Default for ArrayGeometry {
    /// The measured testbed: 64 antennas spaced 70 mm apart, 100 subcarriers
    /// across 20 MHz at a 2.61 GHz carrier, array at 0.93 m and users at 0.20 m.
    fn default() -> Self {
        ArrayGeometry {
            num_antennas: 64,
            num_subcarriers: 100,
            antenna_spacing: 0.070,
            carrier_freq: 2.61e9,
            bandwidth: 20e6,
            array_origin: [0.0, 0.0],
            array_axis: [1.0, 0.0],
            antenna_height: 0.93,
            user_height: 0.20,
        }
    }
}

impl ArrayGeometry {
    /// Default geometry with the antenna/subcarrier counts replaced.
    pub fn with_dims(num_antennas: usize, num_subcarriers: usize) -> Self {
        ArrayGeometry {
            num_antennas,
            num_subcarriers,
            ..ArrayGeometry::default()
        }
    }

    /// Checks every field for physical sense.
    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 {
            return Err(Error::Geometry("num_antennas must be positive".into()));
        }
        if self.num_subcarriers == 0 {
            return Err(Error::Geometry("num_subcarriers must be positive".into()));
        }
        if !(self.antenna_spacing > 0.0) || !self.antenna_spacing.is_finite() {
            return Err(Error::Geometry(format!(
                "antenna_spacing must be positive and finite, got {}",
                self.antenna_spacing
            )));
        }
        if !(self.carrier_freq > 0.0) || !self.carrier_freq.is_finite() {
            return Err(Error::Geometry(format!(
                "carrier_freq must be positive and finite, got {}",
                self.carrier_freq
            )));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return Err(Error::Geometry(format!(
                "bandwidth must be positive and finite, got {}",
                self.bandwidth
            )));
        }
        if self.bandwidth >= 2.0 * self.carrier_freq {
            return Err(Error::Geometry(
                "bandwidth must be smaller than twice the carrier frequency".into(),
            ));
        }
        let axis_norm = (self.array_axis[0].powi(2) + self.array_axis[1].powi(2)).sqrt();
        if !(axis_norm > 0.0) || !axis_norm.is_finite() {
            return Err(Error::Geometry("array_axis must be a nonzero vector".into()));
        }
        for (name, v) in [
            ("antenna_height", self.antenna_height),
            ("user_height", self.user_height),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Geometry(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        if !self.array_origin.iter().all(|v| v.is_finite()) {
            return Err(Error::Geometry("array_origin must be finite".into()));
        }
        Ok(())
    }

    /// 3D position of antenna `m`: origin + m * spacing along the (normalized)
    /// array axis, at `antenna_height`.
    pub fn antenna_position(&self, m: usize) -> [f64; 3] {
        let norm = (self.array_axis[0].powi(2) + self.array_axis[1].powi(2)).sqrt();
        let ux = self.array_axis[0] / norm;
        let uy = self.array_axis[1] / norm;
        let d = m as f64 * self.antenna_spacing;
        [
            self.array_origin[0] + d * ux,
            self.array_origin[1] + d * uy,
            self.antenna_height,
        ]
    }

    /// Physical length of the array from first to last antenna, meters.
    pub fn aperture(&self) -> f64 {
        (self.num_antennas.saturating_sub(1)) as f64 * self.antenna_spacing
    }
}
