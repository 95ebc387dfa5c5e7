//! Uniform planar arrays and analog beamforming gain.
//!
//! Both ends carry a UPA of isotropic elements; all gain comes from the
//! array factor. Beams are steered at the strongest path of a realization
//! (genie-aided alignment, no beam-search protocol), and the effective gain
//! is the power-weighted sum of the per-path transmit and receive array
//! gains.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::{Result, SimError};

/// Geometry of one uniform planar array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub rows: u32,
    pub cols: u32,
    /// Element spacing in wavelengths. Half-wavelength by default; larger
    /// spacings admit grating lobes.
    pub spacing_wavelengths: f64,
}

impl ArrayConfig {
    pub fn new(rows: u32, cols: u32) -> Self {
        Self {
            rows,
            cols,
            spacing_wavelengths: 0.5,
        }
    }

    pub fn elements(&self) -> u32 {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 1 || self.cols < 1 {
            return Err(SimError::InvalidParameter(format!(
                "array needs at least one element, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.spacing_wavelengths <= 0.0 {
            return Err(SimError::InvalidParameter(format!(
                "element spacing must be positive, got {}",
                self.spacing_wavelengths
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ArrayConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// gNB and UE arrays taken together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaPairing {
    pub gnb: ArrayConfig,
    pub ue: ArrayConfig,
    /// `Ant1`..`Ant3` for the presets, free-form for custom pairings.
    pub label: String,
}

impl AntennaPairing {
    /// 8x8 gNB with a 4x4 UE.
    pub fn ant1() -> Self {
        Self {
            gnb: ArrayConfig::new(8, 8),
            ue: ArrayConfig::new(4, 4),
            label: "Ant1".into(),
        }
    }

    /// 16x16 gNB with a 4x4 UE.
    pub fn ant2() -> Self {
        Self {
            gnb: ArrayConfig::new(16, 16),
            ue: ArrayConfig::new(4, 4),
            label: "Ant2".into(),
        }
    }

    /// 64x64 gNB with an 8x8 UE.
    pub fn ant3() -> Self {
        Self {
            gnb: ArrayConfig::new(64, 64),
            ue: ArrayConfig::new(8, 8),
            label: "Ant3".into(),
        }
    }

    pub fn custom(gnb: ArrayConfig, ue: ArrayConfig, label: impl Into<String>) -> Self {
        Self {
            gnb,
            ue,
            label: label.into(),
        }
    }

    /// Preset labels must carry their defining geometry.
    pub fn validate(&self) -> Result<()> {
        self.gnb.validate()?;
        self.ue.validate()?;
        let preset = match self.label.as_str() {
            "Ant1" => Some(Self::ant1()),
            "Ant2" => Some(Self::ant2()),
            "Ant3" => Some(Self::ant3()),
            _ => None,
        };
        if let Some(p) = preset {
            if p.gnb != self.gnb || p.ue != self.ue {
                return Err(SimError::InvalidParameter(format!(
                    "label {} requires {} gNB and {} UE arrays",
                    self.label, p.gnb, p.ue
                )));
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for AntennaPairing {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ant1" => Ok(Self::ant1()),
            "ant2" => Ok(Self::ant2()),
            "ant3" => Ok(Self::ant3()),
            other => Err(SimError::InvalidParameter(format!(
                "unknown antenna pairing {other:?} (expected ant1, ant2 or ant3)"
            ))),
        }
    }
}

impl fmt::Display for AntennaPairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Peak array gain over isotropic: `10 log10(rows * cols)`.
pub fn boresight_gain_db(cfg: &ArrayConfig) -> f64 {
    10.0 * f64::from(cfg.elements()).log10()
}

/// Direction cosines along the two array axes for an (azimuth, elevation)
/// direction. The array plane collapses front and back, which is immaterial
/// for a gain-only model.
fn direction_cosines(az_deg: f64, el_deg: f64) -> (f64, f64) {
    let az = az_deg.to_radians();
    let el = el_deg.to_radians();
    (el.cos() * az.sin(), el.sin())
}

/// One-axis array factor magnitude `|sin(N x) / sin(x)|` with the coherent
/// limits handled, where `x = pi * spacing * delta`.
fn axis_factor(n: u32, spacing: f64, delta: f64) -> f64 {
    let x = PI * spacing * delta;
    let s = x.sin();
    if s.abs() < 1e-12 {
        f64::from(n)
    } else {
        ((f64::from(n) * x).sin() / s).abs()
    }
}

/// Linear array-factor gain toward `path` when steered at `steer`.
pub fn array_factor_gain(
    cfg: &ArrayConfig,
    steer_az_deg: f64,
    steer_el_deg: f64,
    path_az_deg: f64,
    path_el_deg: f64,
) -> f64 {
    let (v0, w0) = direction_cosines(steer_az_deg, steer_el_deg);
    let (v, w) = direction_cosines(path_az_deg, path_el_deg);
    let af = axis_factor(cfg.cols, cfg.spacing_wavelengths, v - v0)
        * axis_factor(cfg.rows, cfg.spacing_wavelengths, w - w0);
    af * af / f64::from(cfg.elements())
}

/// Same as [`array_factor_gain`] in dB relative to isotropic. Returns
/// negative infinity at exact pattern nulls.
pub fn array_factor_gain_db(
    cfg: &ArrayConfig,
    steer_az_deg: f64,
    steer_el_deg: f64,
    path_az_deg: f64,
    path_el_deg: f64,
) -> f64 {
    10.0 * array_factor_gain(cfg, steer_az_deg, steer_el_deg, path_az_deg, path_el_deg).log10()
}

/// Combined transmit and receive beamforming gain over a realization, dB.
///
/// Both arrays steer at the strongest path; every path then contributes its
/// power fraction weighted by the transmit and receive array gains at its
/// own angles. The result never exceeds the sum of the two boresight gains
/// and never falls below the steered path's own contribution.
pub fn effective_gain_db(pairing: &AntennaPairing, real: &ChannelRealization) -> f64 {
    let steer = real.strongest_path();
    let sum: f64 = real
        .paths
        .iter()
        .map(|p| {
            let g_tx = array_factor_gain(
                &pairing.gnb,
                steer.aod_az_deg,
                steer.aod_el_deg,
                p.aod_az_deg,
                p.aod_el_deg,
            );
            let g_rx = array_factor_gain(
                &pairing.ue,
                steer.aoa_az_deg,
                steer.aoa_el_deg,
                p.aoa_az_deg,
                p.aoa_el_deg,
            );
            p.power_frac * g_tx * g_rx
        })
        .sum();
    10.0 * sum.log10()
}
