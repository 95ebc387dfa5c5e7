//! Link abstraction: budget, adaptive MCS, transport blocks, and BLER.
//!
//! A beamformed channel realization collapses into one [`LinkState`]: the
//! received SNR picks the highest MCS whose threshold it clears, the MCS
//! fixes the transport-block size carried per slot, and the distance above
//! the threshold sets a block-error rate capped at the AMC target of 10%.

use serde::{Deserialize, Serialize};

use crate::beamforming::{effective_gain_db, AntennaPairing};
use crate::channel::ChannelRealization;
use crate::{Result, SimError};

/// Transmit power, bandwidth and receiver noise figure of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub freq_ghz: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 30.0,
            bandwidth_hz: 1e9,
            noise_figure_db: 10.0,
            freq_ghz: 140.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !self.bandwidth_hz.is_finite() || self.bandwidth_hz <= 0.0 {
            return Err(SimError::InvalidParameter(format!(
                "bandwidth_hz must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(SimError::InvalidParameter(
                "tx_power_dbm must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// One row of the MCS ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub mcs: u8,
    /// Bits per second per Hz.
    pub spectral_efficiency: f64,
    /// Lowest SNR at which this MCS is selected, dB.
    pub snr_threshold_db: f64,
}

/// The full MCS ladder, indices 0..=28, strictly increasing in both
/// spectral efficiency and SNR threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

/// Highest MCS index.
pub const MAX_MCS: u8 = 28;

/// NR 64-QAM-family spectral efficiencies for indices 0..=28. Index 17 is
/// raised above index 16 so the ladder stays strictly monotone.
pub const DEFAULT_SPECTRAL_EFFICIENCIES: [f64; 29] = [
    0.2344, 0.3066, 0.3770, 0.4902, 0.6016, 0.7402, 0.8770, 1.0273, 1.1758, 1.3262, 1.3281, 1.4766,
    1.6953, 1.9141, 2.1602, 2.4063, 2.5703, 2.6504, 2.7305, 3.0293, 3.3223, 3.6094, 3.9023, 4.2129,
    4.5234, 4.8164, 5.1152, 5.3320, 5.5547,
];

/// Shannon-inversion margin applied when deriving thresholds, dB.
pub const DEFAULT_THRESHOLD_MARGIN_DB: f64 = 3.0;

impl McsTable {
    /// Builds a table from explicit entries, enforcing the ladder invariants.
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        if entries.len() != usize::from(MAX_MCS) + 1 {
            return Err(SimError::InvalidParameter(format!(
                "MCS table needs {} entries, got {}",
                MAX_MCS as usize + 1,
                entries.len()
            )));
        }
        for (i, e) in entries.iter().enumerate() {
            if usize::from(e.mcs) != i {
                return Err(SimError::InvalidParameter(format!(
                    "MCS entry {i} carries index {}",
                    e.mcs
                )));
            }
        }
        for w in entries.windows(2) {
            if w[1].spectral_efficiency <= w[0].spectral_efficiency
                || w[1].snr_threshold_db <= w[0].snr_threshold_db
            {
                return Err(SimError::InvalidParameter(format!(
                    "MCS ladder must be strictly increasing at index {}",
                    w[1].mcs
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Derives thresholds from spectral efficiencies by Shannon inversion:
    /// `10 log10(2^SE - 1) + margin`.
    pub fn from_spectral_efficiencies(se: &[f64], margin_db: f64) -> Result<Self> {
        let entries = se
            .iter()
            .enumerate()
            .map(|(i, &se)| McsEntry {
                mcs: i as u8,
                spectral_efficiency: se,
                snr_threshold_db: 10.0 * (2f64.powf(se) - 1.0).log10() + margin_db,
            })
            .collect();
        Self::new(entries)
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn entry(&self, mcs: u8) -> Result<&McsEntry> {
        self.entries
            .get(usize::from(mcs))
            .ok_or(SimError::InvalidMcs(mcs))
    }
}

impl Default for McsTable {
    fn default() -> Self {
        Self::from_spectral_efficiencies(
            &DEFAULT_SPECTRAL_EFFICIENCIES,
            DEFAULT_THRESHOLD_MARGIN_DB,
        )
        .expect("builtin ladder is valid")
    }
}

/// Per-realization link state consumed by the slot engine.
///
/// `mcs == None` encodes outage: nothing is scheduled and both `tb_bytes`
/// and `max_phy_mbps` are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkState {
    pub snr_db: f64,
    pub mcs: Option<u8>,
    /// Transport-block payload per slot, bytes.
    pub tb_bytes: u64,
    /// Block-error rate of one transmission attempt.
    pub bler: f64,
    /// PHY throughput ceiling implied by `tb_bytes` and the slot duration.
    pub max_phy_mbps: f64,
}

impl LinkState {
    /// A link with no usable MCS.
    pub fn outage(snr_db: f64) -> Self {
        Self {
            snr_db,
            mcs: None,
            tb_bytes: 0,
            bler: 0.0,
            max_phy_mbps: 0.0,
        }
    }

    pub fn is_outage(&self) -> bool {
        self.mcs.is_none()
    }
}

/// Thermal noise floor over the signal bandwidth, dBm.
pub fn noise_floor_dbm(budget: &LinkBudget) -> f64 {
    -174.0 + 10.0 * budget.bandwidth_hz.log10() + budget.noise_figure_db
}

/// Received SNR for one realization and antenna pairing, dB.
pub fn snr_db(budget: &LinkBudget, real: &ChannelRealization, pairing: &AntennaPairing) -> f64 {
    debug_assert!(
        (budget.freq_ghz - real.freq_ghz).abs() < 1e-9,
        "budget frequency {} GHz vs realization {} GHz",
        budget.freq_ghz,
        real.freq_ghz
    );
    budget.tx_power_dbm + effective_gain_db(pairing, real)
        - real.path_loss_db
        - noise_floor_dbm(budget)
}

/// Highest MCS whose threshold the SNR clears; `None` below the lowest entry.
pub fn select_mcs(table: &McsTable, snr_db: f64) -> Option<u8> {
    table
        .entries()
        .iter()
        .rev()
        .find(|e| snr_db >= e.snr_threshold_db)
        .map(|e| e.mcs)
}

/// Transport-block payload for one slot, bytes.
///
/// `floor(SE * bandwidth * utilization * slot / 8)`, where the utilization
/// factor absorbs frame overhead and is calibrated in the shipped config.
pub fn tb_bytes(
    table: &McsTable,
    mcs: u8,
    budget: &LinkBudget,
    slot_s: f64,
    utilization: f64,
) -> Result<u64> {
    let entry = table.entry(mcs)?;
    let bits = entry.spectral_efficiency * budget.bandwidth_hz * utilization * slot_s;
    Ok((bits / 8.0).floor() as u64)
}

/// PHY throughput implied by a transport-block size and slot duration, Mbps.
pub fn max_phy_throughput_mbps(tb_bytes: u64, slot_s: f64) -> f64 {
    tb_bytes as f64 * 8.0 / slot_s / 1e6
}

/// Block-error rate of one transmission attempt at the given SNR.
///
/// Anchored at 10% right at the selection threshold and falling one decade
/// per dB above it. Querying below the threshold is an error; adaptive MCS
/// selection never operates there.
pub fn bler(table: &McsTable, mcs: u8, snr_db: f64) -> Result<f64> {
    let entry = table.entry(mcs)?;
    if snr_db < entry.snr_threshold_db {
        return Err(SimError::SnrBelowThreshold {
            mcs,
            snr_db,
            threshold_db: entry.snr_threshold_db,
        });
    }
    Ok(0.1f64.min(0.1 * 10f64.powf(-(snr_db - entry.snr_threshold_db))))
}

/// Full chain from realization to link state: SNR, MCS, TB size, BLER and
/// the PHY ceiling.
pub fn link_state(
    table: &McsTable,
    budget: &LinkBudget,
    real: &ChannelRealization,
    pairing: &AntennaPairing,
    slot_s: f64,
    utilization: f64,
) -> Result<LinkState> {
    let snr = snr_db(budget, real, pairing);
    match select_mcs(table, snr) {
        None => Ok(LinkState::outage(snr)),
        Some(mcs) => {
            let tb = tb_bytes(table, mcs, budget, slot_s, utilization)?;
            Ok(LinkState {
                snr_db: snr,
                mcs: Some(mcs),
                tb_bytes: tb,
                bler: bler(table, mcs, snr)?,
                max_phy_mbps: max_phy_throughput_mbps(tb, slot_s),
            })
        }
    }
}
