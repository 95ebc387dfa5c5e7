//! Drop-based downlink simulator for sub-THz links.
//!
//! The crate models one gNB-UE link at a time, from large-scale propagation
//! down to slot-level buffer dynamics:
//!
//! - [`channel`] draws statistical channel realizations: close-in path loss
//!   with lognormal shadowing plus a clustered multipath profile with
//!   directional angles, held fixed for the duration of one run.
//! - [`beamforming`] models uniform planar arrays at both ends and the
//!   analog beamforming gain obtained by steering at the strongest path.
//! - [`link`] turns a beamformed realization into a link state: SNR, MCS,
//!   transport-block size, block-error rate, and the PHY throughput ceiling.
//! - [`stack`] runs the slot engine for one realization: CBR packet source,
//!   RLC buffer with drop-on-overflow, HARQ retransmissions, and per-packet
//!   latency accounting.
//! - [`montecarlo`] orchestrates campaigns: deterministic per-realization
//!   random streams, parallel execution with worker-count-invariant results,
//!   Student-t confidence intervals, and convergence analysis over the
//!   realization count.
//! - [`config`] loads every tunable from a TOML file; the shipped defaults
//!   are embedded so the library works out of the box.
//!
//! All randomness flows through explicit stream arguments, so identical
//! seeds reproduce identical results bit for bit regardless of worker count.

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod link;
pub mod montecarlo;
pub mod stack;

mod book;

use thiserror::Error;

/// Errors surfaced by the simulation layers.
#[derive(Debug, Error)]
pub enum SimError {
    /// A parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Frequency at or below zero has no free-space reference.
    #[error("frequency must be positive, got {0} GHz")]
    NonPositiveFrequency(f64),

    /// The close-in path-loss model is undefined below its 1 m reference.
    #[error("distance {0} m is below the 1 m close-in reference")]
    DistanceBelowReference(f64),

    /// MCS index outside the table.
    #[error("MCS index {0} out of range")]
    InvalidMcs(u8),

    /// BLER queried below the selection threshold of the given MCS.
    #[error("SNR {snr_db:.2} dB below threshold {threshold_db:.2} dB of MCS {mcs}")]
    SnrBelowThreshold {
        mcs: u8,
        snr_db: f64,
        threshold_db: f64,
    },

    /// Confidence intervals need at least two samples.
    #[error("need at least 2 samples, got {0}")]
    NotEnoughSamples(usize),

    /// No channel parameters configured for the requested scenario/condition.
    #[error("no channel parameters for {0}")]
    UnknownScenario(String),

    /// Configuration file problems.
    #[error("config error: {0}")]
    Config(String),

    /// I/O while persisting results.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
