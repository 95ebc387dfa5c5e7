//! Configuration file handling.
//!
//! Every tunable lives in one TOML file with a section per subsystem. The
//! copy shipped at `config/default.toml` is embedded into the library, so
//! [`SimConfig::default`] works without touching the filesystem and a user
//! config only needs to restate what it changes... in full: sections are
//! deserialized strictly (`deny_unknown_fields`) and completely, which keeps
//! run-to-run provenance obvious.

use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::beamforming::AntennaPairing;
use crate::channel::{Condition, Scenario, ScenarioParams};
use crate::link::{LinkBudget, McsTable};
use crate::montecarlo::{CampaignSpec, CiMethod};
use crate::stack::StackConfig;
use crate::{Result, SimError};

/// The configuration file shipped with the repository, embedded verbatim.
pub const DEFAULT_TOML: &str = include_str!("../../../config/default.toml");

/// Root of the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub channel: ChannelSection,
    pub mcs: McsSection,
    pub budget: LinkBudget,
    pub phy: PhySection,
    pub stack: StackSection,
    pub campaign: CampaignSection,
    pub sweep: SweepSection,
    pub report: ReportSection,
    pub convergence: ConvergenceSection,
}

/// Large-scale parameter rows, one per (scenario, condition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub scenario: Vec<ScenarioParams>,
}

impl ChannelSection {
    pub fn params_for(&self, scenario: Scenario, condition: Condition) -> Result<&ScenarioParams> {
        self.scenario
            .iter()
            .find(|p| p.scenario == scenario && p.condition == condition)
            .ok_or_else(|| SimError::UnknownScenario(format!("{scenario} {condition}")))
    }
}

/// MCS ladder inputs; thresholds derive from Shannon inversion plus margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsSection {
    pub spectral_efficiency: Vec<f64>,
    pub threshold_margin_db: f64,
}

impl McsSection {
    pub fn table(&self) -> Result<McsTable> {
        McsTable::from_spectral_efficiencies(&self.spectral_efficiency, self.threshold_margin_db)
    }
}

/// Slot timing and the frame-overhead calibration factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhySection {
    pub slot_us: f64,
    pub utilization: f64,
}

impl PhySection {
    pub fn slot_s(&self) -> f64 {
        self.slot_us * 1e-6
    }

    pub fn validate(&self) -> Result<()> {
        if !self.slot_us.is_finite() || self.slot_us <= 0.0 {
            return Err(SimError::Config(format!(
                "phy.slot_us must be positive, got {}",
                self.slot_us
            )));
        }
        if !(self.utilization > 0.0 && self.utilization <= 1.0) {
            return Err(SimError::Config(format!(
                "phy.utilization must be in (0, 1], got {}",
                self.utilization
            )));
        }
        Ok(())
    }
}

/// Stack settings shared by every campaign; the application rate and the
/// slot duration are injected per run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSection {
    pub rlc_buffer_bytes: u64,
    pub harq_processes: usize,
    pub harq_max_retx: u32,
    pub harq_rtt_slots: u64,
    pub packet_bytes: u32,
    pub run_duration_s: f64,
    pub transport_delay_s: f64,
}

/// Campaign-level defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    pub realizations: usize,
    pub master_seed: u64,
    pub confidence_level: f64,
    pub ci_method: CiMethod,
    pub distance_m: f64,
}

/// The sweep grid reproducing the figure and table families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub scenarios: Vec<Scenario>,
    pub conditions: Vec<Condition>,
    pub pairings: Vec<String>,
    pub app_rates_mbps: Vec<f64>,
}

impl SweepSection {
    pub fn pairings(&self) -> Result<Vec<AntennaPairing>> {
        self.pairings.iter().map(|s| s.parse()).collect()
    }
}

/// Latency-target report settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub latency_targets_ms: Vec<f64>,
}

/// Cell used for the realization-count convergence figure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub scenario: Scenario,
    pub condition: Condition,
    pub pairing: String,
    pub app_rate_mbps: f64,
    pub realizations: usize,
}

impl SimConfig {
    /// Parses and validates a configuration from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a configuration file from disk.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel.scenario.is_empty() {
            return Err(SimError::Config("channel table is empty".into()));
        }
        for p in &self.channel.scenario {
            p.validate()?;
        }
        self.mcs.table()?;
        self.budget.validate()?;
        self.phy.validate()?;
        // The stack section is validated through a probe configuration.
        self.stack_config(1.0).validate()?;
        if self.campaign.realizations < 2 {
            return Err(SimError::Config(format!(
                "campaign.realizations must be >= 2, got {}",
                self.campaign.realizations
            )));
        }
        if !(self.campaign.confidence_level > 0.5 && self.campaign.confidence_level < 1.0) {
            return Err(SimError::Config(format!(
                "campaign.confidence_level must be in (0.5, 1), got {}",
                self.campaign.confidence_level
            )));
        }
        if self.campaign.distance_m < 1.0 {
            return Err(SimError::Config(format!(
                "campaign.distance_m must be >= 1 m, got {}",
                self.campaign.distance_m
            )));
        }
        if self.sweep.scenarios.is_empty()
            || self.sweep.conditions.is_empty()
            || self.sweep.pairings.is_empty()
            || self.sweep.app_rates_mbps.is_empty()
        {
            return Err(SimError::Config("sweep sets must be non-empty".into()));
        }
        self.sweep.pairings()?;
        let ascending = self.sweep.app_rates_mbps.windows(2).all(|w| w[0] < w[1]);
        if !ascending || self.sweep.app_rates_mbps[0] <= 0.0 {
            return Err(SimError::Config(
                "sweep.app_rates_mbps must be positive and ascending".into(),
            ));
        }
        if self.report.latency_targets_ms.iter().any(|&t| t <= 0.0) {
            return Err(SimError::Config(
                "report.latency_targets_ms must be positive".into(),
            ));
        }
        self.convergence.pairing.parse::<AntennaPairing>()?;
        self.channel
            .params_for(self.convergence.scenario, self.convergence.condition)?;
        if self.convergence.realizations < 2 || self.convergence.app_rate_mbps <= 0.0 {
            return Err(SimError::Config("invalid convergence cell".into()));
        }
        Ok(())
    }

    /// Stack configuration for one campaign cell.
    pub fn stack_config(&self, app_rate_mbps: f64) -> StackConfig {
        StackConfig {
            rlc_buffer_bytes: self.stack.rlc_buffer_bytes,
            harq_processes: self.stack.harq_processes,
            harq_max_retx: self.stack.harq_max_retx,
            harq_rtt_slots: self.stack.harq_rtt_slots,
            packet_bytes: self.stack.packet_bytes,
            app_rate_mbps,
            run_duration_s: self.stack.run_duration_s,
            transport_delay_s: self.stack.transport_delay_s,
            slot_s: self.phy.slot_s(),
        }
    }

    /// Campaign spec for one sweep cell, inheriting the campaign defaults.
    pub fn campaign_spec(
        &self,
        scenario: Scenario,
        condition: Condition,
        pairing: AntennaPairing,
        app_rate_mbps: f64,
    ) -> CampaignSpec {
        CampaignSpec {
            scenario,
            condition,
            pairing,
            app_rate_mbps,
            distance_m: self.campaign.distance_m,
            freq_ghz: self.budget.freq_ghz,
            realizations: self.campaign.realizations,
            master_seed: self.campaign.master_seed,
            confidence_level: self.campaign.confidence_level,
        }
    }
}

impl Default for SimConfig {
    /// The embedded `config/default.toml`.
    fn default() -> Self {
        static CACHE: OnceLock<SimConfig> = OnceLock::new();
        CACHE
            .get_or_init(|| {
                SimConfig::from_toml_str(DEFAULT_TOML).expect("embedded default config is valid")
            })
            .clone()
    }
}
