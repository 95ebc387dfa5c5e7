//! Drop-based statistical channel model.
//!
//! One realization ("drop") fixes the large-scale loss and the multipath
//! profile for an entire run: a close-in free-space reference path-loss law
//! with lognormal shadowing, plus a small set of time clusters with
//! exponentially decaying power, per-cluster lognormal shadowing, and
//! uniformly drawn departure/arrival angles. In LOS a dominant zero-delay
//! path carries the Rician fraction K/(K+1) of the received power.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Result, SimError, SPEED_OF_LIGHT};

/// 3GPP-style deployment scenario.
///
/// The urban macrocell case is folded into [`Scenario::Umi`]: at 140 GHz the
/// two share large-scale statistics closely enough that they are not modeled
/// separately, and `"uma"` parses as an alias for UMi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Urban microcell.
    #[serde(alias = "uma")]
    Umi,
    /// Rural macrocell.
    Rma,
    /// Indoor hotspot.
    Inh,
    /// Indoor factory.
    Inf,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Umi, Scenario::Rma, Scenario::Inh, Scenario::Inf];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::Umi => "UMi",
            Scenario::Rma => "RMa",
            Scenario::Inh => "InH",
            Scenario::Inf => "InF",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Scenario {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "umi" | "uma" => Ok(Scenario::Umi),
            "rma" => Ok(Scenario::Rma),
            "inh" => Ok(Scenario::Inh),
            "inf" => Ok(Scenario::Inf),
            other => Err(SimError::UnknownScenario(other.to_string())),
        }
    }
}

/// Line-of-sight condition of the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Los,
    Nlos,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Los => "LOS",
            Condition::Nlos => "NLOS",
        })
    }
}

impl std::str::FromStr for Condition {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "los" => Ok(Condition::Los),
            "nlos" => Ok(Condition::Nlos),
            other => Err(SimError::InvalidParameter(format!(
                "unknown condition {other:?}"
            ))),
        }
    }
}

/// Large-scale channel parameters for one (scenario, condition) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioParams {
    pub scenario: Scenario,
    pub condition: Condition,
    /// Path-loss exponent of the close-in reference model.
    pub ple: f64,
    /// Lognormal shadowing standard deviation, dB.
    pub shadow_sigma_db: f64,
    /// Expected number of time clusters.
    pub cluster_rate: f64,
    /// Cluster delay/power decay constant, nanoseconds.
    pub cluster_decay_ns: f64,
    /// Per-cluster lognormal shadowing standard deviation, dB.
    pub per_cluster_shadow_db: f64,
    /// Dominant-path power ratio for LOS links, dB. `None` for NLOS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rice_k_db: Option<f64>,
    /// Upper bound on the cluster count.
    pub max_clusters: u8,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        if self.ple < 1.0 {
            return Err(SimError::InvalidParameter(format!(
                "ple must be >= 1.0, got {}",
                self.ple
            )));
        }
        if self.shadow_sigma_db < 0.0 {
            return Err(SimError::InvalidParameter(format!(
                "shadow_sigma_db must be >= 0, got {}",
                self.shadow_sigma_db
            )));
        }
        if self.max_clusters < 1 || self.max_clusters > 10 {
            return Err(SimError::InvalidParameter(format!(
                "max_clusters must be in 1..=10, got {}",
                self.max_clusters
            )));
        }
        if self.cluster_decay_ns <= 0.0 {
            return Err(SimError::InvalidParameter(format!(
                "cluster_decay_ns must be > 0, got {}",
                self.cluster_decay_ns
            )));
        }
        if self.cluster_rate < 1.0 {
            return Err(SimError::InvalidParameter(format!(
                "cluster_rate must be >= 1, got {}",
                self.cluster_rate
            )));
        }
        if self.per_cluster_shadow_db < 0.0 {
            return Err(SimError::InvalidParameter(format!(
                "per_cluster_shadow_db must be >= 0, got {}",
                self.per_cluster_shadow_db
            )));
        }
        if self.condition == Condition::Los && self.rice_k_db.is_none() {
            return Err(SimError::InvalidParameter(
                "LOS parameters need rice_k_db".into(),
            ));
        }
        Ok(())
    }
}

/// One resolvable multipath component of a realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipathComponent {
    /// Excess delay, nanoseconds.
    pub delay_ns: f64,
    /// Linear fraction of total received power, in (0, 1].
    pub power_frac: f64,
    /// Azimuth of departure, degrees in [0, 360).
    pub aod_az_deg: f64,
    /// Elevation of departure, degrees in [-90, 90].
    pub aod_el_deg: f64,
    /// Azimuth of arrival, degrees in [0, 360).
    pub aoa_az_deg: f64,
    /// Elevation of arrival, degrees in [-90, 90].
    pub aoa_el_deg: f64,
}

/// One channel drop: large-scale loss plus the multipath profile, constant
/// for the duration of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub params: ScenarioParams,
    pub distance_m: f64,
    pub freq_ghz: f64,
    /// Total large-scale loss including the shadowing draw, dB.
    pub path_loss_db: f64,
    /// The shadowing draw baked into `path_loss_db`, dB.
    pub shadow_draw_db: f64,
    /// Multipath components, sorted by descending `power_frac`.
    pub paths: Vec<MultipathComponent>,
}

impl ChannelRealization {
    /// Strongest component (the one beams steer at).
    pub fn strongest_path(&self) -> &MultipathComponent {
        &self.paths[0]
    }
}

/// Free-space path loss at the 1 m close-in reference distance, dB.
pub fn fspl_1m_db(freq_ghz: f64) -> Result<f64> {
    if freq_ghz <= 0.0 {
        return Err(SimError::NonPositiveFrequency(freq_ghz));
    }
    let freq_hz = freq_ghz * 1e9;
    Ok(20.0 * (4.0 * PI * freq_hz / SPEED_OF_LIGHT).log10())
}

/// Close-in reference path loss with an explicit shadowing term, dB.
///
/// `PL(d) = FSPL(1 m) + 10 n log10(d) + chi`. Distances below the 1 m
/// reference are rejected; the model is undefined there.
pub fn path_loss_db(
    params: &ScenarioParams,
    distance_m: f64,
    freq_ghz: f64,
    shadow_draw_db: f64,
) -> Result<f64> {
    if distance_m < 1.0 {
        return Err(SimError::DistanceBelowReference(distance_m));
    }
    Ok(fspl_1m_db(freq_ghz)? + 10.0 * params.ple * distance_m.log10() + shadow_draw_db)
}

/// Draws one channel realization from the given random stream.
///
/// The generation order is fixed: shadowing, cluster count, then per-cluster
/// delay, power shadowing, and angles. Identical (params, distance,
/// frequency, stream) inputs therefore reproduce the identical realization.
pub fn draw_realization(
    params: &ScenarioParams,
    distance_m: f64,
    freq_ghz: f64,
    rng: &mut impl Rng,
) -> Result<ChannelRealization> {
    params.validate()?;

    let shadow_draw_db = if params.shadow_sigma_db > 0.0 {
        Normal::new(0.0, params.shadow_sigma_db)
            .expect("validated sigma")
            .sample(rng)
    } else {
        0.0
    };
    let path_loss = path_loss_db(params, distance_m, freq_ghz, shadow_draw_db)?;

    let n_clusters = {
        let excess = params.cluster_rate - 1.0;
        let drawn = if excess > 0.0 {
            1 + Poisson::new(excess).expect("validated rate").sample(rng) as u64
        } else {
            1
        };
        drawn.clamp(1, u64::from(params.max_clusters)) as usize
    };

    let delay_dist = Exp::new(1.0 / params.cluster_decay_ns).expect("validated decay");
    let mut clusters = Vec::with_capacity(n_clusters + 1);
    let mut cluster_power_sum = 0.0;
    for _ in 0..n_clusters {
        let delay_ns: f64 = delay_dist.sample(rng);
        let shadow_db = if params.per_cluster_shadow_db > 0.0 {
            Normal::new(0.0, params.per_cluster_shadow_db)
                .expect("validated sigma")
                .sample(rng)
        } else {
            0.0
        };
        let raw_power = (-delay_ns / params.cluster_decay_ns).exp() * 10f64.powf(shadow_db / 10.0);
        cluster_power_sum += raw_power;
        clusters.push((delay_ns, raw_power, draw_angles(rng)));
    }

    // LOS: the zero-delay dominant path takes K/(K+1) of the power and the
    // clusters share the remainder.
    let (los_frac, cluster_budget) = match (params.condition, params.rice_k_db) {
        (Condition::Los, Some(k_db)) => {
            let k = 10f64.powf(k_db / 10.0);
            (k / (k + 1.0), 1.0 / (k + 1.0))
        }
        _ => (0.0, 1.0),
    };

    let mut paths = Vec::with_capacity(n_clusters + 1);
    if los_frac > 0.0 {
        let angles = draw_angles(rng);
        paths.push(MultipathComponent {
            delay_ns: 0.0,
            power_frac: los_frac,
            aod_az_deg: angles.0,
            aod_el_deg: angles.1,
            aoa_az_deg: angles.2,
            aoa_el_deg: angles.3,
        });
    }
    for (delay_ns, raw_power, angles) in clusters {
        paths.push(MultipathComponent {
            delay_ns,
            power_frac: raw_power / cluster_power_sum * cluster_budget,
            aod_az_deg: angles.0,
            aod_el_deg: angles.1,
            aoa_az_deg: angles.2,
            aoa_el_deg: angles.3,
        });
    }
    paths.sort_by(|a, b| b.power_frac.partial_cmp(&a.power_frac).expect("finite"));

    Ok(ChannelRealization {
        params: params.clone(),
        distance_m,
        freq_ghz,
        path_loss_db: path_loss,
        shadow_draw_db,
        paths,
    })
}

fn draw_angles(rng: &mut impl Rng) -> (f64, f64, f64, f64) {
    let aod_az = rng.random_range(0.0..360.0);
    let aod_el = rng.random_range(-90.0..=90.0);
    let aoa_az = rng.random_range(0.0..360.0);
    let aoa_el = rng.random_range(-90.0..=90.0);
    (aod_az, aod_el, aoa_az, aoa_el)
}
