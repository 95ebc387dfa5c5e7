//! Campaign orchestration and cross-realization statistics.
//!
//! Every realization owns a private random stream derived from the campaign
//! master seed and its index, so results are independent of execution order
//! and worker count: realization `i` is the same bit-for-bit whether it runs
//! first on one thread or last on sixteen. Aggregation is plain arithmetic
//! over the per-realization records, zero-throughput outage realizations
//! included, with Student-t confidence intervals by default.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::beamforming::AntennaPairing;
use crate::channel::{draw_realization, Condition, Scenario};
use crate::config::SimConfig;
use crate::link::link_state;
use crate::stack::{run_realization, run_realization_traced, RunMetrics, SlotTrace};
use crate::{Result, SimError};

/// One campaign: a fixed cell of (scenario, condition, pairing, rate)
/// repeated over independent channel realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    pub scenario: Scenario,
    pub condition: Condition,
    pub pairing: AntennaPairing,
    pub app_rate_mbps: f64,
    pub distance_m: f64,
    pub freq_ghz: f64,
    pub realizations: usize,
    pub master_seed: u64,
    pub confidence_level: f64,
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<()> {
        self.pairing.validate()?;
        if self.realizations < 2 {
            return Err(SimError::InvalidParameter(format!(
                "realizations must be >= 2, got {}",
                self.realizations
            )));
        }
        if !(self.confidence_level > 0.5 && self.confidence_level < 1.0) {
            return Err(SimError::InvalidParameter(format!(
                "confidence_level must be in (0.5, 1), got {}",
                self.confidence_level
            )));
        }
        if self.app_rate_mbps <= 0.0 {
            return Err(SimError::InvalidParameter(format!(
                "app_rate_mbps must be positive, got {}",
                self.app_rate_mbps
            )));
        }
        Ok(())
    }

    /// Stable identity used when deriving per-cell seeds in sweeps.
    pub fn cell_key(&self) -> String {
        format!(
            "{}/{}/{}/{}",
            self.scenario, self.condition, self.pairing, self.app_rate_mbps
        )
    }
}

/// Confidence-interval construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CiMethod {
    /// Student-t quantiles on the sample standard deviation.
    #[serde(rename = "student-t")]
    StudentT,
    /// Normal approximation; adequate for large realization counts.
    #[serde(rename = "normal")]
    Normal,
}

/// Mean, spread and confidence half-width of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sample_std: f64,
    pub ci_half_width: f64,
    pub n: usize,
}

/// Running mean and half-width after the first `n` realizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub running_mean: f64,
    pub ci_half_width: f64,
}

/// Cross-realization statistics of one campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub throughput_mbps: MetricSummary,
    pub drop_pct: MetricSummary,
    pub latency_ms: MetricSummary,
    pub snr_db: MetricSummary,
    /// Convergence of the throughput mean over the realization count,
    /// sampled at a geometric checkpoint grid.
    pub convergence: Vec<ConvergencePoint>,
}

/// Outcome of one realization, keyed by its index and derived seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub seed: u64,
    pub metrics: RunMetrics,
}

/// A finished campaign: the spec, per-realization records in index order,
/// and the aggregate statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub spec: CampaignSpec,
    pub stats: CampaignStats,
    pub runs: Vec<RunRecord>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `index` under `master_seed`.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_add(1)))
}

/// Independent, reproducible random stream for one realization. The stream
/// depends only on (master seed, index), never on scheduling.
pub fn derive_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, index))
}

/// Stable 64-bit seed for a named sweep cell (FNV-1a over the key, mixed
/// with the master seed).
pub fn derive_campaign_seed(master_seed: u64, cell_key: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ splitmix64(master_seed);
    for b in cell_key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}

fn two_sided_quantile(level: f64, n: usize, method: CiMethod) -> f64 {
    let p = 0.5 + level / 2.0;
    match method {
        CiMethod::StudentT => statrs::distribution::StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("valid dof")
            .inverse_cdf(p),
        CiMethod::Normal => statrs::distribution::Normal::new(0.0, 1.0)
            .expect("unit normal")
            .inverse_cdf(p),
    }
}

fn mean_and_sample_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.max(0.0).sqrt())
}

/// Two-sided confidence interval with the requested construction.
pub fn confidence_interval_with(
    samples: &[f64],
    level: f64,
    method: CiMethod,
) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(SimError::NotEnoughSamples(samples.len()));
    }
    if !(level > 0.5 && level < 1.0) {
        return Err(SimError::InvalidParameter(format!(
            "confidence level must be in (0.5, 1), got {level}"
        )));
    }
    let (mean, std) = mean_and_sample_std(samples);
    let q = two_sided_quantile(level, samples.len(), method);
    Ok((mean, q * std / (samples.len() as f64).sqrt()))
}

/// Student-t confidence interval: mean plus-or-minus half-width.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    confidence_interval_with(samples, level, CiMethod::StudentT)
}

/// Geometric checkpoint grid 50, 100, 200, ... capped and terminated at `n`.
pub fn default_checkpoints(n: usize) -> Vec<usize> {
    let mut points = Vec::new();
    let mut c = 50usize;
    while c < n {
        points.push(c);
        c *= 2;
    }
    if n >= 2 {
        points.push(n);
    }
    points.retain(|&p| p >= 2);
    points.dedup();
    points
}

/// Running mean and confidence half-width of a metric over growing
/// realization prefixes, evaluated at the given checkpoints.
pub fn convergence_analysis(
    samples: &[f64],
    checkpoints: &[usize],
    level: f64,
    method: CiMethod,
) -> Result<Vec<ConvergencePoint>> {
    for w in checkpoints.windows(2) {
        if w[0] >= w[1] {
            return Err(SimError::InvalidParameter(
                "checkpoints must be strictly ascending".into(),
            ));
        }
    }
    if let Some(&last) = checkpoints.last() {
        if last > samples.len() {
            return Err(SimError::InvalidParameter(format!(
                "checkpoint {last} exceeds {} available realizations",
                samples.len()
            )));
        }
    }
    if checkpoints.first().is_some_and(|&f| f < 2) {
        return Err(SimError::InvalidParameter(
            "checkpoints must be >= 2".into(),
        ));
    }

    // One pass with running sums; each checkpoint closes over the prefix.
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut next = checkpoints.iter().copied().peekable();
    for (i, &x) in samples.iter().enumerate() {
        sum += x;
        sum_sq += x * x;
        if next.peek() == Some(&(i + 1)) {
            let n = i + 1;
            let mean = sum / n as f64;
            let var = ((sum_sq - sum * sum / n as f64) / (n as f64 - 1.0)).max(0.0);
            let hw = two_sided_quantile(level, n, method) * var.sqrt() / (n as f64).sqrt();
            out.push(ConvergencePoint {
                n,
                running_mean: mean,
                ci_half_width: hw,
            });
            next.next();
        }
        if next.peek().is_none() {
            break;
        }
    }
    Ok(out)
}

fn summarize(samples: &[f64], level: f64, method: CiMethod) -> Result<MetricSummary> {
    let (mean, hw) = confidence_interval_with(samples, level, method)?;
    let (_, std) = mean_and_sample_std(samples);
    Ok(MetricSummary {
        mean,
        sample_std: std,
        ci_half_width: hw,
        n: samples.len(),
    })
}

/// Runs one realization of a campaign on its derived stream.
pub fn run_single_realization(
    cfg: &SimConfig,
    spec: &CampaignSpec,
    index: usize,
    trace: bool,
) -> Result<(RunRecord, Option<SlotTrace>)> {
    let params = cfg.channel.params_for(spec.scenario, spec.condition)?;
    let table = cfg.mcs.table()?;
    let mut budget = cfg.budget;
    budget.freq_ghz = spec.freq_ghz;
    let stack = cfg.stack_config(spec.app_rate_mbps);

    let seed = derive_seed(spec.master_seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = draw_realization(params, spec.distance_m, spec.freq_ghz, &mut rng)?;
    let link = link_state(
        &table,
        &budget,
        &real,
        &spec.pairing,
        cfg.phy.slot_s(),
        cfg.phy.utilization,
    )?;
    let (metrics, slot_trace) = if trace {
        let (m, t) = run_realization_traced(&link, &stack, &mut rng)?;
        (m, Some(t))
    } else {
        (run_realization(&link, &stack, &mut rng)?, None)
    };
    Ok((
        RunRecord {
            index,
            seed,
            metrics,
        },
        slot_trace,
    ))
}

/// Runs a campaign over a bounded worker pool.
///
/// Per-realization results are keyed by index, so the merge is independent
/// of scheduling: any worker count produces bit-identical output.
pub fn run_campaign(
    cfg: &SimConfig,
    spec: &CampaignSpec,
    workers: usize,
) -> Result<CampaignResult> {
    spec.validate()?;
    cfg.channel.params_for(spec.scenario, spec.condition)?;
    if workers < 1 {
        return Err(SimError::InvalidParameter("workers must be >= 1".into()));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::InvalidParameter(format!("worker pool: {e}")))?;
    let runs: Vec<RunRecord> = pool.install(|| {
        (0..spec.realizations)
            .into_par_iter()
            .map(|i| run_single_realization(cfg, spec, i, false).map(|(r, _)| r))
            .collect::<Result<Vec<_>>>()
    })?;

    let stats = aggregate(cfg, spec, &runs)?;
    Ok(CampaignResult {
        spec: spec.clone(),
        stats,
        runs,
    })
}

fn aggregate(cfg: &SimConfig, spec: &CampaignSpec, runs: &[RunRecord]) -> Result<CampaignStats> {
    let level = spec.confidence_level;
    let method = cfg.campaign.ci_method;
    let throughput: Vec<f64> = runs.iter().map(|r| r.metrics.delivered_mbps).collect();
    let drops: Vec<f64> = runs.iter().map(|r| r.metrics.drop_pct).collect();
    let latency: Vec<f64> = runs.iter().map(|r| r.metrics.mean_latency_ms).collect();
    let snr: Vec<f64> = runs.iter().map(|r| r.metrics.mean_snr_db).collect();
    Ok(CampaignStats {
        throughput_mbps: summarize(&throughput, level, method)?,
        drop_pct: summarize(&drops, level, method)?,
        latency_ms: summarize(&latency, level, method)?,
        snr_db: summarize(&snr, level, method)?,
        convergence: convergence_analysis(
            &throughput,
            &default_checkpoints(throughput.len()),
            level,
            method,
        )?,
    })
}

/// Fixed column set of the per-realization CSV.
pub const REALIZATIONS_CSV_HEADER: &str =
    "index,seed,snr_db,mcs,delivered_mbps,drop_pct,mean_latency_ms";

/// Writes one row per realization with the documented column set.
pub fn write_realizations_csv<W: Write>(mut w: W, result: &CampaignResult) -> std::io::Result<()> {
    writeln!(w, "{REALIZATIONS_CSV_HEADER}")?;
    for r in &result.runs {
        let mcs = match r.metrics.mcs {
            Some(m) => m.to_string(),
            None => "outage".to_string(),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.index,
            r.seed,
            r.metrics.mean_snr_db,
            mcs,
            r.metrics.delivered_mbps,
            r.metrics.drop_pct,
            r.metrics.mean_latency_ms
        )?;
    }
    Ok(())
}

/// Versioned JSON summary of a campaign.
#[derive(Debug, Serialize)]
struct CampaignSummary<'a> {
    schema_version: u32,
    spec: &'a CampaignSpec,
    stats: &'a CampaignStats,
}

/// Current `schema_version` of the JSON summary.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Writes the campaign summary as pretty-printed JSON.
pub fn write_summary_json<W: Write>(w: W, result: &CampaignResult) -> Result<()> {
    serde_json::to_writer_pretty(
        w,
        &CampaignSummary {
            schema_version: SUMMARY_SCHEMA_VERSION,
            spec: &result.spec,
            stats: &result.stats,
        },
    )
    .map_err(|e| SimError::Config(format!("summary serialization: {e}")))
}
