//! Sweep orchestration: one campaign per cell of the configured
//! (scenario, condition, pairing, rate) cross product, persisted as a
//! deterministic result tree.
//!
//! Layout under the output directory:
//!
//! ```text
//! manifest.json                      sweep-level provenance
//! campaigns/<cell>/realizations.csv  one row per realization
//! campaigns/<cell>/summary.json      versioned campaign summary
//! campaigns/<cell>/trace.csv         per-slot trace (with --trace)
//! figures/*.svg|csv|dat              SNR CDFs, metric curves, CI plot
//! tables/latency_targets.{csv,json}  trade-off report
//! ```
//!
//! Campaign seeds derive from the master seed and the cell identity, and
//! every write is value-deterministic: rerunning with the same seed
//! reproduces byte-identical artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use subthz_sim::config::SimConfig;
use subthz_sim::montecarlo::{
    derive_campaign_seed, run_campaign, run_single_realization, write_realizations_csv,
    write_summary_json, CampaignResult, CampaignSpec,
};

use crate::figures::{emit_ci_figure, emit_metric_curves, emit_snr_cdf, Metric};
use crate::report::{latency_target_report, write_report};

/// Artifact families the sweep can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureKind {
    /// Empirical SNR CDFs per condition.
    SnrCdf,
    /// Throughput, drop and latency vs application rate.
    Curves,
    /// Confidence-interval convergence over the realization count.
    Ci,
    /// Latency-target trade-off tables.
    Tables,
}

impl FigureKind {
    pub const ALL: [FigureKind; 4] = [
        FigureKind::SnrCdf,
        FigureKind::Curves,
        FigureKind::Ci,
        FigureKind::Tables,
    ];
}

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub realizations: Option<usize>,
    pub master_seed: Option<u64>,
    pub workers: usize,
    /// Empty means every artifact family.
    pub figures: Vec<FigureKind>,
    pub trace: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            realizations: None,
            master_seed: None,
            workers: 1,
            figures: Vec::new(),
            trace: false,
        }
    }
}

/// What a finished sweep wrote.
#[derive(Debug)]
pub struct SweepOutcome {
    pub out_dir: PathBuf,
    pub campaigns: usize,
    pub realization_rows: usize,
    pub artifacts: Vec<PathBuf>,
    pub results: Vec<CampaignResult>,
}

#[derive(Serialize)]
struct ManifestCampaign {
    dir: String,
    cell_key: String,
    campaign_seed: u64,
    realizations: usize,
}

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    master_seed: u64,
    workers_note: &'static str,
    campaigns: Vec<ManifestCampaign>,
}

fn fmt_rate(rate: f64) -> String {
    if rate.fract() == 0.0 {
        format!("{}", rate as u64)
    } else {
        format!("{rate}").replace('.', "p")
    }
}

/// Directory name of one campaign cell.
pub fn cell_dir_name(spec: &CampaignSpec) -> String {
    format!(
        "{}_{}_{}_r{}",
        spec.scenario.to_string().to_lowercase(),
        spec.condition.to_string().to_lowercase(),
        spec.pairing.to_string().to_lowercase(),
        fmt_rate(spec.app_rate_mbps)
    )
}

fn persist_campaign(
    cfg: &SimConfig,
    spec: &CampaignSpec,
    result: &CampaignResult,
    dir: &Path,
    trace: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join("realizations.csv");
    let mut csv = Vec::new();
    write_realizations_csv(&mut csv, result)?;
    fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    let json_path = dir.join("summary.json");
    let mut json = Vec::new();
    write_summary_json(&mut json, result)?;
    fs::write(&json_path, json).with_context(|| format!("writing {}", json_path.display()))?;
    let mut written = vec![csv_path, json_path];
    if trace {
        let (_, slot_trace) = run_single_realization(cfg, spec, 0, true)?;
        let trace_path = dir.join("trace.csv");
        let mut buf = Vec::new();
        slot_trace.expect("trace requested").write_csv(&mut buf)?;
        fs::write(&trace_path, buf).with_context(|| format!("writing {}", trace_path.display()))?;
        written.push(trace_path);
    }
    Ok(written)
}

/// Runs the configured sweep into `out_dir`.
pub fn run_sweep(cfg: &SimConfig, out_dir: &Path, opts: &SweepOptions) -> Result<SweepOutcome> {
    let realizations = opts.realizations.unwrap_or(cfg.campaign.realizations);
    let master_seed = opts.master_seed.unwrap_or(cfg.campaign.master_seed);
    let figures: &[FigureKind] = if opts.figures.is_empty() {
        &FigureKind::ALL
    } else {
        &opts.figures
    };

    let campaigns_dir = out_dir.join("campaigns");
    let figures_dir = out_dir.join("figures");
    let tables_dir = out_dir.join("tables");
    for d in [out_dir, &campaigns_dir, &figures_dir, &tables_dir] {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }

    let pairings = cfg.sweep.pairings()?;
    let mut results = Vec::new();
    let mut artifacts = Vec::new();
    let mut manifest_rows = Vec::new();
    let mut rows = 0usize;

    for &scenario in &cfg.sweep.scenarios {
        for &condition in &cfg.sweep.conditions {
            for pairing in &pairings {
                for &rate in &cfg.sweep.app_rates_mbps {
                    let mut spec = cfg.campaign_spec(scenario, condition, pairing.clone(), rate);
                    spec.realizations = realizations;
                    spec.master_seed = derive_campaign_seed(master_seed, &spec.cell_key());
                    let result = run_campaign(cfg, &spec, opts.workers)?;
                    let dir = campaigns_dir.join(cell_dir_name(&spec));
                    artifacts.extend(persist_campaign(cfg, &spec, &result, &dir, opts.trace)?);
                    rows += result.runs.len();
                    manifest_rows.push(ManifestCampaign {
                        dir: format!("campaigns/{}", cell_dir_name(&spec)),
                        cell_key: spec.cell_key(),
                        campaign_seed: spec.master_seed,
                        realizations: spec.realizations,
                    });
                    eprintln!(
                        "campaign {} done: mean throughput {:.1} Mbps, drop {:.2}%",
                        spec.cell_key(),
                        result.stats.throughput_mbps.mean,
                        result.stats.drop_pct.mean
                    );
                    results.push(result);
                }
            }
        }
    }

    for kind in figures {
        match kind {
            FigureKind::SnrCdf => {
                artifacts.extend(emit_snr_cdf(&results, &figures_dir)?);
            }
            FigureKind::Curves => {
                for metric in Metric::ALL {
                    artifacts.extend(emit_metric_curves(&results, metric, &figures_dir)?);
                }
            }
            FigureKind::Ci => {
                let mut spec = cfg.campaign_spec(
                    cfg.convergence.scenario,
                    cfg.convergence.condition,
                    cfg.convergence.pairing.parse()?,
                    cfg.convergence.app_rate_mbps,
                );
                spec.realizations = cfg.convergence.realizations;
                spec.master_seed =
                    derive_campaign_seed(master_seed, &format!("convergence/{}", spec.cell_key()));
                let result = run_campaign(cfg, &spec, opts.workers)?;
                let dir_name = format!("convergence_{}", cell_dir_name(&spec));
                let dir = campaigns_dir.join(&dir_name);
                artifacts.extend(persist_campaign(cfg, &spec, &result, &dir, false)?);
                rows += result.runs.len();
                manifest_rows.push(ManifestCampaign {
                    dir: format!("campaigns/{dir_name}"),
                    cell_key: format!("convergence/{}", spec.cell_key()),
                    campaign_seed: spec.master_seed,
                    realizations: spec.realizations,
                });
                artifacts.extend(emit_ci_figure(&result, &figures_dir)?);
            }
            FigureKind::Tables => {
                let report = latency_target_report(&results, &cfg.report.latency_targets_ms)?;
                artifacts.extend(write_report(&report, &tables_dir)?);
            }
        }
    }

    let manifest = Manifest {
        schema_version: 1,
        master_seed,
        workers_note: "results are worker-count invariant",
        campaigns: manifest_rows,
    };
    let manifest_path = out_dir.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    artifacts.push(manifest_path);

    Ok(SweepOutcome {
        out_dir: out_dir.to_path_buf(),
        campaigns: results.len(),
        realization_rows: rows,
        artifacts,
        results,
    })
}
