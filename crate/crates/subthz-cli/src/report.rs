//! Latency-target trade-off report.
//!
//! For each latency target and (scenario, condition, pairing) cell the
//! report picks the largest swept rate whose mean latency stays under the
//! target and records the throughput and packet drop observed there. Cells
//! where even the lowest rate misses the target carry a `< min-rate`
//! sentinel with the metrics observed at that lowest rate.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use subthz_sim::channel::{Condition, Scenario};
use subthz_sim::montecarlo::CampaignResult;

/// One report cell.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub target_ms: f64,
    pub scenario: Scenario,
    pub condition: Condition,
    pub pairing: String,
    /// Largest swept rate meeting the target; `None` when no rate does.
    pub app_rate_mbps: Option<f64>,
    /// `"1500"` or the `"< 250"` style sentinel.
    pub rate_label: String,
    /// Observed at the selected rate (at the lowest rate for sentinels).
    pub throughput_mbps: f64,
    pub drop_pct: f64,
    pub mean_latency_ms: f64,
}

/// Trade-off table across all cells and targets.
#[derive(Debug, Clone, Serialize)]
pub struct LatencyTargetReport {
    pub targets_ms: Vec<f64>,
    pub rows: Vec<ReportRow>,
}

/// Builds the report from rate-swept campaign results.
pub fn latency_target_report(
    results: &[CampaignResult],
    targets_ms: &[f64],
) -> Result<LatencyTargetReport> {
    if results.is_empty() {
        bail!("no campaigns to report on");
    }
    let mut cells: BTreeMap<String, Vec<&CampaignResult>> = BTreeMap::new();
    for r in results {
        let key = format!(
            "{}|{}|{}",
            r.spec.scenario, r.spec.condition, r.spec.pairing
        );
        cells.entry(key).or_default().push(r);
    }
    let mut rows = Vec::new();
    for &target in targets_ms {
        for list in cells.values() {
            let mut list: Vec<&CampaignResult> = list.clone();
            list.sort_by(|a, b| {
                a.spec
                    .app_rate_mbps
                    .partial_cmp(&b.spec.app_rate_mbps)
                    .expect("finite")
            });
            let spec = &list[0].spec;
            let qualifying = list.iter().rev().find(|r| r.stats.latency_ms.mean < target);
            let (picked, rate, label) = match qualifying {
                Some(r) => (
                    *r,
                    Some(r.spec.app_rate_mbps),
                    fmt_rate(r.spec.app_rate_mbps),
                ),
                None => (list[0], None, format!("< {}", fmt_rate(spec.app_rate_mbps))),
            };
            rows.push(ReportRow {
                target_ms: target,
                scenario: spec.scenario,
                condition: spec.condition,
                pairing: spec.pairing.to_string(),
                app_rate_mbps: rate,
                rate_label: label,
                throughput_mbps: picked.stats.throughput_mbps.mean,
                drop_pct: picked.stats.drop_pct.mean,
                mean_latency_ms: picked.stats.latency_ms.mean,
            });
        }
    }
    Ok(LatencyTargetReport {
        targets_ms: targets_ms.to_vec(),
        rows,
    })
}

fn fmt_rate(rate: f64) -> String {
    if rate.fract() == 0.0 {
        format!("{}", rate as u64)
    } else {
        format!("{rate}")
    }
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a LatencyTargetReport,
}

/// Writes `latency_targets.csv` and `latency_targets.json`.
pub fn write_report(report: &LatencyTargetReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let csv_path = out_dir.join("latency_targets.csv");
    let json_path = out_dir.join("latency_targets.json");
    let mut csv = String::new();
    writeln!(
        csv,
        "target_ms,scenario,condition,pairing,app_rate_mbps,throughput_mbps,drop_pct,mean_latency_ms"
    )
    .unwrap();
    for r in &report.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.target_ms,
            r.scenario,
            r.condition,
            r.pairing,
            r.rate_label,
            r.throughput_mbps,
            r.drop_pct,
            r.mean_latency_ms
        )
        .unwrap();
    }
    std::fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    let json = serde_json::to_string_pretty(&ReportDocument {
        schema_version: 1,
        report,
    })?;
    std::fs::write(&json_path, json).with_context(|| format!("writing {}", json_path.display()))?;
    Ok(vec![csv_path, json_path])
}
