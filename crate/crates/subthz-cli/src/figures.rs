//! Figure emission: SNR CDFs, metric-vs-rate curves, and the CI convergence
//! plot. Every SVG is paired with a CSV (and a gnuplot-friendly `.dat`)
//! carrying exactly the plotted data; the plots are views, never the record.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use subthz_sim::channel::{Condition, Scenario};
use subthz_sim::montecarlo::CampaignResult;

use crate::svg::{Chart, Series};

/// Metric families plotted against the application rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Throughput,
    Drop,
    Latency,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Throughput, Metric::Drop, Metric::Latency];

    fn name(self) -> &'static str {
        match self {
            Metric::Throughput => "throughput",
            Metric::Drop => "drop",
            Metric::Latency => "latency",
        }
    }

    fn axis(self) -> &'static str {
        match self {
            Metric::Throughput => "mean delivered throughput (Mbps)",
            Metric::Drop => "mean packet drop (%)",
            Metric::Latency => "mean end-to-end latency (ms)",
        }
    }

    fn pick(self, r: &CampaignResult) -> (f64, f64) {
        let s = match self {
            Metric::Throughput => &r.stats.throughput_mbps,
            Metric::Drop => &r.stats.drop_pct,
            Metric::Latency => &r.stats.latency_ms,
        };
        (s.mean, s.ci_half_width)
    }
}

/// Writes `base.svg`, `base.csv` and `base.dat` with identical content.
pub fn write_figure(
    base: &Path,
    chart: &Chart,
    csv_header: &str,
    csv_rows: &[String],
) -> Result<Vec<PathBuf>> {
    let svg_path = base.with_extension("svg");
    let csv_path = base.with_extension("csv");
    let dat_path = base.with_extension("dat");
    std::fs::write(&svg_path, chart.render())
        .with_context(|| format!("writing {}", svg_path.display()))?;
    let mut csv = String::new();
    writeln!(csv, "{csv_header}").unwrap();
    for row in csv_rows {
        writeln!(csv, "{row}").unwrap();
    }
    std::fs::write(&csv_path, &csv).with_context(|| format!("writing {}", csv_path.display()))?;
    let mut dat = String::new();
    writeln!(dat, "# {}", csv_header.replace(',', " ")).unwrap();
    for row in csv_rows {
        writeln!(dat, "{}", row.replace(',', " ")).unwrap();
    }
    std::fs::write(&dat_path, &dat).with_context(|| format!("writing {}", dat_path.display()))?;
    Ok(vec![svg_path, csv_path, dat_path])
}

type CellKey = (Scenario, Condition, String);

/// For CDF purposes the SNR distribution does not depend on the offered
/// rate, so each (scenario, condition, pairing) cell is represented by its
/// lowest-rate campaign.
fn cdf_source_campaigns(results: &[CampaignResult]) -> BTreeMap<String, &CampaignResult> {
    let mut map: BTreeMap<String, &CampaignResult> = BTreeMap::new();
    for r in results {
        let key = format!(
            "{}|{}|{}",
            r.spec.scenario, r.spec.condition, r.spec.pairing
        );
        map.entry(key)
            .and_modify(|cur| {
                if r.spec.app_rate_mbps < cur.spec.app_rate_mbps {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    map
}

/// Empirical CDF over the per-realization SNR values of a campaign.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len() as f64;
    let mut points = Vec::with_capacity(sorted.len() * 2);
    for (i, v) in sorted.iter().enumerate() {
        points.push((*v, i as f64 / n));
        points.push((*v, (i + 1) as f64 / n));
    }
    points
}

/// One SNR CDF figure per condition, one curve per (scenario, pairing).
pub fn emit_snr_cdf(results: &[CampaignResult], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        bail!("no campaigns to plot");
    }
    let sources = cdf_source_campaigns(results);
    let mut written = Vec::new();
    for condition in [Condition::Los, Condition::Nlos] {
        let mut series = Vec::new();
        let mut rows = Vec::new();
        for r in sources.values() {
            if r.spec.condition != condition {
                continue;
            }
            let snrs: Vec<f64> = r.runs.iter().map(|run| run.metrics.mean_snr_db).collect();
            let cdf = empirical_cdf(&snrs);
            for (x, y) in cdf.iter().skip(1).step_by(2) {
                rows.push(format!(
                    "{},{},{},{}",
                    r.spec.scenario, r.spec.pairing, x, y
                ));
            }
            series.push(Series {
                label: format!("{} {}", r.spec.scenario, r.spec.pairing),
                points: cdf,
            });
        }
        if series.is_empty() {
            continue;
        }
        let chart = Chart {
            title: format!("SNR CDF, {condition}"),
            x_label: "SNR (dB)".into(),
            y_label: "CDF".into(),
            series,
            y_range: Some((0.0, 1.0)),
        };
        let base = out_dir.join(format!("snr_cdf_{}", condition.to_string().to_lowercase()));
        written.extend(write_figure(
            &base,
            &chart,
            "scenario,pairing,snr_db,cdf",
            &rows,
        )?);
    }
    Ok(written)
}

/// Mean metric vs application rate, one figure per condition, one curve per
/// (scenario, pairing). All cells must share the same rate grid.
pub fn emit_metric_curves(
    results: &[CampaignResult],
    metric: Metric,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        bail!("no campaigns to plot");
    }
    let mut cells: BTreeMap<String, (CellKey, Vec<&CampaignResult>)> = BTreeMap::new();
    for r in results {
        let key = format!(
            "{}|{}|{}",
            r.spec.scenario, r.spec.condition, r.spec.pairing
        );
        cells
            .entry(key)
            .or_insert_with(|| {
                (
                    (
                        r.spec.scenario,
                        r.spec.condition,
                        r.spec.pairing.to_string(),
                    ),
                    Vec::new(),
                )
            })
            .1
            .push(r);
    }
    let mut reference_rates: Option<Vec<f64>> = None;
    for (key, list) in cells.values_mut() {
        list.sort_by(|a, b| {
            a.spec
                .app_rate_mbps
                .partial_cmp(&b.spec.app_rate_mbps)
                .expect("finite")
        });
        let rates: Vec<f64> = list.iter().map(|r| r.spec.app_rate_mbps).collect();
        match &reference_rates {
            None => reference_rates = Some(rates),
            Some(reference) if *reference != rates => {
                bail!(
                    "mismatched rate sweeps: {} {} {} covers {rates:?}, expected {reference:?}",
                    key.0,
                    key.1,
                    key.2
                )
            }
            _ => {}
        }
    }

    let mut written = Vec::new();
    for condition in [Condition::Los, Condition::Nlos] {
        let mut series = Vec::new();
        let mut rows = Vec::new();
        for (key, list) in cells.values() {
            if key.1 != condition {
                continue;
            }
            let points: Vec<(f64, f64)> = list
                .iter()
                .map(|r| (r.spec.app_rate_mbps, metric.pick(r).0))
                .collect();
            for r in list {
                let (mean, hw) = metric.pick(r);
                rows.push(format!(
                    "{},{},{},{},{}",
                    key.0, key.2, r.spec.app_rate_mbps, mean, hw
                ));
            }
            series.push(Series {
                label: format!("{} {}", key.0, key.2),
                points,
            });
        }
        if series.is_empty() {
            continue;
        }
        let chart = Chart {
            title: format!("{} vs application rate, {condition}", metric.axis()),
            x_label: "application rate (Mbps)".into(),
            y_label: metric.axis().into(),
            series,
            y_range: None,
        };
        let base = out_dir.join(format!(
            "{}_vs_rate_{}",
            metric.name(),
            condition.to_string().to_lowercase()
        ));
        written.extend(write_figure(
            &base,
            &chart,
            "scenario,pairing,app_rate_mbps,mean,ci_half_width",
            &rows,
        )?);
    }
    Ok(written)
}

/// Convergence of the running throughput mean and its confidence interval
/// over the realization count for one campaign.
pub fn emit_ci_figure(result: &CampaignResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if result.stats.convergence.is_empty() {
        bail!("campaign carries no convergence series");
    }
    let mean: Vec<(f64, f64)> = result
        .stats
        .convergence
        .iter()
        .map(|p| (p.n as f64, p.running_mean))
        .collect();
    let upper: Vec<(f64, f64)> = result
        .stats
        .convergence
        .iter()
        .map(|p| (p.n as f64, p.running_mean + p.ci_half_width))
        .collect();
    let lower: Vec<(f64, f64)> = result
        .stats
        .convergence
        .iter()
        .map(|p| (p.n as f64, p.running_mean - p.ci_half_width))
        .collect();
    let rows: Vec<String> = result
        .stats
        .convergence
        .iter()
        .map(|p| format!("{},{},{}", p.n, p.running_mean, p.ci_half_width))
        .collect();
    let chart = Chart {
        title: format!(
            "throughput mean vs realization count, {} {} {} at {} Mbps",
            result.spec.scenario,
            result.spec.condition,
            result.spec.pairing,
            result.spec.app_rate_mbps
        ),
        x_label: "realizations".into(),
        y_label: "mean throughput (Mbps)".into(),
        series: vec![
            Series {
                label: "running mean".into(),
                points: mean,
            },
            Series {
                label: "upper CI bound".into(),
                points: upper,
            },
            Series {
                label: "lower CI bound".into(),
                points: lower,
            },
        ],
        y_range: None,
    };
    write_figure(
        &out_dir.join("ci_convergence"),
        &chart,
        "n,running_mean,ci_half_width",
        &rows,
    )
}
