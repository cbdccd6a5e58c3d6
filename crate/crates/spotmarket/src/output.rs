//! Per-episode CSV and pooled JSON summary.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use spotmarket_core::experiment::ExperimentConfig;
use spotmarket_core::metrics::{EpisodeMetrics, MetricsReport, PooledReport};

use crate::{Error, Result};

/// First line of every episode file.
pub const CSV_SCHEMA: &str = "#schema=spotmarket-episodes/v1";
pub const SUMMARY_SCHEMA: &str = "spotmarket-summary/v1";

pub const CSV_COLUMNS: [&str; 21] = [
    "replication",
    "episode",
    "warmup",
    "utilization",
    "adherence",
    "fairness",
    "share_shipper",
    "share_carrier",
    "share_broker",
    "net_shipper",
    "net_carrier",
    "net_broker",
    "shipped",
    "failed",
    "shipper_reward",
    "carrier_reward",
    "broker_reward",
    "shipper_mu",
    "shipper_sigma",
    "carrier_mu",
    "carrier_sigma",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn csv_record(replication: u32, r: &EpisodeMetrics) -> Vec<String> {
    vec![
        replication.to_string(),
        r.episode.to_string(),
        u8::from(r.warmup).to_string(),
        r.utilization.to_string(),
        opt(r.adherence),
        opt(r.fairness),
        opt(r.shares.map(|s| s.shipper)),
        opt(r.shares.map(|s| s.carrier)),
        opt(r.shares.map(|s| s.broker)),
        opt(r.net.map(|s| s.shipper)),
        opt(r.net.map(|s| s.carrier)),
        opt(r.net.map(|s| s.broker)),
        r.shipped.to_string(),
        r.failed.to_string(),
        r.shipper_reward.to_string(),
        r.carrier_reward.to_string(),
        r.broker_reward.to_string(),
        opt(r.shipper_mu),
        opt(r.shipper_sigma),
        opt(r.carrier_mu),
        opt(r.carrier_sigma),
    ]
}

/// Writes the schema line, the header and one row per episode.
pub fn write_episodes<'a, W: Write>(
    mut out: W,
    replications: impl IntoIterator<Item = (u32, &'a [EpisodeMetrics])>,
) -> std::io::Result<()> {
    writeln!(out, "{CSV_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for (rep, rows) in replications {
        for row in rows {
            w.write_record(csv_record(rep, row))?;
        }
    }
    w.flush()
}

pub fn write_episodes_file<'a>(
    path: &Path,
    replications: impl IntoIterator<Item = (u32, &'a [EpisodeMetrics])>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_episodes(std::io::BufWriter::new(file), replications).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationSummary {
    pub replication: u32,
    pub seed: u64,
    pub stable: bool,
    pub error: Option<String>,
    pub episodes: u32,
    pub report: Option<MetricsReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub schema: &'static str,
    pub experiment: &'a ExperimentConfig,
    pub replications: Vec<ReplicationSummary>,
    pub pooled: &'a PooledReport,
    pub duration_seconds: f64,
}

pub fn write_summary_file(path: &Path, summary: &Summary<'_>) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).expect("summaries serialize");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Human-readable pooled table for standard output.
pub fn format_pooled(pooled: &PooledReport) -> String {
    let mut s = format!(
        "{:<14} {:>10} {:>8}   {:>10} {:>8}\n",
        "metric", "avg", "sd", "end", "sd"
    );
    for field in spotmarket_core::metrics::SUMMARY_FIELDS {
        let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| {
            if x.abs() < 1e6 {
                format!("{x:.4}")
            } else {
                format!("{x:.3e}")
            }
        });
        let a = pooled.average.get(field).copied().unwrap_or_default();
        let e = pooled.end_of_horizon.get(field).copied().unwrap_or_default();
        s.push_str(&format!(
            "{:<14} {:>10} {:>8}   {:>10} {:>8}\n",
            field,
            cell(a.mean),
            cell(a.stdev),
            cell(e.mean),
            cell(e.stdev)
        ));
    }
    s.push_str(&format!(
        "replications: {} ({} unstable)\n",
        pooled.replications, pooled.unstable
    ));
    s
}
