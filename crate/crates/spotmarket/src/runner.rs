//! Replications in parallel, results on disk.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use spotmarket_core::experiment::ExperimentConfig;
use spotmarket_core::metrics::{MetricsReport, PooledReport};
use spotmarket_core::sim::{run_replication, Replication};

use crate::output::{self, ReplicationSummary, Summary};
use crate::{Error, Result, OUT_DIR_ENV};

pub const EPISODES_FILE: &str = "episodes.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where to write the CSV and JSON files; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    /// Episode progress on standard error.
    pub progress: bool,
}

#[derive(Debug)]
pub struct RunResult {
    pub replications: Vec<Replication>,
    /// Per replication; `None` when it diverged.
    pub reports: Vec<Option<MetricsReport>>,
    pub pooled: PooledReport,
    pub duration: Duration,
}

impl RunResult {
    pub fn unstable(&self) -> usize {
        self.replications.iter().filter(|r| !r.is_stable()).count()
    }
}

/// `$SPOTMARKET_OUT_DIR/<name>`, or `runs/<name>` when the variable is unset.
pub fn default_out_dir(name: &str) -> PathBuf {
    let root = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"));
    root.join(name)
}

pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<RunResult> {
    config.validate()?;
    let start = Instant::now();
    let episodes = config.case.episodes;
    let step = (episodes / 10).max(1);
    let replications: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|rep| -> Result<Replication> {
            let (shipper, carrier) = config.traders(rep)?;
            let mut report = |row: &spotmarket_core::metrics::EpisodeMetrics| {
                if options.progress && ((row.episode + 1) % step == 0 || row.episode + 1 == episodes) {
                    eprintln!(
                        "[{}] replication {rep}: episode {}/{episodes} utilization {:.3} adherence {}",
                        config.name,
                        row.episode + 1,
                        row.utilization,
                        row.adherence.map_or("NA".into(), |a| format!("{a:.3}")),
                    );
                }
            };
            Ok(run_replication(
                &config.case,
                config.replication_seed(rep),
                shipper,
                carrier,
                config.warmup_percent,
                &mut report,
            )?)
        })
        .collect::<Result<_>>()?;
    let reports: Vec<Option<MetricsReport>> = replications
        .iter()
        .map(|r| {
            r.is_stable()
                .then(|| MetricsReport::from_rows(&r.rows, config.warmup_percent, config.horizon_percent))
        })
        .collect();
    let pooled = PooledReport::pool(&reports);
    let result = RunResult {
        replications,
        reports,
        pooled,
        duration: start.elapsed(),
    };
    if let Some(dir) = &options.out_dir {
        write_outputs(dir, config, &result)?;
    }
    Ok(result)
}

pub fn write_outputs(dir: &Path, config: &ExperimentConfig, result: &RunResult) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    output::write_episodes_file(
        &dir.join(EPISODES_FILE),
        result
            .replications
            .iter()
            .enumerate()
            .map(|(i, r)| (i as u32, r.rows.as_slice())),
    )?;
    let summary = Summary {
        schema: output::SUMMARY_SCHEMA,
        experiment: config,
        replications: result
            .replications
            .iter()
            .zip(&result.reports)
            .enumerate()
            .map(|(i, (r, report))| ReplicationSummary {
                replication: i as u32,
                seed: config.replication_seed(i as u32),
                stable: r.is_stable(),
                error: r.error.as_ref().map(|e| e.to_string()),
                episodes: r.rows.len() as u32,
                report: *report,
            })
            .collect(),
        pooled: &result.pooled,
        duration_seconds: result.duration.as_secs_f64(),
    };
    output::write_summary_file(&dir.join(SUMMARY_FILE), &summary)
}
