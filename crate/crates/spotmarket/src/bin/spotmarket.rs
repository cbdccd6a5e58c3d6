use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use spotmarket::checkpoint::Checkpoint;
use spotmarket::core::experiment::{preset, preset_names, ExperimentConfig};
use spotmarket::core::sim::run_replication;
use spotmarket::output::format_pooled;
use spotmarket::runner::{default_out_dir, run_experiment, RunOptions};
use spotmarket::{config, nash, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "spotmarket", version, about = "Brokered spot-market simulator with learning traders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Base seed; replication r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u32>,
    #[arg(long)]
    episodes: Option<u32>,
    /// Days per episode.
    #[arg(long)]
    days: Option<u32>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> anyhow::Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.replications {
            cfg.replications = r;
        }
        if let Some(e) = self.episodes {
            cfg.case.episodes = e;
        }
        if let Some(d) = self.days {
            cfg.case.horizon_days = d;
        }
        cfg.validate().context("invalid overrides")?;
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a preset name or a JSON config file.
    Run {
        target: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory (default: $SPOTMARKET_OUT_DIR/<name> or runs/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 2 if any replication diverged.
        #[arg(long)]
        strict: bool,
        /// Suppress progress on stderr.
        #[arg(long, short)]
        quiet: bool,
        /// Print the resolved config as JSON and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// List the built-in presets.
    Presets,
    /// Best responses and pure equilibria of a payoff-matrix CSV.
    Nash { matrix: PathBuf },
    #[command(subcommand)]
    Checkpoint(CheckpointCommand),
}

#[derive(Subcommand)]
enum CheckpointCommand {
    /// Train replication 0 of an experiment and save its learners.
    Save {
        target: String,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a checkpoint and describe its networks.
    Load { file: PathBuf },
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            target,
            overrides,
            out,
            strict,
            quiet,
            print_config,
        } => {
            let mut cfg = config::resolve(&target)?;
            overrides.apply(&mut cfg)?;
            if print_config {
                emit(&(config::to_json(&cfg) + "\n"))?;
                return Ok(ExitCode::SUCCESS);
            }
            let dir = out.unwrap_or_else(|| default_out_dir(&cfg.name));
            let result = run_experiment(
                &cfg,
                &RunOptions {
                    out_dir: Some(dir.clone()),
                    progress: !quiet,
                },
            )?;
            emit(&format!(
                "{}: {} replications x {} episodes x {} days in {:.1}s\n{}results written to {}\n",
                cfg.name,
                cfg.replications,
                cfg.case.episodes,
                cfg.case.horizon_days,
                result.duration.as_secs_f64(),
                format_pooled(&result.pooled),
                dir.display()
            ))?;
            if strict && result.unstable() > 0 {
                eprintln!("{} of {} replications unstable", result.unstable(), cfg.replications);
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets => {
            let mut text = String::new();
            for name in preset_names() {
                let p = preset(&name)?;
                text += &format!(
                    "{name:<36} {:>6} x {:<6} cap {:<4} reps {}\n",
                    p.case.episodes, p.case.horizon_days, p.case.capacity, p.replications
                );
            }
            text += &format!("\noutput directory default: ${OUT_DIR_ENV}/<name> (falls back to runs/<name>)\n");
            emit(&text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Nash { matrix } => {
            let m = nash::load_matrix(&matrix)?;
            emit(&nash::report(&m))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Checkpoint(CheckpointCommand::Save { target, overrides, out }) => {
            let mut cfg = config::resolve(&target)?;
            overrides.apply(&mut cfg)?;
            let (shipper, carrier) = cfg.traders(0)?;
            let rep = run_replication(
                &cfg.case,
                cfg.replication_seed(0),
                shipper,
                carrier,
                cfg.warmup_percent,
                &mut |_| {},
            )?;
            if let Some(e) = &rep.error {
                bail!("training diverged, nothing saved: {e}");
            }
            let cp = Checkpoint::new(&cfg.name, cfg.case.episodes, rep.shipper.learner(), rep.carrier.learner());
            cp.save(&out)?;
            emit(&format!("saved {} after {} episodes to {}\n", cfg.name, cfg.case.episodes, out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Checkpoint(CheckpointCommand::Load { file }) => {
            let cp = Checkpoint::load(&file)?;
            let mut text = format!("{} v{}: {} after {} episodes\n", cp.format, cp.version, cp.experiment, cp.episodes);
            for (side, rec) in [("shipper", &cp.shipper), ("carrier", &cp.carrier)] {
                text += &match rec {
                    None => format!("  {side}: scripted\n"),
                    Some(r) => {
                        let critic = r.critic.as_ref().map_or("none".to_string(), |c| format!("{:?}", c.layer_sizes));
                        format!(
                            "  {side}: {} {}, actor {:?}, critic {critic}\n",
                            r.algorithm,
                            r.profile.attitude.abbreviation(),
                            r.actor.layer_sizes
                        )
                    }
                };
            }
            emit(&text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
