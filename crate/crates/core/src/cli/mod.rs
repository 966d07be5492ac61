//! Command-line front end.

pub mod commands;
pub mod config;

pub use commands::{Artifact, Context, Manifest, Sink, FAMILIES};
pub use config::RunConfig;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::correlate::{Method, SeriesField};
use crate::error::{Error, Result};
use crate::network::LinkMode;
use crate::quarter::{Quarter, QuarterRange};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "otcnet", version, about = "Networks and correlations from quarterly derivative-activity rankings")]
pub struct Cli {
    /// TOML run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Repair or skip malformed rows instead of failing.
    #[arg(long, global = true)]
    pub tolerant: bool,
    /// Raw or normalized panel CSV.
    #[arg(long, global = true)]
    pub panel: Option<PathBuf>,
    /// Alias table (TSV).
    #[arg(long, global = true)]
    pub aliases: Option<PathBuf>,
    /// Declared quarter range, e.g. 1998-Q4..2012-Q4.
    #[arg(long, global = true)]
    pub range: Option<QuarterRange>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize a raw panel and write the registry and logs.
    Ingest,
    /// Concentration statistics, log-normal fit and KS test.
    Stats {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        p_threshold: Option<f64>,
        #[arg(long)]
        market_totals: Option<PathBuf>,
    },
    /// Aggregated co-occurrence networks.
    Network {
        /// Only this link mode; both when omitted.
        #[arg(long)]
        mode: Option<LinkMode>,
    },
    /// Weighted k-core decomposition.
    Kcore {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Correlation matrices in topological order.
    Correlate {
        /// Repeatable: activity_total, activity_otc, cce, tce.
        #[arg(long)]
        field: Vec<SeriesField>,
        #[arg(long)]
        period: Option<QuarterRange>,
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        scaled: Option<bool>,
        #[arg(long)]
        method: Option<Method>,
        /// First quarter of the second period.
        #[arg(long)]
        split: Option<Quarter>,
    },
    /// One JSON frame per quarter.
    Frames {
        #[arg(long)]
        period: Option<QuarterRange>,
    },
    /// Every analysis artifact plus a manifest.
    Report,
}

impl Cli {
    /// The configuration file, if any, with flags applied on top.
    pub fn effective_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if self.tolerant {
            c.tolerant = true;
        }
        if let Some(v) = &self.panel {
            c.panel = Some(v.clone());
        }
        if let Some(v) = &self.aliases {
            c.aliases = Some(v.clone());
        }
        if let Some(v) = self.range {
            c.range = Some(v);
        }
        match &self.command {
            Command::Stats {
                trials,
                p_threshold,
                market_totals,
            } => {
                if let Some(v) = trials {
                    c.stats.trials = *v;
                }
                if let Some(v) = p_threshold {
                    c.stats.p_threshold = *v;
                }
                if let Some(v) = market_totals {
                    c.market_totals = Some(v.clone());
                }
            }
            Command::Kcore { alpha, beta } => {
                if let Some(v) = alpha {
                    c.kcore.alpha = *v;
                }
                if let Some(v) = beta {
                    c.kcore.beta = *v;
                }
            }
            Command::Correlate {
                field,
                period,
                scaled,
                method,
                split,
            } => {
                if !field.is_empty() {
                    c.correlation.fields = field.clone();
                }
                if let Some(v) = period {
                    c.correlation.period = Some(*v);
                }
                if let Some(v) = scaled {
                    c.correlation.scaled = *v;
                }
                if let Some(v) = method {
                    c.correlation.method = *v;
                }
                if let Some(v) = split {
                    c.correlation.split = Some(*v);
                }
            }
            Command::Frames { period: Some(v) } => c.frames.period = Some(*v),
            _ => {}
        }
        Ok(c)
    }
}

/// Runs one parsed invocation and returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<Artifact>> {
    let config = cli.effective_config()?;
    let ctx = Context::load(config)?;
    let mut sink = Sink::new(&ctx.config.out)?;
    match &cli.command {
        Command::Ingest => commands::cmd_ingest(&ctx, &mut sink)?,
        Command::Stats { .. } => commands::cmd_stats(&ctx, &mut sink)?,
        Command::Network { mode } => {
            let modes = match mode {
                Some(m) => vec![*m],
                None => vec![LinkMode::Binary, LinkMode::RankWeighted],
            };
            commands::cmd_network(&ctx, &mut sink, &modes)?
        }
        Command::Kcore { .. } => commands::cmd_kcore(&ctx, &mut sink)?,
        Command::Correlate { .. } => commands::cmd_correlate(&ctx, &mut sink)?,
        Command::Frames { .. } => commands::cmd_frames(&ctx, &mut sink)?,
        Command::Report => {
            commands::cmd_report(&ctx, &mut sink)?;
        }
    }
    Ok(sink.artifacts)
}

/// Exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_INTERNAL
    }
}

/// Machine-readable error line for stderr.
pub fn error_json(e: &Error) -> String {
    serde_json::json!({ "error": e.kind(), "message": e.to_string() }).to_string()
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(artifacts) => {
            print!("{}", commands::summary(&artifacts));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            exit_code(&e)
        }
    }
}
