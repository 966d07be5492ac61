//! Run configuration: a TOML document whose fields command-line flags override.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::correlate::{Method, SeriesField};
use crate::error::{Error, Result};
use crate::network::LinkMode;
use crate::quarter::{Quarter, QuarterRange};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Raw or normalized panel CSV.
    pub panel: Option<PathBuf>,
    /// Alias table; the bundled table when absent.
    pub aliases: Option<PathBuf>,
    /// `quarter,others_total_derivatives` CSV for market-wide shares.
    pub market_totals: Option<PathBuf>,
    pub range: Option<QuarterRange>,
    pub allow_merge_conflicts: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub tolerant: bool,
    pub stats: StatsConfig,
    pub kcore: KcoreConfig,
    pub correlation: CorrelationConfig,
    pub frames: FramesConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            panel: None,
            aliases: None,
            market_totals: None,
            range: None,
            allow_merge_conflicts: false,
            out: PathBuf::from("out"),
            seed: 1,
            tolerant: false,
            stats: StatsConfig::default(),
            kcore: KcoreConfig::default(),
            correlation: CorrelationConfig::default(),
            frames: FramesConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitChoice {
    LogMoments,
    RankCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub fit: FitChoice,
    /// Fit the rank curve to shares instead of currency amounts.
    pub normalize: bool,
    pub trials: usize,
    pub p_threshold: f64,
    pub top_k: Vec<usize>,
    pub trends: Vec<TrendSpec>,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            fit: FitChoice::LogMoments,
            normalize: false,
            trials: 10_000,
            p_threshold: 0.10,
            top_k: vec![7, 15, 25],
            trends: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendSpec {
    pub institution: String,
    pub window: QuarterRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KcoreConfig {
    pub alpha: f64,
    pub beta: f64,
    pub link_mode: LinkMode,
}

impl Default for KcoreConfig {
    fn default() -> Self {
        KcoreConfig {
            alpha: 0.0,
            beta: 1.0,
            link_mode: LinkMode::RankWeighted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    All,
    /// Only institutions listed in every quarter of the period.
    AlwaysPresent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelationConfig {
    pub fields: Vec<SeriesField>,
    pub period: Option<QuarterRange>,
    pub method: Method,
    pub scaled: bool,
    /// First quarter of the "after" period.
    pub split: Option<Quarter>,
    pub institutions: Selection,
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        CorrelationConfig {
            fields: vec![SeriesField::ActivityTotal, SeriesField::Cce, SeriesField::Tce],
            period: None,
            method: Method::Pairwise,
            scaled: true,
            split: None,
            institutions: Selection::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FramesConfig {
    pub link_mode: LinkMode,
    /// Quarters to emit; the whole panel when absent.
    pub period: Option<QuarterRange>,
    /// Attach the scaled activity correlation to each link.
    pub correlation: bool,
}

impl Default for FramesConfig {
    fn default() -> Self {
        FramesConfig {
            link_mode: LinkMode::RankWeighted,
            period: None,
            correlation: true,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks parameters and that every referenced input exists.
    pub fn validate(&self) -> Result<()> {
        let panel = self
            .panel
            .as_ref()
            .ok_or_else(|| Error::Config("no panel given (set `panel` or pass --panel)".into()))?;
        for p in [Some(panel), self.aliases.as_ref(), self.market_totals.as_ref()].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::io(p, std::io::Error::new(std::io::ErrorKind::NotFound, "file not found")));
            }
        }
        let (a, b) = (self.kcore.alpha, self.kcore.beta);
        if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) {
            return Err(Error::Config(format!("kcore exponents need alpha, beta >= 0 and alpha + beta > 0 (got {a}, {b})")));
        }
        let p = self.stats.p_threshold;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!("p_threshold {p} must lie in (0, 1)")));
        }
        if self.stats.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.correlation.fields.is_empty() {
            return Err(Error::Config("no correlation fields selected".into()));
        }
        Ok(())
    }
}
