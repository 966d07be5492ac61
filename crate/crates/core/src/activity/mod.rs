//! Activities, rankings, concentration and distribution fits.

pub mod concentration;
pub mod fit;
pub mod ks;
pub mod rank;
pub mod trend;

pub use concentration::{cumulative_share, gini, market_share, skewness};
pub use fit::{fit_lognormal_rank, rank_curve, FitMethod, LogNormalFit};
pub use ks::{ks_montecarlo, ks_p_value, ks_statistic, ks_two_sample, KsOutcome, KsTest};
pub use rank::{
    aggregate, aggregate_span, compare_rankings, rank_quarter, AggregateRanking,
    InstitutionAggregate, RankComparison, RankPair,
};
pub use trend::{growth_trend, GrowthTrend};

use serde::Serialize;

use crate::ingest::{InstitutionId, Panel};
use crate::num::{millions, Real};

/// `A_i^OTC / A_i^ETD` for one institution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum OtcRatio<F> {
    Finite(F),
    /// No exchange-traded activity but positive OTC activity.
    Infinite,
    /// Both aggregates are zero.
    Undefined,
}

impl<F: Real> OtcRatio<F> {
    pub fn value(&self) -> Option<F> {
        match self {
            OtcRatio::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

pub fn otc_ratio<F: Real>(otc: i64, etd: i64) -> OtcRatio<F> {
    match (otc, etd) {
        (0, 0) => OtcRatio::Undefined,
        (_, 0) => OtcRatio::Infinite,
        (o, e) => OtcRatio::Finite(millions::<F>(o) / millions::<F>(e)),
    }
}

/// Ratios for every institution, in registry order.
pub fn otc_ratios<F: Real>(agg: &AggregateRanking) -> Vec<(InstitutionId, OtcRatio<F>)> {
    agg.entries
        .iter()
        .map(|e| (e.institution, otc_ratio(e.otc, e.etd)))
        .collect()
}

/// Quarterly activity `a_i(t)` for `t = 1..=T` (index 0 is the first quarter).
pub fn activity_series<F: Real>(panel: &Panel, id: InstitutionId) -> Vec<F> {
    (1..=panel.quarters())
        .map(|t| millions(panel.activity(id, t)))
        .collect()
}
