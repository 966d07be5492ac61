//! Rankings by activity and aggregated activity.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{InstitutionId, Panel};

/// Ranks one quarter's activities: the largest activity gets rank 1, zero
/// activity gets rank 0, equal activities are ordered by `keys`.
pub fn rank_quarter<T, K>(activities: &[T], keys: &[K]) -> Result<Vec<u32>>
where
    T: PartialOrd + Zero + Copy,
    K: Ord,
{
    if activities.len() != keys.len() {
        return Err(Error::InvalidArgument("activities and keys differ in length".into()));
    }
    let mut active = Vec::new();
    for (i, a) in activities.iter().enumerate() {
        match a.partial_cmp(&T::zero()) {
            Some(Ordering::Greater) => active.push(i),
            Some(_) => {}
            None => return Err(Error::InvalidArgument(format!("activity {i} is not a number"))),
        }
    }
    if active.is_empty() {
        return Err(Error::Degenerate("no positive activity: ranking undefined".into()));
    }
    active.sort_by(|&a, &b| {
        activities[b]
            .partial_cmp(&activities[a])
            .expect("checked comparable")
            .then_with(|| keys[a].cmp(&keys[b]))
    });
    let mut ranks = vec![0u32; activities.len()];
    for (pos, i) in active.into_iter().enumerate() {
        ranks[i] = pos as u32 + 1;
    }
    Ok(ranks)
}

/// Ranks every entry 1..=n (zeros included, placed last), ties by key.
pub(crate) fn full_ranks<K: Ord>(values: &[i64], keys: &[K]) -> Vec<u32> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].cmp(&values[a]).then_with(|| keys[a].cmp(&keys[b])));
    let mut ranks = vec![0u32; values.len()];
    for (pos, i) in idx.into_iter().enumerate() {
        ranks[i] = pos as u32 + 1;
    }
    ranks
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstitutionAggregate {
    pub institution: InstitutionId,
    pub name: String,
    /// Summed activity `A_i` in millions.
    pub total: i64,
    pub otc: i64,
    pub etd: i64,
    /// Rank `R_i` of `total`.
    pub rank: u32,
    /// Rank of `otc`.
    pub rank_otc: u32,
}

/// Time-aggregated activities and their rankings, in registry order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRanking {
    pub entries: Vec<InstitutionAggregate>,
}

impl AggregateRanking {
    /// Entries ordered by `R_i`.
    pub fn by_rank(&self) -> Vec<&InstitutionAggregate> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by_key(|e| e.rank);
        v
    }

    /// `A_i` ordered by rank.
    pub fn totals_by_rank(&self) -> Vec<i64> {
        self.by_rank().iter().map(|e| e.total).collect()
    }

    pub fn ranks(&self) -> Vec<(InstitutionId, u32)> {
        self.entries.iter().map(|e| (e.institution, e.rank)).collect()
    }

    pub fn otc_ranks(&self) -> Vec<(InstitutionId, u32)> {
        self.entries.iter().map(|e| (e.institution, e.rank_otc)).collect()
    }

    pub fn get(&self, id: InstitutionId) -> Option<&InstitutionAggregate> {
        self.entries.iter().find(|e| e.institution == id)
    }
}

/// Sums activities over every quarter of the panel; absent quarters add zero.
pub fn aggregate(panel: &Panel) -> AggregateRanking {
    aggregate_span(panel, 1..=panel.quarters())
}

/// Sums activities over the 1-based quarter indices in `span`.
pub fn aggregate_span(panel: &Panel, span: RangeInclusive<usize>) -> AggregateRanking {
    let n = panel.institutions();
    let (mut total, mut otc, mut etd) = (vec![0i64; n], vec![0i64; n], vec![0i64; n]);
    for rec in panel.records().filter(|r| span.contains(&r.t)) {
        let i = rec.institution.index();
        total[i] += rec.activity;
        otc[i] += rec.activity_otc;
        etd[i] += rec.activity_etd;
    }
    let names = panel.registry().names();
    let rank = full_ranks(&total, names);
    let rank_otc = full_ranks(&otc, names);
    let entries = panel
        .registry()
        .ids()
        .map(|id| {
            let i = id.index();
            InstitutionAggregate {
                institution: id,
                name: names[i].clone(),
                total: total[i],
                otc: otc[i],
                etd: etd[i],
                rank: rank[i],
                rank_otc: rank_otc[i],
            }
        })
        .collect();
    AggregateRanking { entries }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankPair {
    pub institution: InstitutionId,
    pub left: u32,
    pub right: u32,
    pub displacement: u32,
}

/// Paired positions of the same institutions in two rankings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankComparison {
    /// Ordered by the left ranking.
    pub rows: Vec<RankPair>,
}

impl RankComparison {
    /// Largest displacement among institutions whose left rank lies in `band`.
    pub fn max_displacement(&self, band: RangeInclusive<u32>) -> u32 {
        self.rows
            .iter()
            .filter(|r| band.contains(&r.left))
            .map(|r| r.displacement)
            .max()
            .unwrap_or(0)
    }

    pub fn displacements(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.displacement).collect()
    }
}

/// Joins two rankings over the same institution set.
pub fn compare_rankings(
    left: &[(InstitutionId, u32)],
    right: &[(InstitutionId, u32)],
) -> Result<RankComparison> {
    let r: BTreeMap<InstitutionId, u32> = right.iter().copied().collect();
    let l: BTreeMap<InstitutionId, u32> = left.iter().copied().collect();
    if l.len() != left.len() || r.len() != right.len() {
        return Err(Error::MismatchedSets("institution listed twice".into()));
    }
    if l.keys().ne(r.keys()) {
        let only_left: Vec<String> = l.keys().filter(|k| !r.contains_key(k)).map(|k| k.to_string()).collect();
        let only_right: Vec<String> = r.keys().filter(|k| !l.contains_key(k)).map(|k| k.to_string()).collect();
        return Err(Error::MismatchedSets(format!(
            "only left: [{}], only right: [{}]",
            only_left.join(", "),
            only_right.join(", ")
        )));
    }
    let mut rows: Vec<RankPair> = l
        .iter()
        .map(|(&id, &a)| {
            let b = r[&id];
            RankPair {
                institution: id,
                left: a,
                right: b,
                displacement: a.abs_diff(b),
            }
        })
        .collect();
    rows.sort_by_key(|p| (p.left, p.institution));
    Ok(RankComparison { rows })
}
