//! Panel assembly: identity merging, rank repair and record validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use serde::Serialize;

use super::alias::AliasTable;
use super::log::{IngestLog, LogKind};
use super::raw::{DerivativeAmounts, RawRow, COLUMNS};
use crate::error::{Error, Result};
use crate::quarter::{Quarter, QuarterRange};

/// Reports list at most this many institutions per quarter.
pub const MAX_RANKED: usize = 25;

/// Absolute tolerance, in millions of USD, for the additive identities.
pub const ADDITIVE_TOLERANCE: f64 = 0.5;

/// Index of an institution in the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct InstitutionId(pub usize);

impl InstitutionId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for InstitutionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Canonical institution names, indexed by [`InstitutionId`] in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Registry {
    names: Vec<String>,
}

impl Registry {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: InstitutionId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<InstitutionId> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .ok()
            .map(InstitutionId)
    }

    pub fn ids(&self) -> impl Iterator<Item = InstitutionId> {
        (0..self.names.len()).map(InstitutionId)
    }
}

/// A raw (name, state) combination observed in the input.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Source {
    pub name: String,
    pub state: Option<String>,
}

/// Two sources merged into one identity that were listed in the same quarter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeConflict {
    pub canonical: String,
    pub quarter: Quarter,
    pub first: Source,
    pub first_line: u64,
    pub second: Source,
    pub second_line: u64,
}

impl fmt::Display for MergeConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &Source| match &s.state {
            Some(st) => format!("{} ({st})", s.name),
            None => s.name.clone(),
        };
        write!(
            f,
            "{} and {} both map to {} and co-appear in {} (lines {} and {})",
            show(&self.first),
            show(&self.second),
            self.canonical,
            self.quarter,
            self.first_line,
            self.second_line
        )
    }
}

/// Result of identity resolution.
#[derive(Debug, Clone, Serialize)]
pub struct MergeReport {
    pub registry: Registry,
    /// Registry id of each input row, in input order.
    pub assignment: Vec<InstitutionId>,
    /// Sources merged into each institution.
    pub sources: Vec<Vec<Source>>,
    pub conflicts: Vec<MergeConflict>,
}

fn source_of(row: &RawRow) -> Source {
    Source {
        name: row.name.split_whitespace().collect::<Vec<_>>().join(" ").to_uppercase(),
        state: row.state.clone(),
    }
}

/// Collapses rows to canonical identities.
///
/// Sources whose names normalize to the same canonical name become one
/// identity, regardless of state. A merge is only safe when the merged sources
/// never appear in the same quarter; every such co-appearance is reported. If
/// `allow_conflicts` is false a conflict is an error, otherwise the sources of
/// an affected name are kept apart as `NAME [label]` identities.
pub fn merge_identities(
    rows: &[RawRow],
    aliases: &AliasTable,
    allow_conflicts: bool,
) -> Result<MergeReport> {
    let mut canonical = Vec::with_capacity(rows.len());
    for row in rows {
        canonical.push(aliases.normalize(&row.name).map_err(|_| Error::Row {
            line: row.line,
            message: "empty institution name".into(),
        })?);
    }

    // canonical -> quarter -> first (source, line) seen
    let mut seen: BTreeMap<&str, BTreeMap<Quarter, Vec<(Source, u64)>>> = BTreeMap::new();
    let mut conflicts = Vec::new();
    for (row, canon) in rows.iter().zip(&canonical) {
        let src = source_of(row);
        let slot = seen
            .entry(canon.as_str())
            .or_default()
            .entry(row.quarter)
            .or_default();
        for (other, other_line) in slot.iter() {
            if *other != src {
                conflicts.push(MergeConflict {
                    canonical: canon.clone(),
                    quarter: row.quarter,
                    first: other.clone(),
                    first_line: *other_line,
                    second: src.clone(),
                    second_line: row.line,
                });
            }
        }
        if !slot.iter().any(|(s, _)| *s == src) {
            slot.push((src, row.line));
        }
    }
    if !conflicts.is_empty() && !allow_conflicts {
        let msg = conflicts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::MergeConflict(msg));
    }

    let conflicted: BTreeSet<&str> = conflicts.iter().map(|c| c.canonical.as_str()).collect();
    let mut identity = Vec::with_capacity(rows.len());
    for (row, canon) in rows.iter().zip(&canonical) {
        if conflicted.contains(canon.as_str()) {
            let group: BTreeSet<Source> = rows
                .iter()
                .zip(&canonical)
                .filter(|(_, c)| *c == canon)
                .map(|(r, _)| source_of(r))
                .collect();
            identity.push(split_label(canon, &source_of(row), &group));
        } else {
            identity.push(canon.clone());
        }
    }

    let names: Vec<String> = identity
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let registry = Registry { names };
    let assignment: Vec<InstitutionId> = identity
        .iter()
        .map(|n| registry.id(n).expect("registered"))
        .collect();
    let mut sources: Vec<BTreeSet<Source>> = vec![BTreeSet::new(); registry.len()];
    for (row, id) in rows.iter().zip(&assignment) {
        sources[id.0].insert(source_of(row));
    }
    Ok(MergeReport {
        registry,
        assignment,
        sources: sources.into_iter().map(|s| s.into_iter().collect()).collect(),
        conflicts,
    })
}

fn split_label(canonical: &str, src: &Source, group: &BTreeSet<Source>) -> String {
    let state_unique = src.state.is_some() && group.iter().filter(|s| s.state == src.state).count() == 1;
    let label = if state_unique {
        src.state.clone().unwrap_or_default()
    } else if group.iter().filter(|s| s.name == src.name).count() == 1 {
        src.name.clone()
    } else {
        format!("{} {}", src.name, src.state.as_deref().unwrap_or("-"))
    };
    format!("{canonical} [{label}]")
}

/// Fields carried through from the report but not used by the analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordDetail {
    pub state: Option<String>,
    pub total_assets: Option<i64>,
    pub amounts: DerivativeAmounts,
    pub tce_to_capital: Option<f64>,
}

/// One institution in one quarter; amounts in millions of USD.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarterRecord {
    pub institution: InstitutionId,
    /// 1-based quarter index within the panel range.
    pub t: usize,
    /// Position in the quarter's ranking; 0 means not listed.
    pub rank: u32,
    pub activity: i64,
    pub activity_etd: i64,
    pub activity_otc: i64,
    pub cce: Option<i64>,
    pub pfe: Option<i64>,
    pub tce: Option<i64>,
    pub detail: RecordDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `activity != activity_etd + activity_otc`.
    ActivitySplit { activity: i64, etd: i64, otc: i64 },
    /// `tce != cce + pfe`.
    TceIdentity { cce: i64, pfe: i64, tce: i64 },
    Negative { field: &'static str, value: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ActivitySplit { activity, etd, otc } => {
                write!(f, "activity {activity} != ETD {etd} + OTC {otc}")
            }
            Violation::TceIdentity { cce, pfe, tce } => {
                write!(f, "TCE {tce} != CCE {cce} + PFE {pfe}")
            }
            Violation::Negative { field, value } => write!(f, "{field} is negative ({value})"),
        }
    }
}

/// Checks sign constraints and the two additive identities.
pub fn validate_record(rec: &QuarterRecord, tolerance: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let signed: [(&'static str, Option<i64>); 7] = [
        ("activity", Some(rec.activity)),
        ("activity_etd", Some(rec.activity_etd)),
        ("activity_otc", Some(rec.activity_otc)),
        ("cce", rec.cce),
        ("pfe", rec.pfe),
        ("tce", rec.tce),
        ("total_assets", rec.detail.total_assets),
    ];
    for (field, v) in signed {
        if let Some(value) = v.filter(|&v| v < 0) {
            out.push(Violation::Negative { field, value });
        }
    }
    let off = |a: i64, b: i64| (a as f64 - b as f64).abs() > tolerance;
    if off(rec.activity, rec.activity_etd + rec.activity_otc) {
        out.push(Violation::ActivitySplit {
            activity: rec.activity,
            etd: rec.activity_etd,
            otc: rec.activity_otc,
        });
    }
    if let (Some(cce), Some(pfe), Some(tce)) = (rec.cce, rec.pfe, rec.tce) {
        if off(tce, cce + pfe) {
            out.push(Violation::TceIdentity { cce, pfe, tce });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct PanelOptions {
    /// Declared quarter range; inferred from the rows when absent.
    pub range: Option<QuarterRange>,
    pub allow_merge_conflicts: bool,
    pub max_ranked: usize,
    pub tolerance: f64,
}

impl Default for PanelOptions {
    fn default() -> Self {
        PanelOptions {
            range: None,
            allow_merge_conflicts: false,
            max_ranked: MAX_RANKED,
            tolerance: ADDITIVE_TOLERANCE,
        }
    }
}

/// Institutions x quarters. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    range: QuarterRange,
    registry: Registry,
    records: BTreeMap<(InstitutionId, usize), QuarterRecord>,
    presence: Vec<BTreeSet<usize>>,
}

impl Panel {
    pub fn range(&self) -> QuarterRange {
        self.range
    }

    /// Number of quarters `T`.
    pub fn quarters(&self) -> usize {
        self.range.len()
    }

    /// Number of institutions `N`.
    pub fn institutions(&self) -> usize {
        self.registry.len()
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn name(&self, id: InstitutionId) -> &str {
        self.registry.name(id)
    }

    pub fn record(&self, id: InstitutionId, t: usize) -> Option<&QuarterRecord> {
        self.records.get(&(id, t))
    }

    pub fn records(&self) -> impl Iterator<Item = &QuarterRecord> {
        self.records.values()
    }

    /// `r_i(t)`, 0 when absent.
    pub fn rank(&self, id: InstitutionId, t: usize) -> u32 {
        self.record(id, t).map_or(0, |r| r.rank)
    }

    /// `a_i(t)`, 0 when absent.
    pub fn activity(&self, id: InstitutionId, t: usize) -> i64 {
        self.record(id, t).map_or(0, |r| r.activity)
    }

    /// Ranks of every institution in quarter `t`, in registry order.
    pub fn ranks_at(&self, t: usize) -> Vec<u32> {
        self.registry.ids().map(|id| self.rank(id, t)).collect()
    }

    /// Listed records of quarter `t`, ordered by rank.
    pub fn ranked_at(&self, t: usize) -> Vec<&QuarterRecord> {
        let mut v: Vec<&QuarterRecord> = self
            .registry
            .ids()
            .filter_map(|id| self.record(id, t))
            .collect();
        v.sort_by_key(|r| r.rank);
        v
    }

    /// Quarters in which the institution was listed.
    pub fn presence(&self, id: InstitutionId) -> &BTreeSet<usize> {
        &self.presence[id.0]
    }

    /// Institutions listed in every quarter of `span`.
    pub fn always_present(&self, span: std::ops::RangeInclusive<usize>) -> Vec<InstitutionId> {
        self.registry
            .ids()
            .filter(|&id| span.clone().all(|t| self.presence[id.0].contains(&t)))
            .collect()
    }

    pub fn quarter(&self, t: usize) -> Quarter {
        self.range.quarter_at(t).expect("quarter index in range")
    }

    /// Writes the panel in the 17-column input layout with canonical names and
    /// repaired ranks, ordered by quarter then rank. Reading it back yields an
    /// identical panel.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let wrap = |e: csv::Error| Error::Csv {
            path: "<panel output>".into(),
            source: e,
        };
        w.write_record(COLUMNS).map_err(wrap)?;
        let opt = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        for t in 1..=self.quarters() {
            for rec in self.ranked_at(t) {
                let d = &rec.detail;
                let a = &d.amounts;
                w.write_record([
                    self.quarter(t).to_string(),
                    self.name(rec.institution).to_string(),
                    rec.rank.to_string(),
                    d.state.clone().unwrap_or_default(),
                    opt(d.total_assets),
                    rec.activity.to_string(),
                    a.futures.to_string(),
                    a.options_exchange.to_string(),
                    a.forwards.to_string(),
                    a.swaps.to_string(),
                    a.options_otc.to_string(),
                    a.credit_derivatives.to_string(),
                    opt(a.spot_fx),
                    opt(rec.cce),
                    opt(rec.pfe),
                    opt(rec.tce),
                    d.tce_to_capital.map(|v| v.to_string()).unwrap_or_default(),
                ])
                .map_err(wrap)?;
            }
        }
        w.flush().map_err(|e| Error::io("<panel output>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Registry file contents: one entry per institution.
#[derive(Debug, Serialize)]
pub struct RegistryEntry<'a> {
    pub id: usize,
    pub name: &'a str,
    pub sources: &'a [Source],
    pub quarters_present: usize,
    pub first_quarter: Option<Quarter>,
    pub last_quarter: Option<Quarter>,
}

pub fn registry_json(panel: &Panel, merge: &MergeReport) -> Result<String> {
    let entries: Vec<RegistryEntry> = panel
        .registry
        .ids()
        .map(|id| {
            let p = panel.presence(id);
            RegistryEntry {
                id: id.0,
                name: panel.name(id),
                sources: merge.sources.get(id.0).map_or(&[][..], |s| s.as_slice()),
                quarters_present: p.len(),
                first_quarter: p.first().map(|&t| panel.quarter(t)),
                last_quarter: p.last().map(|&t| panel.quarter(t)),
            }
        })
        .collect();
    Ok(serde_json::to_string_pretty(&entries)? + "\n")
}

/// Orders listed rows by activity (descending) then canonical name.
fn activity_order(rows: &[(&RawRow, &str)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    idx.sort_by(|&a, &b| {
        rows[b]
            .0
            .total_derivatives
            .cmp(&rows[a].0.total_derivatives)
            .then_with(|| rows[a].1.cmp(rows[b].1))
    });
    idx
}

/// Reported ranks are kept when they are exactly `1..=n` and agree with the
/// activity ordering; otherwise the quarter is re-ranked.
fn reported_ranks_ok(rows: &[(&RawRow, &str)]) -> std::result::Result<(), String> {
    let n = rows.len();
    let mut ranks = Vec::with_capacity(n);
    for (row, _) in rows {
        match row.rank_reported {
            Some(r) => ranks.push(r as usize),
            None => return Err(format!("{} has no reported rank", row.name)),
        }
    }
    let set: BTreeSet<usize> = ranks.iter().copied().collect();
    if set.len() != n {
        return Err("duplicate reported ranks".into());
    }
    if set.iter().copied().ne(1..=n) {
        return Err(format!("reported ranks are not 1..{n}"));
    }
    for a in 0..n {
        for b in 0..n {
            if ranks[a] < ranks[b] && rows[a].0.total_derivatives < rows[b].0.total_derivatives {
                return Err(format!(
                    "rank {} ({}) has less activity than rank {} ({})",
                    ranks[a], rows[a].0.name, ranks[b], rows[b].0.name
                ));
            }
        }
    }
    Ok(())
}

/// Assembles a validated [`Panel`] from raw rows.
pub fn build_panel(
    rows: &[RawRow],
    aliases: &AliasTable,
    opts: &PanelOptions,
) -> Result<(Panel, MergeReport, IngestLog)> {
    let range = match opts.range {
        Some(r) => r,
        None => {
            let first = rows.iter().map(|r| r.quarter).min();
            let last = rows.iter().map(|r| r.quarter).max();
            match (first, last) {
                (Some(a), Some(b)) => QuarterRange::new(a, b)?,
                _ => return Err(Error::InvalidArgument("no rows to build a panel from".into())),
            }
        }
    };
    for row in rows {
        if !range.contains(row.quarter) {
            return Err(Error::QuarterOutOfRange {
                quarter: format!("{} (line {})", row.quarter, row.line),
                range: range.to_string(),
            });
        }
    }

    let merge = merge_identities(rows, aliases, opts.allow_merge_conflicts)?;
    let mut log = IngestLog::default();
    for c in &merge.conflicts {
        log.push_quarter(LogKind::MergeConflict, c.quarter, c.to_string());
    }

    // (quarter index, institution) -> row
    let mut cells: BTreeMap<(usize, InstitutionId), &RawRow> = BTreeMap::new();
    for (row, &id) in rows.iter().zip(&merge.assignment) {
        let t = range.index_of(row.quarter).expect("checked above");
        match cells.get(&(t, id)) {
            Some(prev) if prev.same_content(row) => {
                log.push(
                    LogKind::DuplicateDropped,
                    Some(row.line),
                    format!("identical to line {}", prev.line),
                );
            }
            Some(prev) => {
                return Err(Error::DuplicateRecord {
                    name: merge.registry.name(id).to_string(),
                    quarter: row.quarter.to_string(),
                    first_line: prev.line,
                    second_line: row.line,
                });
            }
            None => {
                cells.insert((t, id), row);
            }
        }
    }

    let mut records = BTreeMap::new();
    let mut presence = vec![BTreeSet::new(); merge.registry.len()];
    for t in 1..=range.len() {
        let quarter_rows: Vec<(InstitutionId, &RawRow)> = cells
            .range((t, InstitutionId(0))..=(t, InstitutionId(usize::MAX)))
            .map(|(&(_, id), &row)| (id, row))
            .collect();
        if quarter_rows.is_empty() {
            continue;
        }
        let quarter = range.quarter_at(t).expect("in range");
        if quarter_rows.len() > opts.max_ranked {
            return Err(Error::TooManyRanked {
                quarter: quarter.to_string(),
                count: quarter_rows.len(),
                limit: opts.max_ranked,
            });
        }
        let named: Vec<(&RawRow, &str)> = quarter_rows
            .iter()
            .map(|(id, row)| (*row, merge.registry.name(*id)))
            .collect();
        let ranks: Vec<u32> = match reported_ranks_ok(&named) {
            Ok(()) => named.iter().map(|(r, _)| r.rank_reported.expect("checked")).collect(),
            Err(reason) => {
                log.push_quarter(LogKind::Reranked, quarter, reason);
                let mut ranks = vec![0u32; named.len()];
                for (pos, k) in activity_order(&named).into_iter().enumerate() {
                    ranks[k] = pos as u32 + 1;
                }
                ranks
            }
        };
        for ((id, row), rank) in quarter_rows.iter().zip(ranks) {
            let rec = QuarterRecord {
                institution: *id,
                t,
                rank,
                activity: row.total_derivatives,
                activity_etd: row.amounts.etd(),
                activity_otc: row.amounts.otc(),
                cce: row.cce,
                pfe: row.pfe,
                tce: row.tce,
                detail: RecordDetail {
                    state: row.state.clone(),
                    total_assets: row.total_assets,
                    amounts: row.amounts,
                    tce_to_capital: row.tce_to_capital,
                },
            };
            for v in validate_record(&rec, opts.tolerance) {
                log.push(
                    LogKind::Violation,
                    Some(row.line),
                    format!("{}: {v}", merge.registry.name(*id)),
                );
            }
            presence[id.0].insert(t);
            records.insert((*id, t), rec);
        }
    }

    let panel = Panel {
        range,
        registry: merge.registry.clone(),
        records,
        presence,
    };
    Ok((panel, merge, log))
}

/// Total derivatives held by institutions outside the listed ranking, per quarter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MarketTotals {
    others: BTreeMap<Quarter, i64>,
}

impl MarketTotals {
    /// Reads a `quarter,others_total_derivatives` CSV.
    pub fn read<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let wrap = |e| Error::Csv {
            path: "<market totals>".into(),
            source: e,
        };
        let headers = rdr.headers().map_err(wrap)?.clone();
        let pos = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::Schema(format!("market totals: missing column {name:?}")))
        };
        let (qi, vi) = (pos("quarter")?, pos("others_total_derivatives")?);
        let mut others = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec.map_err(wrap)?;
            let line = rec.position().map_or(0, |p| p.line());
            let q: Quarter = rec.get(qi).unwrap_or("").parse()?;
            let raw = rec.get(vi).unwrap_or("").replace(',', "");
            let v: i64 = raw.trim().parse().map_err(|_| Error::Row {
                line,
                message: format!("bad amount {raw:?}"),
            })?;
            others.insert(q, v);
        }
        Ok(MarketTotals { others })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(f)
    }

    pub fn others(&self, q: Quarter) -> Option<i64> {
        self.others.get(&q).copied()
    }

    pub fn insert(&mut self, q: Quarter, others: i64) {
        self.others.insert(q, others);
    }
}
