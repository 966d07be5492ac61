//! Ingestion of quarterly report tables into a [`Panel`].

pub mod alias;
pub mod log;
pub mod panel;
pub mod raw;

pub use alias::AliasTable;
pub use log::{IngestLog, LogEntry, LogKind};
pub use panel::{
    build_panel, merge_identities, registry_json, validate_record, InstitutionId, MarketTotals,
    MergeConflict, MergeReport, Panel, PanelOptions, QuarterRecord, RecordDetail, Registry,
    Source, Violation, ADDITIVE_TOLERANCE, MAX_RANKED,
};
pub use raw::{read_rows, read_rows_path, DerivativeAmounts, RawRow, COLUMNS};

use std::path::Path;

use crate::error::Result;

/// Reads a CSV file and assembles the panel in one step.
pub fn load_panel(
    path: &Path,
    aliases: &AliasTable,
    opts: &PanelOptions,
    tolerant: bool,
) -> Result<(Panel, MergeReport, IngestLog)> {
    let (rows, mut log) = read_rows_path(path, tolerant)?;
    let (panel, merge, panel_log) = build_panel(&rows, aliases, opts)?;
    log.extend(panel_log);
    Ok((panel, merge, log))
}
