//! CSV reader for the 17-column quarterly report layout.

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use super::log::{IngestLog, LogKind};
use crate::error::{Error, Result};
use crate::quarter::Quarter;

/// Column names of the quarterly report layout, in canonical order.
pub const COLUMNS: [&str; 17] = [
    "quarter",
    "name",
    "rank",
    "state",
    "total_assets",
    "total_derivatives",
    "futures",
    "options_exchange",
    "forwards",
    "swaps",
    "options_otc",
    "credit_derivatives",
    "spot_fx",
    "cce",
    "pfe",
    "tce",
    "tce_to_capital",
];

#[derive(Clone, Copy)]
enum Col {
    Quarter,
    Name,
    Rank,
    State,
    TotalAssets,
    TotalDerivatives,
    Futures,
    OptionsExchange,
    Forwards,
    Swaps,
    OptionsOtc,
    CreditDerivatives,
    SpotFx,
    Cce,
    Pfe,
    Tce,
    TceToCapital,
}

const COLS: [Col; 17] = [
    Col::Quarter,
    Col::Name,
    Col::Rank,
    Col::State,
    Col::TotalAssets,
    Col::TotalDerivatives,
    Col::Futures,
    Col::OptionsExchange,
    Col::Forwards,
    Col::Swaps,
    Col::OptionsOtc,
    Col::CreditDerivatives,
    Col::SpotFx,
    Col::Cce,
    Col::Pfe,
    Col::Tce,
    Col::TceToCapital,
];

/// Notional amounts by derivative type, in millions of USD.
///
/// Exchange-traded: futures and exchange options. Over-the-counter: forwards,
/// swaps, OTC options and credit derivatives. Spot FX is reported alongside
/// but is not part of total derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DerivativeAmounts {
    pub futures: i64,
    pub options_exchange: i64,
    pub forwards: i64,
    pub swaps: i64,
    pub options_otc: i64,
    pub credit_derivatives: i64,
    pub spot_fx: Option<i64>,
}

impl DerivativeAmounts {
    pub fn etd(&self) -> i64 {
        self.futures + self.options_exchange
    }

    pub fn otc(&self) -> i64 {
        self.forwards + self.swaps + self.options_otc + self.credit_derivatives
    }
}

/// One parsed input row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawRow {
    /// 1-based line in the source file.
    pub line: u64,
    pub quarter: Quarter,
    pub name: String,
    pub rank_reported: Option<u32>,
    pub state: Option<String>,
    pub total_assets: Option<i64>,
    pub total_derivatives: i64,
    pub amounts: DerivativeAmounts,
    pub cce: Option<i64>,
    pub pfe: Option<i64>,
    pub tce: Option<i64>,
    pub tce_to_capital: Option<f64>,
}

impl RawRow {
    /// Equality ignoring the source line.
    pub fn same_content(&self, other: &RawRow) -> bool {
        RawRow {
            line: 0,
            ..self.clone()
        } == RawRow {
            line: 0,
            ..other.clone()
        }
    }
}

fn column_key(h: &str) -> String {
    h.trim()
        .to_ascii_lowercase()
        .chars()
        .map(|c| if c == ' ' || c == '-' { '_' } else { c })
        .collect()
}

/// Parses an amount in integer millions; accepts thousands separators and a
/// zero fractional part.
fn parse_millions(cell: &str) -> std::result::Result<Option<i64>, String> {
    let s = cell.trim();
    if s.is_empty() {
        return Ok(None);
    }
    let s: String = s.chars().filter(|&c| c != ',' && c != '_').collect();
    let int_part = match s.split_once('.') {
        Some((i, frac)) if frac.chars().all(|c| c == '0') => i.to_string(),
        Some(_) => return Err(format!("{cell:?} is not a whole number of millions")),
        None => s,
    };
    let v: i64 = int_part
        .parse()
        .map_err(|_| format!("{cell:?} is not a number"))?;
    if v < 0 {
        return Err(format!("negative amount {v}"));
    }
    Ok(Some(v))
}

fn required(cell: &str, col: &str) -> std::result::Result<i64, String> {
    parse_millions(cell)?.ok_or_else(|| format!("missing required value in column {col}"))
}

fn parse_row(cells: &[&str], line: u64) -> std::result::Result<RawRow, String> {
    let mut row = RawRow {
        line,
        quarter: Quarter::new(1970, 1).expect("valid"),
        name: String::new(),
        rank_reported: None,
        state: None,
        total_assets: None,
        total_derivatives: 0,
        amounts: DerivativeAmounts::default(),
        cce: None,
        pfe: None,
        tce: None,
        tce_to_capital: None,
    };
    for ((col, cell), label) in COLS.iter().zip(cells).zip(COLUMNS) {
        let cell = cell.trim();
        match col {
            Col::Quarter => row.quarter = cell.parse().map_err(|e: Error| e.to_string())?,
            Col::Name => {
                if cell.is_empty() {
                    return Err("empty institution name".into());
                }
                row.name = cell.to_string();
            }
            Col::Rank => {
                row.rank_reported = if cell.is_empty() {
                    None
                } else {
                    let r: u32 = cell.parse().map_err(|_| format!("bad rank {cell:?}"))?;
                    if r == 0 {
                        return Err("reported rank must be positive".into());
                    }
                    Some(r)
                }
            }
            Col::State => row.state = (!cell.is_empty()).then(|| cell.to_ascii_uppercase()),
            Col::TotalAssets => row.total_assets = parse_millions(cell)?,
            Col::TotalDerivatives => row.total_derivatives = required(cell, label)?,
            Col::Futures => row.amounts.futures = required(cell, label)?,
            Col::OptionsExchange => row.amounts.options_exchange = required(cell, label)?,
            Col::Forwards => row.amounts.forwards = required(cell, label)?,
            Col::Swaps => row.amounts.swaps = required(cell, label)?,
            Col::OptionsOtc => row.amounts.options_otc = required(cell, label)?,
            Col::CreditDerivatives => row.amounts.credit_derivatives = required(cell, label)?,
            Col::SpotFx => row.amounts.spot_fx = parse_millions(cell)?,
            Col::Cce => row.cce = parse_millions(cell)?,
            Col::Pfe => row.pfe = parse_millions(cell)?,
            Col::Tce => row.tce = parse_millions(cell)?,
            Col::TceToCapital => {
                row.tce_to_capital = if cell.is_empty() {
                    None
                } else {
                    let v: f64 = cell
                        .trim_end_matches('%')
                        .parse()
                        .map_err(|_| format!("bad percentage {cell:?}"))?;
                    if !v.is_finite() {
                        return Err(format!("bad percentage {cell:?}"));
                    }
                    Some(v)
                }
            }
        }
    }
    Ok(row)
}

/// Reads raw rows. In tolerant mode, rows with trailing surplus empty cells
/// are repaired and other structurally broken rows are skipped; both are
/// logged. Otherwise the first broken row is an error.
pub fn read_rows<R: Read>(reader: R, tolerant: bool) -> Result<(Vec<RawRow>, IngestLog)> {
    read_rows_named(reader, tolerant, Path::new("<input>"))
}

pub fn read_rows_path(path: &Path, tolerant: bool) -> Result<(Vec<RawRow>, IngestLog)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_rows_named(file, tolerant, path)
}

fn read_rows_named<R: Read>(
    reader: R,
    tolerant: bool,
    path: &Path,
) -> Result<(Vec<RawRow>, IngestLog)> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let keys: Vec<String> = header.iter().map(column_key).collect();
    let mut position = Vec::with_capacity(COLUMNS.len());
    for want in COLUMNS {
        let found: Vec<usize> = keys
            .iter()
            .enumerate()
            .filter(|(_, k)| k.as_str() == want)
            .map(|(i, _)| i)
            .collect();
        match found.as_slice() {
            [i] => position.push(*i),
            [] => return Err(Error::Schema(format!("missing column {want:?}"))),
            _ => return Err(Error::Schema(format!("duplicate column {want:?}"))),
        }
    }
    if let Some(extra) = keys.iter().find(|k| !COLUMNS.contains(&k.as_str())) {
        return Err(Error::Schema(format!("unknown column {extra:?}")));
    }
    let width = keys.len();

    let mut rows = Vec::new();
    let mut log = IngestLog::default();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let mut cells: Vec<&str> = record.iter().collect();
        if cells.len() > width && tolerant && cells[width..].iter().all(|c| c.trim().is_empty()) {
            let surplus = cells.len() - width;
            cells.truncate(width);
            log.push(
                LogKind::Repaired,
                Some(line),
                format!("removed {surplus} surplus empty cell(s)"),
            );
        }
        let parsed = if cells.len() != width {
            Err(format!("expected {width} fields, found {}", cells.len()))
        } else {
            let ordered: Vec<&str> = position.iter().map(|&i| cells[i]).collect();
            parse_row(&ordered, line)
        };
        match parsed {
            Ok(row) => rows.push(row),
            Err(message) if tolerant => log.push(LogKind::Skipped, Some(line), message),
            Err(message) => return Err(Error::Row { line, message }),
        }
    }
    Ok((rows, log))
}
