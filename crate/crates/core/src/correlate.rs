//! Pearson correlations between institution series.
//!
//! The default is the pairwise-available coefficient: each pair uses only the
//! quarters where both series have a value. Scaling multiplies a coefficient
//! by the binary co-appearance weight `w_ij`, damping pairs that were seldom
//! listed together.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::ingest::{InstitutionId, Panel};
use crate::matrix::SquareMatrix;
use crate::network::{aggregate_links, period_subnetwork, AggregatedGraph, LinkMode, TemporalNetwork};
use crate::num::{millions, Real};
use crate::quarter::{Quarter, QuarterRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesField {
    ActivityTotal,
    ActivityOtc,
    Cce,
    Tce,
}

impl SeriesField {
    pub const ALL: [SeriesField; 4] = [
        SeriesField::ActivityTotal,
        SeriesField::ActivityOtc,
        SeriesField::Cce,
        SeriesField::Tce,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SeriesField::ActivityTotal => "activity_total",
            SeriesField::ActivityOtc => "activity_otc",
            SeriesField::Cce => "cce",
            SeriesField::Tce => "tce",
        }
    }

    pub fn is_exposure(self) -> bool {
        matches!(self, SeriesField::Cce | SeriesField::Tce)
    }
}

impl fmt::Display for SeriesField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SeriesField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeriesField::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown field {s:?} (expected activity_total, activity_otc, cce or tce)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Only quarters where both series are available.
    Pairwise,
    /// Diagnostic: missing values read as zero over the whole period.
    ZeroFilled,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Pairwise => "pairwise",
            Method::ZeroFilled => "zero_filled",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pairwise" => Ok(Method::Pairwise),
            "zero_filled" => Ok(Method::ZeroFilled),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?} (expected pairwise or zero_filled)"))),
        }
    }
}

/// Values of `field` for quarters `span` (1-based, inclusive); `None` where
/// the institution is unlisted or the cell is null.
pub fn field_series<F: Real>(
    panel: &Panel,
    id: InstitutionId,
    field: SeriesField,
    span: std::ops::RangeInclusive<usize>,
) -> Vec<Option<F>> {
    span.map(|t| {
        panel.record(id, t).and_then(|r| match field {
            SeriesField::ActivityTotal => Some(r.activity),
            SeriesField::ActivityOtc => Some(r.activity_otc),
            SeriesField::Cce => r.cce,
            SeriesField::Tce => r.tce,
        })
        .map(millions)
    })
    .collect()
}

/// Product-moment coefficient with `1/(n-1)` sample standard deviations.
/// `None` for fewer than two points or a constant series.
pub fn pearson_full<F: Real>(x: &[F], y: &[F]) -> Option<F> {
    assert_eq!(x.len(), y.len(), "series lengths differ");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = F::from_count(n);
    let mx = x.iter().copied().sum::<F>() / nf;
    let my = y.iter().copied().sum::<F>() / nf;
    let dof = F::from_count(n - 1);
    let sx = (x.iter().map(|&v| (v - mx) * (v - mx)).sum::<F>() / dof).sqrt();
    let sy = (y.iter().map(|&v| (v - my) * (v - my)).sum::<F>() / dof).sqrt();
    if sx == F::zero() || sy == F::zero() {
        return None;
    }
    let cross = x.iter().zip(y).map(|(&a, &b)| (a - mx) / sx * ((b - my) / sy)).sum::<F>() / dof;
    Some(cross.max(-F::one()).min(F::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCorrelation<F> {
    pub value: Option<F>,
    pub overlap: usize,
}

/// Coefficient over the quarters where both series are available.
pub fn pearson_pairwise<F: Real>(x: &[Option<F>], y: &[Option<F>]) -> PairCorrelation<F> {
    assert_eq!(x.len(), y.len(), "series lengths differ");
    let (xs, ys): (Vec<F>, Vec<F>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    PairCorrelation {
        value: pearson_full(&xs, &ys),
        overlap: xs.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell<F> {
    pub value: Option<F>,
    pub overlap: usize,
    /// Binary co-appearance weight, set once scaled.
    pub weight: Option<F>,
    pub scaled: Option<F>,
}

impl<F: Real> Cell<F> {
    pub fn defined(&self) -> bool {
        self.value.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<F> {
    pub field: SeriesField,
    pub period: QuarterRange,
    pub method: Method,
    /// Axis order as registry ids.
    pub order: Vec<InstitutionId>,
    pub names: Vec<String>,
    pub cells: SquareMatrix<Cell<F>>,
}

impl<F: Real> CorrelationMatrix<F> {
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn is_scaled(&self) -> bool {
        self.dim() > 0 && self.cells.get(0, 0).weight.is_some()
    }

    /// The scaled value when scaled, else the raw coefficient.
    pub fn display(&self, a: usize, b: usize) -> Option<F> {
        let c = self.cells.get(a, b);
        if c.weight.is_some() {
            c.scaled
        } else {
            c.value
        }
    }

    /// Displayed values re-indexed by registry id, for `n` registry entries.
    pub fn registry_matrix(&self, n: usize) -> SquareMatrix<Option<f64>> {
        let mut m = SquareMatrix::filled(n, None);
        for (a, ia) in self.order.iter().enumerate() {
            for (b, ib) in self.order.iter().enumerate() {
                m.set(ia.index(), ib.index(), self.display(a, b).map(|v| v.to_f64_lossy()));
            }
        }
        m
    }

    /// Names across the header and down the first column; undefined cells empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["institution".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for a in 0..self.dim() {
            let mut row = vec![self.names[a].clone()];
            row.extend((0..self.dim()).map(|b| self.display(a, b).map_or(String::new(), |v| sig9(v.to_f64_lossy()))));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn sidecar(&self) -> Sidecar {
        let grid = |f: &dyn Fn(&Cell<F>) -> Option<f64>| -> Vec<Vec<Option<f64>>> {
            (0..self.dim())
                .map(|a| (0..self.dim()).map(|b| f(&self.cells.get(a, b))).collect())
                .collect()
        };
        Sidecar {
            field: self.field,
            period: self.period.to_string(),
            method: self.method,
            scaled: self.is_scaled(),
            institutions: self.names.clone(),
            value: grid(&|c| c.value.map(|v| v.to_f64_lossy())),
            weight: self.is_scaled().then(|| grid(&|c| c.weight.map(|v| v.to_f64_lossy()))),
            scaled_value: self.is_scaled().then(|| grid(&|c| c.scaled.map(|v| v.to_f64_lossy()))),
            overlap: (0..self.dim())
                .map(|a| (0..self.dim()).map(|b| self.cells.get(a, b).overlap).collect())
                .collect(),
            defined: (0..self.dim())
                .map(|a| (0..self.dim()).map(|b| self.cells.get(a, b).defined()).collect())
                .collect(),
        }
    }
}

/// JSON companion of the matrix CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub field: SeriesField,
    pub period: String,
    pub method: Method,
    pub scaled: bool,
    pub institutions: Vec<String>,
    pub value: Vec<Vec<Option<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<Vec<Vec<Option<f64>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaled_value: Option<Vec<Vec<Option<f64>>>>,
    pub overlap: Vec<Vec<usize>>,
    pub defined: Vec<Vec<bool>>,
}

/// Multiplies every coefficient by `w_ij` of a binary-mode aggregation indexed
/// by registry id. The diagonal uses `w_ii = 1`.
pub fn scale_by_weight<F: Real>(m: &CorrelationMatrix<F>, w: &AggregatedGraph<F>) -> Result<CorrelationMatrix<F>> {
    if w.mode != LinkMode::Binary {
        return Err(Error::WeightModeMismatch);
    }
    if let Some(bad) = m.order.iter().find(|id| id.index() >= w.nodes()) {
        return Err(Error::MismatchedSets(format!(
            "institution {bad} outside a weight matrix of {} nodes",
            w.nodes()
        )));
    }
    let mut out = m.clone();
    for (a, ia) in m.order.iter().enumerate() {
        for (b, ib) in m.order.iter().enumerate() {
            let weight = if a == b { F::one() } else { w.weights.get(ia.index(), ib.index()) };
            let mut c = m.cells.get(a, b);
            c.weight = Some(weight);
            c.scaled = c.value.map(|v| v * weight);
            out.cells.set(a, b, c);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRequest {
    pub field: SeriesField,
    /// Whole panel range when `None`.
    pub period: Option<QuarterRange>,
    pub method: Method,
    pub scaled: bool,
    /// Axis order; normally the topological ranking, possibly filtered.
    pub order: Vec<InstitutionId>,
}

pub fn correlation_matrix<F: Real>(panel: &Panel, req: &CorrelationRequest) -> Result<CorrelationMatrix<F>> {
    let period = req.period.unwrap_or(panel.range());
    let span = panel.range().index_span(&period)?;
    if let Some(bad) = req.order.iter().find(|id| id.index() >= panel.institutions()) {
        return Err(Error::InvalidArgument(format!("institution {bad} not in the panel")));
    }
    let series: Vec<Vec<Option<F>>> = req
        .order
        .iter()
        .map(|&id| {
            let s = field_series(panel, id, req.field, span.clone());
            match req.method {
                Method::Pairwise => s,
                Method::ZeroFilled => s.into_iter().map(|v| Some(v.unwrap_or(F::zero()))).collect(),
            }
        })
        .collect();
    let n = series.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let results: Vec<PairCorrelation<F>> = pairs
        .par_iter()
        .map(|&(a, b)| pearson_pairwise(&series[a], &series[b]))
        .collect();
    let empty = Cell {
        value: None,
        overlap: 0,
        weight: None,
        scaled: None,
    };
    let mut cells = SquareMatrix::filled(n, empty);
    for (&(a, b), r) in pairs.iter().zip(results) {
        cells.set_sym(
            a,
            b,
            Cell {
                value: r.value,
                overlap: r.overlap,
                ..empty
            },
        );
    }
    let raw = CorrelationMatrix {
        field: req.field,
        period,
        method: req.method,
        order: req.order.clone(),
        names: req.order.iter().map(|&id| panel.name(id).to_string()).collect(),
        cells,
    };
    if !req.scaled {
        return Ok(raw);
    }
    let full = TemporalNetwork::<F>::from_panel(panel, LinkMode::Binary);
    let w = aggregate_links(&period_subnetwork(&full, &period)?);
    scale_by_weight(&raw, &w)
}

/// Splits `range` into the quarters before `boundary` and the rest, which
/// starts with `boundary`.
pub fn split_at(range: &QuarterRange, boundary: Quarter) -> Result<(QuarterRange, QuarterRange)> {
    if !range.contains(boundary) || boundary == range.first || boundary == range.last {
        return Err(Error::InvalidArgument(format!(
            "split boundary {boundary} must lie strictly inside {range}"
        )));
    }
    Ok((
        QuarterRange::new(range.first, boundary.offset(-1))?,
        QuarterRange::new(boundary, range.last)?,
    ))
}
