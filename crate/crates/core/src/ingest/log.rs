use std::fmt;

use serde::Serialize;

use crate::quarter::Quarter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogKind {
    /// A structurally broken row was repaired and kept.
    Repaired,
    /// A structurally broken row was dropped.
    Skipped,
    /// An exact duplicate row was dropped.
    DuplicateDropped,
    /// Ranks within a quarter were recomputed from activities.
    Reranked,
    /// A record failed an additive identity check.
    Violation,
    /// Same-name sources co-appeared and were kept apart.
    MergeConflict,
}

impl LogKind {
    fn label(self) -> &'static str {
        match self {
            LogKind::Repaired => "repaired",
            LogKind::Skipped => "skipped",
            LogKind::DuplicateDropped => "duplicate-dropped",
            LogKind::Reranked => "reranked",
            LogKind::Violation => "violation",
            LogKind::MergeConflict => "merge-conflict",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogEntry {
    pub kind: LogKind,
    pub line: Option<u64>,
    pub quarter: Option<Quarter>,
    pub message: String,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.label())?;
        match self.line {
            Some(l) => write!(f, "\tline {l}")?,
            None => write!(f, "\t-")?,
        }
        match self.quarter {
            Some(q) => write!(f, "\t{q}")?,
            None => write!(f, "\t-")?,
        }
        write!(f, "\t{}", self.message)
    }
}

/// Recovery and merge log, rendered one entry per line.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestLog {
    entries: Vec<LogEntry>,
}

impl IngestLog {
    pub fn push(&mut self, kind: LogKind, line: Option<u64>, message: impl Into<String>) {
        self.entries.push(LogEntry {
            kind,
            line,
            quarter: None,
            message: message.into(),
        });
    }

    pub fn push_quarter(&mut self, kind: LogKind, quarter: Quarter, message: impl Into<String>) {
        self.entries.push(LogEntry {
            kind,
            line: None,
            quarter: Some(quarter),
            message: message.into(),
        });
    }

    pub fn extend(&mut self, other: IngestLog) {
        self.entries.extend(other.entries);
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn count(&self, kind: LogKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|e| format!("{e}\n")).collect()
    }
}
