//! Institution-name normalization.
//!
//! Alias files are tab-separated `pattern<TAB>canonical` lines. Lines starting
//! with `#` are comments. A line `@drop-suffix<TAB>SUFFIX` declares a legal-form
//! suffix removed before rule lookup; when a file declares none, the built-in
//! suffix list is used.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_SUFFIXES: &[&str] = &["NATIONAL ASSOCIATION", "NATIONAL ASSN", "N.A.", "N A", "NA"];

/// Alias table bundled with the crate.
pub const BUNDLED_ALIASES: &str = include_str!("../../data/aliases.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasRule {
    pub pattern: String,
    pub canonical: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasTable {
    rules: Vec<AliasRule>,
    suffix_drops: Vec<String>,
    lookup: BTreeMap<String, usize>,
}

impl Default for AliasTable {
    fn default() -> Self {
        AliasTable::new(Vec::new(), default_suffixes()).expect("empty table is valid")
    }
}

fn default_suffixes() -> Vec<String> {
    DEFAULT_SUFFIXES.iter().map(|s| s.to_string()).collect()
}

impl AliasTable {
    /// Builds and validates a table. Rule patterns are matched after whitespace,
    /// case and suffix normalization.
    pub fn new(rules: Vec<(String, String)>, suffix_drops: Vec<String>) -> Result<Self> {
        Self::build(
            rules.into_iter().enumerate().map(|(k, r)| (k + 1, r)).collect(),
            suffix_drops,
        )
    }

    fn build(rules: Vec<(usize, (String, String))>, suffix_drops: Vec<String>) -> Result<Self> {
        let mut suffix_drops: Vec<String> = suffix_drops.iter().map(|s| collapse(s)).collect();
        // longest first so "NATIONAL ASSN" wins over "NA"
        suffix_drops.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        suffix_drops.dedup();

        let mut table = AliasTable {
            rules: Vec::new(),
            suffix_drops,
            lookup: BTreeMap::new(),
        };
        for (line, (pattern, canonical)) in rules {
            let key = table.strip(&pattern);
            let canonical = collapse(&canonical);
            if key.is_empty() || canonical.is_empty() {
                return Err(Error::Alias {
                    line,
                    message: "empty pattern or canonical name".into(),
                });
            }
            if let Some(&prev) = table.lookup.get(&key) {
                if table.rules[prev].canonical != canonical {
                    return Err(Error::Alias {
                        line,
                        message: format!(
                            "{pattern:?} already maps to {:?}, cannot also map to {canonical:?}",
                            table.rules[prev].canonical
                        ),
                    });
                }
                continue;
            }
            table.lookup.insert(key.clone(), table.rules.len());
            table.rules.push(AliasRule {
                pattern: key,
                canonical,
            });
        }
        for (k, rule) in table.rules.iter().enumerate() {
            let fixed = table.normalize_unchecked(&rule.canonical);
            if fixed != rule.canonical {
                return Err(Error::Alias {
                    line: k + 1,
                    message: format!(
                        "canonical name {:?} is not a fixed point (normalizes to {fixed:?})",
                        rule.canonical
                    ),
                });
            }
        }
        Ok(table)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        let mut suffixes = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (a, b) = raw.split_once('\t').ok_or_else(|| Error::Alias {
                line,
                message: "expected two tab-separated columns".into(),
            })?;
            if b.contains('\t') {
                return Err(Error::Alias {
                    line,
                    message: "more than two columns".into(),
                });
            }
            if a.trim() == "@drop-suffix" {
                suffixes.push(b.to_string());
            } else {
                rules.push((line, (a.to_string(), b.to_string())));
            }
        }
        if suffixes.is_empty() {
            suffixes = default_suffixes();
        }
        Self::build(rules, suffixes)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_ALIASES).expect("bundled alias table is valid")
    }

    pub fn rules(&self) -> &[AliasRule] {
        &self.rules
    }

    pub fn suffix_drops(&self) -> &[String] {
        &self.suffix_drops
    }

    /// Whitespace/case/suffix normalization without rule lookup.
    pub fn strip(&self, name: &str) -> String {
        let mut s = collapse(name);
        loop {
            let before = s.len();
            s = s.trim_end_matches([',', ' ']).to_string();
            for suf in &self.suffix_drops {
                if let Some(head) = s.strip_suffix(suf.as_str()) {
                    if head.ends_with([' ', ',']) && !head.trim_end_matches([',', ' ']).is_empty() {
                        s = head.trim_end_matches([',', ' ']).to_string();
                        break;
                    }
                }
            }
            if s.len() == before {
                return s;
            }
        }
    }

    fn normalize_unchecked(&self, name: &str) -> String {
        let key = self.strip(name);
        match self.lookup.get(&key) {
            Some(&k) => self.rules[k].canonical.clone(),
            None => key,
        }
    }

    /// Maps a free-text institution name to its canonical form.
    pub fn normalize(&self, name: &str) -> Result<String> {
        if name.trim().is_empty() {
            return Err(Error::InvalidArgument("empty institution name".into()));
        }
        Ok(self.normalize_unchecked(name))
    }
}

/// Upper-cases and collapses internal whitespace.
fn collapse(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_uppercase()
}
