//! Calendar quarters and contiguous quarter ranges.
//!
//! Quarter indices `t` are 1-based within a [`QuarterRange`], matching the
//! `1..=T` convention used throughout the analysis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    year: i32,
    q: u8,
}

impl Quarter {
    pub fn new(year: i32, q: u8) -> Result<Self> {
        if !(1..=4).contains(&q) {
            return Err(Error::QuarterLabel(format!("{year}-Q{q}")));
        }
        Ok(Quarter { year, q })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn q(self) -> u8 {
        self.q
    }

    fn ordinal(self) -> i64 {
        i64::from(self.year) * 4 + i64::from(self.q - 1)
    }

    fn from_ordinal(o: i64) -> Self {
        Quarter {
            year: o.div_euclid(4) as i32,
            q: (o.rem_euclid(4) + 1) as u8,
        }
    }

    pub fn offset(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }

    /// Number of quarters from `self` to `other` (negative if `other` is earlier).
    pub fn quarters_until(self, other: Quarter) -> i64 {
        other.ordinal() - self.ordinal()
    }

    /// Compact label used in file names, e.g. `2008Q4`.
    pub fn compact(self) -> String {
        format!("{}Q{}", self.year, self.q)
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-Q{}", self.year, self.q)
    }
}

impl FromStr for Quarter {
    type Err = Error;

    /// Accepts `YYYY-Qn`, plus the `YYYYQn` and `YYYY/Qn` spellings.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::QuarterLabel(s.to_string());
        let t = s.trim().to_ascii_uppercase();
        let (year, q) = t.split_once('Q').ok_or_else(bad)?;
        let year = year.trim_end_matches(['-', '/', ' ']);
        if year.len() != 4 || q.len() != 1 {
            return Err(bad());
        }
        let year: i32 = year.parse().map_err(|_| bad())?;
        let q: u8 = q.parse().map_err(|_| bad())?;
        Quarter::new(year, q).map_err(|_| bad())
    }
}

impl Serialize for Quarter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quarter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive, non-empty range of consecutive quarters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuarterRange {
    pub first: Quarter,
    pub last: Quarter,
}

impl QuarterRange {
    pub fn new(first: Quarter, last: Quarter) -> Result<Self> {
        if last < first {
            return Err(Error::InvalidArgument(format!(
                "empty quarter range {first}..{last}"
            )));
        }
        Ok(QuarterRange { first, last })
    }

    /// Number of quarters `T`.
    pub fn len(&self) -> usize {
        (self.first.quarters_until(self.last) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, q: Quarter) -> bool {
        self.first <= q && q <= self.last
    }

    pub fn contains_range(&self, other: &QuarterRange) -> bool {
        self.contains(other.first) && self.contains(other.last)
    }

    /// 1-based index of `q` within the range.
    pub fn index_of(&self, q: Quarter) -> Option<usize> {
        self.contains(q)
            .then(|| (self.first.quarters_until(q) + 1) as usize)
    }

    /// Quarter at 1-based index `t`.
    pub fn quarter_at(&self, t: usize) -> Option<Quarter> {
        (1..=self.len())
            .contains(&t)
            .then(|| self.first.offset(t as i64 - 1))
    }

    pub fn iter(&self) -> impl Iterator<Item = Quarter> + '_ {
        (0..self.len() as i64).map(move |k| self.first.offset(k))
    }

    /// 1-based index span of `sub` inside `self`.
    pub fn index_span(&self, sub: &QuarterRange) -> Result<std::ops::RangeInclusive<usize>> {
        match (self.index_of(sub.first), self.index_of(sub.last)) {
            (Some(a), Some(b)) => Ok(a..=b),
            _ => Err(Error::QuarterOutOfRange {
                quarter: sub.to_string(),
                range: self.to_string(),
            }),
        }
    }
}

impl Serialize for QuarterRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuarterRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for QuarterRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

impl FromStr for QuarterRange {
    type Err = Error;

    /// `YYYY-Qn..YYYY-Qn` or a single quarter.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once("..") {
            Some((a, b)) => QuarterRange::new(a.parse()?, b.parse()?),
            None => {
                let q: Quarter = s.parse()?;
                QuarterRange::new(q, q)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spellings() {
        let q: Quarter = "2008-Q4".parse().unwrap();
        assert_eq!(q, Quarter::new(2008, 4).unwrap());
        assert_eq!("2008Q4".parse::<Quarter>().unwrap(), q);
        assert_eq!("2008/Q4".parse::<Quarter>().unwrap(), q);
        assert!("2008-Q5".parse::<Quarter>().is_err());
        assert!("08-Q1".parse::<Quarter>().is_err());
        assert!("".parse::<Quarter>().is_err());
    }

    #[test]
    fn occ_range_has_57_quarters() {
        let r: QuarterRange = "1998-Q4..2012-Q4".parse().unwrap();
        assert_eq!(r.len(), 57);
        assert_eq!(r.index_of("2008-Q4".parse().unwrap()), Some(41));
        assert_eq!(r.quarter_at(57).unwrap().to_string(), "2012-Q4");
        assert_eq!(r.iter().count(), 57);
    }

    #[test]
    fn offset_crosses_years() {
        let q = Quarter::new(1999, 4).unwrap();
        assert_eq!(q.offset(1).to_string(), "2000-Q1");
        assert_eq!(q.offset(-4).to_string(), "1998-Q4");
    }
}
