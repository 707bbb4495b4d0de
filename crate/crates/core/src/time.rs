//! UTC calendar months.

use core::fmt;
use core::str::FromStr;

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Serialize};

/// UTC epoch seconds.
pub type Timestamp = i64;

/// A calendar month in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Month {
    year: i32,
    month: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonthError {
    #[error("month {0} out of range 1..=12")]
    OutOfRange(u32),
    #[error("timestamp {0} is outside the representable calendar")]
    Timestamp(i64),
    #[error("cannot parse month from {0:?}, expected YYYY-MM")]
    Parse(alloc::string::String),
}

impl Month {
    pub fn new(year: i32, month: u32) -> Result<Self, MonthError> {
        if !(1..=12).contains(&month) {
            return Err(MonthError::OutOfRange(month));
        }
        Ok(Self {
            year,
            month: month as u8,
        })
    }

    /// The UTC calendar month containing `ts`.
    pub fn from_timestamp(ts: Timestamp) -> Result<Self, MonthError> {
        let dt = DateTime::from_timestamp(ts, 0).ok_or(MonthError::Timestamp(ts))?;
        Ok(Self {
            year: dt.year(),
            month: dt.month() as u8,
        })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        u32::from(self.month)
    }

    fn ordinal(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    fn from_ordinal(ord: i64) -> Self {
        Self {
            year: ord.div_euclid(12) as i32,
            month: (ord.rem_euclid(12) + 1) as u8,
        }
    }

    pub fn next(self) -> Self {
        self.offset(1)
    }

    pub fn offset(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    /// Number of months in the inclusive range `self..=last` (0 when `last < self`).
    pub fn span_to(self, last: Month) -> usize {
        let n = last.ordinal() - self.ordinal() + 1;
        n.max(0) as usize
    }

    /// Iterate the inclusive range `self..=last`.
    pub fn range_inclusive(self, last: Month) -> impl Iterator<Item = Month> {
        let start = self.ordinal();
        (start..=last.ordinal()).map(Month::from_ordinal)
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for Month {
    type Err = MonthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || MonthError::Parse(s.into());
        let (y, m) = s.trim().split_once('-').ok_or_else(err)?;
        let year: i32 = y.parse().map_err(|_| err())?;
        let month: u32 = m.parse().map_err(|_| err())?;
        Month::new(year, month)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec::Vec;

    #[test]
    fn bucketing_uses_utc() {
        // 2021-03-31T23:59:59Z and 2021-04-01T00:00:00Z
        assert_eq!(
            Month::from_timestamp(1_617_235_199).unwrap(),
            Month::new(2021, 3).unwrap()
        );
        assert_eq!(
            Month::from_timestamp(1_617_235_200).unwrap(),
            Month::new(2021, 4).unwrap()
        );
    }

    #[test]
    fn offsets_cross_year_boundaries() {
        let dec = Month::new(2020, 12).unwrap();
        assert_eq!(dec.next(), Month::new(2021, 1).unwrap());
        assert_eq!(dec.offset(-12), Month::new(2019, 12).unwrap());
        assert_eq!(dec.span_to(Month::new(2021, 2).unwrap()), 3);
        let all: Vec<_> = dec.range_inclusive(Month::new(2021, 1).unwrap()).collect();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn display_round_trips() {
        let m = Month::new(2021, 3).unwrap();
        assert_eq!(m.to_string(), "2021-03");
        assert_eq!("2021-03".parse::<Month>().unwrap(), m);
        assert!("2021-13".parse::<Month>().is_err());
        assert!(Month::new(2021, 0).is_err());
    }
}
