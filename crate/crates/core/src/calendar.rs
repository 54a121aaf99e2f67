//! Month-resolution calendar.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A calendar month, stored as `year * 12 + (month - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Month(i64);

impl Month {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::Data(format!("month {month} out of range 1..=12")));
        }
        Ok(Month(i64::from(year) * 12 + i64::from(month) - 1))
    }

    pub const fn from_index(index: i64) -> Self {
        Month(index)
    }

    pub const fn index(self) -> i64 {
        self.0
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(12) as i32
    }

    /// 1-based month of year.
    pub fn month(self) -> u32 {
        self.0.rem_euclid(12) as u32 + 1
    }

    pub fn add_months(self, n: i64) -> Self {
        Month(self.0 + n)
    }

    /// Signed number of months from `other` to `self`.
    pub fn months_since(self, other: Month) -> i64 {
        self.0 - other.0
    }
}

impl fmt::Display for Month {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for Month {
    type Err = Error;

    /// Accepts `YYYY-MM` or `YYYY-MM-DD`; the day is validated then discarded.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Data(format!("unparsable date {s:?}"));
        let parts: Vec<&str> = s.split('-').collect();
        match parts.as_slice() {
            [y, m] => {
                let year: i32 = y.parse().map_err(|_| bad())?;
                let month: u32 = m.parse().map_err(|_| bad())?;
                Month::new(year, month).map_err(|_| bad())
            }
            [_, _, _] => {
                use chrono::Datelike;
                let date = chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| bad())?;
                Month::new(date.year(), date.month())
            }
            _ => Err(bad()),
        }
    }
}
