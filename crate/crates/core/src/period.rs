//! Half-open calendar windows.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// `[start, end)` on calendar dates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d < self.end
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &DateRange) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Default in-sample window, 2019-01-01 to 2021-01-01.
    pub fn in_sample() -> Self {
        Self::new(ymd(2019, 1, 1), ymd(2021, 1, 1))
    }

    /// Default forward window, 2021-01-01 to 2022-01-01.
    pub fn forward() -> Self {
        Self::new(ymd(2021, 1, 1), ymd(2022, 1, 1))
    }
}

impl fmt::Display for DateRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}
