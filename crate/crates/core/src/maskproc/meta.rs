use crate::error::{Error, Result};
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::path::Path;

/// Calendar day without a year, written `MM-DD`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonthDay {
    pub month: u32,
    pub day: u32,
}

impl MonthDay {
    pub fn new(month: u32, day: u32) -> Result<Self> {
        // 2000 is a leap year, so Feb 29 is accepted
        NaiveDate::from_ymd_opt(2000, month, day)
            .map(|_| Self { month, day })
            .ok_or_else(|| Error::InvalidParameter(format!("no such day {month:02}-{day:02}")))
    }

    pub fn of(date: NaiveDate) -> Self {
        Self {
            month: date.month(),
            day: date.day(),
        }
    }
}

impl std::str::FromStr for MonthDay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected MM-DD, got {s:?}"));
        let (m, d) = s.split_once('-').ok_or_else(bad)?;
        Self::new(m.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?)
    }
}

impl Serialize for MonthDay {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:02}-{:02}", self.month, self.day))
    }
}

impl<'de> Deserialize<'de> for MonthDay {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafOnWindow {
    pub start: MonthDay,
    pub end: MonthDay,
}

impl Default for LeafOnWindow {
    /// May 15 to Sep 15, inclusive.
    fn default() -> Self {
        Self {
            start: MonthDay { month: 5, day: 15 },
            end: MonthDay { month: 9, day: 15 },
        }
    }
}

impl LeafOnWindow {
    pub fn contains(&self, date: NaiveDate) -> bool {
        (self.start..=self.end).contains(&MonthDay::of(date))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileMeta {
    pub acquisition_dates: Vec<NaiveDate>,
    #[serde(default)]
    pub leaf_on_window: LeafOnWindow,
}

impl TileMeta {
    pub fn new(acquisition_dates: Vec<NaiveDate>) -> Self {
        Self {
            acquisition_dates,
            leaf_on_window: LeafOnWindow::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.leaf_on_window;
        if w.start >= w.end {
            return Err(Error::InvalidParameter(format!(
                "leaf-on window start {:?} must precede end {:?}",
                w.start, w.end
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let meta: Self = serde_json::from_str(text)?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// True iff the tile has exactly one acquisition date inside the window.
pub fn leaf_on(meta: &TileMeta) -> bool {
    match meta.acquisition_dates.as_slice() {
        [d] => meta.leaf_on_window.contains(*d),
        _ => false,
    }
}
