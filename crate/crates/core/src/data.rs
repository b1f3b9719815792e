//! Monthly datasets: CSV ingestion, transformations and date bookkeeping.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvarError};
use crate::linalg::Matrix;

/// A calendar month.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range");
        Self { year, month }
    }

    /// Accepts `YYYY-MM` or `YYYY-MM-DD`; the day is validated and dropped.
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.trim().split('-').collect();
        let bad = || format!("`{s}` is not an ISO month (YYYY-MM or YYYY-MM-DD)");
        if !(2..=3).contains(&parts.len()) || parts[0].len() != 4 || parts[1].len() != 2 {
            return Err(bad());
        }
        let year: i32 = parts[0].parse().map_err(|_| bad())?;
        let month: u32 = parts[1].parse().map_err(|_| bad())?;
        if !(1..=12).contains(&month) {
            return Err(bad());
        }
        if let Some(day) = parts.get(2) {
            let d: u32 = day.parse().map_err(|_| bad())?;
            if day.len() != 2 || !(1..=31).contains(&d) {
                return Err(bad());
            }
        }
        Ok(Self { year, month })
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn months_since(self, earlier: YearMonth) -> i64 {
        self.ordinal() - earlier.ordinal()
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            Self::new(self.year + 1, 1)
        } else {
            Self::new(self.year, self.month + 1)
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Maps calendar months onto innovation indices once `lags` presample rows are used up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleCalendar {
    first: YearMonth,
    len: usize,
    lags: usize,
}

impl SampleCalendar {
    pub fn new(first: YearMonth, len: usize, lags: usize) -> Self {
        Self { first, len, lags }
    }

    pub fn innovation_index(&self, date: YearMonth) -> Option<usize> {
        let offset = date.months_since(self.first);
        if offset < self.lags as i64 || offset >= self.len as i64 {
            return None;
        }
        Some(offset as usize - self.lags)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    None,
    Log,
    /// 100 × (log y_t − log y_{t−1}); drops the first observation of every series.
    GrowthRate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub dates: Vec<YearMonth>,
    /// T × n
    pub values: Matrix,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn calendar(&self, lags: usize) -> SampleCalendar {
        SampleCalendar::new(self.dates[0], self.len(), lags)
    }

    /// Keep the named columns in the given order.
    pub fn select(&self, names: &[String]) -> Result<Dataset> {
        let idx = names
            .iter()
            .map(|name| {
                self.names
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| SvarError::UnknownVariable(name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            names: names.to_vec(),
            dates: self.dates.clone(),
            values: Matrix::from_fn(self.len(), idx.len(), |t, j| self.values[(t, idx[j])]),
        })
    }
}

/// Read `date,<var1>,...` and apply per-variable transforms.
pub fn load_dataset(path: &Path, transforms: &BTreeMap<String, Transform>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| SvarError::io(path, e))?;
    let raw = parse_dataset(&text)?;
    apply_transforms(raw, transforms)
}

/// Parse CSV text without transformations.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| SvarError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.len() < 2 || header.get(0) != Some("date") {
        return Err(SvarError::Parse {
            line: 1,
            message: "header must be `date,<var1>,...`".into(),
        });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = names.len();
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| SvarError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != n + 1 {
            return Err(SvarError::Parse {
                line,
                message: format!("expected {} fields, found {}", n + 1, record.len()),
            });
        }
        let date = YearMonth::parse(&record[0]).map_err(|message| SvarError::Parse { line, message })?;
        if let Some(prev) = dates.last() {
            if date.months_since(*prev) != 1 {
                return Err(SvarError::GapInDates { line });
            }
        }
        dates.push(date);
        for field in record.iter().skip(1) {
            let v: f64 = field.parse().map_err(|_| SvarError::Parse {
                line,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(SvarError::Parse {
                    line,
                    message: "missing or non-finite value".into(),
                });
            }
            values.push(v);
        }
    }
    if dates.is_empty() {
        return Err(SvarError::Parse {
            line: 2,
            message: "no observations".into(),
        });
    }
    Ok(Dataset {
        names,
        values: Matrix::from_row_slice(dates.len(), n, &values),
        dates,
    })
}

/// Apply transforms; variables not listed are left as-is.
pub fn apply_transforms(mut data: Dataset, transforms: &BTreeMap<String, Transform>) -> Result<Dataset> {
    for name in transforms.keys() {
        if !data.names.contains(name) {
            return Err(SvarError::UnknownVariable(name.clone()));
        }
    }
    let mut any_growth = false;
    for (j, name) in data.names.iter().enumerate() {
        let tf = transforms.get(name).copied().unwrap_or(Transform::None);
        if tf == Transform::None {
            continue;
        }
        any_growth |= tf == Transform::GrowthRate;
        for t in 0..data.dates.len() {
            let v = data.values[(t, j)];
            if v <= 0.0 {
                return Err(SvarError::NonPositiveForLog {
                    variable: name.clone(),
                    line: t + 2,
                });
            }
            data.values[(t, j)] = v.ln();
        }
    }
    if !any_growth {
        return Ok(data);
    }
    let t_total = data.dates.len();
    if t_total < 2 {
        return Err(SvarError::InsufficientData("growth rates need two observations".into()));
    }
    let n = data.n();
    let mut out = Matrix::zeros(t_total - 1, n);
    for (j, name) in data.names.iter().enumerate() {
        let growth = transforms.get(name) == Some(&Transform::GrowthRate);
        for t in 1..t_total {
            out[(t - 1, j)] = if growth {
                100.0 * (data.values[(t, j)] - data.values[(t - 1, j)])
            } else {
                data.values[(t, j)]
            };
        }
    }
    Ok(Dataset {
        names: data.names,
        dates: data.dates[1..].to_vec(),
        values: out,
    })
}

/// CSV text in the same layout `parse_dataset` reads. Values use the shortest
/// representation that parses back to the identical f64.
pub fn format_dataset(data: &Dataset) -> String {
    let mut out = String::from("date");
    for name in &data.names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (t, date) in data.dates.iter().enumerate() {
        out.push_str(&date.to_string());
        for j in 0..data.n() {
            out.push(',');
            out.push_str(&data.values[(t, j)].to_string());
        }
        out.push('\n');
    }
    out
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, format_dataset(data)).map_err(|e| SvarError::io(path, e))
}
