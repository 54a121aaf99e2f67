//! Monthly two-column CSV files in the FRED download layout.
//!
//! Internally every rate is a fraction per year; percent only exists at this
//! boundary.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::calendar::Month;
use crate::error::{Error, Result};
use crate::model::PredictionResult;
use crate::scalar::Real;
use crate::series::{TimeSeries, Units};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsvUnits {
    /// File values are percent; divided by 100 on read, multiplied on write.
    #[default]
    Percent,
    /// File values are used as-is.
    Fraction,
}

impl CsvUnits {
    fn encode<T: Real>(self, x: T) -> T {
        match self {
            CsvUnits::Percent => x * T::lit(100.0),
            CsvUnits::Fraction => x,
        }
    }

    fn decode(self, x: f64) -> f64 {
        match self {
            CsvUnits::Percent => x / 100.0,
            CsvUnits::Fraction => x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub date_column: String,
    pub value_column: String,
    pub units: CsvUnits,
    /// Cell contents read as MISSING.
    pub missing_tokens: Vec<String>,
    /// Longest run of absent months that is filled by interpolation.
    pub max_gap: usize,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            date_column: "DATE".into(),
            value_column: "VALUE".into(),
            units: CsvUnits::Percent,
            missing_tokens: vec![String::new(), ".".into()],
            max_gap: 2,
        }
    }
}

impl CsvSchema {
    pub fn with_units(units: CsvUnits) -> Self {
        CsvSchema {
            units,
            ..Default::default()
        }
    }
}

/// A parsed series plus the months that were absent from the file and filled
/// by linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSeries<T> {
    pub series: TimeSeries<T>,
    pub interpolated: Vec<Month>,
}

pub fn read_series_csv<T: Real>(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<CsvSeries<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    parse_series_csv(file, schema).map_err(|e| match e {
        Error::Row { row, msg } => Error::Data(format!("{}: row {row}: {msg}", path.display())),
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
}

/// Parses monthly `(date, value)` rows.
///
/// Columns are located by name; a file with exactly two columns and
/// different headers (FRED's `observation_date,SERIES_ID`) is read
/// positionally. Dates are `YYYY-MM` or `YYYY-MM-DD`, the day is ignored.
pub fn parse_series_csv<T: Real, R: Read>(reader: R, schema: &CsvSchema) -> Result<CsvSeries<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (date_col, value_col) = match (
        find_column(&headers, &schema.date_column),
        find_column(&headers, &schema.value_column),
    ) {
        (Some(d), Some(v)) => (d, v),
        _ if headers.len() == 2 => (0, 1),
        _ => {
            return Err(Error::Data(format!(
                "header lacks columns {:?} and {:?}",
                schema.date_column, schema.value_column
            )))
        }
    };

    let mut rows: Vec<(Month, Option<f64>, usize)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let cell = |i: usize| record.get(i).unwrap_or("");
        let date = cell(date_col);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let month: Month = date.parse().map_err(|_| Error::Row {
            row,
            msg: format!("unparsable date {date:?}"),
        })?;
        let raw = cell(value_col);
        let value = if schema.missing_tokens.iter().any(|t| t == raw) {
            None
        } else {
            let x: f64 = raw.parse().map_err(|_| Error::Row {
                row,
                msg: format!("unparsable value {raw:?}"),
            })?;
            if !x.is_finite() {
                return Err(Error::Row {
                    row,
                    msg: format!("non-finite value {raw:?}"),
                });
            }
            Some(schema.units.decode(x))
        };
        rows.push((month, value, row));
    }
    if rows.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    rows.sort_by_key(|r| r.0);

    let mut values: Vec<Option<f64>> = Vec::with_capacity(rows.len());
    let mut interpolated = Vec::new();
    let mut prev: Option<(Month, Option<f64>)> = None;
    for (month, value, row) in rows {
        if let Some((last, last_value)) = prev {
            let step = month.months_since(last);
            if step == 0 {
                return Err(Error::Row {
                    row,
                    msg: format!("duplicate date {month}"),
                });
            }
            let gap = (step - 1) as usize;
            if gap > schema.max_gap {
                return Err(Error::Row {
                    row,
                    msg: format!(
                        "{gap} missing months before {month} exceed the limit of {}",
                        schema.max_gap
                    ),
                });
            }
            for j in 1..step {
                let filled = match (last_value, value) {
                    (Some(a), Some(b)) => Some(a + (b - a) * j as f64 / step as f64),
                    _ => None,
                };
                values.push(filled);
                interpolated.push(last.add_months(j));
            }
        }
        values.push(value);
        prev = Some((month, value));
    }

    let start = month_before(prev.expect("non-empty").0, values.len() - 1);
    let series: Vec<Option<T>> = values.into_iter().map(|v| v.map(T::lit)).collect();
    let units = match schema.units {
        CsvUnits::Percent => Units::Rate,
        CsvUnits::Fraction => Units::IndexLevel,
    };
    Ok(CsvSeries {
        series: TimeSeries::new(start, 12, series)?.with_units(units),
        interpolated,
    })
}

fn month_before(end: Month, steps: usize) -> Month {
    end.add_months(-(steps as i64))
}

fn format_value<T: Real>(v: Option<T>, units: CsvUnits) -> String {
    v.map(|x| units.encode(x).to_string()).unwrap_or_default()
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes `DATE,VALUE` rows; MISSING becomes an empty field.
pub fn write_series_csv<T: Real>(series: &TimeSeries<T>, path: impl AsRef<Path>, units: CsvUnits) -> Result<()> {
    write_series(series, create(path.as_ref())?, units)
}

pub fn write_series<T: Real, W: Write>(series: &TimeSeries<T>, writer: W, units: CsvUnits) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["DATE", "VALUE"])?;
    for (k, v) in series.values().iter().enumerate() {
        w.write_record([series.month_of(k).to_string(), format_value(*v, units)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `DATE,VALUE,MASKED` rows for a prediction.
pub fn write_prediction_csv<T: Real>(
    prediction: &PredictionResult<T>,
    path: impl AsRef<Path>,
    units: CsvUnits,
) -> Result<()> {
    let series = &prediction.inflation;
    let mut w = csv::Writer::from_writer(create(path.as_ref())?);
    w.write_record(["DATE", "VALUE", "MASKED"])?;
    for (k, v) in series.values().iter().enumerate() {
        let masked = if v.is_none() { "1" } else { "0" };
        w.write_record([series.month_of(k).to_string(), format_value(*v, units), masked.into()])?;
    }
    w.flush()?;
    Ok(())
}
