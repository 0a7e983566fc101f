use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{SeriesRole, TimeSeries};

/// Header names of the date and close columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub date: String,
    pub close: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            date: "Date".into(),
            close: "Close".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {}: {source}", path.display())]
    MissingFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: column `{column}` not found in header", path.display())]
    MissingColumn { path: PathBuf, column: String },
    #[error("{}: no usable rows ({dropped} dropped)", path.display())]
    EmptyAfterCleaning { path: PathBuf, dropped: usize },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
}

/// Reads a dated close-price series.
///
/// Rows with an unparsable date or a missing/non-numeric close are dropped
/// and counted in the log. The result is sorted by date; for repeated dates
/// the last row in the file wins.
pub fn ingest_csv(path: &Path, mapping: &ColumnMapping) -> Result<TimeSeries, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::MissingFile {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| IngestError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(csv_err)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let date_idx = column(&mapping.date)?;
    let close_idx = column(&mapping.close)?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    let mut dropped = 0usize;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let date = record
            .get(date_idx)
            .and_then(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok());
        let close = record
            .get(close_idx)
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|v| v.is_finite());
        match (date, close) {
            (Some(d), Some(c)) => rows.push((d, c)),
            _ => dropped += 1,
        }
    }
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} malformed rows", path.display());
    }
    if rows.is_empty() {
        return Err(IngestError::EmptyAfterCleaning {
            path: path.to_path_buf(),
            dropped,
        });
    }

    rows.sort_by_key(|r| r.0);
    let mut deduped: Vec<(NaiveDate, f64)> = Vec::with_capacity(rows.len());
    for row in rows {
        match deduped.last_mut() {
            Some(last) if last.0 == row.0 => *last = row,
            _ => deduped.push(row),
        }
    }
    let (dates, values) = deduped.into_iter().unzip();
    Ok(TimeSeries::with_dates(SeriesRole::Price, values, dates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_well_formed_file() {
        let f = write("Date,Open,Close\n2020-01-02,1,10\n2020-01-03,1,11\n2020-01-06,1,12\n");
        let s = ingest_csv(f.path(), &ColumnMapping::default()).unwrap();
        assert_eq!(s.values, vec![10.0, 11.0, 12.0]);
        assert_eq!(s.role, SeriesRole::Price);
    }

    #[test]
    fn sorts_drops_and_keeps_last_duplicate() {
        let f = write("Date,Close\n2020-01-03,11\n2020-01-02,10\nbad,5\n2020-01-04,null\n2020-01-03,11.5\n2020-01-05,\n");
        let s = ingest_csv(f.path(), &ColumnMapping::default()).unwrap();
        assert_eq!(s.values, vec![10.0, 11.5]);
        let dates = s.dates.unwrap();
        assert!(dates.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn custom_columns() {
        let f = write("day;px\n");
        let f2 = write("day,px\n2021-05-01,3\n");
        let map = ColumnMapping {
            date: "day".into(),
            close: "px".into(),
        };
        assert!(matches!(
            ingest_csv(f.path(), &map),
            Err(IngestError::MissingColumn { .. })
        ));
        assert_eq!(ingest_csv(f2.path(), &map).unwrap().values, vec![3.0]);
    }

    #[test]
    fn error_cases() {
        let missing = Path::new("/nonexistent/prices.csv");
        assert!(matches!(
            ingest_csv(missing, &ColumnMapping::default()),
            Err(IngestError::MissingFile { .. })
        ));
        let f = write("Date,Close\n2020-01-02,\n2020-01-03,n/a\n");
        assert!(matches!(
            ingest_csv(f.path(), &ColumnMapping::default()),
            Err(IngestError::EmptyAfterCleaning { dropped: 2, .. })
        ));
        let f = write("Date,Adj Close\n2020-01-02,1\n");
        assert!(matches!(
            ingest_csv(f.path(), &ColumnMapping::default()),
            Err(IngestError::MissingColumn { .. })
        ));
    }
}
