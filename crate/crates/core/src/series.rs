use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// What the values of a [`TimeSeries`] represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesRole {
    Price,
    LogPrice,
    Return,
    Hurst,
    Volatility,
}

/// Ordered sequence of observations with an optional calendar axis.
///
/// Synthetic series carry no dates; their timestamps are the sample indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub role: SeriesRole,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dates: Option<Vec<NaiveDate>>,
}

impl TimeSeries {
    pub fn new(role: SeriesRole, values: Vec<f64>) -> Self {
        Self {
            role,
            values,
            dates: None,
        }
    }

    /// Panics if `dates` and `values` differ in length.
    pub fn with_dates(role: SeriesRole, values: Vec<f64>, dates: Vec<NaiveDate>) -> Self {
        assert_eq!(values.len(), dates.len(), "dates/values length mismatch");
        Self {
            role,
            values,
            dates: Some(dates),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First differences `x[t+1] - x[t]`.
    pub fn increments(&self) -> Vec<f64> {
        increments(&self.values)
    }

    /// Keeps the first `len` observations.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        Self {
            role: self.role,
            values: self.values[..len].to_vec(),
            dates: self.dates.as_ref().map(|d| d[..len].to_vec()),
        }
    }
}

/// First differences of a slice.
pub fn increments(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}
