//! The observed truncated sample: pairs `(x, y)` with `x ≤ y`, plus sorted
//! views of each margin for order statistics and counting queries.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which coordinate of the observed pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Margin {
    /// The truncated variable.
    X,
    /// The truncation variable.
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSample {
    pairs: Vec<(f64, f64)>,
    x_sorted: Vec<f64>,
    y_sorted: Vec<f64>,
}

impl TruncatedSample {
    /// Validates and wraps observed pairs. Every pair needs `0 < x ≤ y`, both finite.
    pub fn from_pairs(raw: Vec<(f64, f64)>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptySample);
        }
        for (index, &(x, y)) in raw.iter().enumerate() {
            let reason = if !x.is_finite() || !y.is_finite() {
                Some(format!("non-finite value ({x}, {y})"))
            } else if x <= 0.0 {
                Some(format!("x must be positive, got {x}"))
            } else if x > y {
                Some(format!("x={x} exceeds y={y}"))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::InvalidPair { index, reason });
            }
        }
        Ok(Self::from_valid_pairs(raw))
    }

    /// Caller guarantees the pair invariants; an empty sample is allowed here.
    pub(crate) fn from_valid_pairs(pairs: Vec<(f64, f64)>) -> Self {
        let mut x_sorted: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut y_sorted: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        x_sorted.sort_by(f64::total_cmp);
        y_sorted.sort_by(f64::total_cmp);
        Self { pairs, x_sorted, y_sorted }
    }

    /// Reads a CSV file with header `x,y`.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::from_csv_reader(file, path)
    }

    /// Reads CSV data with header `x,y`; `origin` only labels error messages.
    pub fn from_csv_reader<R: Read>(reader: R, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref().to_owned();
        let parse_err = |line: u64, reason: String| Error::Parse { path: origin.clone(), line, reason };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        if headers.is_empty() || headers.iter().all(str::is_empty) {
            return Err(parse_err(1, "empty input, expected header `x,y`".into()));
        }
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
            return Err(parse_err(1, format!("expected header `x,y`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut pairs = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let field = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|_| parse_err(line, format!("cannot parse `{}` as a number", &record[i])))
            };
            let x = field(0)?;
            let y = field(1)?;
            pairs.push((x, y, line));
        }
        if pairs.is_empty() {
            return Err(parse_err(1, "no data rows".into()));
        }
        if let Some(&(x, y, line)) = pairs
            .iter()
            .find(|&&(x, y, _)| !(x.is_finite() && y.is_finite() && x > 0.0 && x <= y))
        {
            return Err(parse_err(line, format!("invalid pair ({x}, {y}): need 0 < x <= y, finite")));
        }
        Ok(Self::from_valid_pairs(pairs.into_iter().map(|(x, y, _)| (x, y)).collect()))
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// Ascending order statistics of one margin.
    pub fn sorted(&self, margin: Margin) -> &[f64] {
        match margin {
            Margin::X => &self.x_sorted,
            Margin::Y => &self.y_sorted,
        }
    }

    /// The `i`-th smallest value of a margin, 1-based.
    pub fn order_stat(&self, margin: Margin, i: usize) -> Result<f64> {
        let v = self.sorted(margin);
        if i == 0 || i > v.len() {
            return Err(Error::IndexOutOfRange { index: i, len: v.len() });
        }
        Ok(v[i - 1])
    }

    /// Number of values in a margin that are `≤ x`.
    pub fn count_le(&self, margin: Margin, x: f64) -> usize {
        self.sorted(margin).partition_point(|&v| v <= x)
    }

    /// Number of values in a margin that are `< x`.
    pub fn count_lt(&self, margin: Margin, x: f64) -> usize {
        self.sorted(margin).partition_point(|&v| v < x)
    }

    /// `#{i : xᵢ ≤ x ≤ yᵢ}`. Since `xᵢ ≤ yᵢ`, this is `#{xᵢ ≤ x} - #{yᵢ < x}`.
    pub fn overlap_count(&self, x: f64) -> usize {
        self.count_le(Margin::X, x) - self.count_lt(Margin::Y, x)
    }

    /// `Cₙ(x) = n⁻¹ #{i : xᵢ ≤ x ≤ yᵢ}`; zero for an empty sample.
    pub fn c_n(&self, x: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.overlap_count(x) as f64 / self.n() as f64
    }

    /// `1 - Fₙ(x)`: fraction of the margin strictly above `x`.
    pub fn empirical_tail(&self, margin: Margin, x: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (self.n() - self.count_le(margin, x)) as f64 / self.n() as f64
    }

    /// Left-continuous variant: fraction of the margin at or above `x`.
    pub fn empirical_tail_inclusive(&self, margin: Margin, x: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (self.n() - self.count_lt(margin, x)) as f64 / self.n() as f64
    }

    /// Returns the sample with both coordinates multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("c", format!("must be positive, got {c}")));
        }
        Self::from_pairs(self.pairs.iter().map(|&(x, y)| (c * x, c * y)).collect())
    }
}
