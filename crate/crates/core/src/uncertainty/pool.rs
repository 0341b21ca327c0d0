//! Scenario pools: matrices of uncertainty realizations (MW).

use super::UncertaintyError;
use nalgebra::{DMatrix, DVector};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// A non-empty pool of n-dimensional uncertainty realizations, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPool {
    samples: DMatrix<f64>,
}

impl ScenarioPool {
    pub fn new(samples: DMatrix<f64>) -> Result<Self, UncertaintyError> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(UncertaintyError::EmptyPool);
        }
        Ok(Self { samples })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, UncertaintyError> {
        let n = rows.first().map(|r| r.len()).ok_or(UncertaintyError::EmptyPool)?;
        for r in rows {
            if r.len() != n {
                return Err(UncertaintyError::DimensionMismatch { expected: n, got: r.len() });
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), n, &flat))
    }

    /// Reads a CSV file with one realization per line, `n` columns, no header.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, UncertaintyError> {
        let file = std::fs::File::open(path)?;
        let mut rows = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let row: Result<Vec<f64>, _> = trimmed
                .split(',')
                .map(|tok| tok.trim().parse::<f64>())
                .collect();
            rows.push(row.map_err(|e| UncertaintyError::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?);
        }
        Self::from_rows(&rows)
    }

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        for i in 0..self.len() {
            let row: Vec<String> = self.samples.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // enforced non-empty at construction
    }

    /// Dimension n of each realization.
    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> DVector<f64> {
        self.samples.row(i).transpose()
    }

    /// Componentwise min/max over the pool.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        let n = self.dim();
        let mut lo = DVector::from_element(n, f64::INFINITY);
        let mut hi = DVector::from_element(n, f64::NEG_INFINITY);
        for i in 0..self.len() {
            for j in 0..n {
                let v = self.samples[(i, j)];
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        (lo, hi)
    }

    /// Pool restricted to the given sample indices.
    pub fn select(&self, indices: &[usize]) -> Result<Self, UncertaintyError> {
        if indices.is_empty() {
            return Err(UncertaintyError::EmptyPool);
        }
        let n = self.dim();
        let mut m = DMatrix::zeros(indices.len(), n);
        for (r, &i) in indices.iter().enumerate() {
            m.set_row(r, &self.samples.row(i));
        }
        Self::new(m)
    }

    /// Drops samples falling outside the per-coordinate `[q, 1-q]` quantile
    /// box. Used to omit statistical outliers before histogram estimation;
    /// moment estimation for the ambiguity sets keeps the full pool.
    pub fn trim_outliers(&self, q: f64) -> Result<Self, UncertaintyError> {
        if !(0.0..0.5).contains(&q) {
            return Err(UncertaintyError::InvalidConfig(format!(
                "trim quantile must lie in [0, 0.5), got {q}"
            )));
        }
        if q == 0.0 {
            return Ok(self.clone());
        }
        let n = self.dim();
        let len = self.len();
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for j in 0..n {
            let mut col: Vec<f64> = self.samples.column(j).iter().copied().collect();
            col.sort_by(|a, b| a.total_cmp(b));
            lo[j] = col[((q * (len - 1) as f64).floor() as usize).min(len - 1)];
            hi[j] = col[(((1.0 - q) * (len - 1) as f64).ceil() as usize).min(len - 1)];
        }
        let keep: Vec<usize> = (0..len)
            .filter(|&i| (0..n).all(|j| self.samples[(i, j)] >= lo[j] && self.samples[(i, j)] <= hi[j]))
            .collect();
        self.select(&keep)
    }
}
