//! Longitudinal data containers and their CSV forms.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::TimeGrid;

/// Relative tolerance used when recovering a uniform grid from time stamps.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// `n × q` matrix of sizes: rows are individuals, columns are grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix {
    grid: TimeGrid,
    ids: Vec<String>,
    values: DMatrix<f64>,
}

impl TrajectoryMatrix {
    pub fn new(grid: TimeGrid, ids: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        grid.validate()?;
        if values.ncols() != grid.q {
            return Err(Error::DimensionMismatch { expected: grid.q, got: values.ncols() });
        }
        if ids.len() != values.nrows() {
            return Err(Error::DimensionMismatch { expected: values.nrows(), got: ids.len() });
        }
        if values.nrows() == 0 {
            return Err(Error::InvalidInput("trajectory matrix has no rows".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite size value {v}")));
        }
        Ok(TrajectoryMatrix { grid, ids, values })
    }

    /// Builds a matrix from row vectors, numbering rows from 1.
    pub fn from_rows(grid: TimeGrid, rows: &[Vec<f64>]) -> Result<Self> {
        let q = grid.q;
        if let Some(bad) = rows.iter().find(|r| r.len() != q) {
            return Err(Error::DimensionMismatch { expected: q, got: bad.len() });
        }
        let values = DMatrix::from_fn(rows.len(), q, |i, j| rows[i][j]);
        let ids = (1..=rows.len()).map(|i| i.to_string()).collect();
        Self::new(grid, ids, values)
    }

    /// A single-row matrix, e.g. a mean profile or one observed series.
    pub fn single(grid: TimeGrid, values: &[f64]) -> Result<Self> {
        Self::from_rows(grid, &[values.to_vec()])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn q(&self) -> usize {
        self.values.ncols()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.q()).map(|j| self.values.column(j).sum() / n).collect()
    }

    /// Unbiased sample covariance of the listed columns; `None` when `n < 2`.
    pub fn covariance(&self, cols: &[usize]) -> Option<DMatrix<f64>> {
        let n = self.n();
        if n < 2 {
            return None;
        }
        let means: Vec<f64> = cols.iter().map(|&c| self.values.column(c).mean()).collect();
        let k = cols.len();
        let mut cov = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let (ca, cb) = (self.values.column(cols[a]), self.values.column(cols[b]));
                let s: f64 = ca.iter().zip(cb.iter()).map(|(x, y)| (x - means[a]) * (y - means[b])).sum();
                let v = s / (n - 1) as f64;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        Some(cov)
    }

    /// A new matrix made of the given rows (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(Error::InvalidInput(format!("row {bad} out of range")));
        }
        let values = DMatrix::from_fn(rows.len(), self.q(), |i, j| self.values[(rows[i], j)]);
        let ids = rows.iter().map(|&r| self.ids[r].clone()).collect();
        Self::new(self.grid, ids, values)
    }

    /// Number of entries that are zero or negative.
    pub fn nonpositive_count(&self) -> usize {
        self.values.iter().filter(|v| **v <= 0.0).count()
    }

    /// Wide CSV: header `id,t0,…,t_{q-1}`, one row per individual.
    pub fn write_wide_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let mut header = vec!["id".to_string()];
        header.extend(self.times().iter().map(|t| format_number(*t)));
        wtr.write_record(&header).map_err(io_err)?;
        for i in 0..self.n() {
            let mut rec = vec![self.ids[i].clone()];
            rec.extend(self.values.row(i).iter().map(|v| format_number(*v)));
            wtr.write_record(&rec).map_err(io_err)?;
        }
        wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }

    /// Reads the wide layout written by [`Self::write_wide_csv`].
    pub fn read_wide_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers().map_err(io_err)?.clone();
        if header.len() < 2 {
            return Err(Error::InvalidInput("wide CSV needs an id column and time columns".into()));
        }
        let times = header
            .iter()
            .skip(1)
            .map(|s| parse_number(s, "time header"))
            .collect::<Result<Vec<_>>>()?;
        let grid = TimeGrid::from_times(&times, GRID_TOLERANCE)?;
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(io_err)?;
            if rec.len() != header.len() {
                return Err(Error::DimensionMismatch { expected: header.len(), got: rec.len() });
            }
            ids.push(rec[0].to_string());
            rows.push(rec.iter().skip(1).map(|s| parse_number(s, "size")).collect::<Result<Vec<_>>>()?);
        }
        let values = DMatrix::from_fn(rows.len(), grid.q, |i, j| rows[i][j]);
        Self::new(grid, ids, values)
    }

    /// Reads long CSV with columns `id,t,x`; every id must cover the same times.
    pub fn read_long_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers().map_err(io_err)?.clone();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| h.eq_ignore_ascii_case(name))
                .ok_or_else(|| Error::InvalidInput(format!("long CSV lacks column `{name}`")))
        };
        let (ci, ct, cx) = (col("id")?, col("t")?, col("x")?);
        let mut order: Vec<String> = Vec::new();
        let mut by_id: std::collections::HashMap<String, Vec<(f64, f64)>> = Default::default();
        for rec in rdr.records() {
            let rec = rec.map_err(io_err)?;
            let id = rec.get(ci).unwrap_or_default().to_string();
            let t = parse_number(rec.get(ct).unwrap_or_default(), "time")?;
            let x = parse_number(rec.get(cx).unwrap_or_default(), "size")?;
            if !by_id.contains_key(&id) {
                order.push(id.clone());
            }
            by_id.entry(id).or_default().push((t, x));
        }
        let first = order.first().ok_or_else(|| Error::InvalidInput("long CSV has no rows".into()))?;
        let mut ref_times: Vec<f64> = by_id[first].iter().map(|p| p.0).collect();
        ref_times.sort_by(f64::total_cmp);
        let grid = TimeGrid::from_times(&ref_times, GRID_TOLERANCE)?;
        let mut rows = Vec::with_capacity(order.len());
        for id in &order {
            let mut pts = by_id[id].clone();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let same = pts.len() == ref_times.len()
                && pts.iter().zip(&ref_times).all(|(p, t)| (p.0 - t).abs() <= GRID_TOLERANCE * grid.h.max(t.abs()));
            if !same {
                return Err(Error::NonUniformGrid(format!("id `{id}` is observed at different times")));
            }
            rows.push(pts.into_iter().map(|p| p.1).collect::<Vec<_>>());
        }
        let values = DMatrix::from_fn(rows.len(), grid.q, |i, j| rows[i][j]);
        Self::new(grid, order, values)
    }
}

/// A single observed `(t, y)` series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if t.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: t.len(), got: y.len() });
        }
        if t.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("series contains non-finite values".into()));
        }
        Ok(Series { t, y })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// The uniform grid of the time stamps.
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::from_times(&self.t, GRID_TOLERANCE)
    }

    /// The series as a one-row trajectory matrix.
    pub fn to_matrix(&self) -> Result<TrajectoryMatrix> {
        TrajectoryMatrix::single(self.grid()?, &self.y)
    }

    /// Reads CSV with columns `t,x` (header names are matched loosely: the
    /// first two columns are used when `t`/`x` are absent).
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers().map_err(io_err)?.clone();
        let find = |name: &str, fallback: usize| {
            header.iter().position(|h| h.eq_ignore_ascii_case(name)).unwrap_or(fallback)
        };
        let (ct, cx) = (find("t", 0), find("x", 1));
        let (mut t, mut y) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(io_err)?;
            t.push(parse_number(rec.get(ct).unwrap_or_default(), "time")?);
            y.push(parse_number(rec.get(cx).unwrap_or_default(), "value")?);
        }
        Self::new(t, y)
    }

    pub fn write_csv<W: Write>(&self, w: W, value_name: &str) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wtr.write_record(["t", value_name]).map_err(io_err)?;
        for (t, y) in self.t.iter().zip(&self.y) {
            wtr.write_record([format_number(*t), format_number(*y)]).map_err(io_err)?;
        }
        wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

fn parse_number(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidInput(format!("cannot parse {what} `{s}` as a number")))
}

fn io_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("CSV: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrajectoryMatrix {
        let grid = TimeGrid::new(0.0, 0.5, 3).unwrap();
        TrajectoryMatrix::from_rows(grid, &[vec![1.0, 2.0, 4.0], vec![3.0, 2.0, 0.0]]).unwrap()
    }

    #[test]
    fn means_and_covariance() {
        let m = sample();
        assert_eq!(m.column_means(), vec![2.0, 2.0, 2.0]);
        let c = m.covariance(&[0, 2]).unwrap();
        assert_eq!(c[(0, 0)], 2.0);
        assert_eq!(c[(0, 1)], -4.0);
        assert_eq!(m.nonpositive_count(), 1);
        assert!(TrajectoryMatrix::single(*m.grid(), &[1.0, 2.0, 3.0]).unwrap().covariance(&[0]).is_none());
    }

    #[test]
    fn wide_round_trip() {
        let m = sample();
        let mut buf = Vec::new();
        m.write_wide_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,0,0.5,1\n"));
        assert_eq!(TrajectoryMatrix::read_wide_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn long_layout_and_gaps() {
        let text = "id,t,x\na,0,1\na,1,2\na,2,3\nb,2,6\nb,0,4\nb,1,5\n";
        let m = TrajectoryMatrix::read_long_csv(text.as_bytes()).unwrap();
        assert_eq!(m.row(1), vec![4.0, 5.0, 6.0]);
        let gap = "id,t,x\na,0,1\na,1,2\na,3,3\n";
        assert!(matches!(TrajectoryMatrix::read_long_csv(gap.as_bytes()), Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn series_round_trip() {
        let s = Series::new(vec![0.0, 1.0, 2.0], vec![1.5, 2.5, 3.5]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, "x").unwrap();
        assert_eq!(Series::read_csv(buf.as_slice()).unwrap(), s);
        assert_eq!(s.to_matrix().unwrap().q(), 3);
    }
}
