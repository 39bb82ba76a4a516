//! Input loaders for the supported layouts.

use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use isrp_core::data::{Series, TrajectoryMatrix};

use crate::config::Layout;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default)]
pub struct InputSpec {
    pub time_column: Option<String>,
    pub value_column: Option<String>,
    pub step: Option<f64>,
    pub location: Option<String>,
}

/// Loaded data; series inputs keep their single-row nature.
#[derive(Debug, Clone)]
pub enum Loaded {
    Panel(TrajectoryMatrix),
    Series(Series),
}

impl Loaded {
    pub fn matrix(&self) -> CliResult<TrajectoryMatrix> {
        match self {
            Loaded::Panel(m) => Ok(m.clone()),
            Loaded::Series(s) => s.to_matrix().map_err(CliError::from_input),
        }
    }
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path) -> impl Fn(isrp_core::Error) -> CliError + '_ {
    move |e| CliError::data(format!("{}: {e}", path.display()))
}

pub fn load(path: &Path, layout: Layout, spec: &InputSpec) -> CliResult<Loaded> {
    match layout {
        Layout::Wide => TrajectoryMatrix::read_wide_csv(open(path)?).map(Loaded::Panel).map_err(with_path(path)),
        Layout::Long => TrajectoryMatrix::read_long_csv(open(path)?).map(Loaded::Panel).map_err(with_path(path)),
        Layout::Series => read_series(path, spec).map(Loaded::Series),
        Layout::Owid => read_owid(path, spec).map(Loaded::Series),
    }
}

fn csv_reader(path: &Path) -> CliResult<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> CliResult<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| CliError::data(format!("{}: no column `{name}`", path.display())))
}

fn number(s: &str, path: &Path, line: usize) -> CliResult<f64> {
    s.parse::<f64>()
        .map_err(|_| CliError::data(format!("{}:{line}: cannot parse `{s}` as a number", path.display())))
}

/// `t,x` series. Named columns override the defaults; a single value
/// column is accepted when `step` is given.
fn read_series(path: &Path, spec: &InputSpec) -> CliResult<Series> {
    if spec.time_column.is_none() && spec.value_column.is_none() && spec.step.is_none() {
        return Series::read_csv(open(path)?).map_err(with_path(path));
    }
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| CliError::data(e.to_string()))?.clone();
    let cx = match &spec.value_column {
        Some(name) => column(&headers, name, path)?,
        None if headers.len() == 1 => 0,
        None => column(&headers, "x", path).unwrap_or(1),
    };
    let ct = match (&spec.time_column, spec.step) {
        (Some(name), _) => Some(column(&headers, name, path)?),
        (None, Some(_)) => None,
        (None, None) => Some(column(&headers, "t", path).unwrap_or(0)),
    };
    let (mut t, mut y) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let line = i + 2;
        y.push(number(rec.get(cx).unwrap_or_default(), path, line)?);
        t.push(match ct {
            Some(c) => number(rec.get(c).unwrap_or_default(), path, line)?,
            None => i as f64 * spec.step.unwrap_or(1.0),
        });
    }
    Series::new(t, y).map_err(with_path(path))
}

/// Our World in Data layout: rows of one `location` with ISO `date`s and a
/// value column (default `total_cases`). Leading rows without a value are
/// dropped; time is days since the first kept date.
fn read_owid(path: &Path, spec: &InputSpec) -> CliResult<Series> {
    let location = spec
        .location
        .as_deref()
        .ok_or_else(|| CliError::config("the owid layout needs --location"))?;
    let mut rdr = csv_reader(path)?;
    let headers = rdr.headers().map_err(|e| CliError::data(e.to_string()))?.clone();
    let cl = column(&headers, "location", path)?;
    let cd = column(&headers, spec.time_column.as_deref().unwrap_or("date"), path)?;
    let cv = column(&headers, spec.value_column.as_deref().unwrap_or("total_cases"), path)?;
    let mut first: Option<NaiveDate> = None;
    let (mut t, mut y) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        if rec.get(cl) != Some(location) {
            continue;
        }
        let raw = rec.get(cv).unwrap_or_default();
        if raw.is_empty() {
            if first.is_none() {
                continue;
            }
            return Err(CliError::data(format!("{}:{}: missing value inside the series", path.display(), i + 2)));
        }
        let date = NaiveDate::parse_from_str(rec.get(cd).unwrap_or_default(), "%Y-%m-%d")
            .map_err(|e| CliError::data(format!("{}:{}: {e}", path.display(), i + 2)))?;
        let start = *first.get_or_insert(date);
        t.push((date - start).num_days() as f64);
        y.push(number(raw, path, i + 2)?);
    }
    if t.is_empty() {
        return Err(CliError::data(format!("{}: no rows for location `{location}`", path.display())));
    }
    Series::new(t, y).map_err(with_path(path))
}
