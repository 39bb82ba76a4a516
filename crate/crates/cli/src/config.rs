//! Optional configuration file. Every field can also be given as a flag;
//! flags win.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// On-disk layout of the input data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// `id,t1,t2,...`: one row per individual.
    Wide,
    /// `id,t,x`: one row per observation.
    Long,
    /// `t,x`: a single series.
    Series,
    /// Our World in Data country table (`location,date,<value>`).
    Owid,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundConfig {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    pub model: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub t0: Option<f64>,
    pub h: Option<f64>,
    pub q: Option<usize>,
    pub n: Option<usize>,
    pub sigma2: Option<f64>,
    pub rho: Option<f64>,
    pub replications: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub input: Option<PathBuf>,
    pub layout: Option<Layout>,
    pub time_column: Option<String>,
    pub value_column: Option<String>,
    pub step: Option<f64>,
    pub location: Option<String>,

    pub parent: Option<String>,
    pub model: Option<String>,
    pub target: Option<String>,
    pub theta: Option<f64>,
    pub baseline: Option<f64>,
    pub baseline_time: Option<f64>,
    pub koopman_sigma2: Option<f64>,
    pub koopman_rho: Option<f64>,

    pub curve: Option<String>,
    pub form: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub fix: Vec<String>,
    pub bounds: BTreeMap<String, BoundConfig>,

    pub forms: Option<Vec<String>>,
    pub periodic: Option<bool>,
    pub early_only: Option<bool>,
    pub cutoff: Option<f64>,
    pub moving_average: Option<usize>,

    pub candidates: Vec<String>,
    pub replicates: Option<usize>,

    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,

    pub simulation: PlanConfig,
}

impl Config {
    /// Reads a `.json` or `.toml` file. Relative paths inside it are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        let mut cfg: Config = match ext.as_str() {
            "json" => serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?,
            "toml" => toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?,
            _ => {
                return Err(CliError::config(format!(
                    "{}: config files must end in .json or .toml",
                    path.display()
                )))
            }
        };
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.out_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}
