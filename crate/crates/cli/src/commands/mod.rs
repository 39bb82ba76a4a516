mod bootstrap;
mod catalog;
mod fit;
mod isrp;
mod select;
mod simulate;

use std::path::PathBuf;

use isrp_core::models::{ModelId, Parent};
use isrp_core::sim::{KoopmanCov, SimulationPlan};
use isrp_core::{Execution, Param, ParameterSet};

use crate::config::{Config, Layout};
use crate::error::{CliError, CliResult};
use crate::input::{self, InputSpec, Loaded};
use crate::{Cli, Command, DataArgs, PlanArgs};

pub const SEED_ENV: &str = "ISRP_SEED";

/// Settings shared by every command after merging flags and config.
pub struct Ctx {
    pub cfg: Config,
    pub seed: u64,
    pub exec: Execution,
}

pub fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let seed = resolve_seed(cli.seed, cfg.seed)?;
    let exec = configure_threads(cli.threads.or(cfg.threads))?;
    let ctx = Ctx { cfg, seed, exec };
    match cli.command {
        Command::Catalog(a) => catalog::run(&ctx, a),
        Command::Simulate(a) => simulate::run(&ctx, a),
        Command::Isrp(a) => isrp::run(&ctx, a),
        Command::Fit(a) => fit::run(&ctx, a),
        Command::Select(a) => select::run(&ctx, a),
        Command::Bootstrap(a) => bootstrap::run(&ctx, a),
    }
}

fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        _ => Ok(0),
    }
}

fn configure_threads(threads: Option<usize>) -> CliResult<Execution> {
    match threads {
        Some(0) => Err(CliError::config("--threads must be at least 1")),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            // A pool may already exist when called twice in one process; keep it.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None if Execution::parallel_available() => Ok(Execution::Parallel),
        None => Ok(Execution::Sequential),
    }
}

impl Ctx {
    pub fn out_dir(&self, flag: &Option<PathBuf>) -> PathBuf {
        flag.clone().or_else(|| self.cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn load(&self, a: &DataArgs) -> CliResult<Loaded> {
        let path = a
            .input
            .clone()
            .or_else(|| self.cfg.input.clone())
            .ok_or_else(|| CliError::config("no input file (use --input or `input` in the config)"))?;
        let spec = InputSpec {
            time_column: a.time_column.clone().or_else(|| self.cfg.time_column.clone()),
            value_column: a.value_column.clone().or_else(|| self.cfg.value_column.clone()),
            step: a.step.or(self.cfg.step),
            location: a.location.clone().or_else(|| self.cfg.location.clone()),
        };
        let layout = a.layout.or(self.cfg.layout).unwrap_or(Layout::Wide);
        input::load(&path, layout, &spec)
    }

    pub fn has_input(&self, a: &DataArgs) -> bool {
        a.input.is_some() || self.cfg.input.is_some()
    }

    pub fn parent(&self, flag: &Option<String>) -> CliResult<Parent> {
        let s = flag.as_deref().or(self.cfg.parent.as_deref()).unwrap_or("logistic");
        s.parse().map_err(CliError::from_setting)
    }

    pub fn theta(&self, flag: Option<f64>) -> CliResult<f64> {
        let theta = flag.or(self.cfg.theta).unwrap_or(1.0);
        if !theta.is_finite() || theta <= 0.0 {
            return Err(CliError::config(format!("theta must be positive, got {theta}")));
        }
        Ok(theta)
    }

    /// The simulation plan: reference logistic design, then config, then flags.
    pub fn plan(&self, a: &PlanArgs) -> CliResult<SimulationPlan> {
        let sim = &self.cfg.simulation;
        let mut plan = SimulationPlan::logistic_reference(self.seed);
        if let Some(m) = a.model.as_deref().or(sim.model.as_deref()) {
            plan.model = parse_model(m)?;
        }
        for (name, &v) in &sim.params {
            plan.params.set(parse_param(name)?, v);
        }
        for s in &a.params {
            let (p, v) = parse_assignment(s)?;
            plan.params.set(p, v);
        }
        plan.grid.t0 = a.t0.or(sim.t0).unwrap_or(plan.grid.t0);
        plan.grid.h = a.h.or(sim.h).unwrap_or(plan.grid.h);
        plan.grid.q = a.q.or(sim.q).unwrap_or(plan.grid.q);
        plan.n = a.n.or(sim.n).unwrap_or(plan.n);
        plan.cov = KoopmanCov {
            sigma2: a.sigma2.or(sim.sigma2).unwrap_or(plan.cov.sigma2),
            rho: a.rho.or(sim.rho).unwrap_or(plan.cov.rho),
        };
        plan.replications = a.replications.or(sim.replications).unwrap_or(plan.replications);
        plan.validate().map_err(CliError::from_setting)?;
        Ok(plan)
    }
}

/// `parent` (constant parameters) or `parent/variation`.
pub fn parse_model(s: &str) -> CliResult<ModelId> {
    if s.contains('/') {
        s.parse().map_err(CliError::from_setting)
    } else {
        let parent: Parent = s.parse().map_err(CliError::from_setting)?;
        Ok(ModelId::constant(parent))
    }
}

pub fn parse_param(s: &str) -> CliResult<Param> {
    s.trim().parse().map_err(CliError::from_setting)
}

pub fn parse_value(s: &str, what: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("{what}: `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::config(format!("{what}: `{s}` is not finite")));
    }
    Ok(v)
}

/// `p=v`.
pub fn parse_assignment(s: &str) -> CliResult<(Param, f64)> {
    let (p, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("`{s}` must have the form name=value")))?;
    Ok((parse_param(p)?, parse_value(v, p.trim())?))
}

/// `p=lo:hi`, where either side may be empty.
pub fn parse_bound(s: &str) -> CliResult<(Param, Option<f64>, Option<f64>)> {
    let (p, range) = s
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("bound `{s}` must have the form name=lo:hi")))?;
    let (lo, hi) = range
        .split_once(':')
        .ok_or_else(|| CliError::config(format!("bound `{s}` must have the form name=lo:hi")))?;
    let side = |x: &str| (!x.trim().is_empty()).then(|| parse_value(x, p.trim())).transpose();
    let (lo, hi) = (side(lo)?, side(hi)?);
    if let (Some(a), Some(b)) = (lo, hi) {
        if a > b {
            return Err(CliError::config(format!("bound `{s}` has lower > upper")));
        }
    }
    Ok((parse_param(p)?, lo, hi))
}

/// Starting values read off the data: `K = 1.05·max y`, `r` from the log
/// slope of the first three points, `c = 1`, `x0 = y[0]`.
pub fn heuristic_init(t: &[f64], y: &[f64], theta: f64) -> ParameterSet {
    let ymax = y.iter().copied().fold(f64::MIN, f64::max);
    let k = if ymax > 0.0 { 1.05 * ymax } else { 1.0 };
    let r0 = if y.len() >= 3 && y[0] > 0.0 && y[2] > 0.0 && t[2] != t[0] {
        ((y[2].ln() - y[0].ln()) / (t[2] - t[0])).abs().max(1e-3)
    } else {
        0.1
    };
    ParameterSet { r0, c: 1.0, k, k0: k, theta, x0: y.first().copied().unwrap_or(1.0), ..ParameterSet::default() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsers() {
        assert_eq!(parse_assignment("K = 450").unwrap(), (Param::K, 450.0));
        assert_eq!(parse_bound("c=:2").unwrap(), (Param::C, None, Some(2.0)));
        assert_eq!(parse_bound("c=1:").unwrap(), (Param::C, Some(1.0), None));
        assert!(parse_bound("c=3:2").is_err());
        assert!(parse_assignment("zz=1").is_err());
        assert_eq!(parse_model("logistic").unwrap(), ModelId::constant(Parent::Logistic));
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(3), Some(4)).unwrap(), 3);
        assert_eq!(resolve_seed(None, Some(4)).unwrap(), 4);
    }

    #[test]
    fn init_heuristics() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 2.0, 4.0, 10.0];
        let p = heuristic_init(&t, &y, 1.0);
        assert!((p.r0 - 2f64.ln()).abs() < 1e-12);
        assert!((p.k - 10.5).abs() < 1e-12);
        assert_eq!((p.c, p.x0), (1.0, 1.0));
    }
}
