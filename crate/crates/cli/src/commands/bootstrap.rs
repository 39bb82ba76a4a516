use isrp_core::fit::{bootstrap_select, Candidate, Curve, FitProblem};
use isrp_core::Param;

use crate::error::{CliError, CliResult};
use crate::output::{opt, Staging};
use crate::BootstrapArgs;

use super::{heuristic_init, parse_assignment, parse_model, Ctx};

const DEFAULT_B: usize = 200;

/// `MODEL[:p=v,...]`; the listed parameters are fixed at their values.
fn candidate(spec: &str, t: &[f64], y: &[f64], theta: f64) -> CliResult<Candidate> {
    let (model, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let model = parse_model(model.trim())?;
    let params = model.params().map_err(CliError::from_setting)?;
    let mut init = heuristic_init(t, y, theta);
    let mut fixed = Vec::new();
    for s in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (p, v) = parse_assignment(s)?;
        if !params.contains(&p) {
            return Err(CliError::config(format!("{model} has no parameter `{p}`")));
        }
        init.set(p, v);
        fixed.push(p);
    }
    let mut problem =
        FitProblem::new(Curve::Size(model), t.to_vec(), y.to_vec(), init).map_err(CliError::from_setting)?;
    for p in fixed {
        problem = problem.fixing(p);
    }
    for p in [Param::R0, Param::K, Param::K0, Param::X0] {
        if problem.free.contains(&p) {
            problem = problem.bounded(p, Some(1e-12), None);
        }
    }
    Ok(Candidate { name: spec.trim().to_string(), problem })
}

/// Writes `bootstrap.json` and `aic_samples.csv` (one row per resample,
/// one AIC column per candidate, then the winner).
pub fn run(ctx: &Ctx, a: BootstrapArgs) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let specs = if a.candidates.is_empty() { &cfg.candidates } else { &a.candidates };
    if specs.is_empty() {
        return Err(CliError::config("bootstrap needs at least one --candidate"));
    }
    let b = a.replicates.or(cfg.replicates).unwrap_or(DEFAULT_B);
    if b == 0 {
        return Err(CliError::config("--replicates must be at least 1"));
    }
    let theta = ctx.theta(None)?;
    for s in specs {
        candidate(s, &[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], theta)?;
    }
    let data = ctx.load(&a.data)?.matrix()?;
    let (t, y) = (data.times(), data.column_means());
    let cands = specs.iter().map(|s| candidate(s, &t, &y, theta)).collect::<CliResult<Vec<_>>>()?;
    let report = bootstrap_select(&data, &cands, b, ctx.seed, ctx.exec).map_err(CliError::from_compute)?;

    let mut header = vec!["replicate".to_string()];
    header.extend(report.candidates.iter().cloned());
    header.push("winner".into());
    let rows: Vec<Vec<String>> = (0..report.b)
        .map(|i| {
            let aics: Vec<Option<f64>> = report.aic.iter().map(|c| c[i]).collect();
            let winner = aics
                .iter()
                .enumerate()
                .filter_map(|(k, v)| v.map(|v| (k, v)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(k, _)| report.candidates[k].clone())
                .unwrap_or_default();
            let mut r = vec![i.to_string()];
            r.extend(aics.into_iter().map(opt));
            r.push(winner);
            r
        })
        .collect();
    let mut stage = Staging::new(&ctx.out_dir(&a.out))?;
    stage.write_json("bootstrap.json", &report)?;
    stage.write_csv("aic_samples.csv", &header.iter().map(String::as_str).collect::<Vec<_>>(), &rows)?;
    stage.commit()?;
    Ok(())
}
