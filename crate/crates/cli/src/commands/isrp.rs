use isrp_core::isrp::{isrp_profile, Baseline, ProfileOptions, Target, VarianceSource};
use isrp_core::sim::{replicate_isrp, KoopmanCov};

use crate::error::{CliError, CliResult};
use crate::output::{num, opt, Staging};
use crate::IsrpArgs;

use super::Ctx;

/// Data mode (an input is given): `isrp.csv` and `isrp.json` for the
/// dataset. Replication mode: `summary.csv`, `summary.json` and the long
/// `estimates.csv` over the simulated replicates of the plan.
pub fn run(ctx: &Ctx, a: IsrpArgs) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let parent = ctx.parent(&a.parent)?;
    let target: Target = a
        .target
        .as_deref()
        .or(cfg.target.as_deref())
        .unwrap_or("r")
        .parse()
        .map_err(CliError::from_setting)?;
    let mut opts = ProfileOptions::new(parent, target);
    opts.theta = ctx.theta(a.theta.or(cfg.theta))?;
    let baseline = a.baseline.or(cfg.baseline);
    let baseline_time = a.baseline_time.or(cfg.baseline_time);
    if let Some(value) = baseline {
        opts.baseline = Baseline::Known { value, time: baseline_time.unwrap_or(0.0) };
    } else if baseline_time.is_some() {
        return Err(CliError::config("--baseline-time needs --baseline"));
    }
    if let Some(sigma2) = a.koopman_sigma2.or(cfg.koopman_sigma2) {
        let cov = KoopmanCov::new(sigma2, a.koopman_rho.or(cfg.koopman_rho).unwrap_or(0.0))
            .map_err(CliError::from_setting)?;
        opts.variance = VarianceSource::Koopman(cov);
    }
    let mut stage = Staging::new(&ctx.out_dir(&a.out))?;
    if ctx.has_input(&a.data) {
        let data = ctx.load(&a.data)?.matrix()?;
        let series = isrp_profile(&data, &opts).map_err(CliError::from_compute)?;
        let mut csv = Vec::new();
        series.write_csv(&mut csv).map_err(CliError::from_compute)?;
        stage.write_bytes("isrp.csv", &csv)?;
        stage.write_json("isrp.json", &series)?;
    } else {
        let plan = ctx.plan(&a.plan)?;
        if baseline.is_none() {
            opts.baseline = Baseline::Known { value: plan.params.x0, time: 0.0 };
        }
        let summary = replicate_isrp(&plan, &opts, ctx.exec).map_err(CliError::from_compute)?;
        let header = [
            "j", "t_j", "successes", "failures", "mean", "variance", "skewness", "min", "q025", "q25", "median", "q75",
            "q975", "max", "delta_variance",
        ];
        let rows: Vec<Vec<String>> = summary
            .intervals
            .iter()
            .map(|s| {
                let mut r = vec![
                    s.j.to_string(),
                    num(s.t_j),
                    s.successes.to_string(),
                    s.failures.to_string(),
                    num(s.mean),
                    num(s.variance),
                    num(s.skewness),
                ];
                r.extend(s.quantiles.iter().map(|&x| num(x)));
                r.push(opt(s.delta_variance));
                r
            })
            .collect();
        stage.write_csv("summary.csv", &header, &rows)?;
        stage.write_json("summary.json", &serde_json::json!({ "plan": plan, "summary": summary }))?;
        let long: Vec<Vec<String>> = summary
            .samples
            .iter()
            .enumerate()
            .flat_map(|(i, rep)| {
                summary
                    .intervals
                    .iter()
                    .zip(rep)
                    .map(move |(s, v)| vec![i.to_string(), s.j.to_string(), opt(*v)])
            })
            .collect();
        stage.write_csv("estimates.csv", &["replicate", "j", "estimate"], &long)?;
    }
    stage.commit()?;
    Ok(())
}
