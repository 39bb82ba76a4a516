use isrp_core::fit::{nls_fit, Curve, FitProblem};
use isrp_core::select::{fit_rate_form, mean_rgr, RateForm};
use isrp_core::Param;

use crate::error::{CliError, CliResult};
use crate::output::{num, Staging};
use crate::FitArgs;

use super::{heuristic_init, parse_assignment, parse_bound, parse_model, parse_param, Ctx};

/// Writes `fit.json` and `fitted.csv` (`t,observed,fitted`).
pub fn run(ctx: &Ctx, a: FitArgs) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let kind = a.curve.as_deref().or(cfg.curve.as_deref()).unwrap_or("size").to_ascii_lowercase();
    let theta = ctx.theta(a.theta)?;
    let curve = match kind.as_str() {
        "size" | "rgr" => {
            let model = parse_model(
                a.model
                    .as_deref()
                    .or(cfg.model.as_deref())
                    .ok_or_else(|| CliError::config("fit needs --model"))?,
            )?;
            model.entry().map_err(CliError::from_setting)?;
            if kind == "size" {
                Curve::Size(model)
            } else if model.has_closed_form() {
                Curve::Rgr(model)
            } else {
                return Err(CliError::config(format!("{model} has no closed form, so its RGR cannot be fitted")));
            }
        }
        "rate" => Curve::Rate(
            a.form
                .as_deref()
                .or(cfg.form.as_deref())
                .ok_or_else(|| CliError::config("--curve rate needs --form"))?
                .parse::<RateForm>()
                .map_err(CliError::from_setting)?,
        ),
        other => return Err(CliError::config(format!("unknown curve `{other}` (expected size, rgr or rate)"))),
    };

    let data = ctx.load(&a.data)?.matrix()?;
    let (t, y) = match curve {
        Curve::Size(_) => (data.times(), data.column_means()),
        _ => {
            let s = mean_rgr(&data).map_err(CliError::from_compute)?;
            (s.t, s.y)
        }
    };

    let mut init = heuristic_init(&t, &y, theta);
    if let Curve::Rate(_) = curve {
        init.r0 = y.iter().sum::<f64>() / y.len() as f64;
    }
    let mut user_init = false;
    for (name, &v) in &cfg.params {
        init.set(parse_param(name)?, v);
        user_init = true;
    }
    for s in &a.params {
        let (p, v) = parse_assignment(s)?;
        init.set(p, v);
        user_init = true;
    }
    let params = curve.params().map_err(CliError::from_setting)?;
    let known = |p: Param| -> CliResult<Param> {
        if params.contains(&p) {
            Ok(p)
        } else {
            Err(CliError::config(format!("{curve} has no parameter `{p}`")))
        }
    };
    let mut problem = FitProblem::new(curve, t.clone(), y.clone(), init).map_err(CliError::from_setting)?;
    let fixes: Vec<&String> = cfg.fix.iter().chain(&a.fix).collect();
    for name in &fixes {
        problem = problem.fixing(known(parse_param(name)?)?);
    }
    let mut bounded = false;
    for (name, b) in &cfg.bounds {
        problem = problem.bounded(known(parse_param(name)?)?, b.lower, b.upper);
        bounded = true;
    }
    for s in &a.bounds {
        let (p, lo, hi) = parse_bound(s)?;
        problem = problem.bounded(known(p)?, lo, hi);
        bounded = true;
    }

    let fit = match curve {
        Curve::Rate(form) if !user_init && fixes.is_empty() && !bounded => fit_rate_form(form, &t, &y),
        Curve::Rate(form) => nls_fit(&form.bounds(problem)),
        _ => nls_fit(&problem),
    }
    .map_err(CliError::from_compute)?;

    let fitted = fit.predict(&t).map_err(CliError::from_compute)?;
    let rows: Vec<Vec<String>> =
        t.iter().zip(&y).zip(&fitted).map(|((&t, &y), &f)| vec![num(t), num(y), num(f)]).collect();
    let mut stage = Staging::new(&ctx.out_dir(&a.out))?;
    stage.write_json("fit.json", &fit)?;
    stage.write_csv("fitted.csv", &["t", "observed", "fitted"], &rows)?;
    stage.commit()?;
    Ok(())
}
