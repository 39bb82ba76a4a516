use isrp_core::data::{Series, TrajectoryMatrix};
use isrp_core::isrp::IsrpSeries;
use isrp_core::select::{detect_variation, moving_average, select_model, DetectOptions, RateForm, SelectOptions};

use crate::error::{CliError, CliResult};
use crate::output::{num, opt, Staging};
use crate::SelectArgs;

use super::Ctx;

fn smooth(data: &TrajectoryMatrix, window: usize) -> CliResult<TrajectoryMatrix> {
    let t = data.times();
    let mut rows = Vec::with_capacity(data.n());
    let mut grid_series = None;
    for i in 0..data.n() {
        let s = Series::new(t.clone(), data.row(i)).map_err(CliError::from_input)?;
        let m = moving_average(&s, window).map_err(CliError::from_compute)?;
        rows.push(m.y.clone());
        grid_series.get_or_insert(m);
    }
    let grid = grid_series
        .ok_or_else(|| CliError::data("no trajectories to smooth"))?
        .grid()
        .map_err(CliError::from_input)?;
    TrajectoryMatrix::from_rows(grid, &rows).map_err(CliError::from_input)
}

/// `(j, t, value)` of the successful estimates, timed at window midpoints.
fn profile_points(series: &IsrpSeries) -> Vec<(usize, f64, f64)> {
    let (t, v) = series.midpoint_pairs();
    series.estimates().zip(t.into_iter().zip(v)).map(|(e, (t, v))| (e.j, t, v)).collect()
}

/// Writes `report.json`, `report.txt`, `isrp_profile.csv` (observed ISRP
/// and every fitted rate form) and `model_fits.csv` (size data and every
/// fitted model).
pub fn run(ctx: &Ctx, a: SelectArgs) -> CliResult<()> {
    let cfg = &ctx.cfg;
    let parent = ctx.parent(&a.parent)?;
    let mut data = ctx.load(&a.data)?.matrix()?;
    if let Some(w) = a.moving_average.or(cfg.moving_average) {
        data = smooth(&data, w)?;
    }

    let mut opts = DetectOptions::new(parent);
    opts.profile.theta = ctx.theta(a.theta)?;
    opts.execution = ctx.exec;
    opts.early_only = a.early_only || cfg.early_only.unwrap_or(false);
    if let Some(names) = a.forms.as_ref().or(cfg.forms.as_ref()) {
        opts.forms = names
            .iter()
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<RateForm>().map_err(CliError::from_setting))
            .collect::<CliResult<_>>()?;
        if opts.forms.is_empty() {
            return Err(CliError::config("--forms lists no rate forms"));
        }
    }
    if a.periodic || cfg.periodic.unwrap_or(false) {
        opts.forms.extend([RateForm::Sine, RateForm::Cosine]);
    }
    let cutoff = a.cutoff.or(cfg.cutoff).unwrap_or(SelectOptions::default().cutoff);
    if !(cutoff >= 0.0) {
        return Err(CliError::config(format!("cutoff must be non-negative, got {cutoff}")));
    }
    let sel = SelectOptions { cutoff, theta: opts.profile.theta, execution: ctx.exec };

    let stage = detect_variation(&data, &opts).map_err(CliError::from_compute)?;
    let report = select_model(&data, &stage, &sel).map_err(CliError::from_compute)?;

    let points: Vec<_> =
        profile_points(&stage.series).into_iter().filter(|(j, _, _)| stage.used_intervals.contains(j)).collect();
    let pt: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fitted_forms: Vec<_> = stage.ranked.iter().filter_map(|r| Some((r.form, r.fit.as_ref()?))).collect();
    let form_curves = fitted_forms
        .iter()
        .map(|(_, f)| f.predict(&pt))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::from_compute)?;
    let mut header = vec!["j".to_string(), "t".into(), "isrp".into()];
    header.extend(fitted_forms.iter().map(|(form, _)| form.to_string()));
    let rows: Vec<Vec<String>> = points
        .iter()
        .enumerate()
        .map(|(i, &(j, t, v))| {
            let mut r = vec![j.to_string(), num(t), num(v)];
            r.extend(form_curves.iter().map(|c| num(c[i])));
            r
        })
        .collect();

    let t = data.times();
    let y = data.column_means();
    let model_curves: Vec<(String, Vec<Option<f64>>)> = report
        .model_stage
        .iter()
        .filter_map(|m| {
            let f = m.fit.as_ref()?;
            let v = f.predict(&t).ok()?;
            Some((m.model.to_string(), v.into_iter().map(Some).collect()))
        })
        .collect();
    let mut mheader = vec!["t".to_string(), "observed".into()];
    mheader.extend(model_curves.iter().map(|(name, _)| name.clone()));
    let mrows: Vec<Vec<String>> = t
        .iter()
        .enumerate()
        .map(|(i, &ti)| {
            let mut r = vec![num(ti), num(y[i])];
            r.extend(model_curves.iter().map(|(_, c)| opt(c[i])));
            r
        })
        .collect();

    let mut out = Staging::new(&ctx.out_dir(&a.out))?;
    out.write_json("report.json", &report)?;
    out.write_bytes("report.txt", report.text_summary().as_bytes())?;
    out.write_csv("isrp_profile.csv", &header.iter().map(String::as_str).collect::<Vec<_>>(), &rows)?;
    out.write_csv("model_fits.csv", &mheader.iter().map(String::as_str).collect::<Vec<_>>(), &mrows)?;
    out.commit()?;
    Ok(())
}
