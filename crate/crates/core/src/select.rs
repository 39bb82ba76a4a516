//! Two-stage identification: fit rate forms to an ISRP profile, then fit the
//! full growth models implied by the competitive forms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Series, TrajectoryMatrix};
use crate::error::{Error, Result};
use crate::fit::{nls_fit, Curve, FitProblem, FitResult};
use crate::isrp::{isrp_profile, IsrpPoint, IsrpSeries, ProfileOptions, Target};
use crate::models::{ModelId, Parent, Variation};
use crate::par::{map_indexed, Execution};
use crate::params::{Param, ParameterSet, TimeGrid};

/// A candidate shape for `r(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateForm {
    /// `r0`
    Constant,
    /// `r0 (1 + c t)`, either sign of `c`
    Linear,
    /// `r0 t^{c−1}`
    Power,
    /// `r0 e^{−ct}`
    ExpDecay,
    /// `r0 e^{ct}`
    ExpGrowth,
    /// `r0 / (1 + c t)`
    Hyperbolic,
    /// `r0 + c sin(ωt)`
    Sine,
    /// `r0 + c cos(ωt)`
    Cosine,
    /// `r0 e^{−bt} t^c`
    GompertzHump,
}

impl RateForm {
    pub const ALL: [RateForm; 9] = [
        RateForm::Constant,
        RateForm::Linear,
        RateForm::Power,
        RateForm::ExpDecay,
        RateForm::ExpGrowth,
        RateForm::Hyperbolic,
        RateForm::Sine,
        RateForm::Cosine,
        RateForm::GompertzHump,
    ];

    /// Non-periodic forms; periodic ones are opt-in.
    pub const DEFAULT: [RateForm; 6] = [
        RateForm::Constant,
        RateForm::Linear,
        RateForm::Power,
        RateForm::ExpDecay,
        RateForm::ExpGrowth,
        RateForm::Hyperbolic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RateForm::Constant => "constant",
            RateForm::Linear => "linear",
            RateForm::Power => "power",
            RateForm::ExpDecay => "exp_decay",
            RateForm::ExpGrowth => "exp_growth",
            RateForm::Hyperbolic => "hyperbolic",
            RateForm::Sine => "sine",
            RateForm::Cosine => "cosine",
            RateForm::GompertzHump => "gompertz_hump",
        }
    }

    pub fn params(self) -> &'static [Param] {
        match self {
            RateForm::Constant => &[Param::R0],
            RateForm::Sine | RateForm::Cosine => &[Param::R0, Param::C, Param::Omega],
            RateForm::GompertzHump => &[Param::R0, Param::B, Param::C],
            _ => &[Param::R0, Param::C],
        }
    }

    pub fn value(self, p: &ParameterSet, t: f64) -> f64 {
        let (r0, c) = (p.r0, p.c);
        match self {
            RateForm::Constant => r0,
            RateForm::Linear => r0 * (1.0 + c * t),
            RateForm::Power => r0 * t.powf(c - 1.0),
            RateForm::ExpDecay => r0 * (-c * t).exp(),
            RateForm::ExpGrowth => r0 * (c * t).exp(),
            RateForm::Hyperbolic => r0 / (1.0 + c * t),
            RateForm::Sine => r0 + c * (p.omega * t).sin(),
            RateForm::Cosine => r0 + c * (p.omega * t).cos(),
            RateForm::GompertzHump => r0 * (-p.b * t).exp() * t.powf(c),
        }
    }

    pub fn validate(self, p: &ParameterSet) -> Result<()> {
        for &name in self.params() {
            if !p.get(name).is_finite() {
                return Err(Error::Domain(format!("{self}: {name} is not finite")));
            }
        }
        if matches!(self, RateForm::Sine | RateForm::Cosine) && p.omega <= 0.0 {
            return Err(Error::Domain(format!("{self}: omega must be positive")));
        }
        Ok(())
    }

    /// Box constraints that keep the form inside its catalog row.
    pub fn bounds(self, problem: FitProblem) -> FitProblem {
        match self {
            RateForm::Power => problem.bounded(Param::C, Some(1e-6), None),
            RateForm::ExpDecay | RateForm::ExpGrowth | RateForm::Hyperbolic => {
                problem.bounded(Param::C, Some(0.0), None)
            }
            RateForm::Sine | RateForm::Cosine => problem.bounded(Param::Omega, Some(1e-6), None),
            RateForm::GompertzHump => {
                problem.bounded(Param::B, Some(1e-9), None).bounded(Param::C, Some(0.0), None)
            }
            _ => problem,
        }
    }

    /// The catalog model obtained by putting this form into `parent`.
    /// The sign of a fitted linear coefficient picks the increasing or
    /// decaying row.
    pub fn model_for(self, parent: Parent, c: f64) -> Option<ModelId> {
        use Variation::*;
        let linear = if c >= 0.0 { LinearIncreasingRate } else { LinearDecayingRate };
        let v = match (parent, self) {
            (Parent::ThetaLogistic, RateForm::Constant) => Richards,
            (_, RateForm::Constant) => ConstantParams,
            (_, RateForm::Linear) => linear,
            (Parent::ThetaLogistic, RateForm::Power) => KoyaGoshu,
            (Parent::ThetaLogistic, RateForm::ExpGrowth) => ExpGrowthRate,
            (Parent::ThetaLogistic, _) => return None,
            (_, RateForm::Power) => PowerRate,
            (_, RateForm::ExpDecay) => ExpDecayRate,
            (Parent::Exponential, RateForm::ExpGrowth) => return None,
            (_, RateForm::ExpGrowth) => ExpGrowthRate,
            (_, RateForm::Hyperbolic) => HyperbolicRate,
            (_, RateForm::Sine) => SineRate,
            (_, RateForm::Cosine) => CosineRate,
            (Parent::Exponential, RateForm::GompertzHump) => HumpRate,
            (_, RateForm::GompertzHump) => return None,
        };
        Some(ModelId::new(parent, v))
    }

    /// Starting points for fitting the form to `(t, r)` pairs.
    fn starts(self, t: &[f64], r: &[f64]) -> Vec<ParameterSet> {
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let first = r[0];
        let span = t.last().copied().unwrap_or(1.0).max(1e-9);
        let with = |r0: f64, c: f64| ParameterSet { r0, c, ..Default::default() };
        match self {
            RateForm::Constant => vec![with(mean, 0.0)],
            RateForm::Linear => {
                // Least-squares line α + βt, rewritten as r0 (1 + ct).
                let n = t.len() as f64;
                let tm = t.iter().sum::<f64>() / n;
                let sxx: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
                let sxy: f64 = t.iter().zip(r).map(|(x, y)| (x - tm) * (y - mean)).sum();
                let beta = if sxx > 0.0 { sxy / sxx } else { 0.0 };
                let alpha = mean - beta * tm;
                let mut v = vec![with(mean, 0.01), with(mean, -0.01)];
                if alpha.abs() > 1e-12 {
                    v.insert(0, with(alpha, beta / alpha));
                }
                v
            }
            RateForm::Power => [0.5, 1.0, 1.5, 2.0]
                .iter()
                .map(|&c| with(first / t[0].max(1e-9).powf(c - 1.0), c))
                .collect(),
            RateForm::ExpDecay | RateForm::ExpGrowth | RateForm::Hyperbolic => {
                [0.01, 0.1, 0.5, 2.0].iter().map(|&c| with(first, c)).collect()
            }
            RateForm::Sine | RateForm::Cosine => {
                let amp = r.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max).max(1e-6);
                [PI / 4.0, 2.0 * PI / span, PI / 2.0]
                    .iter()
                    .map(|&omega| ParameterSet { r0: mean, c: amp, omega, ..Default::default() })
                    .collect()
            }
            RateForm::GompertzHump => {
                let peak = r.iter().copied().fold(f64::MIN, f64::max);
                let mut v = Vec::new();
                for b in [0.2f64, 0.5, 1.0] {
                    for c in [0.5f64, 1.0, 2.0] {
                        let shape_peak = (c / b).powf(c) * (-c).exp();
                        v.push(ParameterSet { r0: peak / shape_peak, b, c, ..Default::default() });
                    }
                }
                v
            }
        }
    }
}

impl fmt::Display for RateForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RateForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        RateForm::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .or(match norm.as_str() {
                "hump" => Some(RateForm::GompertzHump),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidInput(format!("unknown rate form `{s}`")))
    }
}

/// Fits a rate form to `(t, r)` pairs from several starts and keeps the
/// lowest residual sum of squares.
pub fn fit_rate_form(form: RateForm, t: &[f64], r: &[f64]) -> Result<FitResult> {
    if t.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let mut best: Option<FitResult> = None;
    let mut last_err = None;
    for init in form.starts(t, r) {
        let problem = FitProblem::new(Curve::Rate(form), t.to_vec(), r.to_vec(), init)?;
        match nls_fit(&form.bounds(problem)) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.rss < b.rss) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::NoConvergence { iterations: 0 }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedForm {
    pub form: RateForm,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
    /// AIC minus the best AIC of the stage.
    pub delta_aic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsrpStage {
    pub series: IsrpSeries,
    /// Intervals actually used in the fits.
    pub used_intervals: Vec<usize>,
    pub ranked: Vec<RankedForm>,
    /// Constant is within ΔAIC 2 of the best form.
    pub no_variation: bool,
}

impl IsrpStage {
    pub fn best(&self) -> Option<&RankedForm> {
        self.ranked.first().filter(|r| r.fit.is_some())
    }

    pub fn aic_of(&self, form: RateForm) -> Option<f64> {
        self.ranked.iter().find(|r| r.form == form)?.fit.as_ref().map(|f| f.aic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOptions {
    pub profile: ProfileOptions,
    pub forms: Vec<RateForm>,
    /// Keep only the first half of the intervals.
    pub early_only: bool,
    pub execution: Execution,
}

impl DetectOptions {
    pub fn new(parent: Parent) -> Self {
        DetectOptions {
            profile: ProfileOptions::new(parent, Target::R),
            forms: RateForm::DEFAULT.to_vec(),
            early_only: false,
            execution: Execution::default(),
        }
    }
}

/// Orders by AIC with failures last; ties fall back to the form's canonical
/// order so the result does not depend on the input order.
fn rank<T, K: Ord + Copy>(items: &mut [T], key: impl Fn(&T) -> (Option<f64>, K)) {
    items.sort_by(|a, b| {
        let (aa, ka) = key(a);
        let (ab, kb) = key(b);
        match (aa, ab) {
            (Some(x), Some(y)) => x.total_cmp(&y).then(ka.cmp(&kb)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => ka.cmp(&kb),
        }
    });
}

/// Fits the rate forms to the profile of `r` and ranks them by AIC.
pub fn detect_variation(data: &TrajectoryMatrix, opts: &DetectOptions) -> Result<IsrpStage> {
    if opts.forms.is_empty() {
        return Err(Error::InvalidInput("no rate forms to fit".into()));
    }
    let mut profile = opts.profile.clone();
    profile.target = Target::R;
    let series = isrp_profile(data, &profile)?;
    let keep = if opts.early_only { series.points.len().div_ceil(2) } else { series.points.len() };
    let offset = if profile.parent == Parent::Exponential { 0.5 * series.h } else { series.h };
    let used: Vec<&IsrpPoint> = series.points[..keep].iter().filter(|p| p.value().is_some()).collect();
    if used.is_empty() {
        return Err(Error::EmptyProfile);
    }
    if used.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "only {} usable ISRP intervals; at least 4 are needed",
            used.len()
        )));
    }
    let t: Vec<f64> = used.iter().map(|p| p.t_j() + offset).collect();
    let r: Vec<f64> = used.iter().filter_map(|p| p.value()).collect();

    let mut forms = opts.forms.clone();
    forms.sort();
    forms.dedup();
    let fits = map_indexed(opts.execution, forms.len(), |i| fit_rate_form(forms[i], &t, &r));
    let mut ranked: Vec<RankedForm> = forms
        .iter()
        .zip(fits)
        .map(|(&form, fit)| match fit {
            Ok(f) => RankedForm { form, fit: Some(f), error: None, delta_aic: None },
            Err(e) => RankedForm { form, fit: None, error: Some(e.to_string()), delta_aic: None },
        })
        .collect();
    rank(&mut ranked, |r| (r.fit.as_ref().map(|f| f.aic).filter(|a| !a.is_nan()), r.form));
    let best = ranked.first().and_then(|r| r.fit.as_ref()).map(|f| f.aic);
    for r in &mut ranked {
        r.delta_aic = match (r.fit.as_ref(), best) {
            (Some(f), Some(b)) => Some(f.aic - b),
            _ => None,
        };
    }
    let no_variation = ranked
        .iter()
        .find(|r| r.form == RateForm::Constant)
        .and_then(|r| r.delta_aic)
        .is_some_and(|d| d <= 2.0);
    let used_intervals = used.iter().map(|p| p.j()).collect();
    Ok(IsrpStage {
        series,
        used_intervals,
        ranked,
        no_variation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub model: ModelId,
    pub label: String,
    pub from_form: RateForm,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
    pub delta_aic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub parent: Parent,
    pub isrp_stage: IsrpStage,
    pub model_stage: Vec<RankedModel>,
    pub chosen: ModelId,
    pub narrative: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectOptions {
    /// Forms within this ΔAIC of the best go on to the model stage.
    pub cutoff: f64,
    /// Shape exponent held fixed in theta-logistic model fits.
    pub theta: f64,
    pub execution: Execution,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions { cutoff: 10.0, theta: 1.0, execution: Execution::default() }
    }
}

/// Initial parameters of a full model from the stage-one rate fit.
fn model_init(model: ModelId, rate: &ParameterSet, t: &[f64], y: &[f64], theta: f64) -> ParameterSet {
    let ymax = y.iter().copied().fold(f64::MIN, f64::max);
    let mut p = ParameterSet {
        r0: rate.r0.abs().max(1e-6),
        c: rate.c.abs().max(1e-3),
        omega: rate.omega,
        b: rate.b,
        k: 1.05 * ymax,
        k0: 1.05 * ymax,
        theta,
        x0: y[0],
        ..ParameterSet::default()
    };
    if model.variation == Variation::HumpRate {
        p.c = rate.c.max(0.0);
    }
    if model.variation == Variation::SineRate || model.variation == Variation::CosineRate {
        p.c = rate.c;
    }
    // Shift the observed first value back to t = 0 along the rate.
    if t[0] > 0.0 && y[0] > 0.0 && model.parent == Parent::Exponential {
        p.x0 = y[0] * (-rate.r0 * t[0]).exp();
    }
    p
}

fn fit_model(model: ModelId, init: ParameterSet, t: &[f64], y: &[f64]) -> Result<FitResult> {
    let mut problem = FitProblem::new(Curve::Size(model), t.to_vec(), y.to_vec(), init)?;
    if model.parent == Parent::ThetaLogistic && problem.free.contains(&Param::Theta) {
        problem = problem.fixing(Param::Theta);
    }
    for p in [Param::R0, Param::K, Param::K0, Param::X0] {
        if problem.free.contains(&p) {
            problem = problem.bounded(p, Some(1e-12), None);
        }
    }
    if problem.free.contains(&Param::C)
        && !matches!(model.variation, Variation::SineRate | Variation::CosineRate)
    {
        problem = problem.bounded(Param::C, Some(1e-9), None);
    }
    let first = nls_fit(&problem);
    if first.as_ref().is_ok_and(|f| f.converged) {
        return first;
    }
    // One retry with a rescaled variation coefficient.
    let mut retry = problem.clone();
    retry.init.c *= 0.1;
    match (first, nls_fit(&retry)) {
        (Ok(a), Ok(b)) => Ok(if b.rss < a.rss { b } else { a }),
        (Ok(a), Err(_)) => Ok(a),
        (Err(_), Ok(b)) => Ok(b),
        (Err(e), Err(_)) => Err(e),
    }
}

/// Fits the full models implied by the competitive forms to the size
/// profile and chooses the minimum-AIC model.
pub fn select_model(data: &TrajectoryMatrix, stage: &IsrpStage, opts: &SelectOptions) -> Result<SelectionReport> {
    let parent = stage.series.parent;
    if stage.ranked.is_empty() {
        return Err(Error::InvalidInput("empty ISRP stage".into()));
    }
    let t = data.times();
    let y = data.column_means();
    let mut narrative = Vec::new();
    let best_form = stage.best().map(|r| r.form);
    if let Some(f) = best_form {
        narrative.push(format!("isrp stage: best rate form is {f}"));
    }
    if stage.no_variation {
        narrative.push("isrp stage: constant rate within 2 AIC units of the best form".into());
    }

    let mut candidates: Vec<(ModelId, RateForm, ParameterSet)> = Vec::new();
    for r in &stage.ranked {
        let competitive = r.delta_aic.is_some_and(|d| d <= opts.cutoff);
        if !(competitive || r.form == RateForm::Constant) {
            continue;
        }
        let rate = r.fit.as_ref().map(|f| f.estimates).unwrap_or_default();
        match r.form.model_for(parent, rate.c) {
            Some(m) if !candidates.iter().any(|c| c.0 == m) => {
                narrative.push(format!("model stage: {} -> {m}", r.form));
                candidates.push((m, r.form, rate));
            }
            Some(_) => {}
            None => narrative.push(format!("model stage: {} has no catalog row under {parent}", r.form)),
        }
    }
    if candidates.is_empty() {
        candidates.push((
            RateForm::Constant.model_for(parent, 0.0).expect("constant row exists"),
            RateForm::Constant,
            ParameterSet::default(),
        ));
    }

    let fits = map_indexed(opts.execution, candidates.len(), |i| {
        let (m, _, rate) = &candidates[i];
        fit_model(*m, model_init(*m, rate, &t, &y, opts.theta), &t, &y)
    });
    let mut model_stage: Vec<RankedModel> = candidates
        .iter()
        .zip(fits)
        .map(|((m, form, _), fit)| {
            let label = m.entry().map(|e| e.label.to_string()).unwrap_or_default();
            match fit {
                Ok(f) => RankedModel { model: *m, label, from_form: *form, fit: Some(f), error: None, delta_aic: None },
                Err(e) => RankedModel {
                    model: *m,
                    label,
                    from_form: *form,
                    fit: None,
                    error: Some(e.to_string()),
                    delta_aic: None,
                },
            }
        })
        .collect();
    rank(&mut model_stage, |r| (r.fit.as_ref().map(|f| f.aic).filter(|a| !a.is_nan()), r.model));
    let best = model_stage.first().and_then(|r| r.fit.as_ref()).map(|f| f.aic);
    for r in &mut model_stage {
        r.delta_aic = match (r.fit.as_ref(), best) {
            (Some(f), Some(b)) => Some(f.aic - b),
            _ => None,
        };
    }
    let chosen = model_stage[0].model;
    narrative.push(format!("chosen: {chosen}"));
    Ok(SelectionReport { parent, isrp_stage: stage.clone(), model_stage, chosen, narrative })
}

impl SelectionReport {
    /// Plain-text tables of both stages.
    pub fn text_summary(&self) -> String {
        let mut s = String::new();
        let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
        s.push_str(&format!("ISRP stage ({} parent)\n", self.parent));
        s.push_str(&format!("{:<16}{:>14}{:>14}{:>12}  estimates\n", "form", "RMSE", "AIC", "dAIC"));
        for r in &self.isrp_stage.ranked {
            let (rmse, aic, est) = match &r.fit {
                Some(f) => (Some(f.rmse), Some(f.aic), describe_estimates(f)),
                None => (None, None, r.error.clone().unwrap_or_default()),
            };
            s.push_str(&format!(
                "{:<16}{:>14}{:>14}{:>12}  {}\n",
                r.form.name(),
                fmt_opt(rmse),
                fmt_opt(aic),
                fmt_opt(r.delta_aic),
                est
            ));
        }
        s.push_str("\nModel stage\n");
        s.push_str(&format!("{:<56}{:>14}{:>14}{:>12}\n", "model", "RMSE", "AIC", "dAIC"));
        for r in &self.model_stage {
            s.push_str(&format!(
                "{:<56}{:>14}{:>14}{:>12}\n",
                format!("{} ({})", r.label, r.model),
                fmt_opt(r.fit.as_ref().map(|f| f.rmse)),
                fmt_opt(r.fit.as_ref().map(|f| f.aic)),
                fmt_opt(r.delta_aic)
            ));
        }
        s.push_str(&format!("\nchosen: {}\n", self.chosen));
        s
    }
}

fn describe_estimates(f: &FitResult) -> String {
    f.free
        .iter()
        .map(|&p| {
            let se = f.stderr.get(&p).copied().flatten();
            match se {
                Some(se) => format!("{p}={:.6} (se {:.3e})", f.estimates.get(p), se),
                None => format!("{p}={:.6}", f.estimates.get(p)),
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Centered moving average; the output has `len − window + 1` points.
pub fn moving_average(series: &Series, window: usize) -> Result<Series> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("window must be odd and positive, got {window}")));
    }
    if window > series.len() {
        return Err(Error::WindowTooLarge { window, len: series.len() });
    }
    let half = window / 2;
    let n_out = series.len() - window + 1;
    let mut t = Vec::with_capacity(n_out);
    let mut y = Vec::with_capacity(n_out);
    for i in 0..n_out {
        t.push(series.t[i + half]);
        y.push(series.y[i..i + window].iter().sum::<f64>() / window as f64);
    }
    Series::new(t, y)
}

/// `(ln y_{j+1} − ln y_j)/h` at the interval midpoints.
pub fn rgr_series(series: &Series) -> Result<Series> {
    let grid = series.grid()?;
    if let Some((index, &value)) = series.y.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(Error::NonPositiveValue { index, value });
    }
    let t = series.t.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let y = series.y.windows(2).map(|w| (w[1].ln() - w[0].ln()) / grid.h).collect();
    Series::new(t, y)
}

/// Column means of the per-individual log differences.
pub fn mean_rgr(data: &TrajectoryMatrix) -> Result<Series> {
    let grid: TimeGrid = *data.grid();
    let values = data.values();
    if let Some(((i, j), v)) = (0..data.n())
        .flat_map(|i| (0..data.q()).map(move |j| (i, j)))
        .map(|(i, j)| ((i, j), values[(i, j)]))
        .find(|(_, v)| *v <= 0.0)
    {
        return Err(Error::NonPositiveValue { index: i * data.q() + j, value: v });
    }
    let mut t = Vec::with_capacity(data.q() - 1);
    let mut y = Vec::with_capacity(data.q() - 1);
    for j in 0..data.q() - 1 {
        t.push(grid.time(j) + 0.5 * grid.h);
        let s: f64 = (0..data.n()).map(|i| (values[(i, j + 1)].ln() - values[(i, j)].ln()) / grid.h).sum();
        y.push(s / data.n() as f64);
    }
    Series::new(t, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn moving_average_examples() {
        let s = Series::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(moving_average(&s, 1).unwrap(), s);
        let m = moving_average(&s, 5).unwrap();
        assert_eq!((m.t.clone(), m.y.clone()), (vec![2.0], vec![3.0]));
        let c = Series::new(vec![0.0, 1.0, 2.0], vec![7.0; 3]).unwrap();
        assert_eq!(moving_average(&c, 3).unwrap().y, vec![7.0]);
        assert!(matches!(moving_average(&s, 7), Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn rgr_examples() {
        let t: Vec<f64> = (0..6).map(|j| j as f64).collect();
        let y = t.iter().map(|s| 10.0 * (0.3 * s).exp()).collect();
        let r = rgr_series(&Series::new(t.clone(), y).unwrap()).unwrap();
        assert!(r.y.iter().all(|v| (v - 0.3).abs() < 1e-12));
        assert_eq!(r.t[0], 0.5);
        let flat = rgr_series(&Series::new(t.clone(), vec![4.0; 6]).unwrap()).unwrap();
        assert!(flat.y.iter().all(|v| *v == 0.0));
        let m = ModelId::constant(Parent::Logistic);
        let p = ParameterSet::logistic(0.3, 100.0, 10.0);
        let y = t.iter().map(|&s| models::size(m, &p, s).unwrap()).collect();
        let r = rgr_series(&Series::new(t.clone(), y).unwrap()).unwrap();
        assert!(r.y.windows(2).all(|w| w[1] < w[0]));
        let bad = Series::new(t, vec![1.0, 2.0, 0.0, 3.0, 4.0, 5.0]).unwrap();
        assert!(matches!(rgr_series(&bad), Err(Error::NonPositiveValue { index: 2, .. })));
    }

    #[test]
    fn perturbed_logistic_selects_logistic() {
        let grid = TimeGrid::new(1.0, 1.0, 20).unwrap();
        let m = ModelId::constant(Parent::Logistic);
        let p = ParameterSet::logistic(0.3, 100.0, 10.0);
        let y: Vec<f64> = models::size_on_grid(m, &p, &grid)
            .unwrap()
            .iter()
            .enumerate()
            .map(|(j, v)| v * (1.0 + 0.002 * (7.0 * j as f64).sin()))
            .collect();
        let data = TrajectoryMatrix::single(grid, &y).unwrap();
        let mut opts = DetectOptions::new(Parent::Logistic);
        opts.early_only = true;
        let stage = detect_variation(&data, &opts).unwrap();
        let report = select_model(&data, &stage, &SelectOptions::default()).unwrap();
        assert_eq!(report.chosen, m, "{}", report.text_summary());
    }

    #[test]
    fn form_order_does_not_change_ranking() {
        let t: Vec<f64> = (1..12).map(|j| j as f64).collect();
        let r: Vec<f64> = t.iter().map(|s| 0.3 * s.sqrt() + 0.01 * (s * 7.0).sin()).collect();
        let a: Vec<RateForm> = RateForm::DEFAULT.to_vec();
        let mut b = a.clone();
        b.reverse();
        let fit = |forms: &[RateForm]| {
            let mut v: Vec<(RateForm, f64)> =
                forms.iter().map(|&f| (f, fit_rate_form(f, &t, &r).unwrap().aic)).collect();
            v.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
            v.into_iter().map(|x| x.0).collect::<Vec<_>>()
        };
        assert_eq!(fit(&a), fit(&b));
        assert_eq!(fit(&a)[0], RateForm::Power);
    }

    #[test]
    fn model_mapping() {
        assert_eq!(
            RateForm::Linear.model_for(Parent::Logistic, -0.2),
            Some(ModelId::new(Parent::Logistic, Variation::LinearDecayingRate))
        );
        assert_eq!(
            RateForm::Power.model_for(Parent::ConfinedExponential, 1.5),
            Some(ModelId::new(Parent::ConfinedExponential, Variation::PowerRate))
        );
        assert_eq!(RateForm::GompertzHump.model_for(Parent::Logistic, 1.0), None);
        for form in RateForm::ALL {
            for parent in Parent::ALL {
                if let Some(m) = form.model_for(parent, 1.0) {
                    assert!(m.entry().is_ok(), "{form} {parent}");
                }
            }
        }
    }
}
