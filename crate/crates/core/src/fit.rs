//! Damped nonlinear least squares, information criteria and bootstrap
//! model-selection frequencies.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::TrajectoryMatrix;
use crate::error::{domain, Error, Result};
use crate::models::{self, ModelId};
use crate::par::{map_indexed, Execution};
use crate::params::{Param, ParameterSet};
use crate::select::RateForm;

/// The function being fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "of")]
pub enum Curve {
    /// Size `X(t)` of a catalog model (RK4 when there is no closed form).
    Size(ModelId),
    /// Relative growth rate of a closed-form catalog model.
    Rgr(ModelId),
    /// A rate form `r(t)`, typically fitted to an ISRP or RGR series.
    Rate(RateForm),
}

impl Curve {
    /// Parameters the curve depends on.
    pub fn params(&self) -> Result<Vec<Param>> {
        match self {
            Curve::Size(m) | Curve::Rgr(m) => Ok(m.params()?.to_vec()),
            Curve::Rate(f) => Ok(f.params().to_vec()),
        }
    }

    /// Values at the given times, which may be in any order.
    pub fn eval(&self, p: &ParameterSet, t: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Curve::Size(m) if m.has_closed_form() => t.iter().map(|&s| models::size(m, p, s)).collect(),
            Curve::Size(m) => {
                let mut order: Vec<usize> = (0..t.len()).collect();
                order.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
                let sorted: Vec<f64> = order.iter().map(|&i| t[i]).collect();
                let xs = models::integrate_at(m, p, &sorted)?;
                let mut out = vec![0.0; t.len()];
                for (k, &i) in order.iter().enumerate() {
                    out[i] = xs[k];
                }
                Ok(out)
            }
            Curve::Rgr(m) => t.iter().map(|&s| models::rgr(m, p, s)).collect(),
            Curve::Rate(f) => {
                f.validate(p)?;
                let v: Vec<f64> = t.iter().map(|&s| f.value(p, s)).collect();
                if v.iter().all(|x| x.is_finite()) {
                    Ok(v)
                } else {
                    Err(domain(format!("{f} not finite on the data times")))
                }
            }
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Curve::Size(m) => write!(f, "size:{m}"),
            Curve::Rgr(m) => write!(f, "rgr:{m}"),
            Curve::Rate(r) => write!(f, "rate:{r}"),
        }
    }
}

/// Box constraint on one free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub param: Param,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitProblem {
    pub curve: Curve,
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    /// Starting values; parameters not in `free` stay fixed at these values.
    pub init: ParameterSet,
    pub free: Vec<Param>,
    pub bounds: Vec<Bound>,
}

impl FitProblem {
    /// All of the curve's parameters free, no bounds.
    pub fn new(curve: Curve, t: Vec<f64>, y: Vec<f64>, init: ParameterSet) -> Result<Self> {
        let free = curve.params()?;
        Ok(FitProblem { curve, t, y, init, free, bounds: Vec::new() })
    }

    pub fn fixing(mut self, param: Param) -> Self {
        self.free.retain(|p| *p != param);
        self
    }

    pub fn bounded(mut self, param: Param, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.bounds.push(Bound { param, lower, upper });
        self
    }

    /// Same curve, inits and constraints on new data.
    pub fn with_data(&self, t: Vec<f64>, y: Vec<f64>) -> Self {
        FitProblem { t, y, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        if self.t.len() != self.y.len() {
            return Err(Error::DimensionMismatch { expected: self.t.len(), got: self.y.len() });
        }
        if self.t.len() < 2 {
            return Err(Error::InvalidInput("need at least two data points".into()));
        }
        if self.t.len() <= self.free.len() {
            return Err(Error::InvalidInput(format!(
                "{} data points cannot identify {} free parameters",
                self.t.len(),
                self.free.len()
            )));
        }
        if self.t.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("data contain non-finite values".into()));
        }
        Ok(())
    }

    fn bounds_of(&self, param: Param) -> (f64, f64) {
        self.bounds.iter().filter(|b| b.param == param).fold(
            (f64::NEG_INFINITY, f64::INFINITY),
            |(lo, hi), b| (lo.max(b.lower.unwrap_or(f64::NEG_INFINITY)), hi.min(b.upper.unwrap_or(f64::INFINITY))),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub curve: Curve,
    pub estimates: ParameterSet,
    pub free: Vec<Param>,
    pub rss: f64,
    pub m: usize,
    pub k: usize,
    pub aic: f64,
    pub rmse: f64,
    /// Standard errors of the free parameters; absent when `JᵀJ` is singular
    /// or there are no residual degrees of freedom.
    pub stderr: BTreeMap<Param, Option<f64>>,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    /// Fitted values at arbitrary times.
    pub fn predict(&self, t: &[f64]) -> Result<Vec<f64>> {
        self.curve.eval(&self.estimates, t)
    }

    /// Estimate ± 1.959964 standard errors for a free parameter.
    pub fn ci95(&self, p: Param) -> Option<(f64, f64)> {
        let se = (*self.stderr.get(&p)?)?;
        let v = self.estimates.get(p);
        Some((v - crate::isrp::Z_95 * se, v + crate::isrp::Z_95 * se))
    }
}

/// Gaussian-likelihood AIC counting the error variance as a parameter:
/// `m ln(2π rss/m) + m + 2(k+1)`.
pub fn aic(rss: f64, m: usize, k: usize) -> Result<f64> {
    if !(rss > 0.0) || m == 0 {
        return Err(domain(format!("AIC needs rss > 0 and m > 0, got rss = {rss}, m = {m}")));
    }
    let mf = m as f64;
    Ok(mf * (2.0 * std::f64::consts::PI * rss / mf).ln() + mf + 2.0 * (k as f64 + 1.0))
}

pub fn rmse(rss: f64, m: usize) -> f64 {
    (rss / m as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Decisive,
    Weak,
}

/// Index of the minimum AIC (first on ties) and whether the runner-up is
/// more than 10 units worse.
pub fn delta_aic_rule(aics: &[f64]) -> Result<(usize, Strength)> {
    if aics.len() < 2 {
        return Err(Error::InvalidInput("need at least two AIC values".into()));
    }
    let mut best = 0;
    for (i, &a) in aics.iter().enumerate() {
        if a < aics[best] {
            best = i;
        }
    }
    let runner_up = aics
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, &a)| a)
        .fold(f64::INFINITY, f64::min);
    let strength = if runner_up - aics[best] > 10.0 { Strength::Decisive } else { Strength::Weak };
    Ok((best, strength))
}

const MAX_ITER: usize = 500;
const RSS_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-8;
const STEP_TOL: f64 = 1e-12;
const LAMBDA0: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

struct Evaluator<'a> {
    problem: &'a FitProblem,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Evaluator<'_> {
    fn params(&self, beta: &[f64]) -> ParameterSet {
        let mut p = self.problem.init;
        for (name, v) in self.problem.free.iter().zip(beta) {
            p.set(*name, *v);
        }
        p
    }

    fn residuals(&self, beta: &[f64]) -> Result<DVector<f64>> {
        let f = self.problem.curve.eval(&self.params(beta), &self.problem.t)?;
        let r = DVector::from_iterator(f.len(), self.problem.y.iter().zip(&f).map(|(y, f)| y - f));
        if r.iter().all(|v| v.is_finite()) {
            Ok(r)
        } else {
            Err(domain("non-finite residual"))
        }
    }

    fn clamp(&self, beta: &mut [f64]) {
        for (i, b) in beta.iter_mut().enumerate() {
            *b = b.clamp(self.lower[i], self.upper[i]);
        }
    }

    /// Forward-difference Jacobian of the fitted values (`−∂r/∂β`).
    fn jacobian(&self, beta: &[f64], r: &DVector<f64>) -> Result<DMatrix<f64>> {
        let m = r.len();
        let mut jac = DMatrix::zeros(m, beta.len());
        for k in 0..beta.len() {
            let mut step = 1e-7 * (1.0 + beta[k].abs());
            if beta[k] + step > self.upper[k] {
                step = -step;
            }
            let mut trial = beta.to_vec();
            trial[k] += step;
            let rk = match self.residuals(&trial) {
                Ok(rk) => rk,
                Err(_) => {
                    step = -step;
                    trial[k] = beta[k] + step;
                    self.residuals(&trial)?
                }
            };
            for i in 0..m {
                jac[(i, k)] = (r[i] - rk[i]) / step;
            }
        }
        Ok(jac)
    }
}

/// Levenberg–Marquardt with Marquardt's diagonal scaling.
pub fn nls_fit(problem: &FitProblem) -> Result<FitResult> {
    problem.validate()?;
    let free = problem.free.clone();
    let (lower, upper): (Vec<f64>, Vec<f64>) = free.iter().map(|&p| problem.bounds_of(p)).unzip();
    let ev = Evaluator { problem, lower, upper };
    let mut beta: Vec<f64> = free.iter().map(|&p| problem.init.get(p)).collect();
    ev.clamp(&mut beta);
    let mut r = ev.residuals(&beta)?;
    let mut rss = r.norm_squared();
    let scale = problem.y.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut lambda = LAMBDA0;
    let mut converged = false;
    let mut iterations = 0;

    let jac0 = ev.jacobian(&beta, &r)?;
    if jac0.column_iter().any(|c| c.iter().all(|v| *v == 0.0)) {
        return Err(Error::SingularJacobian);
    }

    while iterations < MAX_ITER {
        iterations += 1;
        let jac = ev.jacobian(&beta, &r)?;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        if g.amax() < GRAD_TOL || rss <= 1e-30 * scale {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut cand: Vec<f64> = beta.iter().zip(delta.iter()).map(|(b, d)| b + d).collect();
            ev.clamp(&mut cand);
            match ev.residuals(&cand) {
                Ok(rc) if rc.norm_squared() < rss => {
                    let rss_new = rc.norm_squared();
                    let rel = (rss - rss_new) / rss;
                    let step: f64 = cand.iter().zip(&beta).map(|(c, b)| (c - b).powi(2)).sum::<f64>().sqrt();
                    let size: f64 = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
                    beta = cand;
                    r = rc;
                    rss = rss_new;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if rel < RSS_TOL || step <= STEP_TOL * (size + STEP_TOL) {
                        converged = true;
                    }
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !accepted {
            // No downhill step exists at machine precision: a stationary point.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    let m = problem.t.len();
    let k = free.len();
    let estimates = ev.params(&beta);
    let mut stderr = BTreeMap::new();
    let jac = ev.jacobian(&beta, &r).ok();
    let cov = jac.and_then(|j| (j.transpose() * &j).try_inverse());
    for (i, &p) in free.iter().enumerate() {
        let se = match (&cov, m > k) {
            (Some(c), true) => {
                let v = c[(i, i)] * rss / (m - k) as f64;
                (v >= 0.0 && v.is_finite()).then(|| v.sqrt())
            }
            _ => None,
        };
        stderr.insert(p, se);
    }
    Ok(FitResult {
        curve: problem.curve,
        estimates,
        free,
        rss,
        m,
        k,
        aic: aic(rss, m, k).unwrap_or(f64::NEG_INFINITY),
        rmse: rmse(rss, m),
        stderr,
        converged,
        iterations,
    })
}

/// A named candidate for bootstrap selection; its data are replaced by the
/// column means of each resample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub problem: FitProblem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub b: usize,
    pub seed: u64,
    pub candidates: Vec<String>,
    /// `aic[c][i]`: AIC of candidate `c` on resample `i`; `None` if the fit failed.
    pub aic: Vec<Vec<Option<f64>>>,
    pub wins: Vec<usize>,
    /// Resamples on which every candidate failed.
    pub failed: usize,
}

/// Row-resampling bootstrap of the AIC ranking of `candidates`.
pub fn bootstrap_select(
    data: &TrajectoryMatrix,
    candidates: &[Candidate],
    b: usize,
    seed: u64,
    exec: Execution,
) -> Result<BootstrapReport> {
    if b == 0 {
        return Err(Error::InvalidInput("B must be at least 1".into()));
    }
    if data.n() < 2 {
        return Err(Error::InvalidInput("bootstrap needs at least two rows".into()));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no bootstrap candidates".into()));
    }
    let times = data.times();
    let n = data.n();
    let per_rep: Vec<Vec<Option<f64>>> = map_indexed(exec, b, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let Ok(sample) = data.select_rows(&rows) else {
            return vec![None; candidates.len()];
        };
        let means = sample.column_means();
        candidates
            .iter()
            .map(|c| {
                nls_fit(&c.problem.with_data(times.clone(), means.clone()))
                    .ok()
                    .map(|f| f.aic)
                    .filter(|a| a.is_finite())
            })
            .collect()
    });
    let mut wins = vec![0; candidates.len()];
    let mut failed = 0;
    for rep in &per_rep {
        let best = rep
            .iter()
            .enumerate()
            .filter_map(|(c, a)| a.map(|a| (c, a)))
            .fold(None, |acc: Option<(usize, f64)>, (c, a)| match acc {
                Some((_, best)) if best <= a => acc,
                _ => Some((c, a)),
            });
        match best {
            Some((c, _)) => wins[c] += 1,
            None => failed += 1,
        }
    }
    let aic = (0..candidates.len()).map(|c| per_rep.iter().map(|rep| rep[c]).collect()).collect();
    Ok(BootstrapReport {
        b,
        seed,
        candidates: candidates.iter().map(|c| c.name.clone()).collect(),
        aic,
        wins,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Parent, Variation};

    fn logistic_problem() -> FitProblem {
        let m = ModelId::constant(Parent::Logistic);
        let truth = ParameterSet::logistic(0.3, 100.0, 10.0);
        let t: Vec<f64> = (0..20).map(|j| j as f64).collect();
        let y = t.iter().map(|&s| models::size(m, &truth, s).unwrap()).collect();
        let init = ParameterSet::logistic(0.45, 150.0, 15.0);
        FitProblem::new(Curve::Size(m), t, y, init).unwrap()
    }

    #[test]
    fn zero_residual_logistic() {
        let fit = nls_fit(&logistic_problem()).unwrap();
        assert!(fit.converged);
        assert!(fit.rss < 1e-12, "rss {}", fit.rss);
        assert!((fit.estimates.r0 - 0.3).abs() < 1e-6 * 0.3);
        assert!((fit.estimates.k - 100.0).abs() < 1e-6 * 100.0);
        assert!((fit.estimates.x0 - 10.0).abs() < 1e-6 * 10.0);
    }

    #[test]
    fn order_of_points_does_not_matter() {
        let mut p = logistic_problem();
        for (i, y) in p.y.iter_mut().enumerate() {
            *y += if i % 2 == 0 { 0.3 } else { -0.2 };
        }
        let a = nls_fit(&p).unwrap();
        let mut rev = p.clone();
        rev.t.reverse();
        rev.y.reverse();
        let b = nls_fit(&rev).unwrap();
        for param in [Param::R0, Param::K, Param::X0] {
            let (x, y) = (a.estimates.get(param), b.estimates.get(param));
            assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0), "{param}");
        }
    }

    #[test]
    fn fixed_parameters_stay_put() {
        let m = ModelId::new(Parent::Exponential, Variation::HumpRate);
        let truth = ParameterSet { r0: 0.1, b: 0.4, c: 1.0, x0: 230.0, ..Default::default() };
        let t: Vec<f64> = (0..11).map(|j| j as f64).collect();
        let y = t.iter().map(|&s| models::size(m, &truth, s).unwrap()).collect();
        let init = ParameterSet { r0: 0.15, b: 0.3, ..truth };
        let fit = nls_fit(&FitProblem::new(Curve::Size(m), t, y, init).unwrap().fixing(Param::C)).unwrap();
        assert_eq!(fit.estimates.c, 1.0);
        assert_eq!(fit.k, 3);
        assert!((fit.estimates.b - 0.4).abs() < 1e-6);
    }

    #[test]
    fn aic_and_rmse_examples() {
        let m = 12;
        let expected = m as f64 * (2.0 * std::f64::consts::PI).ln() + m as f64 + 2.0;
        assert!((aic(m as f64, m, 0).unwrap() - expected).abs() < 1e-12);
        assert!(aic(0.0, m, 0).is_err());
        assert_eq!(rmse(0.0, 5), 0.0);
        assert_eq!(rmse(4.0, 4), 1.0);
    }

    #[test]
    fn delta_aic_examples() {
        assert_eq!(delta_aic_rule(&[-27.85451, -14.5925]).unwrap(), (0, Strength::Decisive));
        assert_eq!(delta_aic_rule(&[5.0, 5.0]).unwrap(), (0, Strength::Weak));
        assert_eq!(delta_aic_rule(&[100.0, 95.0]).unwrap(), (1, Strength::Weak));
    }

    #[test]
    fn rejects_underdetermined_problem() {
        let mut p = logistic_problem();
        p.t.truncate(3);
        p.y.truncate(3);
        assert!(matches!(nls_fit(&p), Err(Error::InvalidInput(_))));
    }
}
