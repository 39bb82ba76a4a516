//! Interval-specific rate parameter (ISRP) estimators and their
//! delta-method variances.
//!
//! The three sigmoid parents share one algebraic structure. With the
//! transform `g` (logistic `1/x`, theta-logistic `x^{-θ}`, confined
//! exponential `-x`) the mean satisfies
//! `g(μ_t) = g(K) + (g(μ_0) − g(K)) e^{−ρt}` where `ρ = θr` (theta) or `r`.
//! For a triplet `(x, y, z)` at `t_j, t_j+h, t_j+2h` put
//! `a = g(x) − g(y)` and `b = g(y) − g(z)`. Then
//!
//! * `r̂ = ln(a/b) / (θh)`,
//! * `ζ = a²/(a−b) · (a/b)^{t_j/h}` and `η = g(μ_0) − ζ`,
//! * `K̂ = g⁻¹(η)`,
//!
//! where `t_j` is measured from the time of the baseline mean `μ_0`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{format_number, TrajectoryMatrix};
use crate::error::{Error, ErrorKind, Result};
use crate::models::Parent;
use crate::sim::{koopman_matrix, KoopmanCov};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    R,
    K,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::R => "r",
            Target::K => "k",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "r" => Ok(Target::R),
            "k" => Ok(Target::K),
            _ => Err(Error::InvalidInput(format!("unknown ISRP target `{s}` (expected r or k)"))),
        }
    }
}

/// Three consecutive means and the time of the first one, measured from the
/// baseline mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanTriplet {
    pub mu_j: f64,
    pub mu_j1: f64,
    pub mu_j2: f64,
    pub t_j: f64,
    pub h: f64,
}

impl MeanTriplet {
    pub fn new(mu: [f64; 3], t_j: f64, h: f64) -> Self {
        MeanTriplet { mu_j: mu[0], mu_j1: mu[1], mu_j2: mu[2], t_j, h }
    }

    pub fn values(&self) -> [f64; 3] {
        [self.mu_j, self.mu_j1, self.mu_j2]
    }
}

/// Partial derivatives with respect to the window means.
pub type GradientVector = Vec<f64>;

/// The transform `g`, its derivative and the parent's rate scale `θ`.
#[derive(Debug, Clone, Copy)]
struct Transform {
    parent: Parent,
    theta: f64,
}

impl Transform {
    fn new(parent: Parent, theta: f64) -> Result<Self> {
        let theta = match parent {
            Parent::ThetaLogistic => {
                if !(theta.is_finite() && theta != 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "theta-logistic ISRP needs a finite non-zero theta, got {theta}"
                    )));
                }
                theta
            }
            _ => 1.0,
        };
        Ok(Transform { parent, theta })
    }

    fn g(&self, x: f64) -> Result<f64> {
        match self.parent {
            Parent::Logistic => {
                if x == 0.0 {
                    return Err(Error::DegenerateDenominator("zero mean size"));
                }
                Ok(1.0 / x)
            }
            Parent::ThetaLogistic => {
                if x <= 0.0 {
                    return Err(Error::NonPositiveBase(x));
                }
                Ok(x.powf(-self.theta))
            }
            _ => Ok(-x),
        }
    }

    fn dg(&self, x: f64) -> f64 {
        match self.parent {
            Parent::Logistic => -1.0 / (x * x),
            Parent::ThetaLogistic => -self.theta * x.powf(-self.theta - 1.0),
            _ => -1.0,
        }
    }

    /// `g⁻¹(η)` and its derivative.
    fn inverse(&self, eta: f64) -> Result<(f64, f64)> {
        match self.parent {
            Parent::Logistic => {
                if eta == 0.0 {
                    return Err(Error::DegenerateDenominator("eta = 0"));
                }
                Ok((1.0 / eta, -1.0 / (eta * eta)))
            }
            Parent::ThetaLogistic => {
                if eta <= 0.0 {
                    return Err(Error::NonPositiveBase(eta));
                }
                let k = eta.powf(-1.0 / self.theta);
                Ok((k, -k / (self.theta * eta)))
            }
            _ => Ok((-eta, -1.0)),
        }
    }
}

/// Differences `a`, `b` of the transformed triplet and `ln(a/b)`.
struct Core {
    a: f64,
    b: f64,
    log_ratio: f64,
    /// Gradients of `a` and `b`.
    da: [f64; 3],
    db: [f64; 3],
}

fn core(tr: &Transform, mu: [f64; 3]) -> Result<Core> {
    let [gx, gy, gz] = [tr.g(mu[0])?, tr.g(mu[1])?, tr.g(mu[2])?];
    let (a, b) = (gx - gy, gy - gz);
    if b == 0.0 {
        return Err(Error::DegenerateDenominator("consecutive means coincide"));
    }
    let ratio = a / b;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::NonPositiveLogArgument(ratio));
    }
    let [dx, dy, dz] = [tr.dg(mu[0]), tr.dg(mu[1]), tr.dg(mu[2])];
    Ok(Core { a, b, log_ratio: ratio.ln(), da: [dx, -dy, 0.0], db: [0.0, dy, -dz] })
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("step h must be positive, got {h}")))
    }
}

fn window<const N: usize>(xbar: &[f64], j: usize) -> Result<[f64; N]> {
    if j + N > xbar.len() {
        return Err(Error::WindowTooLarge { window: N, len: xbar.len().saturating_sub(j) });
    }
    let mut out = [0.0; N];
    out.copy_from_slice(&xbar[j..j + N]);
    Ok(out)
}

/// Estimate of `r` from the window starting at position `j` (0-based).
pub fn isrp_r(parent: Parent, xbar: &[f64], j: usize, h: f64, theta: f64) -> Result<f64> {
    check_h(h)?;
    if parent == Parent::Exponential {
        let [x, y] = window::<2>(xbar, j)?;
        let ratio = y / x;
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::NonPositiveLogArgument(ratio));
        }
        return Ok(ratio.ln() / h);
    }
    let tr = Transform::new(parent, theta)?;
    let c = core(&tr, window::<3>(xbar, j)?)?;
    Ok(c.log_ratio / (tr.theta * h))
}

/// `ln|ζ|`, the sign of `ζ` and the gradient of `ln|ζ|`.
fn zeta(c: &Core, p: f64) -> Result<(f64, f64, [f64; 3])> {
    let diff = c.a - c.b;
    if diff == 0.0 {
        return Err(Error::DegenerateDenominator("a - b = 0 (no curvature in the window)"));
    }
    let log_abs = 2.0 * c.a.abs().ln() - diff.abs().ln() + p * c.log_ratio;
    let sign = diff.signum();
    let mut grad = [0.0; 3];
    for i in 0..3 {
        grad[i] = (2.0 + p) * c.da[i] / c.a - (c.da[i] - c.db[i]) / diff - p * c.db[i] / c.b;
    }
    Ok((log_abs, sign, grad))
}

fn k_parts(parent: Parent, triplet: &MeanTriplet, x0bar: f64, theta: f64) -> Result<(f64, GradientVector)> {
    if parent == Parent::Exponential {
        return Err(Error::InvalidInput("the exponential model has no carrying capacity".into()));
    }
    check_h(triplet.h)?;
    if !(x0bar > 0.0) {
        return Err(Error::InvalidInput(format!("baseline mean must be positive, got {x0bar}")));
    }
    let tr = Transform::new(parent, theta)?;
    let c = core(&tr, triplet.values())?;
    let p = triplet.t_j / triplet.h;
    let (log_abs, sign, dlog) = zeta(&c, p)?;
    let z = sign * log_abs.exp();
    if !z.is_finite() {
        return Err(Error::Domain(format!("zeta overflows at t_j/h = {p}")));
    }
    let eta = tr.g(x0bar)? - z;
    let (k, dk) = tr.inverse(eta)?;
    if !k.is_finite() {
        return Err(Error::Domain("carrying capacity estimate is not finite".into()));
    }
    let grad = dlog.iter().map(|d| -dk * z * d).collect();
    Ok((k, grad))
}

/// Estimate of `K` from the window starting at position `j` (0-based).
/// `t_j` is the time of `xbar[j]` measured from the baseline `x0bar`.
pub fn isrp_k(
    parent: Parent,
    xbar: &[f64],
    x0bar: f64,
    j: usize,
    h: f64,
    t_j: f64,
    theta: f64,
) -> Result<f64> {
    let mu = window::<3>(xbar, j)?;
    k_parts(parent, &MeanTriplet::new(mu, t_j, h), x0bar, theta).map(|(k, _)| k)
}

/// Analytic gradient of the `r` estimator; `mu` has two entries for the
/// exponential parent and three otherwise.
pub fn grad_r(parent: Parent, mu: &[f64], h: f64, theta: f64) -> Result<GradientVector> {
    check_h(h)?;
    if parent == Parent::Exponential {
        let [x, y] = window::<2>(mu, 0)?;
        if x == 0.0 || y == 0.0 {
            return Err(Error::DegenerateDenominator("zero mean size"));
        }
        return Ok(vec![-1.0 / (h * x), 1.0 / (h * y)]);
    }
    let tr = Transform::new(parent, theta)?;
    let c = core(&tr, window::<3>(mu, 0)?)?;
    let s = 1.0 / (tr.theta * h);
    Ok((0..3).map(|i| s * (c.da[i] / c.a - c.db[i] / c.b)).collect())
}

/// Analytic gradient of the `K` estimator with the baseline held fixed.
pub fn grad_k(parent: Parent, triplet: &MeanTriplet, x0bar: f64, theta: f64) -> Result<GradientVector> {
    k_parts(parent, triplet, x0bar, theta).map(|(_, g)| g)
}

/// `gᵀ Σ g / n`.
pub fn delta_variance(grad: &[f64], sigma: &DMatrix<f64>, n: usize) -> Result<f64> {
    let k = grad.len();
    if sigma.nrows() != k || sigma.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, got: sigma.nrows() });
    }
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let mut s = 0.0;
    for i in 0..k {
        for j in 0..k {
            s += grad[i] * sigma[(i, j)] * grad[j];
        }
    }
    // Guard against round-off on near-singular Σ.
    Ok(s.max(0.0) / n as f64)
}

/// Where the baseline mean `μ_0` used by the `K` estimator comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Baseline {
    /// A known initial mean at the given time.
    Known { value: f64, time: f64 },
    /// The mean of the first data column, at the grid start.
    FirstColumn,
}

/// Covariance used for the delta-method variances of a profile.
#[derive(Debug, Clone, PartialEq)]
pub enum VarianceSource {
    /// Sample covariance of the window columns; unavailable for one row.
    SampleCovariance,
    /// Koopman structure `σ²ρ^{|i−j|}`.
    Koopman(KoopmanCov),
    /// Full `q × q` matrix; window blocks are taken from it.
    Fixed(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileOptions {
    pub parent: Parent,
    pub target: Target,
    /// Shape exponent; only read for the theta-logistic parent.
    pub theta: f64,
    pub baseline: Baseline,
    pub variance: VarianceSource,
}

impl ProfileOptions {
    pub fn new(parent: Parent, target: Target) -> Self {
        ProfileOptions {
            parent,
            target,
            theta: 1.0,
            baseline: Baseline::FirstColumn,
            variance: VarianceSource::SampleCovariance,
        }
    }
}

/// One successful interval estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsrpEstimate {
    /// 1-based interval index.
    pub j: usize,
    /// Time of the first point of the window.
    pub t_j: f64,
    pub value: f64,
    pub variance: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

/// An interval whose estimate could not be formed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsrpFailure {
    pub j: usize,
    pub t_j: f64,
    pub kind: ErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IsrpPoint {
    Ok(IsrpEstimate),
    Failed(IsrpFailure),
}

impl IsrpPoint {
    pub fn j(&self) -> usize {
        match self {
            IsrpPoint::Ok(e) => e.j,
            IsrpPoint::Failed(f) => f.j,
        }
    }

    pub fn t_j(&self) -> f64 {
        match self {
            IsrpPoint::Ok(e) => e.t_j,
            IsrpPoint::Failed(f) => f.t_j,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            IsrpPoint::Ok(e) => Some(e.value),
            IsrpPoint::Failed(_) => None,
        }
    }

    pub fn estimate(&self) -> Option<&IsrpEstimate> {
        match self {
            IsrpPoint::Ok(e) => Some(e),
            IsrpPoint::Failed(_) => None,
        }
    }
}

/// Per-interval estimates in interval order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsrpSeries {
    pub parent: Parent,
    pub target: Target,
    pub theta: f64,
    pub h: f64,
    pub n: usize,
    pub points: Vec<IsrpPoint>,
}

impl IsrpSeries {
    pub fn estimates(&self) -> impl Iterator<Item = &IsrpEstimate> {
        self.points.iter().filter_map(IsrpPoint::estimate)
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| matches!(p, IsrpPoint::Failed(_))).count()
    }

    /// `(t, value)` pairs of the successful intervals, timed at the window
    /// midpoint `t_j + h` (`t_j + h/2` for two-point windows).
    pub fn midpoint_pairs(&self) -> (Vec<f64>, Vec<f64>) {
        let offset = if self.parent == Parent::Exponential && self.target == Target::R {
            0.5 * self.h
        } else {
            self.h
        };
        self.estimates().map(|e| (e.t_j + offset, e.value)).unzip()
    }

    /// CSV with columns `j,t_j,estimate,variance,ci_lo,ci_hi,status`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
        let err = |e: csv::Error| Error::InvalidInput(format!("CSV: {e}"));
        wtr.write_record(["j", "t_j", "estimate", "variance", "ci_lo", "ci_hi", "status"]).map_err(err)?;
        for p in &self.points {
            let rec = match p {
                IsrpPoint::Ok(e) => [
                    e.j.to_string(),
                    format_number(e.t_j),
                    format_number(e.value),
                    opt(e.variance),
                    opt(e.ci_lo),
                    opt(e.ci_hi),
                    "ok".to_string(),
                ],
                IsrpPoint::Failed(f) => [
                    f.j.to_string(),
                    format_number(f.t_j),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    f.kind.as_str().to_string(),
                ],
            };
            wtr.write_record(&rec).map_err(err)?;
        }
        wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Number of points in an estimator window.
pub fn window_len(parent: Parent, target: Target) -> usize {
    if parent == Parent::Exponential && target == Target::R {
        2
    } else {
        3
    }
}

/// Point estimate and gradient for one window of a mean profile.
pub(crate) fn estimate_with_gradient(
    opts: &ProfileOptions,
    means: &[f64],
    j0: usize,
    h: f64,
    t_offset: f64,
    x0bar: f64,
) -> Result<(f64, GradientVector)> {
    match opts.target {
        Target::R => {
            let value = isrp_r(opts.parent, means, j0, h, opts.theta)?;
            let w = window_len(opts.parent, Target::R);
            let grad = grad_r(opts.parent, &means[j0..j0 + w], h, opts.theta)?;
            Ok((value, grad))
        }
        Target::K => {
            let mu = window::<3>(means, j0)?;
            k_parts(opts.parent, &MeanTriplet::new(mu, t_offset, h), x0bar, opts.theta)
        }
    }
}

/// Baseline mean and time for a profile.
pub(crate) fn baseline_of(baseline: Baseline, means: &[f64], t0: f64) -> (f64, f64) {
    match baseline {
        Baseline::Known { value, time } => (value, time),
        Baseline::FirstColumn => (means[0], t0),
    }
}

fn sigma_block(source: &VarianceSource, data: &TrajectoryMatrix, cols: &[usize]) -> Result<Option<DMatrix<f64>>> {
    Ok(match source {
        VarianceSource::SampleCovariance => data.covariance(cols),
        VarianceSource::Koopman(cov) => Some(koopman_matrix(cov, cols.len())?),
        VarianceSource::Fixed(m) => {
            let q = data.q();
            if m.nrows() != q || m.ncols() != q {
                return Err(Error::DimensionMismatch { expected: q, got: m.nrows() });
            }
            Some(DMatrix::from_fn(cols.len(), cols.len(), |a, b| m[(cols[a], cols[b])]))
        }
    })
}

/// ISRP profile over every admissible window of the column means.
pub fn isrp_profile(data: &TrajectoryMatrix, opts: &ProfileOptions) -> Result<IsrpSeries> {
    if opts.parent == Parent::Exponential && opts.target == Target::K {
        return Err(Error::InvalidInput("the exponential model has no carrying capacity".into()));
    }
    Transform::new(opts.parent, opts.theta)?;
    let grid = *data.grid();
    let w = window_len(opts.parent, opts.target);
    if data.q() < w {
        return Err(Error::WindowTooLarge { window: w, len: data.q() });
    }
    let means = data.column_means();
    let (x0bar, t_base) = baseline_of(opts.baseline, &means, grid.t0);
    let n = data.n();
    let mut points = Vec::with_capacity(data.q() + 1 - w);
    for j0 in 0..=data.q() - w {
        let t_j = grid.time(j0);
        let outcome = estimate_with_gradient(opts, &means, j0, grid.h, t_j - t_base, x0bar)
            .and_then(|(value, grad)| {
                let cols: Vec<usize> = (j0..j0 + w).collect();
                let variance = match sigma_block(&opts.variance, data, &cols)? {
                    Some(sigma) => Some(delta_variance(&grad, &sigma, n)?),
                    None => None,
                };
                Ok((value, variance))
            });
        points.push(match outcome {
            Ok((value, variance)) => {
                let half = variance.map(|v| Z_95 * v.sqrt());
                IsrpPoint::Ok(IsrpEstimate {
                    j: j0 + 1,
                    t_j,
                    value,
                    variance,
                    ci_lo: half.map(|d| value - d),
                    ci_hi: half.map(|d| value + d),
                })
            }
            Err(e) => IsrpPoint::Failed(IsrpFailure {
                j: j0 + 1,
                t_j,
                kind: e.kind(),
                message: e.to_string(),
            }),
        });
    }
    Ok(IsrpSeries {
        parent: opts.parent,
        target: opts.target,
        theta: if opts.parent == Parent::ThetaLogistic { opts.theta } else { 1.0 },
        h: grid.h,
        n,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TimeGrid;

    fn logistic_mean(t: f64) -> f64 {
        100.0 / (1.0 + 9.0 * (-0.3 * t).exp())
    }

    #[test]
    fn exponential_examples() {
        let xs = [10.0, 10.0 * 0.3f64.exp()];
        assert!((isrp_r(Parent::Exponential, &xs, 0, 1.0, 1.0).unwrap() - 0.3).abs() < 1e-15);
        let g = grad_r(Parent::Exponential, &[10.0, 12.0], 1.0, 1.0).unwrap();
        assert!((g[0] + 0.1).abs() < 1e-15 && (g[1] - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn logistic_noiseless_recovers_r_and_k() {
        let xs: Vec<f64> = (0..3).map(|t| logistic_mean(t as f64)).collect();
        let r = isrp_r(Parent::Logistic, &xs, 0, 1.0, 1.0).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
        let k = isrp_k(Parent::Logistic, &xs, 10.0, 0, 1.0, 0.0, 1.0).unwrap();
        assert!((k - 100.0).abs() < 1e-9);
        let k_theta = isrp_k(Parent::ThetaLogistic, &xs, 10.0, 0, 1.0, 0.0, 1.0).unwrap();
        assert!((k - k_theta).abs() < 1e-12);
    }

    #[test]
    fn confined_examples() {
        let xs: Vec<f64> = (0..3).map(|t| 100.0 - 90.0 * (-0.5 * t as f64).exp()).collect();
        let r = isrp_r(Parent::ConfinedExponential, &xs, 0, 1.0, 1.0).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        let k = isrp_k(Parent::ConfinedExponential, &xs, 10.0, 0, 1.0, 0.0, 1.0).unwrap();
        assert!((k - 100.0).abs() < 1e-9);
        let g = grad_r(Parent::ConfinedExponential, &[10.0, 20.0, 28.0], 1.0, 1.0).unwrap();
        for (a, b) in g.iter().zip([-0.1, 0.225, -0.125]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn non_monotone_window_is_reported() {
        let err = isrp_r(Parent::Logistic, &[10.0, 12.0, 11.0], 0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::NonPositiveLogArgument(_)));
        let err = isrp_r(Parent::Logistic, &[10.0, 12.0], 0, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::WindowTooLarge { .. }));
    }

    #[test]
    fn delta_variance_examples() {
        let sigma = DMatrix::<f64>::identity(3, 3) * 0.001;
        let v = delta_variance(&[1.0, 0.0, 0.0], &sigma, 1000).unwrap();
        assert!((v - 1e-6).abs() < 1e-18);
        assert_eq!(delta_variance(&[0.0; 3], &sigma, 10).unwrap(), 0.0);
        assert!(matches!(
            delta_variance(&[1.0, 0.0], &sigma, 10),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn profile_of_exact_means_with_zero_covariance() {
        let grid = TimeGrid::new(1.0, 1.0, 20).unwrap();
        let means: Vec<f64> = grid.times().iter().map(|&t| logistic_mean(t)).collect();
        let data = TrajectoryMatrix::single(grid, &means).unwrap();
        let mut opts = ProfileOptions::new(Parent::Logistic, Target::R);
        opts.variance = VarianceSource::Fixed(DMatrix::zeros(20, 20));
        let s = isrp_profile(&data, &opts).unwrap();
        assert_eq!(s.points.len(), 18);
        for e in s.estimates() {
            assert!((e.value - 0.3).abs() < 1e-8);
            assert_eq!(e.variance, Some(0.0));
            assert!(e.ci_lo.unwrap() <= e.value && e.value <= e.ci_hi.unwrap());
        }
        opts.variance = VarianceSource::SampleCovariance;
        let s = isrp_profile(&data, &opts).unwrap();
        assert!(s.estimates().all(|e| e.variance.is_none()));

        opts.target = Target::K;
        opts.baseline = Baseline::Known { value: 10.0, time: 0.0 };
        let s = isrp_profile(&data, &opts).unwrap();
        for e in s.estimates().filter(|e| e.j <= 12) {
            assert!((e.value - 100.0).abs() < 1e-6 * 100.0, "j={} K={}", e.j, e.value);
        }
    }

    #[test]
    fn csv_has_status_column() {
        let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let data = TrajectoryMatrix::single(grid, &[10.0, 12.0, 11.0, 13.0]).unwrap();
        let s = isrp_profile(&data, &ProfileOptions::new(Parent::Logistic, Target::R)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("j,t_j,estimate,variance,ci_lo,ci_hi,status\n"));
        assert!(text.contains("non_positive_log_argument"));
    }
}
