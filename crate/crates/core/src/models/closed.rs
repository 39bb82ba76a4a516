//! Closed-form size functions. Parameters are validated by the caller.

use super::{ModelId, Parent, Variation};
use crate::error::{domain, Result};
use crate::params::ParameterSet;

/// `K [1 + ((K/x0)^θ − 1) e^{−θR}]^{−1/θ}`; for θ < 0 the bracket can reach
/// zero in finite time, after which the population is extinct.
pub(crate) fn richards(k: f64, x0: f64, theta: f64, big_r: f64) -> f64 {
    let bracket = 1.0 + ((k / x0).powf(theta) - 1.0) * (-theta * big_r).exp();
    if bracket <= 0.0 {
        return 0.0;
    }
    k * bracket.powf(-1.0 / theta)
}

/// `K exp(ln(x0/K) e^{−R})`.
fn gompertz(k: f64, x0: f64, big_r: f64) -> f64 {
    k * ((x0 / k).ln() * (-big_r).exp()).exp()
}

fn logistic(k: f64, x0: f64, big_r: f64) -> f64 {
    k / (1.0 + (k / x0 - 1.0) * (-big_r).exp())
}

fn confined(k: f64, x0: f64, big_r: f64) -> f64 {
    k - (k - x0) * (-big_r).exp()
}

pub(super) fn size(model: ModelId, p: &ParameterSet, t: f64) -> Result<f64> {
    use Parent::*;
    use Variation::*;
    let (r0, c, k, k0, x0) = (p.r0, p.c, p.k, p.k0, p.x0);
    let x = match (model.parent, model.variation) {
        (Logistic, ExpGrowthK) => k0 / ((r0 * t + k0 / x0) * (-r0 * t).exp()),
        (Logistic, HyperbolicK) => {
            let ratio = c / r0;
            let bracket =
                (1.0 + c * t - ratio) + (k0 / x0 - 1.0 + ratio) * (-r0 * t).exp();
            if bracket <= 0.0 {
                return Err(domain(format!("{model}: solution leaves the positive axis at t = {t}")));
            }
            k0 / bracket
        }
        (ThetaLogistic, VonBertalanffy | GeneralizedVonBertalanffy) => {
            let th = model.theta(p);
            k * (1.0 + ((x0 / k).powf(th) - 1.0) * (-r0 * th * t).exp()).powf(1.0 / th)
        }
        (ThetaLogistic, GeneralizedGompertz | CrescenzoSpina | SecondOrderExpPoly) => {
            let l0 = (k / x0).ln();
            let l = log_ratio(model.variation, r0, c, l0, t);
            k * (-l).exp()
        }
        (ConfinedExponential, DensityRate) => logistic(k, x0, r0 * t),
        (ConfinedExponential, LinearK) => {
            let e = (-r0 * t).exp();
            x0 * e + k0 * (1.0 - c / r0) * (1.0 - e) + k0 * c * t
        }
        (ConfinedExponential, ExpGrowthK) => {
            x0 * (-r0 * t).exp() + r0 * k0 / (r0 + c) * ((c * t).exp() - (-r0 * t).exp())
        }
        (ConfinedExponential, ExpDecayK) => {
            let e = (-r0 * t).exp();
            if (r0 - c).abs() <= 1e-12 * r0 {
                x0 * e + r0 * k0 * t * e
            } else {
                // (e^{-ct} - e^{-rt})/(r - c) written to stay accurate as c → r
                let diff = e * ((r0 - c) * t).exp_m1() / (r0 - c);
                x0 * e + r0 * k0 * diff
            }
        }
        _ => {
            let shape = model
                .time_shape()
                .ok_or_else(|| domain(format!("{model}: no closed form")))?;
            let big_r = shape.cumulative(p, t)?;
            match (model.parent, model.variation) {
                (Exponential, _) => x0 * big_r.exp(),
                (Logistic, _) => logistic(k, x0, big_r),
                (ThetaLogistic, GompertzLimit | ExtendedGompertz) => gompertz(k, x0, big_r),
                (ThetaLogistic, _) => richards(k, x0, model.theta(p), big_r),
                (ConfinedExponential, _) => confined(k, x0, big_r),
            }
        }
    };
    Ok(x)
}

/// `L(t) = ln(K/X)` for the log-power rows, which solve `L' = −r0 L^m`.
/// The exact solution reaches zero in finite time when `m < 1`; it stays there.
fn log_ratio(variation: Variation, r0: f64, c: f64, l0: f64, t: f64) -> f64 {
    // exponent m of L in L' = -r0 L^m
    let m = match variation {
        Variation::GeneralizedGompertz => c,
        Variation::CrescenzoSpina => c + 1.0,
        _ => 0.5,
    };
    if (m - 1.0).abs() < 1e-12 {
        return l0 * (-r0 * t).exp();
    }
    let base = 1.0 + (m - 1.0) * r0 * t * l0.powf(m - 1.0);
    if base <= 0.0 {
        return 0.0;
    }
    l0 * base.powf(-1.0 / (m - 1.0))
}
