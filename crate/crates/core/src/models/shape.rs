//! Time-dependent rate functions `r(t)` and their integrals `R(t) = ∫₀ᵗ r`.
//!
//! Every closed-form solution in the catalog whose rate varies only with
//! time is one of four templates applied to `R(t)`, so the integral is the
//! single place where each rate shape is solved.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::ParameterSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateShape {
    /// `r0`
    Constant,
    /// `r0 (1 + c t)`
    LinearIncreasing,
    /// `r0 (1 - c t)`
    LinearDecaying,
    /// `r0 / (1 + c t)`
    Hyperbolic,
    /// `r0 / (1 + r0 t)`
    Reciprocal,
    /// `r0 / (1 - r0 t)`, defined for `t < 1/r0`
    BlowUp,
    /// `r0 e^{-c t}`
    ExpDecay,
    /// `r0 e^{c t}`
    ExpGrowth,
    /// `r0 t^{c-1}`
    Power,
    /// `r0 + c sin(ω t)`
    Sine,
    /// `r0 + c cos(ω t)`
    Cosine,
    /// `r0 e^{-b t} t^c`
    Hump,
}

impl RateShape {
    pub fn value(self, p: &ParameterSet, t: f64) -> f64 {
        let (r0, c) = (p.r0, p.c);
        match self {
            RateShape::Constant => r0,
            RateShape::LinearIncreasing => r0 * (1.0 + c * t),
            RateShape::LinearDecaying => r0 * (1.0 - c * t),
            RateShape::Hyperbolic => r0 / (1.0 + c * t),
            RateShape::Reciprocal => r0 / (1.0 + r0 * t),
            RateShape::BlowUp => r0 / (1.0 - r0 * t),
            RateShape::ExpDecay => r0 * (-c * t).exp(),
            RateShape::ExpGrowth => r0 * (c * t).exp(),
            RateShape::Power => r0 * t.powf(c - 1.0),
            RateShape::Sine => r0 + c * (p.omega * t).sin(),
            RateShape::Cosine => r0 + c * (p.omega * t).cos(),
            RateShape::Hump => r0 * (-p.b * t).exp() * t.powf(c),
        }
    }

    /// `∫₀ᵗ r(s) ds` in closed form.
    pub fn cumulative(self, p: &ParameterSet, t: f64) -> Result<f64> {
        let (r0, c) = (p.r0, p.c);
        let v = match self {
            RateShape::Constant => r0 * t,
            RateShape::LinearIncreasing => r0 * (t + 0.5 * c * t * t),
            RateShape::LinearDecaying => r0 * (t - 0.5 * c * t * t),
            RateShape::Hyperbolic => {
                if 1.0 + c * t <= 0.0 {
                    return Err(domain("1 + c t must stay positive"));
                }
                (r0 / c) * (c * t).ln_1p()
            }
            RateShape::Reciprocal => {
                if 1.0 + r0 * t <= 0.0 {
                    return Err(domain("1 + r0 t must stay positive"));
                }
                (r0 * t).ln_1p()
            }
            RateShape::BlowUp => {
                if r0 * t >= 1.0 {
                    return Err(domain(format!(
                        "hyperbolic model undefined at and beyond t = 1/r0 = {}",
                        1.0 / r0
                    )));
                }
                -(-r0 * t).ln_1p()
            }
            RateShape::ExpDecay => -(r0 / c) * (-c * t).exp_m1(),
            RateShape::ExpGrowth => (r0 / c) * (c * t).exp_m1(),
            RateShape::Power => r0 * t.powf(c) / c,
            RateShape::Sine => r0 * t + (c / p.omega) * (1.0 - (p.omega * t).cos()),
            RateShape::Cosine => r0 * t + (c / p.omega) * (p.omega * t).sin(),
            RateShape::Hump => r0 * hump_integral(p.b, c, t)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain(format!("cumulative rate not finite at t = {t}")))
        }
    }
}

/// `∫₀ᵗ s^n e^{-b s} ds` for integer `n ≥ 0`:
/// `n!/b^{n+1} (1 - e^{-bt} Σ_{k≤n} (bt)^k/k!)`.
fn hump_integral(b: f64, c: f64, t: f64) -> Result<f64> {
    if c < 0.0 || c.fract() != 0.0 {
        return Err(Error::UnsupportedClosedForm(format!(
            "hump rate with non-integer exponent c = {c}"
        )));
    }
    let n = c as u32;
    let bt = b * t;
    let mut term = 1.0;
    let mut partial = 1.0;
    let mut factorial = 1.0;
    for k in 1..=n {
        term *= bt / k as f64;
        partial += term;
        factorial *= k as f64;
    }
    // For small bt the subtraction cancels; fall back to the series of the
    // remainder, Σ_{k>n} (bt)^k/k!, which is accurate there.
    let tail = if bt < 1.0 {
        let mut s = 0.0;
        let mut term = term;
        let mut k = n + 1;
        loop {
            term *= bt / k as f64;
            s += term;
            if term.abs() <= 1e-17 * s.abs() || k > n + 200 {
                break;
            }
            k += 1;
        }
        (-bt).exp() * s
    } else {
        1.0 - (-bt).exp() * partial
    };
    Ok(factorial / b.powi(n as i32 + 1) * tail)
}
