//! Named model parameters and the uniform time grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies one field of a [`ParameterSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    /// Initial (or constant) intrinsic rate, 1/time.
    R0,
    /// Variation coefficient; units depend on the form.
    C,
    /// Angular frequency of periodic forms, 1/time.
    Omega,
    /// Carrying capacity.
    K,
    /// Initial carrying capacity for time-varying K.
    K0,
    /// Shape exponent of the theta-logistic family.
    Theta,
    /// Density exponent of the co-operation model.
    Gamma,
    /// Decay rate of the hump-shaped rate `r0 e^{-bt} t^c`.
    B,
    /// Size at t = 0.
    X0,
}

impl Param {
    pub const ALL: [Param; 9] = [
        Param::R0,
        Param::C,
        Param::Omega,
        Param::K,
        Param::K0,
        Param::Theta,
        Param::Gamma,
        Param::B,
        Param::X0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::R0 => "r0",
            Param::C => "c",
            Param::Omega => "omega",
            Param::K => "k",
            Param::K0 => "k0",
            Param::Theta => "theta",
            Param::Gamma => "gamma",
            Param::B => "b",
            Param::X0 => "x0",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let p = match lower.as_str() {
            "r0" | "r" | "a" => Param::R0,
            "c" => Param::C,
            "omega" | "w" => Param::Omega,
            "k" => Param::K,
            "k0" => Param::K0,
            "theta" => Param::Theta,
            "gamma" => Param::Gamma,
            "b" => Param::B,
            "x0" | "mu0" => Param::X0,
            _ => return Err(Error::InvalidInput(format!("unknown parameter `{s}`"))),
        };
        Ok(p)
    }
}

/// Real parameters shared by every catalog model and rate form.
///
/// Fields a model does not use are ignored; which ones matter is declared by
/// [`crate::models::ModelId::params`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParameterSet {
    pub r0: f64,
    pub c: f64,
    pub omega: f64,
    pub k: f64,
    pub k0: f64,
    pub theta: f64,
    pub gamma: f64,
    pub b: f64,
    pub x0: f64,
}

impl Default for ParameterSet {
    fn default() -> Self {
        ParameterSet {
            r0: 0.3,
            c: 1.0,
            omega: std::f64::consts::FRAC_PI_4,
            k: 100.0,
            k0: 50.0,
            theta: 1.0,
            gamma: 0.0,
            b: 0.5,
            x0: 10.0,
        }
    }
}

impl ParameterSet {
    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::R0 => self.r0,
            Param::C => self.c,
            Param::Omega => self.omega,
            Param::K => self.k,
            Param::K0 => self.k0,
            Param::Theta => self.theta,
            Param::Gamma => self.gamma,
            Param::B => self.b,
            Param::X0 => self.x0,
        }
    }

    pub fn set(&mut self, p: Param, value: f64) {
        match p {
            Param::R0 => self.r0 = value,
            Param::C => self.c = value,
            Param::Omega => self.omega = value,
            Param::K => self.k = value,
            Param::K0 => self.k0 = value,
            Param::Theta => self.theta = value,
            Param::Gamma => self.gamma = value,
            Param::B => self.b = value,
            Param::X0 => self.x0 = value,
        }
    }

    pub fn with(mut self, p: Param, value: f64) -> Self {
        self.set(p, value);
        self
    }

    /// Logistic-type set `(r0, K, x0)`; other fields keep their defaults.
    pub fn logistic(r0: f64, k: f64, x0: f64) -> Self {
        ParameterSet { r0, k, x0, ..Default::default() }
    }
}

/// Uniform time grid `t_j = t0 + j h`, `j = 0..q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub h: f64,
    pub q: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, h: f64, q: usize) -> Result<Self> {
        let grid = TimeGrid { t0, h, q };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidInput(format!("grid step must be positive, got {}", self.h)));
        }
        if !self.t0.is_finite() {
            return Err(Error::InvalidInput("grid start must be finite".into()));
        }
        if self.q < 3 {
            return Err(Error::InvalidInput(format!("grid needs at least 3 points, got {}", self.q)));
        }
        Ok(())
    }

    #[inline]
    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.q).map(|j| self.time(j)).collect()
    }

    /// Recovers a grid from explicit time stamps, requiring equal spacing
    /// within `rel_tol` of the mean step.
    pub fn from_times(times: &[f64], rel_tol: f64) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidInput("need at least two time points".into()));
        }
        let n = times.len();
        let h = (times[n - 1] - times[0]) / (n - 1) as f64;
        if !(h > 0.0) {
            return Err(Error::NonUniformGrid("times must be strictly increasing".into()));
        }
        for (j, t) in times.iter().enumerate() {
            let expected = times[0] + j as f64 * h;
            if (t - expected).abs() > rel_tol * h.max(expected.abs()) {
                return Err(Error::NonUniformGrid(format!(
                    "time {t} at position {j} deviates from uniform step {h}"
                )));
            }
        }
        Ok(TimeGrid { t0: times[0], h, q: n })
    }
}
