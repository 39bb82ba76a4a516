//! Catalog of parent growth models and their parameter-variation variants.
//!
//! A model is identified by its [`Parent`] and a [`Variation`] tag. Each
//! identifier maps to one static [`CatalogEntry`] describing the free
//! parameters, the source table row and the identification label.

mod closed;
mod export;
mod ode;
mod reference;
pub mod shape;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::{Param, ParameterSet, TimeGrid};

pub use export::{catalog_dot, catalog_json, CatalogRecord};
pub use ode::{integrate, integrate_at, rhs};
pub use reference::reference_params;
pub use shape::RateShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parent {
    Exponential,
    Logistic,
    ThetaLogistic,
    ConfinedExponential,
}

impl Parent {
    pub const ALL: [Parent; 4] = [
        Parent::Exponential,
        Parent::Logistic,
        Parent::ThetaLogistic,
        Parent::ConfinedExponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parent::Exponential => "exponential",
            Parent::Logistic => "logistic",
            Parent::ThetaLogistic => "theta_logistic",
            Parent::ConfinedExponential => "confined_exponential",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parent::Exponential => "Exponential Model",
            Parent::Logistic => "Logistic Model",
            Parent::ThetaLogistic => "Theta-Logistic Model",
            Parent::ConfinedExponential => "Confined Exponential Model",
        }
    }
}

impl fmt::Display for Parent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        match norm.as_str() {
            "exponential" | "exp" => Ok(Parent::Exponential),
            "logistic" => Ok(Parent::Logistic),
            "theta_logistic" | "theta" => Ok(Parent::ThetaLogistic),
            "confined_exponential" | "confined" | "monomolecular" => {
                Ok(Parent::ConfinedExponential)
            }
            _ => Err(Error::InvalidInput(format!("unknown parent model `{s}`"))),
        }
    }
}

/// Which parameter of the parent varies, and how.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variation {
    ConstantParams,
    LinearIncreasingRate,
    LinearDecayingRate,
    HyperbolicRate,
    ReciprocalRate,
    BlowUpRate,
    ExpDecayRate,
    ExpGrowthRate,
    PowerRate,
    SineRate,
    CosineRate,
    HumpRate,
    DensityRate,
    LinearK,
    ExpGrowthK,
    ExpDecayK,
    HyperbolicK,
    GompertzLimit,
    Richards,
    KoyaGoshu,
    ExtendedGompertz,
    VonBertalanffy,
    GeneralizedVonBertalanffy,
    GeneralizedGompertz,
    CrescenzoSpina,
    SecondOrderExpPoly,
    Cooperation,
    MarusicBajzer,
}

impl Variation {
    pub fn name(self) -> &'static str {
        use Variation::*;
        match self {
            ConstantParams => "constant_params",
            LinearIncreasingRate => "linear_increasing_rate",
            LinearDecayingRate => "linear_decaying_rate",
            HyperbolicRate => "hyperbolic_rate",
            ReciprocalRate => "reciprocal_rate",
            BlowUpRate => "blow_up_rate",
            ExpDecayRate => "exp_decay_rate",
            ExpGrowthRate => "exp_growth_rate",
            PowerRate => "power_rate",
            SineRate => "sine_rate",
            CosineRate => "cosine_rate",
            HumpRate => "hump_rate",
            DensityRate => "density_rate",
            LinearK => "linear_k",
            ExpGrowthK => "exp_growth_k",
            ExpDecayK => "exp_decay_k",
            HyperbolicK => "hyperbolic_k",
            GompertzLimit => "gompertz_limit",
            Richards => "richards",
            KoyaGoshu => "koya_goshu",
            ExtendedGompertz => "extended_gompertz",
            VonBertalanffy => "von_bertalanffy",
            GeneralizedVonBertalanffy => "generalized_von_bertalanffy",
            GeneralizedGompertz => "generalized_gompertz",
            CrescenzoSpina => "crescenzo_spina",
            SecondOrderExpPoly => "second_order_exp_poly",
            Cooperation => "cooperation",
            MarusicBajzer => "marusic_bajzer",
        }
    }
}

impl fmt::Display for Variation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A catalog model: parent plus variation.
///
/// The string form is `parent/variation`, e.g. `logistic/power_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelId {
    pub parent: Parent,
    pub variation: Variation,
}

impl ModelId {
    pub const fn new(parent: Parent, variation: Variation) -> Self {
        ModelId { parent, variation }
    }

    pub const fn constant(parent: Parent) -> Self {
        ModelId { parent, variation: Variation::ConstantParams }
    }

    /// The catalog entry, or `InvalidInput` if the pair is not in the catalog.
    pub fn entry(self) -> Result<&'static CatalogEntry> {
        CATALOG
            .iter()
            .find(|e| e.id == self)
            .ok_or_else(|| Error::InvalidInput(format!("{self} is not a catalog model")))
    }

    pub fn params(self) -> Result<&'static [Param]> {
        Ok(self.entry()?.params)
    }

    pub fn has_closed_form(self) -> bool {
        self.entry().map(|e| e.has_closed_form).unwrap_or(false)
    }

    /// The time-only rate shape, for rows whose `r` depends on `t` alone and
    /// whose `K` is constant.
    pub(crate) fn time_shape(self) -> Option<RateShape> {
        use Variation::*;
        let shape = match self.variation {
            ConstantParams | Richards | GompertzLimit => RateShape::Constant,
            LinearIncreasingRate => RateShape::LinearIncreasing,
            LinearDecayingRate => RateShape::LinearDecaying,
            HyperbolicRate => RateShape::Hyperbolic,
            ReciprocalRate => RateShape::Reciprocal,
            BlowUpRate => RateShape::BlowUp,
            ExpDecayRate => RateShape::ExpDecay,
            ExpGrowthRate => RateShape::ExpGrowth,
            PowerRate | KoyaGoshu | ExtendedGompertz => RateShape::Power,
            SineRate => RateShape::Sine,
            CosineRate => RateShape::Cosine,
            HumpRate => RateShape::Hump,
            _ => return None,
        };
        Some(shape)
    }

    /// The theta exponent actually used by a theta-logistic row.
    pub(crate) fn theta(self, p: &ParameterSet) -> f64 {
        match self.variation {
            Variation::ConstantParams => 1.0,
            Variation::VonBertalanffy => 1.0 / 3.0,
            _ => p.theta,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.parent, self.variation)
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, v) = s
            .split_once('/')
            .ok_or_else(|| Error::InvalidInput(format!("model id `{s}` must be parent/variation")))?;
        let parent: Parent = p.parse()?;
        let v = v.trim().to_ascii_lowercase();
        CATALOG
            .iter()
            .map(|e| e.id)
            .find(|id| id.parent == parent && id.variation.name() == v)
            .ok_or_else(|| Error::InvalidInput(format!("unknown model `{s}`")))
    }
}

/// Source row of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRef {
    pub table: u8,
    pub row: u8,
}

impl fmt::Display for TableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Table {} row {}", self.table, self.row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub id: ModelId,
    /// Free parameters, in the order used by fitting.
    pub params: &'static [Param],
    pub table: Option<TableRef>,
    pub label: &'static str,
    pub has_closed_form: bool,
    /// Symbolic limit of X(t) as t grows.
    pub limit: &'static str,
}

/// Limit of the size function as `t → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Asymptote {
    Finite(f64),
    Zero,
    Infinity,
    NegativeInfinity,
}

use Param::{Gamma, Omega, Theta, B, C, K, K0, R0, X0};
use Parent::{ConfinedExponential as Ce, Exponential as Ex, Logistic as Lo, ThetaLogistic as Th};
use Variation::*;

const fn row(
    parent: Parent,
    variation: Variation,
    params: &'static [Param],
    table: u8,
    row: u8,
    label: &'static str,
    has_closed_form: bool,
    limit: &'static str,
) -> CatalogEntry {
    CatalogEntry {
        id: ModelId::new(parent, variation),
        params,
        table: if table == 0 { None } else { Some(TableRef { table, row }) },
        label,
        has_closed_form,
        limit,
    }
}

/// Every implemented model, ordered by parent and table row.
pub static CATALOG: &[CatalogEntry] = &[
    row(Ex, ConstantParams, &[R0, X0], 0, 0, "Exponential Model", true, "infinity"),
    row(Ex, LinearDecayingRate, &[R0, C, X0], 2, 1, "Normal Distribution", true, "0"),
    row(Ex, HyperbolicRate, &[R0, C, X0], 2, 2, "Power Law Exponential", true, "infinity"),
    row(Ex, ReciprocalRate, &[R0, X0], 2, 3, "Linear Model", true, "infinity"),
    row(Ex, BlowUpRate, &[R0, X0], 2, 4, "Hyperbolic Model", true, "0"),
    row(Ex, ExpDecayRate, &[R0, C, X0], 2, 5, "Gompertz Model", true, "X0 exp(r0/c)"),
    row(Ex, PowerRate, &[R0, C, X0], 2, 6, "Korf Model", true, "infinity"),
    row(Ex, LinearIncreasingRate, &[R0, C, X0], 2, 7, "Linearly Increasing r", true, "infinity"),
    row(Ex, SineRate, &[R0, C, Omega, X0], 2, 8, "Periodically Varying r (sine)", true, "infinity"),
    row(Ex, CosineRate, &[R0, C, Omega, X0], 2, 9, "Periodically Varying r (cosine)", true, "infinity"),
    row(
        Ex,
        HumpRate,
        &[R0, B, C, X0],
        0,
        0,
        "Extended Gompertz Model (hump-shaped r)",
        true,
        "X0 exp(r0 Gamma(c+1)/b^(c+1))",
    ),
    row(Lo, ConstantParams, &[R0, K, X0], 0, 0, "Logistic Model", true, "K"),
    row(Lo, ExpGrowthK, &[R0, K0, X0], 3, 1, "Exponential Model", true, "infinity"),
    row(Lo, HyperbolicK, &[R0, C, K0, X0], 3, 2, "Hyperbolically Varying K", true, "0"),
    row(Lo, LinearIncreasingRate, &[R0, C, K, X0], 3, 3, "Linearly Growing r", true, "K"),
    row(Lo, LinearDecayingRate, &[R0, C, K, X0], 3, 4, "Linearly Decaying r", true, "0"),
    row(Lo, PowerRate, &[R0, C, K, X0], 3, 5, "Extended Logistic Model", true, "K"),
    row(
        Lo,
        ExpDecayRate,
        &[R0, C, K, X0],
        3,
        6,
        "Exponentially Decaying r",
        true,
        "K/(1+(K/X0-1)exp(-r0/c))",
    ),
    row(Lo, ExpGrowthRate, &[R0, C, K, X0], 3, 7, "Exponentially Growing r", true, "K"),
    row(Lo, HyperbolicRate, &[R0, C, K, X0], 3, 8, "Hyperbolically Varying r", true, "K"),
    row(Lo, SineRate, &[R0, C, Omega, K, X0], 3, 9, "Periodically Varying r (sine)", true, "K"),
    row(Lo, CosineRate, &[R0, C, Omega, K, X0], 3, 10, "Periodically Varying r (cosine)", true, "K"),
    row(Lo, LinearK, &[R0, C, K0, X0], 6, 1, "Linearly Varying K", false, "infinity"),
    row(Th, ConstantParams, &[R0, K, X0], 4, 1, "Logistic Model", true, "K"),
    row(Th, GompertzLimit, &[R0, K, X0], 4, 2, "Gompertz Model", true, "K"),
    row(Th, Richards, &[R0, K, Theta, X0], 4, 3, "Richards Model", true, "0 (theta<0), K (theta>0)"),
    row(Th, KoyaGoshu, &[R0, C, K, Theta, X0], 4, 4, "Koya-Goshu Model", true, "K"),
    row(Th, LinearIncreasingRate, &[R0, C, K, Theta, X0], 4, 5, "Linearly Increasing r", true, "K"),
    row(Th, LinearDecayingRate, &[R0, C, K, Theta, X0], 4, 6, "Linearly Decreasing r", true, "0"),
    row(Th, ExtendedGompertz, &[R0, C, K, X0], 4, 7, "Extended Gompertz Model", true, "K"),
    row(Th, VonBertalanffy, &[R0, K, X0], 4, 8, "Von Bertalanffy Model", true, "K"),
    row(
        Th,
        GeneralizedVonBertalanffy,
        &[R0, K, Theta, X0],
        4,
        9,
        "Generalized Von Bertalanffy Model",
        true,
        "K",
    ),
    row(
        Th,
        GeneralizedGompertz,
        &[R0, C, K, X0],
        4,
        10,
        "Generalized Gompertz Model",
        true,
        "0 (c<1), K (c>=1)",
    ),
    row(Th, CrescenzoSpina, &[R0, C, K, X0], 4, 11, "Crescenzo-Spina Model", true, "K"),
    row(
        Th,
        SecondOrderExpPoly,
        &[R0, K, X0],
        4,
        12,
        "Second-order Exponential Polynomial",
        true,
        "0",
    ),
    row(Th, Cooperation, &[R0, K, Theta, Gamma, X0], 6, 2, "Co-operation Model", false, "K"),
    row(Th, MarusicBajzer, &[R0, C, K, Theta, X0], 6, 3, "Marusic-Bajzer Model", false, "K"),
    row(Th, ExpGrowthRate, &[R0, C, K, Theta, X0], 6, 4, "Exponentially Increasing r", false, "K"),
    row(Ce, ConstantParams, &[R0, K, X0], 0, 0, "Confined Exponential Model", true, "K"),
    row(
        Ce,
        ExpGrowthRate,
        &[R0, C, K, X0],
        5,
        1,
        "Extreme Minimal Value Distribution",
        true,
        "K",
    ),
    row(Ce, PowerRate, &[R0, C, K, X0], 5, 2, "Weibull Distribution", true, "K"),
    row(Ce, DensityRate, &[R0, K, X0], 5, 3, "Logistic Model", true, "K"),
    row(Ce, LinearDecayingRate, &[R0, C, K, X0], 5, 4, "Linearly Decaying r", true, "-infinity"),
    row(Ce, LinearIncreasingRate, &[R0, C, K, X0], 5, 5, "Linearly Increasing r", true, "K"),
    row(
        Ce,
        ExpDecayRate,
        &[R0, C, K, X0],
        5,
        6,
        "Exponentially Decaying r",
        true,
        "K-(K-X0)exp(-r0/c)",
    ),
    row(Ce, HyperbolicRate, &[R0, C, K, X0], 5, 7, "Hyperbolically Varying r", true, "K"),
    row(Ce, SineRate, &[R0, C, Omega, K, X0], 5, 8, "Periodically Varying r (sine)", true, "K"),
    row(Ce, CosineRate, &[R0, C, Omega, K, X0], 5, 9, "Periodically Varying r (cosine)", true, "K"),
    row(Ce, LinearK, &[R0, C, K0, X0], 5, 10, "Linearly Increasing K", true, "infinity"),
    row(Ce, ExpGrowthK, &[R0, C, K0, X0], 5, 11, "Exponentially Increasing K", true, "infinity"),
    row(Ce, ExpDecayK, &[R0, C, K0, X0], 5, 12, "Exponentially Decaying K", true, "0"),
];

/// All catalog entries.
pub fn catalog() -> &'static [CatalogEntry] {
    CATALOG
}

/// Checks the parameter constraints of one catalog row.
pub fn validate(model: ModelId, p: &ParameterSet) -> Result<()> {
    let entry = model.entry()?;
    for &name in entry.params {
        let v = p.get(name);
        if !v.is_finite() {
            return Err(domain(format!("{model}: parameter {name} is not finite")));
        }
    }
    let uses = |name: Param| entry.params.contains(&name);
    let positive = |name: Param| -> Result<()> {
        if uses(name) && p.get(name) <= 0.0 {
            return Err(domain(format!("{model}: {name} must be positive, got {}", p.get(name))));
        }
        Ok(())
    };
    positive(X0)?;
    positive(R0)?;
    positive(K)?;
    positive(K0)?;
    positive(Omega)?;
    positive(B)?;
    match model.variation {
        SineRate | CosineRate => {}
        HumpRate => {
            if p.c < 0.0 {
                return Err(domain(format!("{model}: c must be non-negative, got {}", p.c)));
            }
        }
        _ => positive(C)?,
    }
    if uses(Theta) {
        let th = p.theta;
        let ok = match model.variation {
            Richards => th >= -1.0 && th != 0.0,
            GeneralizedVonBertalanffy => th > 0.0 && th < 1.0,
            _ => th > 0.0,
        };
        if !ok {
            return Err(domain(format!("{model}: theta = {th} outside the row's range")));
        }
    }
    if matches!(model.variation, GeneralizedGompertz | CrescenzoSpina | SecondOrderExpPoly)
        && p.x0 >= p.k
    {
        return Err(domain(format!("{model}: requires x0 < K")));
    }
    Ok(())
}

/// Closed-form size `X(t)`.
pub fn size(model: ModelId, p: &ParameterSet, t: f64) -> Result<f64> {
    let entry = model.entry()?;
    if !entry.has_closed_form {
        return Err(Error::UnsupportedClosedForm(model.to_string()));
    }
    validate(model, p)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(domain(format!("time must be finite and non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(p.x0);
    }
    let x = closed::size(model, p, t)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(domain(format!("{model}: size not finite at t = {t}")))
    }
}

/// Closed-form sizes at every point of a grid.
pub fn size_on_grid(model: ModelId, p: &ParameterSet, grid: &TimeGrid) -> Result<Vec<f64>> {
    grid.validate()?;
    grid.times().into_iter().map(|t| size(model, p, t)).collect()
}

/// Carrying capacity at time `t` (constant rows return `K`).
pub(crate) fn capacity(model: ModelId, p: &ParameterSet, t: f64) -> f64 {
    match (model.parent, model.variation) {
        (Lo, ExpGrowthK) => p.k0 * (p.r0 * t).exp(),
        (Lo, HyperbolicK) => p.k0 / (1.0 + p.c * t),
        (_, LinearK) => p.k0 * (1.0 + p.c * t),
        (Ce, ExpGrowthK) => p.k0 * (p.c * t).exp(),
        (Ce, ExpDecayK) => p.k0 * (-p.c * t).exp(),
        _ => p.k,
    }
}

/// The row's rate function `r(t)` or `r(t, x)`.
///
/// Rows reached through the `θ → 0` limit report the reduced coefficient
/// `θ·r`, which stays finite in the limit.
pub fn rate(model: ModelId, p: &ParameterSet, t: f64, x: f64) -> Result<f64> {
    validate(model, p)?;
    let density = matches!(
        model.variation,
        DensityRate
            | VonBertalanffy
            | GeneralizedVonBertalanffy
            | GeneralizedGompertz
            | CrescenzoSpina
            | SecondOrderExpPoly
            | Cooperation
            | MarusicBajzer
    );
    if density && !(x > 0.0) {
        return Err(domain(format!("{model}: density-dependent rate needs x > 0, got {x}")));
    }
    let v = ode::rate_unchecked(model, p, t, x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("{model}: rate not finite at t = {t}, x = {x}")))
    }
}

/// Relative growth rate `(1/X) dX/dt` along the closed-form solution.
pub fn rgr(model: ModelId, p: &ParameterSet, t: f64) -> Result<f64> {
    let x = size(model, p, t)?;
    if x == 0.0 {
        return Err(domain(format!("{model}: size is zero at t = {t}")));
    }
    Ok(ode::rhs_unchecked(model, p, t, x) / x)
}

/// The limit classification of the row, with its value when finite.
pub fn asymptotic_size(model: ModelId, p: &ParameterSet) -> Result<Asymptote> {
    validate(model, p)?;
    use Asymptote::*;
    let a = match (model.parent, model.variation) {
        (Ex, ExpDecayRate) => Finite(p.x0 * (p.r0 / p.c).exp()),
        (Ex, HumpRate) => {
            let integral = statrs::function::gamma::gamma(p.c + 1.0) / p.b.powf(p.c + 1.0);
            Finite(p.x0 * (p.r0 * integral).exp())
        }
        (Ex, LinearDecayingRate | BlowUpRate) => Zero,
        (Ex, _) => Infinity,
        (Lo, ExpDecayRate) => {
            Finite(p.k / (1.0 + (p.k / p.x0 - 1.0) * (-p.r0 / p.c).exp()))
        }
        (Lo, ExpGrowthK | LinearK) => Infinity,
        (Lo, HyperbolicK | LinearDecayingRate) => Zero,
        (Lo, _) => Finite(p.k),
        (Th, Richards) if p.theta < 0.0 => Zero,
        (Th, GeneralizedGompertz) if p.c < 1.0 => Zero,
        (Th, LinearDecayingRate | SecondOrderExpPoly) => Zero,
        (Th, _) => Finite(p.k),
        (Ce, ExpDecayRate) => Finite(p.k - (p.k - p.x0) * (-p.r0 / p.c).exp()),
        (Ce, LinearDecayingRate) => NegativeInfinity,
        (Ce, LinearK | ExpGrowthK) => Infinity,
        (Ce, ExpDecayK) => Zero,
        (Ce, _) => Finite(p.k),
    };
    Ok(a)
}
