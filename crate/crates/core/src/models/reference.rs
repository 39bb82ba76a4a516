//! Representative parameter sets, one per catalog row, matching the
//! illustrative size profiles shown for each derived model.
//!
//! Every set keeps the solution positive and finite on `t ∈ [0, 19]`.

use std::f64::consts::FRAC_PI_4;

use super::{ModelId, Parent, Variation};
use crate::params::ParameterSet;

pub fn reference_params(model: ModelId) -> ParameterSet {
    use Parent::*;
    use Variation::*;
    let base = ParameterSet { x0: 10.0, k: 50.0, k0: 50.0, omega: FRAC_PI_4, ..Default::default() };
    let set = |r0: f64, c: f64| ParameterSet { r0, c, ..base };
    match (model.parent, model.variation) {
        (Exponential, ConstantParams) => set(0.2, 1.0),
        (Exponential, LinearDecayingRate) => set(0.2, 0.05),
        (Exponential, HyperbolicRate) => set(0.5, 0.2),
        (Exponential, ReciprocalRate) => set(0.3, 1.0),
        (Exponential, BlowUpRate) => set(0.04, 1.0),
        (Exponential, ExpDecayRate) => set(1.0, 0.5),
        (Exponential, PowerRate) => set(1.0, 1.2),
        (Exponential, LinearIncreasingRate) => set(0.2, 0.1),
        (Exponential, SineRate | CosineRate) => set(0.1, 0.2),
        (Exponential, HumpRate) => ParameterSet { b: 0.44, ..set(0.11, 1.0) },

        (Logistic, ConstantParams) => set(0.3, 1.0),
        (Logistic, ExpGrowthK) => set(0.3, 1.0),
        (Logistic, HyperbolicK) => set(0.5, 0.1),
        (Logistic, LinearIncreasingRate) => set(0.3, 0.1),
        (Logistic, LinearDecayingRate) => set(0.1, 0.05),
        (Logistic, PowerRate) => set(0.6, 1.2),
        (Logistic, ExpDecayRate) => set(1.3, 0.5),
        (Logistic, ExpGrowthRate) => set(0.2, 0.1),
        (Logistic, HyperbolicRate) => set(1.0, 0.5),
        (Logistic, SineRate | CosineRate) => set(0.2, 0.1),
        (Logistic, LinearK) => set(1.0, 0.1),

        (ThetaLogistic, ConstantParams | GompertzLimit) => set(0.3, 1.0),
        (ThetaLogistic, Richards) => ParameterSet { theta: 0.5, ..set(1.0, 1.0) },
        (ThetaLogistic, KoyaGoshu) => ParameterSet { theta: 1.1, ..set(0.5, 1.5) },
        (ThetaLogistic, LinearIncreasingRate) => ParameterSet { theta: 1.1, ..set(0.2, 0.1) },
        (ThetaLogistic, LinearDecayingRate) => ParameterSet { theta: 1.1, ..set(1.0, 0.1) },
        (ThetaLogistic, ExtendedGompertz) => set(0.5, 1.5),
        (ThetaLogistic, VonBertalanffy) => set(0.5, 1.0),
        (ThetaLogistic, GeneralizedVonBertalanffy) => ParameterSet { theta: 0.5, ..set(2.0, 1.0) },
        (ThetaLogistic, GeneralizedGompertz) => set(0.5, 2.0),
        (ThetaLogistic, CrescenzoSpina) => set(0.5, 0.5),
        (ThetaLogistic, SecondOrderExpPoly) => set(0.1, 1.0),
        (ThetaLogistic, Cooperation) => {
            ParameterSet { k: 100.0, theta: 1.0, gamma: 0.1, ..set(0.3, 1.0) }
        }
        (ThetaLogistic, MarusicBajzer) => ParameterSet { k: 100.0, theta: 1.0, ..set(0.8, 0.5) },
        (ThetaLogistic, ExpGrowthRate) => ParameterSet { k: 100.0, theta: 1.0, ..set(0.2, 0.1) },

        (ConfinedExponential, ConstantParams | DensityRate) => set(0.3, 1.0),
        (ConfinedExponential, ExpGrowthRate) => set(0.1, 0.1),
        (ConfinedExponential, PowerRate) => set(0.3, 1.5),
        (ConfinedExponential, LinearDecayingRate) => set(0.2, 0.1),
        (ConfinedExponential, LinearIncreasingRate) => set(0.2, 0.1),
        (ConfinedExponential, ExpDecayRate) => set(0.8, 0.5),
        (ConfinedExponential, HyperbolicRate) => set(0.5, 0.5),
        (ConfinedExponential, SineRate | CosineRate) => set(0.2, 0.1),
        (ConfinedExponential, LinearK) => ParameterSet { k0: 40.0, ..set(0.2, 0.1) },
        (ConfinedExponential, ExpGrowthK) => ParameterSet { k0: 40.0, ..set(0.1, 0.05) },
        (ConfinedExponential, ExpDecayK) => ParameterSet { k0: 40.0, ..set(1.0, 0.1) },

        _ => base,
    }
}
