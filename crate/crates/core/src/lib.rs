//! Growth-model catalog, interval-specific rate-parameter estimators and
//! model-selection tooling for longitudinal size data.

pub mod data;
pub mod error;
pub mod fit;
pub mod isrp;
pub mod models;
pub mod par;
pub mod params;
pub mod select;
pub mod sim;

pub use error::{Error, ErrorKind, Result};
pub use models::{Asymptote, ModelId, Parent, Variation};
pub use par::Execution;
pub use params::{Param, ParameterSet, TimeGrid};
