//! Key-rate analysis for BB84 with a triggered parametric down-conversion
//! source: thermal photon statistics, trigger-detector models, decoy-state
//! estimators, GLLP key rates, source-intensity optimization and
//! finite-size fluctuations.

pub mod commands;
pub mod error;
pub mod estimators;
pub mod finite;
pub mod keyrate;
pub mod model;
pub mod observables;
pub mod optimizer;
pub mod photonics;
pub mod protocol;
pub mod scenario;
pub mod search;
pub mod simplex;

pub use error::{Error, Result};
