//! Monte Carlo toolkit for a coherent-state continuous-variable QKD link
//! under eavesdropping.
//!
//! The crate simulates the full pulse pipeline — Gaussian modulation at
//! Alice, an eavesdropper-controlled channel (beam splitting, full or partial
//! intercept-resend), imperfect homodyne detection at Bob — then estimates
//! the channel parameters the legitimate users would measure and evaluates
//! the resulting information rates and key-rate verdicts.
//!
//! Modules:
//! - [`optics`]: phase-space conventions, seeded RNG streams, elementary
//!   measurement statistics (everything in shot-noise units, `N0 = 1`).
//! - [`attacks`]: the eavesdropper's channel and her measurement records.
//! - [`estimation`]: transmission / excess-noise estimation from a revealed
//!   finite subset, with standard errors and security margins.
//! - [`rates`]: mutual-information formulas, non-Gaussian rates by numerical
//!   quadrature, key rates, tolerable-noise crossing points, and Monte Carlo
//!   mutual-information estimators.
//! - [`experiment`]: block pipeline, sweep drivers and CSV emission used by
//!   the command-line front end.

pub mod attacks;
pub mod estimation;
pub mod experiment;
pub mod optics;
pub mod rates;

#[cfg(test)]
pub(crate) mod testutil;

pub use attacks::{AttackSpec, ChannelParams, EveRecord, PulseRecord};
pub use estimation::{EstimationError, EstimationResult, RevealedSubset};
pub use experiment::{BlockConfig, BlockOutcome, RunError, Scenario, SecurityParams};
pub use optics::{
    DetectorModel, ModulationParams, QuadratureChoice, QuadraturePair, RngStream,
};
pub use rates::{
    AttackModel, MiEstimate, MiEstimator, QuadratureConfig, RateError, RateInputs, RateReport,
};

/// A scalar parameter outside its documented range.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid {name} = {value}: {constraint}")]
pub struct ParamError {
    pub name: &'static str,
    pub value: f64,
    pub constraint: &'static str,
}

impl ParamError {
    pub(crate) fn new(name: &'static str, value: f64, constraint: &'static str) -> Self {
        Self {
            name,
            value,
            constraint,
        }
    }
}
