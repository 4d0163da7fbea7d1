//! Channel-parameter estimation from the legitimate users' viewpoint.
//!
//! Alice and Bob reveal a random subset of their correlated data and fit the
//! channel transmission and excess noise from it. Estimation sees only the
//! revealed `(alice, bob)` pairs plus the trusted detector calibration —
//! never the per-pulse ground truth about Eve.

use crate::attacks::PulseRecord;
use crate::optics::{DetectorModel, RngStream};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EstimationError {
    #[error("revealed subset of {requested} exceeds the {available} available pulses")]
    SubsetTooLarge { requested: usize, available: usize },
    #[error("revealed subset must contain at least 2 pairs, got {requested}")]
    SubsetTooSmall { requested: usize },
    #[error("transmission is unmeasurable from the revealed data (zero or degenerate slope)")]
    UnmeasurableTransmission,
}

/// The revealed `(alice quadrature, bob outcome)` pairs used for estimation.
///
/// Each alice value is the quadrature matching Bob's announced basis for that
/// pulse.
#[derive(Debug, Clone)]
pub struct RevealedSubset {
    pairs: Vec<(f64, f64)>,
}

impl RevealedSubset {
    /// Builds a subset from raw pairs; at least 2 are required.
    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self, EstimationError> {
        if pairs.len() < 2 {
            return Err(EstimationError::SubsetTooSmall {
                requested: pairs.len(),
            });
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Estimated channel parameters with the decomposition
/// `chi_hat = chi0_hat + eps_hat` (total added noise = loss-induced vacuum
/// noise + excess noise, all referred to the channel input).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationResult {
    pub t_hat: f64,
    pub chi_hat: f64,
    pub chi0_hat: f64,
    pub eps_hat: f64,
    pub se_eps: f64,
    pub m: usize,
}

/// Reveals a uniformly random `m`-subset (without replacement) of the block's
/// key-candidate pulses and marks those pulses as consumed.
pub fn reveal_subset(
    block: &mut [PulseRecord],
    m: usize,
    rng: &mut RngStream,
) -> Result<RevealedSubset, EstimationError> {
    let candidates: Vec<usize> = (0..block.len()).filter(|&i| !block[i].revealed).collect();
    if m > candidates.len() {
        return Err(EstimationError::SubsetTooLarge {
            requested: m,
            available: candidates.len(),
        });
    }
    if m < 2 {
        return Err(EstimationError::SubsetTooSmall { requested: m });
    }
    let chosen = rand::seq::index::sample(rng, candidates.len(), m);
    let mut pairs = Vec::with_capacity(m);
    for idx in chosen.iter() {
        let record = &mut block[candidates[idx]];
        record.revealed = true;
        pairs.push((
            record.alice.component(record.bob_choice),
            record.bob_outcome,
        ));
    }
    RevealedSubset::from_pairs(pairs)
}

/// Least-squares channel estimation from a revealed subset.
///
/// With `a` Alice's quadrature and `b` Bob's outcome, the slope through the
/// origin `s = sum(a*b) / sum(a^2)` estimates `sqrt(eta*T)`, so
/// `T_hat = s^2 / eta`. The residual variance around the fit gives the total
/// input-referred added noise `chi_hat = resid_var / (eta*T_hat) - 1`, which
/// splits into the vacuum part `chi0_hat = 1/(eta*T_hat) - 1` and the excess
/// part `eps_hat`. The standard error of `eps_hat` follows the Gaussian
/// variance-estimator law `se = resid_var * sqrt(2/(m-1)) / (eta*T_hat)`.
///
/// Negative `eps_hat` values are reported as-is; clipping would bias sweep
/// statistics.
pub fn estimate_channel(
    subset: &RevealedSubset,
    detector: DetectorModel,
) -> Result<EstimationResult, EstimationError> {
    let m = subset.len();
    if m < 2 {
        return Err(EstimationError::SubsetTooSmall { requested: m });
    }

    let mut saa = 0.0;
    let mut sab = 0.0;
    for &(a, b) in subset.pairs() {
        saa += a * a;
        sab += a * b;
    }
    if saa == 0.0 {
        return Err(EstimationError::UnmeasurableTransmission);
    }
    let slope = sab / saa;
    if slope == 0.0 || !slope.is_finite() {
        return Err(EstimationError::UnmeasurableTransmission);
    }

    let t_hat = slope * slope / detector.eta;
    let resid_var = subset
        .pairs()
        .iter()
        .map(|&(a, b)| {
            let r = b - slope * a;
            r * r
        })
        .sum::<f64>()
        / (m as f64 - 1.0);

    let eta_t = detector.eta * t_hat;
    let chi_hat = resid_var / eta_t - 1.0;
    let chi0_hat = 1.0 / eta_t - 1.0;
    let eps_hat = chi_hat - chi0_hat;
    let se_eps = resid_var * (2.0 / (m as f64 - 1.0)).sqrt() / eta_t;

    Ok(EstimationResult {
        t_hat,
        chi_hat,
        chi0_hat,
        eps_hat,
        se_eps,
        m,
    })
}

/// The conservative excess-noise value `eps_hat + n_sigma * se_eps` fed into
/// eavesdropper bounds. Panics if `n_sigma` is negative.
pub fn eps_confidence(result: &EstimationResult, n_sigma: f64) -> f64 {
    assert!(n_sigma >= 0.0, "n_sigma must be >= 0, got {n_sigma}");
    result.eps_hat + n_sigma * result.se_eps
}
