//! The quantum channel as controlled by Eve.
//!
//! Eve intercepts a fraction `mu` of the pulses with a heterodyne
//! measure-and-resend operation and taps the remaining fraction with a beam
//! splitter whose stored output she measures only after Bob announces his
//! basis. Together with the channel transmission `T` and a technical-noise
//! floor `eps_T`, this family spans every `(T, epsilon)` the legitimate users
//! can observe.

use crate::optics::{
    detect_realistic, heterodyne, homodyne, DetectorModel, QuadratureChoice, QuadraturePair,
    RngStream,
};
use crate::ParamError;

/// Eavesdropper configuration.
///
/// `mu` is the intercepted fraction, `t` the channel transmission and `eps_t`
/// the technical excess noise (input-referred, shot-noise units) added on top
/// of the attack itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    pub mu: f64,
    pub t: f64,
    pub eps_t: f64,
}

impl AttackSpec {
    pub fn new(mu: f64, t: f64, eps_t: f64) -> Result<Self, ParamError> {
        if !mu.is_finite() || !(0.0..=1.0).contains(&mu) {
            return Err(ParamError::new("mu", mu, "must lie in [0, 1]"));
        }
        if !t.is_finite() || t <= 0.0 || t > 1.0 {
            return Err(ParamError::new("T", t, "must lie in (0, 1]"));
        }
        if !eps_t.is_finite() || eps_t < 0.0 {
            return Err(ParamError::new("eps_T", eps_t, "must be finite and >= 0"));
        }
        Ok(Self { mu, t, eps_t })
    }
}

/// A Gaussian channel summary: transmission and input-referred excess noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub t: f64,
    pub epsilon: f64,
}

/// Eve's per-pulse record: exactly one of the two branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EveRecord {
    /// Intercept-resend branch: both-quadrature measurement outcome.
    Heterodyne(QuadraturePair),
    /// Beam-splitting branch: the tapped amplitude mean, held in quantum
    /// memory until Bob reveals his basis.
    BsTap(QuadraturePair),
}

/// Ground truth for one simulated pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseRecord {
    pub alice: QuadraturePair,
    pub eve: EveRecord,
    pub bob_choice: QuadratureChoice,
    pub bob_outcome: f64,
    /// Set once the pulse has been consumed by parameter estimation.
    pub revealed: bool,
}

impl PulseRecord {
    /// Whether Eve intercepted this pulse (never visible to estimation).
    pub fn intercepted(&self) -> bool {
        matches!(self.eve, EveRecord::Heterodyne(_))
    }

    pub fn eve_heterodyne(&self) -> Option<QuadraturePair> {
        match self.eve {
            EveRecord::Heterodyne(q) => Some(q),
            EveRecord::BsTap(_) => None,
        }
    }

    pub fn eve_bs_tap(&self) -> Option<QuadraturePair> {
        match self.eve {
            EveRecord::BsTap(q) => Some(q),
            EveRecord::Heterodyne(_) => None,
        }
    }
}

/// Beam-splitting transmission of one pulse: the forwarded coherent amplitude
/// is `sqrt(T) * alice` and Eve's stored tap has mean `sqrt(1-T) * alice`.
/// Both are deterministic means; shot noise appears only at detection.
pub fn channel_bs(alice: QuadraturePair, spec: &AttackSpec) -> (QuadraturePair, QuadraturePair) {
    let resent_mean = alice.scale(spec.t.sqrt());
    let eve_tap_mean = alice.scale((1.0 - spec.t).sqrt());
    (resent_mean, eve_tap_mean)
}

/// Intercept-resend transmission of one pulse: Eve heterodynes the incoming
/// state and resends a coherent state of amplitude `sqrt(T)` times her
/// record, mimicking the line loss. Returns `(resent_mean, eve_record)`.
pub fn channel_ir(
    alice: QuadraturePair,
    spec: &AttackSpec,
    rng: &mut RngStream,
) -> (QuadraturePair, QuadraturePair) {
    let eve_record = heterodyne(alice, rng);
    let resent_mean = eve_record.scale(spec.t.sqrt());
    (resent_mean, eve_record)
}

/// Sends one pulse through the attacked channel and Bob's detector.
///
/// The pulse is routed through the intercept-resend branch with probability
/// `mu` (i.i.d.), else through the beam splitter. Technical noise of
/// input-referred variance `eps_T` enters as a Gaussian of variance
/// `eta * T * eps_T` at Bob's detector, identically on both branches.
pub fn simulate_pulse(
    alice: QuadraturePair,
    spec: &AttackSpec,
    detector: DetectorModel,
    choice: QuadratureChoice,
    rng: &mut RngStream,
) -> PulseRecord {
    let (resent_mean, eve) = if rng.bernoulli(spec.mu) {
        let (resent_mean, record) = channel_ir(alice, spec, rng);
        (resent_mean, EveRecord::Heterodyne(record))
    } else {
        let (resent_mean, tap) = channel_bs(alice, spec);
        (resent_mean, EveRecord::BsTap(tap))
    };
    let ideal = homodyne(resent_mean, choice, 0.0, rng);
    let technical = rng.normal(0.0, detector.eta * spec.t * spec.eps_t);
    let bob_outcome = detect_realistic(ideal, detector, rng) + technical;
    PulseRecord {
        alice,
        eve,
        bob_choice: choice,
        bob_outcome,
        revealed: false,
    }
}

/// The Gaussian channel with the same first and second moments as the
/// mixture channel: `(T, epsilon = 2*mu + eps_T)`.
pub fn equivalent_gaussian(spec: &AttackSpec) -> ChannelParams {
    ChannelParams {
        t: spec.t,
        epsilon: 2.0 * spec.mu + spec.eps_t,
    }
}
