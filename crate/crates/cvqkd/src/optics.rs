//! Phase-space primitives: quadrature bookkeeping, seeded RNG streams, and the
//! elementary preparation/measurement statistics all channel models are built
//! from.
//!
//! Every quadrature in this crate is expressed in shot-noise units, i.e. the
//! variance of an ideal homodyne measurement of the vacuum is exactly 1.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::ParamError;

/// A point `(x, p)` in phase space, in shot-noise units.
///
/// A coherent state of mean amplitude `(x, p)` produces homodyne outcomes of
/// mean `x` (or `p`) and unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePair {
    pub x: f64,
    pub p: f64,
}

impl QuadraturePair {
    pub const ZERO: Self = Self { x: 0.0, p: 0.0 };

    /// Panics if either component is non-finite.
    pub fn new(x: f64, p: f64) -> Self {
        assert!(
            x.is_finite() && p.is_finite(),
            "quadratures must be finite, got ({x}, {p})"
        );
        Self { x, p }
    }

    /// The component selected by a homodyne basis choice.
    pub fn component(&self, choice: QuadratureChoice) -> f64 {
        match choice {
            QuadratureChoice::X => self.x,
            QuadratureChoice::P => self.p,
        }
    }

    /// Amplitude scaling, e.g. by `sqrt(T)` across a beam splitter.
    pub fn scale(&self, gain: f64) -> Self {
        Self {
            x: gain * self.x,
            p: gain * self.p,
        }
    }
}

/// Which quadrature a homodyne detector measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureChoice {
    X,
    P,
}

/// Alice's Gaussian modulation variance `V_A`, in shot-noise units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationParams {
    pub v_a: f64,
}

impl ModulationParams {
    pub fn new(v_a: f64) -> Result<Self, ParamError> {
        if !v_a.is_finite() || v_a < 0.0 {
            return Err(ParamError::new("V_A", v_a, "must be finite and >= 0"));
        }
        Ok(Self { v_a })
    }
}

/// Bob's homodyne detector: efficiency `eta` in `(0, 1]`.
///
/// The detector is modelled as a beam splitter of transmissivity `eta` mixing
/// the incoming mode with vacuum ahead of an ideal homodyne measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    pub eta: f64,
}

impl DetectorModel {
    pub fn new(eta: f64) -> Result<Self, ParamError> {
        if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
            return Err(ParamError::new("eta", eta, "must lie in (0, 1]"));
        }
        Ok(Self { eta })
    }
}

/// A seeded, stream-addressed random number generator.
///
/// Contract: identical `(seed, stream_id)` reproduce bit-identical draw
/// sequences; distinct stream ids yield statistically independent streams.
/// Simulation drivers give each block its own stream id so that blocks can be
/// run in any order (or in parallel) without changing results.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha12Rng,
    seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            inner,
            seed,
            stream_id,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// One standard normal draw (ziggurat).
    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// A Gaussian draw with the given mean and variance.
    ///
    /// Panics if `variance` is negative or non-finite.
    pub fn normal(&mut self, mean: f64, variance: f64) -> f64 {
        assert!(
            variance.is_finite() && variance >= 0.0,
            "variance must be finite and >= 0, got {variance}"
        );
        mean + variance.sqrt() * self.standard_normal()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.inner.random_bool(p)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Draws one coherent-state amplitude from Alice's modulator: `x` and `p` are
/// independent zero-mean Gaussians of variance `V_A` each.
pub fn draw_alice_state(modulation: ModulationParams, rng: &mut RngStream) -> QuadraturePair {
    QuadraturePair {
        x: rng.normal(0.0, modulation.v_a),
        p: rng.normal(0.0, modulation.v_a),
    }
}

/// Ideal (shot-noise-limited) homodyne measurement of a coherent state of the
/// given mean amplitude: outcome is Gaussian with mean equal to the selected
/// quadrature and variance `1 + extra_noise_var`.
///
/// Panics if `extra_noise_var` is negative.
pub fn homodyne(
    mean: QuadraturePair,
    choice: QuadratureChoice,
    extra_noise_var: f64,
    rng: &mut RngStream,
) -> f64 {
    assert!(
        extra_noise_var >= 0.0,
        "extra_noise_var must be >= 0, got {extra_noise_var}"
    );
    rng.normal(mean.component(choice), 1.0 + extra_noise_var)
}

/// Simultaneous measurement of both quadratures of a coherent state, in the
/// unbiased-rescaled convention: each outcome component has mean equal to the
/// corresponding input quadrature and variance 2 (shot noise plus one vacuum
/// unit from splitting the mode).
pub fn heterodyne(mean: QuadraturePair, rng: &mut RngStream) -> QuadraturePair {
    QuadraturePair {
        x: rng.normal(mean.x, 2.0),
        p: rng.normal(mean.p, 2.0),
    }
}

/// Bob's imperfect detection of one channel-output draw.
///
/// `channel_output` must be a single ideal-detection draw of the channel
/// output mode (mean quadrature plus unit shot noise). The detector
/// attenuates it by `sqrt(eta)` and mixes in a vacuum draw, so any coherent
/// input of mean amplitude `a` yields mean `sqrt(eta) * a` and conditional
/// variance exactly 1.
pub fn detect_realistic(channel_output: f64, detector: DetectorModel, rng: &mut RngStream) -> f64 {
    let vacuum = rng.standard_normal();
    detector.eta.sqrt() * channel_output + (1.0 - detector.eta).sqrt() * vacuum
}
