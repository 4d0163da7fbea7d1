//! Information rates for the attacked channel, in bits per pulse.
//!
//! Closed forms for the Gaussian mutual information between Alice and Bob and
//! for Eve's information under the beam-splitting, intercept-resend, partial
//! intercept-resend and optimal-Gaussian attack models; the non-Gaussian
//! Alice-Bob rate of the mixture channel by deterministic numerical
//! quadrature; the reverse-reconciliation key rate `K = beta * I_AB - I_BE`;
//! the tolerable-excess-noise crossing point; and Monte Carlo
//! mutual-information estimators used as validation oracles.
//!
//! All logarithms are base 2.

use std::f64::consts::LN_2;

use crate::ParamError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RateError {
    #[error("no key-rate sign change in epsilon within [0, 2]")]
    NoCrossing,
    #[error("mutual-information estimate needs at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("samples are degenerate (zero spread or perfectly correlated)")]
    DegenerateSamples,
    #[error("entropy quadrature did not converge to the requested tolerance")]
    QuadratureNonConvergence,
    #[error("epsilon = {epsilon} is below 2*mu = {two_mu}: no valid partial-IR mixture")]
    MixtureInconsistent { epsilon: f64, two_mu: f64 },
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Inputs to the rate formulas.
///
/// `epsilon` is the total input-referred excess noise; `mu` is the
/// interception fraction used by the partial-IR quantities, whose technical
/// noise component is `epsilon - 2*mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateInputs {
    pub v_a: f64,
    pub t: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub beta: f64,
    pub mu: f64,
}

impl RateInputs {
    pub fn new(
        v_a: f64,
        t: f64,
        epsilon: f64,
        eta: f64,
        beta: f64,
        mu: f64,
    ) -> Result<Self, ParamError> {
        if !v_a.is_finite() || v_a < 0.0 {
            return Err(ParamError::new("V_A", v_a, "must be finite and >= 0"));
        }
        if !t.is_finite() || t <= 0.0 || t > 1.0 {
            return Err(ParamError::new("T", t, "must lie in (0, 1]"));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(ParamError::new("epsilon", epsilon, "must be finite and >= 0"));
        }
        if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
            return Err(ParamError::new("eta", eta, "must lie in (0, 1]"));
        }
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(ParamError::new("beta", beta, "must lie in [0, 1]"));
        }
        if !mu.is_finite() || !(0.0..=1.0).contains(&mu) {
            return Err(ParamError::new("mu", mu, "must lie in [0, 1]"));
        }
        Ok(Self {
            v_a,
            t,
            epsilon,
            eta,
            beta,
            mu,
        })
    }

    /// Copy of the inputs with a different excess noise.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Which eavesdropper model bounds `I_BE` in a key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackModel {
    /// Optimal Gaussian attack at the measured `(T, epsilon)`.
    GaussianBound,
    /// Partial intercept-resend at the given `mu`.
    PartialIr,
    /// Pure beam splitting (`epsilon = 0`).
    BeamSplit,
}

/// Gaussian mutual information between Alice and Bob:
/// `1/2 log2[(eta*T*V_A + 1 + eta*T*eps) / (1 + eta*T*eps)]`.
pub fn i_ab_gaussian(inp: &RateInputs) -> f64 {
    let eta_t = inp.eta * inp.t;
    let noise = 1.0 + eta_t * inp.epsilon;
    0.5 * ((eta_t * inp.v_a + noise) / noise).log2()
}

/// Eve's information under the optimal Gaussian (entangling-cloner) attack in
/// realistic mode, where Bob's detector inefficiency is trusted calibration:
/// `1/2 log2[(eta*T*V_A + 1 + eta*T*eps) / (eta/[1 - T + T*eps + T/(V_A+1)] + 1 - eta)]`.
pub fn i_be_gaussian(inp: &RateInputs) -> f64 {
    let eta_t = inp.eta * inp.t;
    let numerator = eta_t * inp.v_a + 1.0 + eta_t * inp.epsilon;
    let conditional = 1.0 - inp.t + inp.t * inp.epsilon + inp.t / (inp.v_a + 1.0);
    let denominator = inp.eta / conditional + 1.0 - inp.eta;
    0.5 * (numerator / denominator).log2()
}

/// Eve's information from a full intercept-resend attack:
/// `1/2 log2(1 + eta*T*(V_A + 2))`.
///
/// Eve knows her resent amplitude exactly, so her only uncertainty about
/// Bob's outcome is his unit detection noise, while Bob's total variance is
/// `eta*T*(V_A + 2) + 1`.
pub fn i_be_ir(inp: &RateInputs) -> f64 {
    0.5 * (1.0 + inp.eta * inp.t * (inp.v_a + 2.0)).log2()
}

/// Eve's information from a partial intercept-resend attack:
/// `mu * I_BE_IR + (1 - mu) * I_BE_BS`, exactly linear in `mu`. The
/// beam-splitting term is the Gaussian bound at `epsilon = 0`.
pub fn i_be_partial(inp: &RateInputs) -> f64 {
    inp.mu * i_be_ir(inp) + (1.0 - inp.mu) * i_be_gaussian(&inp.with_epsilon(0.0))
}

/// Reverse-reconciliation key rate `K = beta * I_AB - I_BE` for the selected
/// eavesdropper model. May be negative (no key).
pub fn key_rate(inp: &RateInputs, model: AttackModel) -> f64 {
    let i_be = match model {
        AttackModel::GaussianBound => i_be_gaussian(inp),
        AttackModel::PartialIr => i_be_partial(inp),
        AttackModel::BeamSplit => i_be_gaussian(&inp.with_epsilon(0.0)),
    };
    inp.beta * i_ab_gaussian(inp) - i_be
}

/// Controls for the differential-entropy quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Absolute tolerance per entropy, in bits.
    pub abs_tol_bits: f64,
    /// Integration half-width in units of the widest mixture sigma.
    pub tail_sigmas: f64,
    /// Maximum adaptive bisection depth before reporting non-convergence.
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol_bits: 1e-7,
            tail_sigmas: 10.0,
            max_depth: 48,
        }
    }
}

/// Two-component zero-mean Gaussian scale mixture.
#[derive(Debug, Clone, Copy)]
struct ScaleMixture {
    w1: f64,
    v1: f64,
    w2: f64,
    v2: f64,
}

impl ScaleMixture {
    fn pdf(&self, x: f64) -> f64 {
        let gauss = |v: f64| (-x * x / (2.0 * v)).exp() / (std::f64::consts::TAU * v).sqrt();
        self.w1 * gauss(self.v1) + self.w2 * gauss(self.v2)
    }

    fn sigma_max(&self) -> f64 {
        self.v1.max(self.v2).sqrt()
    }
}

fn simpson_rule(width: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    width / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, RateError> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_rule(m - a, fa, flm, fm);
    let right = simpson_rule(b - m, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(RateError::QuadratureNonConvergence);
    }
    let half = adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let other = adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(half + other)
}

/// Differential entropy of a symmetric scale mixture, in bits, by adaptive
/// Simpson quadrature over `[-L, L]` with `L = tail_sigmas * sigma_max`.
fn mixture_entropy_bits(mix: &ScaleMixture, cfg: &QuadratureConfig) -> Result<f64, RateError> {
    let limit = cfg.tail_sigmas * mix.sigma_max();
    let integrand = |x: f64| {
        let f = mix.pdf(x);
        if f > 0.0 {
            -f * f.ln()
        } else {
            0.0
        }
    };
    // symmetric: integrate [0, L] and double, splitting the tolerance
    let tol_nats = 0.5 * cfg.abs_tol_bits * LN_2;
    let (a, b) = (0.0, limit);
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (integrand(a), integrand(m), integrand(b));
    let whole = simpson_rule(b - a, fa, fm, fb);
    let half = adaptive_simpson(&integrand, a, b, fa, fm, fb, whole, tol_nats, cfg.max_depth)?;
    Ok(2.0 * half / LN_2)
}

/// Mutual information between Alice and Bob for the actual (non-Gaussian)
/// mixture channel, `h(B) - h(B|A)` in bits.
///
/// Conditioned on Alice, Bob's noise is the two-component scale mixture with
/// variances `s1 = 1 + eta*T*eps_tech` (beam-splitting branch) and
/// `s2 = s1 + 2*eta*T` (intercept-resend branch), weighted `(1-mu, mu)`,
/// where `eps_tech = epsilon - 2*mu`; Bob's marginal is the same mixture with
/// each variance increased by the signal power `eta*T*V_A`. Both entropies
/// are computed by deterministic quadrature.
pub fn i_ab_nongaussian(inp: &RateInputs, cfg: &QuadratureConfig) -> Result<f64, RateError> {
    let eta_t = inp.eta * inp.t;
    let eps_tech = inp.epsilon - 2.0 * inp.mu;
    if eps_tech < -1e-9 {
        return Err(RateError::MixtureInconsistent {
            epsilon: inp.epsilon,
            two_mu: 2.0 * inp.mu,
        });
    }
    let s1 = 1.0 + eta_t * eps_tech.max(0.0);
    let s2 = s1 + 2.0 * eta_t;
    let signal = eta_t * inp.v_a;
    let noise = ScaleMixture {
        w1: 1.0 - inp.mu,
        v1: s1,
        w2: inp.mu,
        v2: s2,
    };
    let output = ScaleMixture {
        w1: 1.0 - inp.mu,
        v1: s1 + signal,
        w2: inp.mu,
        v2: s2 + signal,
    };
    Ok(mixture_entropy_bits(&output, cfg)? - mixture_entropy_bits(&noise, cfg)?)
}

/// The excess noise at which `beta * I_AB(eps)` crosses `I_BE_g(eps)`, found
/// by bisection on `[0, 2]` to `|delta eps| <= 1e-6`.
///
/// `beta * I_AB - I_BE_g` is strictly decreasing in `eps`, so a crossing
/// exists iff it is positive at 0 and non-positive at 2; otherwise
/// [`RateError::NoCrossing`] is returned.
pub fn tolerable_excess_noise(v_a: f64, t: f64, eta: f64, beta: f64) -> Result<f64, RateError> {
    let margin = |eps: f64| {
        let inp = RateInputs {
            v_a,
            t,
            epsilon: eps,
            eta,
            beta,
            mu: 0.0,
        };
        beta * i_ab_gaussian(&inp) - i_be_gaussian(&inp)
    };
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    if margin(lo) <= 0.0 || margin(hi) > 0.0 {
        return Err(RateError::NoCrossing);
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if margin(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimum sample count accepted by [`mi_monte_carlo`].
pub const MI_MIN_SAMPLES: usize = 100_000;

/// Monte Carlo mutual-information estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiEstimator {
    /// `-1/2 log2(1 - r^2)` from the sample Pearson correlation; exact model
    /// for jointly Gaussian pairs.
    GaussianCorrelation,
    /// Equal-width binned plug-in entropies with Miller-Madow bias
    /// correction; for non-Gaussian (mixture) pairs.
    BinnedPlugin { bins: usize },
}

impl MiEstimator {
    /// Binned estimator with the cube-root bin heuristic for `n` samples.
    pub fn binned_auto(n_samples: usize) -> Self {
        let bins = (n_samples as f64).cbrt().round() as usize;
        MiEstimator::BinnedPlugin {
            bins: bins.clamp(16, 256),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MiEstimator::GaussianCorrelation => "gaussian-correlation",
            MiEstimator::BinnedPlugin { .. } => "binned-plugin",
        }
    }
}

/// A mutual-information estimate together with the estimator that produced
/// it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    pub estimator: MiEstimator,
    pub samples: usize,
}

impl MiEstimate {
    /// Asymptotic standard error, available for the correlation estimator
    /// (`se = rho / (sqrt(n) * ln 2)`).
    pub fn standard_error(&self) -> Option<f64> {
        match self.estimator {
            MiEstimator::GaussianCorrelation => {
                let rho2 = 1.0 - (-2.0 * self.bits).exp2();
                Some(rho2.max(0.0).sqrt() / ((self.samples as f64).sqrt() * LN_2))
            }
            MiEstimator::BinnedPlugin { .. } => None,
        }
    }
}

/// Estimates the mutual information (bits) of jointly distributed pairs.
///
/// Requires at least [`MI_MIN_SAMPLES`] pairs.
pub fn mi_monte_carlo(
    samples: &[(f64, f64)],
    estimator: MiEstimator,
) -> Result<MiEstimate, RateError> {
    if samples.len() < MI_MIN_SAMPLES {
        return Err(RateError::TooFewSamples {
            got: samples.len(),
            need: MI_MIN_SAMPLES,
        });
    }
    let bits = match estimator {
        MiEstimator::GaussianCorrelation => mi_gaussian_correlation(samples)?,
        MiEstimator::BinnedPlugin { bins } => mi_binned_plugin(samples, bins)?,
    };
    Ok(MiEstimate {
        bits,
        estimator,
        samples: samples.len(),
    })
}

fn mi_gaussian_correlation(samples: &[(f64, f64)]) -> Result<f64, RateError> {
    let n = samples.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for &(x, y) in samples {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in samples {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(RateError::DegenerateSamples);
    }
    let rho2 = (sxy * sxy) / (sxx * syy);
    if rho2 >= 1.0 {
        return Err(RateError::DegenerateSamples);
    }
    Ok(-0.5 * (1.0 - rho2).log2())
}

fn mi_binned_plugin(samples: &[(f64, f64)], bins: usize) -> Result<f64, RateError> {
    assert!(bins >= 2, "need at least 2 bins per axis, got {bins}");
    let n = samples.len();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in samples {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if x_hi <= x_lo || y_hi <= y_lo {
        return Err(RateError::DegenerateSamples);
    }

    let index = |value: f64, lo: f64, hi: f64| -> usize {
        let idx = ((value - lo) / (hi - lo) * bins as f64) as usize;
        idx.min(bins - 1)
    };

    let mut joint = vec![0u32; bins * bins];
    let mut row = vec![0u32; bins];
    let mut col = vec![0u32; bins];
    for &(x, y) in samples {
        let i = index(x, x_lo, x_hi);
        let j = index(y, y_lo, y_hi);
        joint[i * bins + j] += 1;
        row[i] += 1;
        col[j] += 1;
    }

    let nf = n as f64;
    let mut mi_nats = 0.0;
    let mut occupied_joint = 0usize;
    for i in 0..bins {
        for j in 0..bins {
            let c = joint[i * bins + j];
            if c == 0 {
                continue;
            }
            occupied_joint += 1;
            let p = c as f64 / nf;
            mi_nats += p * ((c as f64 * nf) / (row[i] as f64 * col[j] as f64)).ln();
        }
    }
    let occupied_x = row.iter().filter(|&&c| c > 0).count();
    let occupied_y = col.iter().filter(|&&c| c > 0).count();

    // Miller-Madow correction of the three plug-in entropies
    let correction = ((occupied_x as f64 - 1.0) + (occupied_y as f64 - 1.0)
        - (occupied_joint as f64 - 1.0))
        / (2.0 * nf);
    Ok((mi_nats + correction) / LN_2)
}

/// All information rates for one set of inputs; `k` uses the selected attack
/// model for `I_BE`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub i_ab_g: f64,
    pub i_ab_ng: f64,
    pub i_be_bs: f64,
    pub i_be_ir: f64,
    pub i_be_partial: f64,
    pub i_be_g: f64,
    pub k: f64,
}

impl RateReport {
    pub fn from_inputs(
        inp: &RateInputs,
        model: AttackModel,
        cfg: &QuadratureConfig,
    ) -> Result<Self, RateError> {
        Ok(Self {
            i_ab_g: i_ab_gaussian(inp),
            i_ab_ng: i_ab_nongaussian(inp, cfg)?,
            i_be_bs: i_be_gaussian(&inp.with_epsilon(0.0)),
            i_be_ir: i_be_ir(inp),
            i_be_partial: i_be_partial(inp),
            i_be_g: i_be_gaussian(inp),
            k: key_rate(inp, model),
        })
    }
}
