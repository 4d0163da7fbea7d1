//! Experiment drivers: the per-block simulation pipeline, sweep engines for
//! the three standard figures, and deterministic CSV emission.
//!
//! A transmission consists of independent blocks. Each block of
//! `pulses_per_block` pulses reserves `test_pulses` synchronization pulses
//! (carrying no key data), reveals `reveal_m` pulses for channel estimation
//! and leaves the rest as key candidates. Every block draws from its own RNG
//! stream, so blocks can run in any order or in parallel without changing
//! results; all CSV output is byte-deterministic under a fixed seed.

use rayon::prelude::*;

use crate::attacks::{simulate_pulse, AttackSpec, PulseRecord};
use crate::estimation::{
    eps_confidence, estimate_channel, reveal_subset, EstimationError, EstimationResult,
};
use crate::optics::{
    draw_alice_state, DetectorModel, ModulationParams, QuadratureChoice, RngStream,
};
use crate::rates::{
    i_ab_gaussian, i_be_gaussian, i_be_partial, mi_monte_carlo, AttackModel, MiEstimator,
    QuadratureConfig, RateError, RateInputs, RateReport, MI_MIN_SAMPLES,
};
use crate::ParamError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ParamError),
    #[error("estimation failed: {0}")]
    Estimation(#[from] EstimationError),
    #[error("rate evaluation failed: {0}")]
    Rates(#[from] RateError),
    #[error("sweep grid for {variable} is empty")]
    EmptyGrid { variable: &'static str },
    #[error("sweep grid value {value} out of range for {variable}")]
    GridOutOfRange { variable: &'static str, value: f64 },
    #[error(
        "block layout invalid: test_pulses ({test_pulses}) + reveal_m ({reveal_m}) \
         must stay below pulses_per_block ({pulses_per_block}), reveal_m >= 2, blocks >= 1"
    )]
    BlockLayout {
        pulses_per_block: usize,
        test_pulses: usize,
        reveal_m: usize,
    },
}

/// Block structure and seeding of a transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    pub pulses_per_block: usize,
    pub test_pulses: usize,
    pub reveal_m: usize,
    pub blocks: usize,
    pub seed: u64,
}

impl BlockConfig {
    pub fn new(
        pulses_per_block: usize,
        test_pulses: usize,
        reveal_m: usize,
        blocks: usize,
        seed: u64,
    ) -> Result<Self, RunError> {
        if test_pulses + reveal_m >= pulses_per_block || reveal_m < 2 || blocks == 0 {
            return Err(RunError::BlockLayout {
                pulses_per_block,
                test_pulses,
                reveal_m,
            });
        }
        Ok(Self {
            pulses_per_block,
            test_pulses,
            reveal_m,
            blocks,
            seed,
        })
    }

    /// Pulses per block that carry data (everything but the test pulses).
    pub fn data_pulses(&self) -> usize {
        self.pulses_per_block - self.test_pulses
    }
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self {
            pulses_per_block: 50_000,
            test_pulses: 10_000,
            reveal_m: 5_000,
            blocks: 20,
            seed: 1,
        }
    }
}

/// Reconciliation efficiency and the excess-noise security margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityParams {
    pub beta: f64,
    pub n_sigma: f64,
}

impl SecurityParams {
    pub fn new(beta: f64, n_sigma: f64) -> Result<Self, ParamError> {
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(ParamError::new("beta", beta, "must lie in [0, 1]"));
        }
        if !n_sigma.is_finite() || n_sigma < 0.0 {
            return Err(ParamError::new("n_sigma", n_sigma, "must be finite and >= 0"));
        }
        Ok(Self { beta, n_sigma })
    }
}

impl Default for SecurityParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            n_sigma: 1.0,
        }
    }
}

/// Everything fixed for one simulated transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub attack: AttackSpec,
    pub modulation: ModulationParams,
    pub detector: DetectorModel,
    pub security: SecurityParams,
}

/// Which quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Transmission,
    InterceptionFraction,
    ExcessNoise,
}

impl SweepVariable {
    fn name(&self) -> &'static str {
        match self {
            SweepVariable::Transmission => "T",
            SweepVariable::InterceptionFraction => "mu",
            SweepVariable::ExcessNoise => "epsilon",
        }
    }

    fn contains(&self, value: f64) -> bool {
        match self {
            SweepVariable::Transmission => value.is_finite() && value > 0.0 && value <= 1.0,
            SweepVariable::InterceptionFraction => value.is_finite() && (0.0..=1.0).contains(&value),
            SweepVariable::ExcessNoise => value.is_finite() && value >= 0.0,
        }
    }
}

/// A validated one-dimensional sweep: the varied quantity, its grid, and the
/// fixed parameters of every point.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub attack: AttackSpec,
    pub modulation: ModulationParams,
    pub detector: DetectorModel,
    pub beta: f64,
}

impl SweepSpec {
    pub fn new(
        variable: SweepVariable,
        grid: Vec<f64>,
        attack: AttackSpec,
        modulation: ModulationParams,
        detector: DetectorModel,
        beta: f64,
    ) -> Result<Self, RunError> {
        if grid.is_empty() {
            return Err(RunError::EmptyGrid {
                variable: variable.name(),
            });
        }
        for &value in &grid {
            if !variable.contains(value) {
                return Err(RunError::GridOutOfRange {
                    variable: variable.name(),
                    value,
                });
            }
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(RunError::Config(ParamError::new(
                "beta",
                beta,
                "must lie in [0, 1]",
            )));
        }
        Ok(Self {
            variable,
            grid,
            attack,
            modulation,
            detector,
            beta,
        })
    }
}

/// Result of one block: what Alice and Bob estimated, the rates computed from
/// those estimates, and the key verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOutcome {
    pub block_index: u64,
    pub estimate: EstimationResult,
    /// `eps_hat + n_sigma * se_eps`, the margin value fed to the bounds.
    pub eps_plus: f64,
    pub rates: RateReport,
    /// Key accepted iff `K > 0` at the margin.
    pub accept: bool,
    pub key_candidates: usize,
}

fn simulate_data_pulses(n: usize, scenario: &Scenario, rng: &mut RngStream) -> Vec<PulseRecord> {
    (0..n)
        .map(|_| {
            let alice = draw_alice_state(scenario.modulation, rng);
            // Bob's basis choice is i.i.d. uniform; only the matching Alice
            // quadrature is kept after sifting
            let choice = if rng.bernoulli(0.5) {
                QuadratureChoice::X
            } else {
                QuadratureChoice::P
            };
            simulate_pulse(alice, &scenario.attack, scenario.detector, choice, rng)
        })
        .collect()
}

/// Rate report evaluated at the estimated channel, as the legitimate users
/// would compute it: `T_hat` clipped to the physical range, the margin value
/// `eps_plus` floored at zero, and the partial-IR decomposition inferred from
/// the calibrated technical noise (`mu_eff = (eps - eps_T)/2`, clamped).
fn report_from_estimate(
    estimate: &EstimationResult,
    scenario: &Scenario,
) -> Result<(RateReport, f64), RunError> {
    let eps_plus = eps_confidence(estimate, scenario.security.n_sigma);
    let eps_model = eps_plus.max(0.0);
    let t_model = estimate.t_hat.min(1.0);
    let mu_eff = ((eps_model - scenario.attack.eps_t) / 2.0).clamp(0.0, 1.0);
    let inputs = RateInputs::new(
        scenario.modulation.v_a,
        t_model,
        eps_model,
        scenario.detector.eta,
        scenario.security.beta,
        mu_eff,
    )?;
    let report = RateReport::from_inputs(
        &inputs,
        AttackModel::GaussianBound,
        &QuadratureConfig::default(),
    )?;
    Ok((report, eps_plus))
}

/// Runs one block end to end: simulate, reveal, estimate, rate, verdict.
/// Deterministic given `(cfg.seed, block_index)`.
pub fn run_block(
    cfg: &BlockConfig,
    block_index: u64,
    scenario: &Scenario,
) -> Result<BlockOutcome, RunError> {
    let mut rng = RngStream::new(cfg.seed, block_index);
    let mut records = simulate_data_pulses(cfg.data_pulses(), scenario, &mut rng);
    let subset = reveal_subset(&mut records, cfg.reveal_m, &mut rng)?;
    let estimate = estimate_channel(&subset, scenario.detector)?;
    let key_candidates = records.iter().filter(|r| !r.revealed).count();
    let (rates, eps_plus) = report_from_estimate(&estimate, scenario)?;
    Ok(BlockOutcome {
        block_index,
        estimate,
        eps_plus,
        rates,
        accept: rates.k > 0.0,
        key_candidates,
    })
}

/// Runs `cfg.blocks` blocks in parallel, with stream ids
/// `stream_base .. stream_base + blocks`. Results are ordered by block and
/// identical to a serial run.
pub fn run_blocks(
    cfg: &BlockConfig,
    stream_base: u64,
    scenario: &Scenario,
) -> Result<Vec<BlockOutcome>, RunError> {
    (0..cfg.blocks as u64)
        .into_par_iter()
        .map(|i| run_block(cfg, stream_base + i, scenario))
        .collect()
}

fn fmt(x: f64) -> String {
    // shortest decimal rendering that round-trips exactly
    format!("{x}")
}

fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    let m = mean_of(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Full-interception excess-noise sweep over channel transmission.
///
/// For each `T` in the grid, runs `cfg.blocks` blocks under `mu = 1` and
/// emits per-`T` block averages. Columns (input-referred shot-noise units):
/// `T` (true grid value), `chi_hat` (total added noise), `chi0_hat`
/// (loss-induced vacuum noise), `eps_hat` (excess noise) and `se_eps` (the
/// mean per-block standard error). `chi_hat = chi0_hat + eps_hat` holds
/// exactly in every row.
pub fn fig3_csv(
    cfg: &BlockConfig,
    scenario: &Scenario,
    t_grid: &[f64],
) -> Result<String, RunError> {
    let sweep = SweepSpec::new(
        SweepVariable::Transmission,
        t_grid.to_vec(),
        scenario.attack,
        scenario.modulation,
        scenario.detector,
        scenario.security.beta,
    )?;
    let mut csv = String::from("T,chi_hat,chi0_hat,eps_hat,se_eps\n");
    for (point, &t) in sweep.grid.iter().enumerate() {
        let point_scenario = Scenario {
            attack: AttackSpec::new(1.0, t, scenario.attack.eps_t)?,
            ..*scenario
        };
        let outcomes = run_blocks(cfg, (point * cfg.blocks) as u64, &point_scenario)?;
        let chi0: Vec<f64> = outcomes.iter().map(|o| o.estimate.chi0_hat).collect();
        let eps: Vec<f64> = outcomes.iter().map(|o| o.estimate.eps_hat).collect();
        let se: Vec<f64> = outcomes.iter().map(|o| o.estimate.se_eps).collect();
        let (chi0_mean, eps_mean, se_mean) = (mean_of(&chi0), mean_of(&eps), mean_of(&se));
        let chi_mean = chi0_mean + eps_mean;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(t),
            fmt(chi_mean),
            fmt(chi0_mean),
            fmt(eps_mean),
            fmt(se_mean)
        ));
    }
    Ok(csv)
}

/// Excess noise versus interception fraction.
///
/// For each `mu`, the measured excess noise is averaged over the transmission
/// grid (`cfg.blocks` blocks per transmission). Columns: `mu`, `eps_mean`
/// (shot-noise units) and `eps_spread` (sample standard deviation of the
/// per-block estimates).
pub fn fig4_csv(
    cfg: &BlockConfig,
    scenario: &Scenario,
    mu_grid: &[f64],
    t_grid: &[f64],
) -> Result<String, RunError> {
    let mu_sweep = SweepSpec::new(
        SweepVariable::InterceptionFraction,
        mu_grid.to_vec(),
        scenario.attack,
        scenario.modulation,
        scenario.detector,
        scenario.security.beta,
    )?;
    let t_sweep = SweepSpec::new(
        SweepVariable::Transmission,
        t_grid.to_vec(),
        scenario.attack,
        scenario.modulation,
        scenario.detector,
        scenario.security.beta,
    )?;

    let mut csv = String::from("mu,eps_mean,eps_spread\n");
    for (mu_idx, &mu) in mu_sweep.grid.iter().enumerate() {
        let mut eps_hats = Vec::with_capacity(t_sweep.grid.len() * cfg.blocks);
        for (t_idx, &t) in t_sweep.grid.iter().enumerate() {
            let point = mu_idx * t_sweep.grid.len() + t_idx;
            let point_scenario = Scenario {
                attack: AttackSpec::new(mu, t, scenario.attack.eps_t)?,
                ..*scenario
            };
            let outcomes = run_blocks(cfg, (point * cfg.blocks) as u64, &point_scenario)?;
            eps_hats.extend(outcomes.iter().map(|o| o.estimate.eps_hat));
        }
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt(mu),
            fmt(mean_of(&eps_hats)),
            fmt(sample_std(&eps_hats))
        ));
    }
    Ok(csv)
}

/// Information rates versus excess noise, per channel transmission.
///
/// The excess-noise axis is driven by the interception fraction,
/// `eps = 2*mu + eps_T`. Per `(T, eps)` row the closed-form rates are emitted
/// together with a Monte Carlo point for the partial-IR information: the
/// full-interception term is re-estimated from simulated (Eve record, Bob
/// outcome) pairs of the technical-noise-free information channel and mixed
/// per `mu * I_IR_mc + (1 - mu) * I_BS`. Columns are bits per pulse except
/// `T`, `mu` and `eps`; `i_be_partial_mc_se` is the asymptotic standard error
/// of the Monte Carlo point.
pub fn fig5_csv(
    cfg: &BlockConfig,
    scenario: &Scenario,
    t_grid: &[f64],
    mu_grid: &[f64],
) -> Result<String, RunError> {
    let t_sweep = SweepSpec::new(
        SweepVariable::Transmission,
        t_grid.to_vec(),
        scenario.attack,
        scenario.modulation,
        scenario.detector,
        scenario.security.beta,
    )?;
    let mu_sweep = SweepSpec::new(
        SweepVariable::InterceptionFraction,
        mu_grid.to_vec(),
        scenario.attack,
        scenario.modulation,
        scenario.detector,
        scenario.security.beta,
    )?;

    let samples_per_point = (cfg.blocks * cfg.data_pulses()).max(MI_MIN_SAMPLES);
    let mut csv = String::from(
        "T,mu,eps,i_ab,i_be_bs,i_be_partial,i_be_partial_mc,i_be_partial_mc_se,i_be_g\n",
    );
    for (t_idx, &t) in t_sweep.grid.iter().enumerate() {
        for (mu_idx, &mu) in mu_sweep.grid.iter().enumerate() {
            let eps = 2.0 * mu + scenario.attack.eps_t;
            let inputs = RateInputs::new(
                scenario.modulation.v_a,
                t,
                eps,
                scenario.detector.eta,
                scenario.security.beta,
                mu,
            )?;
            let i_ab = i_ab_gaussian(&inputs);
            let i_be_bs = i_be_gaussian(&inputs.with_epsilon(0.0));
            let i_be_part = i_be_partial(&inputs);
            let i_be_g = i_be_gaussian(&inputs);

            let point = (t_idx * mu_sweep.grid.len() + mu_idx) as u64;
            let (ir_mc, ir_mc_se) = ir_information_monte_carlo(
                samples_per_point,
                cfg.seed,
                point,
                t,
                scenario.modulation,
                scenario.detector,
            )?;
            let mc = mu * ir_mc + (1.0 - mu) * i_be_bs;
            let mc_se = mu * ir_mc_se;

            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt(t),
                fmt(mu),
                fmt(eps),
                fmt(i_ab),
                fmt(i_be_bs),
                fmt(i_be_part),
                fmt(mc),
                fmt(mc_se),
                fmt(i_be_g)
            ));
        }
    }
    Ok(csv)
}

/// Monte Carlo estimate of Eve's full-interception information channel: the
/// mutual information between her heterodyne record (in Bob's basis) and
/// Bob's outcome, with no technical noise so the pairs follow the modelled
/// information channel exactly.
fn ir_information_monte_carlo(
    samples: usize,
    seed: u64,
    stream: u64,
    t: f64,
    modulation: ModulationParams,
    detector: DetectorModel,
) -> Result<(f64, f64), RunError> {
    let attack = AttackSpec::new(1.0, t, 0.0)?;
    let mut rng = RngStream::new(seed, stream);
    let pairs: Vec<(f64, f64)> = (0..samples)
        .map(|_| {
            let alice = draw_alice_state(modulation, &mut rng);
            let choice = if rng.bernoulli(0.5) {
                QuadratureChoice::X
            } else {
                QuadratureChoice::P
            };
            let record = simulate_pulse(alice, &attack, detector, choice, &mut rng);
            let eve = record
                .eve_heterodyne()
                .expect("full interception records are heterodyne")
                .component(choice);
            (eve, record.bob_outcome)
        })
        .collect();
    let estimate = mi_monte_carlo(&pairs, MiEstimator::GaussianCorrelation)?;
    let se = estimate.standard_error().unwrap_or(0.0);
    Ok((estimate.bits, se))
}

/// One end-to-end transmission: per-block CSV plus a human-readable report
/// with parameter echo, aggregate estimates and the key verdict.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub report: String,
    pub csv: String,
    /// All blocks accepted their key.
    pub accepted: bool,
}

pub fn run_report(cfg: &BlockConfig, scenario: &Scenario) -> Result<RunSummary, RunError> {
    let outcomes = run_blocks(cfg, 0, scenario)?;

    let mut csv = String::from(
        "block,t_hat,chi_hat,chi0_hat,eps_hat,se_eps,eps_plus,i_ab_g,i_ab_ng,i_be_bs,i_be_ir,i_be_partial,i_be_g,key_rate,verdict\n",
    );
    for o in &outcomes {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            o.block_index,
            fmt(o.estimate.t_hat),
            fmt(o.estimate.chi_hat),
            fmt(o.estimate.chi0_hat),
            fmt(o.estimate.eps_hat),
            fmt(o.estimate.se_eps),
            fmt(o.eps_plus),
            fmt(o.rates.i_ab_g),
            fmt(o.rates.i_ab_ng),
            fmt(o.rates.i_be_bs),
            fmt(o.rates.i_be_ir),
            fmt(o.rates.i_be_partial),
            fmt(o.rates.i_be_g),
            fmt(o.rates.k),
            if o.accept { "accept" } else { "reject" }
        ));
    }

    let accepted = outcomes.iter().all(|o| o.accept);
    let accepted_count = outcomes.iter().filter(|o| o.accept).count();
    let eps_hats: Vec<f64> = outcomes.iter().map(|o| o.estimate.eps_hat).collect();
    let t_hats: Vec<f64> = outcomes.iter().map(|o| o.estimate.t_hat).collect();
    let key_rates: Vec<f64> = outcomes.iter().map(|o| o.rates.k).collect();

    let mut report = String::new();
    report.push_str("cvqkd transmission report\n");
    report.push_str("=========================\n");
    report.push_str(&format!(
        "modulation V_A        : {} N0\n",
        fmt(scenario.modulation.v_a)
    ));
    report.push_str(&format!(
        "detector eta          : {}\n",
        fmt(scenario.detector.eta)
    ));
    report.push_str(&format!(
        "attack mu / T / eps_T : {} / {} / {} N0\n",
        fmt(scenario.attack.mu),
        fmt(scenario.attack.t),
        fmt(scenario.attack.eps_t)
    ));
    report.push_str(&format!(
        "beta / n_sigma        : {} / {}\n",
        fmt(scenario.security.beta),
        fmt(scenario.security.n_sigma)
    ));
    report.push_str(&format!(
        "blocks                : {} x {} pulses ({} test, {} revealed, {} key candidates)\n",
        cfg.blocks,
        cfg.pulses_per_block,
        cfg.test_pulses,
        cfg.reveal_m,
        cfg.data_pulses() - cfg.reveal_m
    ));
    report.push_str(&format!("seed                  : {}\n", cfg.seed));
    report.push_str(&format!(
        "mutual information estimator: {}\n",
        MiEstimator::GaussianCorrelation.label()
    ));
    report.push('\n');
    report.push_str(&format!("mean T_hat            : {}\n", fmt(mean_of(&t_hats))));
    report.push_str(&format!(
        "mean eps_hat          : {} N0\n",
        fmt(mean_of(&eps_hats))
    ));
    report.push_str(&format!(
        "mean key rate K       : {} bits/pulse (Gaussian bound at the margin)\n",
        fmt(mean_of(&key_rates))
    ));
    report.push_str(&format!(
        "verdict               : {} ({} of {} blocks accept)\n",
        if accepted { "ACCEPT" } else { "REJECT" },
        accepted_count,
        outcomes.len()
    ));

    Ok(RunSummary {
        report,
        csv,
        accepted,
    })
}
