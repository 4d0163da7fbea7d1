//! Acceptance suite: quantitative end-to-end checks of the simulator against
//! the model's closed forms, each printing one PASS/FAIL line
//! (`cargo test --test acceptance -- --nocapture` to see them).
//!
//! Fixed seeds keep every criterion deterministic.

use cvqkd::attacks::{simulate_pulse, AttackSpec};
use cvqkd::estimation::{estimate_channel, reveal_subset};
use cvqkd::experiment::{
    fig3_csv, run_block, run_blocks, BlockConfig, Scenario, SecurityParams,
};
use cvqkd::optics::{draw_alice_state, DetectorModel, ModulationParams, QuadratureChoice, RngStream};
use cvqkd::rates::{
    i_ab_gaussian, i_ab_nongaussian, i_be_gaussian, i_be_ir, i_be_partial, key_rate,
    mi_monte_carlo, tolerable_excess_noise, AttackModel, MiEstimator, QuadratureConfig,
    RateInputs,
};

const V_A: f64 = 36.6;
const ETA: f64 = 0.6;
const EPS_T: f64 = 0.1;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion} failed: {detail}");
}

fn scenario(mu: f64, t: f64, eps_t: f64) -> Scenario {
    Scenario {
        attack: AttackSpec::new(mu, t, eps_t).unwrap(),
        modulation: ModulationParams::new(V_A).unwrap(),
        detector: DetectorModel::new(ETA).unwrap(),
        security: SecurityParams::default(),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn inputs(t: f64, epsilon: f64, beta: f64, mu: f64) -> RateInputs {
    RateInputs::new(V_A, t, epsilon, ETA, beta, mu).unwrap()
}

/// Criterion 1: full-interception excess noise lands on 2 + eps_T across the
/// transmission grid, with standard errors that match a resampling spread.
#[test]
fn criterion_1_full_ir_excess_noise() {
    let cfg = BlockConfig::new(50_000, 10_000, 5_000, 20, 101).unwrap();
    let mut worst: (f64, f64) = (0.0, 0.0); // (deviation in se units, at T)
    for (point, k) in (1..=10).enumerate() {
        let t = k as f64 / 10.0;
        let outcomes = run_blocks(&cfg, (point * cfg.blocks) as u64, &scenario(1.0, t, EPS_T)).unwrap();
        let eps: Vec<f64> = outcomes.iter().map(|o| o.estimate.eps_hat).collect();
        let se: Vec<f64> = outcomes.iter().map(|o| o.estimate.se_eps).collect();
        let dev = (mean(&eps) - 2.1).abs() / mean(&se);
        if dev > worst.0 {
            worst = (dev, t);
        }
        assert!(
            dev < 3.0,
            "T = {t}: mean eps_hat = {} at {dev:.2} se",
            mean(&eps)
        );
    }

    // analytic se vs the spread over 200 independent blocks at T = 0.25
    let resample_cfg = BlockConfig::new(50_000, 10_000, 5_000, 200, 102).unwrap();
    let outcomes = run_blocks(&resample_cfg, 0, &scenario(1.0, 0.25, EPS_T)).unwrap();
    let eps: Vec<f64> = outcomes.iter().map(|o| o.estimate.eps_hat).collect();
    let se: Vec<f64> = outcomes.iter().map(|o| o.estimate.se_eps).collect();
    let (spread, analytic) = (sample_std(&eps), mean(&se));
    let ratio = spread / analytic;

    report(
        "criterion 1 (full-IR excess noise)",
        worst.0 < 3.0 && (ratio - 1.0).abs() < 0.2,
        &format!(
            "worst |mean eps_hat - 2.1| = {:.2} se (T = {}); resampling std / analytic se = {ratio:.3}",
            worst.0, worst.1
        ),
    );
}

/// Criterion 2: the measured excess noise follows eps = 2*mu + eps_T
/// linearly in the interception fraction.
#[test]
fn criterion_2_partial_ir_linearity() {
    let cfg = BlockConfig::new(50_000, 10_000, 5_000, 50, 103).unwrap();
    let mu_grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let t_grid = [0.25, 0.5, 0.75, 0.9];

    let mut mu_means = Vec::new();
    for (mu_idx, &mu) in mu_grid.iter().enumerate() {
        let mut eps_hats = Vec::new();
        for (t_idx, &t) in t_grid.iter().enumerate() {
            let point = mu_idx * t_grid.len() + t_idx;
            let outcomes =
                run_blocks(&cfg, (point * cfg.blocks) as u64, &scenario(mu, t, EPS_T)).unwrap();
            eps_hats.extend(outcomes.iter().map(|o| o.estimate.eps_hat));
        }
        let m = mean(&eps_hats);
        let se_mean = sample_std(&eps_hats) / (eps_hats.len() as f64).sqrt();
        assert!(
            (m - (2.0 * mu + EPS_T)).abs() < 3.0 * se_mean,
            "mu = {mu}: mean eps_hat = {m} +- {se_mean}"
        );
        mu_means.push((mu, m));
    }

    // least-squares slope of mean eps_hat against mu
    let mu_bar = mean(&mu_means.iter().map(|&(mu, _)| mu).collect::<Vec<_>>());
    let eps_bar = mean(&mu_means.iter().map(|&(_, e)| e).collect::<Vec<_>>());
    let slope = mu_means
        .iter()
        .map(|&(mu, e)| (mu - mu_bar) * (e - eps_bar))
        .sum::<f64>()
        / mu_means
            .iter()
            .map(|&(mu, _)| (mu - mu_bar) * (mu - mu_bar))
            .sum::<f64>();

    report(
        "criterion 2 (partial-IR linearity)",
        (slope - 2.0).abs() < 0.05,
        &format!("slope of eps_hat vs mu = {slope:.4} (want 2.00 +- 0.05)"),
    );
}

/// Criterion 3: the non-Gaussian mutual information exceeds the Gaussian one
/// by at most 0.8% over the whole (T, mu) grid.
#[test]
fn criterion_3_gaussian_nongaussian_gap() {
    let quad = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for t in [0.1, 0.25, 0.5, 0.9] {
        for k in 1..=9 {
            let mu = k as f64 / 10.0;
            let inp = inputs(t, 2.0 * mu, 1.0, mu);
            let ng = i_ab_nongaussian(&inp, &quad).unwrap();
            let g = i_ab_gaussian(&inp);
            let rel = (ng - g) / ng;
            assert!(
                (0.0..=0.008).contains(&rel),
                "T = {t}, mu = {mu}: relative gap {rel}"
            );
            worst = worst.max(rel);
        }
    }
    report(
        "criterion 3 (Gaussian vs non-Gaussian I_AB gap)",
        worst <= 0.008,
        &format!("max relative gap = {:.4}% (bound 0.8%)", 100.0 * worst),
    );
}

/// Criterion 4: attack ordering I_BE_bs <= I_BE_partial <= I_BE_g on the
/// same grid.
#[test]
fn criterion_4_attack_ordering() {
    let mut min_gap = f64::INFINITY;
    for t in [0.1, 0.25, 0.5, 0.9] {
        for k in 1..=9 {
            let mu = k as f64 / 10.0;
            let inp = inputs(t, 2.0 * mu + EPS_T, 1.0, mu);
            let bs = i_be_gaussian(&inp.with_epsilon(0.0));
            let partial = i_be_partial(&inp);
            let gaussian = i_be_gaussian(&inp);
            let lower = partial - bs;
            let upper = gaussian - partial;
            assert!(lower >= -1e-9, "T = {t}, mu = {mu}: partial below BS by {lower}");
            assert!(upper >= -1e-9, "T = {t}, mu = {mu}: partial above bound by {upper}");
            min_gap = min_gap.min(lower).min(upper);
        }
    }
    report(
        "criterion 4 (attack ordering)",
        min_gap >= -1e-9,
        &format!("minimum ordering gap = {min_gap:.3e} (tolerance -1e-9)"),
    );
}

/// Criterion 5: the entanglement-breaking noise level admits no key, and the
/// end-to-end pipeline rejects a full intercept-resend attack.
#[test]
fn criterion_5_entanglement_breaking() {
    let mut max_k = f64::NEG_INFINITY;
    for i in 1..=100 {
        let t = i as f64 / 100.0;
        let k = key_rate(&inputs(t, 2.0, 1.0, 1.0), AttackModel::GaussianBound);
        max_k = max_k.max(k);
        assert!(k <= 0.0, "T = {t}: K = {k} > 0 at eps = 2");
    }

    let cfg = BlockConfig::new(50_000, 10_000, 5_000, 1, 105).unwrap();
    let mut rejected = 0;
    let mut tested = 0;
    for i in 1..=10 {
        let t = i as f64 / 10.0;
        let outcome = run_block(&cfg, i as u64, &scenario(1.0, t, EPS_T)).unwrap();
        tested += 1;
        if !outcome.accept {
            rejected += 1;
        }
        assert!(!outcome.accept, "T = {t}: full-IR block accepted, K = {}", outcome.rates.k);
    }

    report(
        "criterion 5 (entanglement breaking)",
        max_k <= 0.0 && rejected == tested,
        &format!(
            "max K at eps = 2 over 100 transmissions = {max_k:.4}; full-IR blocks rejected {rejected}/{tested}"
        ),
    );
}

/// Criterion 6: the tolerable-excess-noise crossing matches the closed-form
/// quadratic oracle.
#[test]
fn criterion_6_crossing_point() {
    // at beta = 1 the crossing solves (c + T*eps)(1 + T*eps) = 1 with
    // c = 1 - T + T/(V_A+1); the positive root is the oracle
    let quadratic_root = |t: f64| {
        let c = 1.0 - t + t / (V_A + 1.0);
        ((-(1.0 + c) + ((1.0 + c) * (1.0 + c) - 4.0 * (c - 1.0)).sqrt()) / 2.0) / t
    };

    let found_09 = tolerable_excess_noise(V_A, 0.9, ETA, 1.0).unwrap();
    let found_025 = tolerable_excess_noise(V_A, 0.25, ETA, 1.0).unwrap();
    let pass = (found_09 - 0.5886).abs() < 1e-3
        && (found_09 - quadratic_root(0.9)).abs() < 1e-6
        && (found_025 - 0.516).abs() < 1e-3
        && (found_025 - quadratic_root(0.25)).abs() < 1e-6;

    report(
        "criterion 6 (tolerable excess noise)",
        pass,
        &format!("eps*(T=0.9) = {found_09:.6}, eps*(T=0.25) = {found_025:.6}"),
    );
}

/// Criterion 7: the Monte Carlo mutual-information oracle agrees with the
/// closed forms on simulated beam-splitting and intercept-resend data.
#[test]
fn criterion_7_oracle_equivalence() {
    let t = 0.25;
    let n = 1_000_000;
    let modulation = ModulationParams::new(V_A).unwrap();
    let detector = DetectorModel::new(ETA).unwrap();

    // beam-splitting attack: Alice-Bob pairs against the Gaussian formula
    let bs_attack = AttackSpec::new(0.0, t, 0.0).unwrap();
    let mut rng = RngStream::new(107, 0);
    let bs_pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let alice = draw_alice_state(modulation, &mut rng);
            let choice = if rng.bernoulli(0.5) {
                QuadratureChoice::X
            } else {
                QuadratureChoice::P
            };
            let record = simulate_pulse(alice, &bs_attack, detector, choice, &mut rng);
            (alice.component(choice), record.bob_outcome)
        })
        .collect();
    let mi_bs = mi_monte_carlo(&bs_pairs, MiEstimator::GaussianCorrelation).unwrap();
    let expected_bs = i_ab_gaussian(&inputs(t, 0.0, 1.0, 0.0));
    let bs_err = (mi_bs.bits - expected_bs).abs();

    // full interception: Eve's record against Bob, versus the closed form
    let ir_attack = AttackSpec::new(1.0, t, 0.0).unwrap();
    let mut rng = RngStream::new(107, 1);
    let ir_pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let alice = draw_alice_state(modulation, &mut rng);
            let choice = if rng.bernoulli(0.5) {
                QuadratureChoice::X
            } else {
                QuadratureChoice::P
            };
            let record = simulate_pulse(alice, &ir_attack, detector, choice, &mut rng);
            (
                record.eve_heterodyne().unwrap().component(choice),
                record.bob_outcome,
            )
        })
        .collect();
    let mi_ir = mi_monte_carlo(&ir_pairs, MiEstimator::GaussianCorrelation).unwrap();
    let expected_ir = i_be_ir(&inputs(t, 0.0, 1.0, 1.0));
    let ir_err = (mi_ir.bits - expected_ir).abs();

    report(
        "criterion 7 (Monte Carlo oracle equivalence)",
        bs_err < 0.02 && ir_err < 0.02,
        &format!(
            "BS: MC {:.4} vs formula {expected_bs:.4} (|d| = {bs_err:.4}); IR: MC {:.4} vs formula {expected_ir:.4} (|d| = {ir_err:.4})",
            mi_bs.bits, mi_ir.bits
        ),
    );
}

/// Criterion 8: standard-error scaling in the subset size, and estimator
/// bias below one standard error over the whole (mu, T) grid.
#[test]
fn criterion_8_estimator_statistics() {
    // part A: se_eps at m = 1250 vs m = 5000 over 200 resampled subsets
    let detector = DetectorModel::new(ETA).unwrap();
    let sc = scenario(0.5, 0.25, EPS_T);
    let mut rng = RngStream::new(108, 0);
    let modulation = ModulationParams::new(V_A).unwrap();
    let block: Vec<_> = (0..40_000)
        .map(|_| {
            let alice = draw_alice_state(modulation, &mut rng);
            let choice = if rng.bernoulli(0.5) {
                QuadratureChoice::X
            } else {
                QuadratureChoice::P
            };
            simulate_pulse(alice, &sc.attack, detector, choice, &mut rng)
        })
        .collect();

    let mut spread_and_se = |m: usize| {
        let mut eps = Vec::with_capacity(200);
        let mut ses = Vec::with_capacity(200);
        for _ in 0..200 {
            let mut fresh = block.clone();
            let subset = reveal_subset(&mut fresh, m, &mut rng).unwrap();
            let est = estimate_channel(&subset, detector).unwrap();
            eps.push(est.eps_hat);
            ses.push(est.se_eps);
        }
        (sample_std(&eps), mean(&ses))
    };
    let (spread_1250, se_1250) = spread_and_se(1250);
    let (spread_5000, se_5000) = spread_and_se(5000);
    let se_ratio = se_1250 / se_5000;
    let spread_ratio = spread_1250 / spread_5000;
    assert!(
        (se_ratio - 2.0).abs() < 0.3,
        "analytic se ratio {se_ratio} outside 2 +- 15%"
    );

    // part B: bias below one standard error across the grid
    let cfg = BlockConfig::new(50_000, 10_000, 5_000, 25, 109).unwrap();
    let mut worst_bias_ratio = 0.0f64;
    for (mu_idx, &mu) in [0.0, 0.25, 0.5, 0.75, 1.0].iter().enumerate() {
        for (t_idx, &t) in [0.1, 0.25, 0.5, 0.9].iter().enumerate() {
            let point = mu_idx * 4 + t_idx;
            let outcomes =
                run_blocks(&cfg, (point * cfg.blocks) as u64, &scenario(mu, t, EPS_T)).unwrap();
            let eps: Vec<f64> = outcomes.iter().map(|o| o.estimate.eps_hat).collect();
            let se = mean(&outcomes.iter().map(|o| o.estimate.se_eps).collect::<Vec<_>>());
            let bias = (mean(&eps) - (2.0 * mu + EPS_T)).abs();
            worst_bias_ratio = worst_bias_ratio.max(bias / se);
            assert!(bias < se, "mu = {mu}, T = {t}: bias {bias} vs se {se}");
        }
    }

    report(
        "criterion 8 (estimator statistics)",
        (se_ratio - 2.0).abs() < 0.3 && worst_bias_ratio < 1.0,
        &format!(
            "se ratio (m = 1250/5000) = {se_ratio:.4} (resampled spread ratio {spread_ratio:.3}); worst |bias|/se = {worst_bias_ratio:.3}"
        ),
    );
}

/// Criterion 9: CSV emission is byte-deterministic under a fixed seed.
#[test]
fn criterion_9_deterministic_csv() {
    let cfg = BlockConfig::new(50_000, 10_000, 5_000, 2, 110).unwrap();
    let sc = scenario(1.0, 0.5, EPS_T);
    let first = fig3_csv(&cfg, &sc, &[0.25, 0.9]).unwrap();
    let second = fig3_csv(&cfg, &sc, &[0.25, 0.9]).unwrap();

    let other_seed_cfg = BlockConfig::new(50_000, 10_000, 5_000, 2, 111).unwrap();
    let different = fig3_csv(&other_seed_cfg, &sc, &[0.25, 0.9]).unwrap();

    report(
        "criterion 9 (deterministic CSV)",
        first == second && first != different,
        &format!(
            "identical seeds -> byte-identical ({} bytes); different seed -> different output",
            first.len()
        ),
    );
}
