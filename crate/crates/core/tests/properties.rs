//! Property suites: packing round-trips, norm axioms, kernel decay bounds,
//! bracket sandwiches, closed-form-vs-grid regularizer checks, and verdict
//! symmetries.

use banachfit::kernel::KernelContext;
use banachfit::network::{self, Activation, Architecture};
use banachfit::regularizer::{self, RegConfig};
use banachfit::signs::{self, SignOptions, SignVector};
use banachfit::supnorm::{self, Combination, SearchConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx221() -> KernelContext {
    KernelContext::with_default_decay(Architecture::new(vec![2, 2, 1], Activation::Relu).unwrap())
}

fn quick_cfg() -> SearchConfig {
    SearchConfig {
        starts: 64,
        iters: 200,
        ..SearchConfig::default()
    }
}

proptest! {
    #[test]
    fn pack_unpack_round_trip(flat in proptest::collection::vec(-1e6f64..1e6, 9)) {
        let arch = Architecture::new(vec![2, 2, 1], Activation::Relu).unwrap();
        let theta = network::unpack(&arch, &flat).unwrap();
        prop_assert_eq!(network::pack(&theta), flat);
    }

    #[test]
    fn param_norm_axioms(
        a in proptest::collection::vec(-10f64..10.0, 9),
        b in proptest::collection::vec(-10f64..10.0, 9),
        scale_exp in -8i32..8,
    ) {
        let arch = Architecture::new(vec![2, 2, 1], Activation::Relu).unwrap();
        let ta = network::unpack(&arch, &a).unwrap();
        let tb = network::unpack(&arch, &b).unwrap();
        // Power-of-two homogeneity is exact in floating point.
        let c = (2.0f64).powi(scale_exp);
        let scaled: Vec<f64> = a.iter().map(|v| c * v).collect();
        let tc = network::unpack(&arch, &scaled).unwrap();
        prop_assert_eq!(network::param_norm(&tc), c.abs() * network::param_norm(&ta));
        // Triangle inequality.
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ts = network::unpack(&arch, &sum).unwrap();
        prop_assert!(
            network::param_norm(&ts)
                <= network::param_norm(&ta) + network::param_norm(&tb) + 1e-9
        );
    }

    #[test]
    fn xi_is_in_unit_interval(flat in proptest::collection::vec(-50f64..50.0, 9)) {
        let ctx = ctx221();
        let xi = ctx.xi_packed(&flat);
        prop_assert!(xi > 0.0 && xi <= 1.0);
        let norm = network::param_norm_packed(ctx.arch(), &flat);
        prop_assert_eq!(xi == 1.0, norm <= 1.0);
    }
}

#[test]
fn kernel_bound_on_random_samples() {
    // |k(x, theta)| <= max{1, |x|_inf} over 10^4 samples with parameter
    // norms up to 10^3.
    let ctx = ctx221();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..10_000 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-5.0..5.0)).collect();
        let scale = 10f64.powf(rng.random_range(-2.0..3.0));
        let flat: Vec<f64> = (0..9)
            .map(|_| scale * rng.random_range(-1.0..1.0))
            .collect();
        let bound = ctx.input_bound(&x).unwrap();
        let value = ctx.eval_packed(&x, &flat, 0).abs();
        assert!(
            value <= bound + 1e-12,
            "trial {trial}: |k| = {value} exceeds bound {bound}"
        );
    }
}

#[test]
fn kernel_decays_with_parameter_norm() {
    // For p = depth + 1: |k(x, theta)| <= C(x) / |theta| once |theta| >= 1.
    let ctx = ctx221();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..2_000 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let scale = 10f64.powf(rng.random_range(0.0..3.0));
        let flat: Vec<f64> = (0..9)
            .map(|_| scale * rng.random_range(-1.0..1.0))
            .collect();
        let norm = network::param_norm_packed(ctx.arch(), &flat);
        if norm < 1.0 {
            continue;
        }
        let bound = ctx.input_bound(&x).unwrap() / norm;
        let value = ctx.eval_packed(&x, &flat, 0).abs();
        assert!(value <= bound + 1e-12, "|k| = {value} vs tail bound {bound}");
    }
}

#[test]
fn bracket_sandwich_on_random_combinations() {
    // grid oracle <= search lower bound <= analytic upper, on 50 random
    // combinations.
    let ctx = ctx221();
    let cfg = quick_cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    for trial in 0..50 {
        let m = rng.random_range(1..=3);
        let terms: Vec<(f64, Vec<f64>)> = (0..m)
            .map(|_| {
                let coeff = rng.random_range(-2.0..2.0);
                let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.5..1.5)).collect();
                (coeff, x)
            })
            .collect();
        let comb = Combination::new(terms, 0);
        let est = supnorm::estimate_sup(&ctx, &comb, &cfg);
        let oracle = supnorm::grid_oracle(&ctx, &comb, 20_000, 31 + trial as u64);
        assert!(
            oracle <= est.lower + 1e-6,
            "trial {trial}: oracle {oracle} beats search lower {}",
            est.lower
        );
        assert!(
            est.lower <= est.upper + 1e-12,
            "trial {trial}: lower {} above upper {}",
            est.lower,
            est.upper
        );
    }
}

#[test]
fn estimate_upper_never_exceeds_analytic() {
    let ctx = ctx221();
    let cfg = quick_cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let terms: Vec<(f64, Vec<f64>)> = (0..2)
            .map(|_| {
                (
                    rng.random_range(-3.0..3.0),
                    (0..2).map(|_| rng.random_range(-2.0..2.0)).collect(),
                )
            })
            .collect();
        let comb = Combination::new(terms, 0);
        let est = supnorm::estimate_sup(&ctx, &comb, &cfg);
        let analytic = supnorm::analytic_upper(&ctx, &comb).unwrap();
        assert!(est.upper <= analytic + 1e-12);
    }
}

/// Brute-force 1-D minimizer: a dense grid over the feasible slice of
/// [lo, hi] (the orthant boundary included as an explicit candidate),
/// refined around the incumbent until the resolution is below 1e-7.
fn grid_minimize_1d(
    h: impl Fn(f64) -> f64,
    feasible: impl Fn(f64) -> bool,
    boundary: f64,
    lo: f64,
    hi: f64,
) -> (f64, f64) {
    let mut best = (boundary, h(boundary));
    let scan = |lo: f64, hi: f64, steps: usize, best: &mut (f64, f64)| {
        for g in 0..=steps {
            let eps = lo + (hi - lo) * (g as f64) / (steps as f64);
            if feasible(eps) {
                let v = h(eps);
                if v < best.1 {
                    *best = (eps, v);
                }
            }
        }
    };
    scan(lo, hi, 100_000, &mut best);
    let mut width = (hi - lo) / 100_000.0;
    while width > 1e-7 {
        let center = best.0;
        scan(center - width, center + width, 1_000, &mut best);
        width /= 500.0;
    }
    best
}

#[test]
fn closed_form_orthant_matches_dense_grid() {
    // Per coordinate, per orthant: the closed-form epsilon agrees with a
    // dense 1-D grid minimization within 1e-6 in argument and 1e-9 in value.
    let mut rng = ChaCha8Rng::seed_from_u64(512);
    for trial in 0..100 {
        let m = rng.random_range(1..=4usize);
        let beta: Vec<f64> = (0..m).map(|_| rng.random_range(-4.0..4.0)).collect();
        let diag: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..2.5)).collect();
        let norms: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..1.0)).collect();
        let lambda0 = rng.random_range(0.01..2.0);
        let cfg = RegConfig::new(lambda0).unwrap();
        let entries: Vec<i8> = (0..m).map(|_| rng.random_range(-1i8..=1)).collect();
        let sign = SignVector::new(entries).unwrap();
        let result = regularizer::orthant_minimize(&sign, &beta, &diag, &norms, m, &cfg).unwrap();

        for i in 0..m {
            let s = sign.entries()[i];
            let (b, d, n) = (beta[i], diag[i], norms[i]);
            let mf = m as f64;
            let h = |eps: f64| (d * eps) * (d * eps) / mf + lambda0 * n * (b + eps).abs();

            if s == 0 {
                // The zero orthant pins the coefficient: nothing to search.
                assert_eq!(result.epsilon[i], -b);
                assert_eq!(result.coefficients[i], 0.0);
                continue;
            }
            let feasible = |eps: f64| {
                if s == 1 {
                    b + eps >= 0.0
                } else {
                    b + eps <= 0.0
                }
            };
            let span = b.abs() + 10.0 * lambda0 * mf;
            let (grid_eps, grid_val) = grid_minimize_1d(h, feasible, -b, -span, span);
            assert!(
                (result.epsilon[i] - grid_eps).abs() <= 1e-6,
                "trial {trial} coord {i}: closed form {} vs grid {grid_eps}",
                result.epsilon[i]
            );
            let closed_val = h(result.epsilon[i]);
            assert!(
                (closed_val - grid_val).abs() <= 1e-9,
                "trial {trial} coord {i}: closed value {closed_val} vs grid {grid_val}"
            );
        }

        // And R re-derives from the reported coefficients.
        let rebuilt = regularizer::r_of(
            &result.epsilon,
            &result.coefficients,
            &diag,
            &norms,
            m,
            &cfg,
        );
        assert!((rebuilt - result.r_value).abs() <= 1e-12);
    }
}

#[test]
fn sweep_r_is_monotone_in_lambda() {
    let beta = vec![2.0, -3.0, 0.5];
    let diag = vec![1.0; 3];
    let norms = vec![1.0; 3];
    let sign = SignVector::new(vec![1, -1, 0]).unwrap();
    let mut previous = 0.0;
    for k in 1..=20 {
        let lambda0 = 0.05 * k as f64;
        let cfg = RegConfig::new(lambda0).unwrap();
        let r = regularizer::orthant_minimize(&sign, &beta, &diag, &norms, 3, &cfg)
            .unwrap()
            .r_value;
        assert!(r >= previous - 1e-12, "R not monotone at lambda {lambda0}");
        previous = r;
    }
}

#[test]
fn admissibility_verdicts_are_negation_symmetric() {
    // Full enumerations for m <= 4 give matching verdict kinds under
    // negation.
    let ctx = ctx221();
    let cfg = SearchConfig {
        starts: 32,
        iters: 120,
        ..SearchConfig::default()
    };
    let opts = SignOptions::default();
    let datasets: Vec<Vec<Vec<f64>>> = vec![
        vec![vec![0.5, -0.5]],
        vec![vec![1.0, -1.0], vec![-1.0, 0.0]],
        vec![vec![1.0, -1.0], vec![-1.0, 0.0], vec![0.0, 1.0]],
        vec![
            vec![1.0, -1.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        ],
    ];
    for inputs in datasets {
        let scales = signs::section_scales(&ctx, &inputs, &opts);
        let table = signs::enumerate_admissible(&ctx, &inputs, 0, &opts, &cfg).unwrap();
        for (sign, verdict) in &table {
            let neg = sign.negated();
            let (_, neg_verdict) = table
                .iter()
                .find(|(s, _)| *s == neg)
                .expect("negation present in full enumeration");
            assert_eq!(
                verdict.kind(),
                neg_verdict.kind(),
                "verdict kinds differ for {sign} and its negation"
            );
        }
        for (sign, verdict) in &table {
            // The certified-admissible sublist is closed under negation.
            if verdict.is_certified_admissible() {
                let neg = sign.negated();
                assert!(table
                    .iter()
                    .any(|(s, v)| *s == neg && v.is_certified_admissible()));
            }
            // Disproofs re-derive by direct evaluation, no stored-value trust.
            if let banachfit::AdmissibilityVerdict::CertifiedInadmissible { witness, value } =
                verdict
            {
                let comb = Combination::new(
                    sign.entries()
                        .iter()
                        .zip(&inputs)
                        .zip(&scales)
                        .map(|((&s, x), &c)| (s as f64 * c, x.clone()))
                        .collect(),
                    0,
                );
                let fresh = comb.eval(&ctx, witness).abs();
                assert!(fresh > 1.0 + 1e-9, "{sign}: witness re-evaluates to {fresh}");
                assert_eq!(fresh, *value, "{sign}: stored value drifted");
            }
        }
    }
}

#[test]
fn constant_selector_rule_holds_for_certified_admissible() {
    // Certified admissible => |sum of scaled signs| <= 1 under the default
    // family.
    let ctx = ctx221();
    let cfg = quick_cfg();
    let inputs = vec![vec![1.0, -1.0], vec![-1.0, 0.0], vec![0.0, 1.0]];
    let table =
        signs::enumerate_admissible(&ctx, &inputs, 0, &SignOptions::default(), &cfg).unwrap();
    for (sign, verdict) in table {
        if verdict.is_certified_admissible() {
            let total: i32 = sign.entries().iter().map(|&e| e as i32).sum();
            assert!(total.abs() <= 1, "{sign} certified but sums to {total}");
        }
    }
}
