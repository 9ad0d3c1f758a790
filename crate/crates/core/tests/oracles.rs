//! Checks against independent reference computations: quadrature for erf,
//! series for tanh, normal equations for gradient descent, finite
//! differences for the gradient.

use pdrank::evaluation::pearson;
use pdrank::games::build_team_seasons;
use pdrank::indicators::pythagorean_from_totals;
use pdrank::linalg::{norm, Matrix};
use pdrank::regression::{
    featurize, learned_weights_indicator, ridge_closed_form, ridge_gd, ridge_gd_fit, ridge_gradient, ridge_loss,
    GdConfig,
};
use pdrank::synth::{generate, SynthConfig};
use pdrank::weighting::{w_erf, w_exp, w_tanh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// `(1/sqrt(pi)) * integral_{-x}^{x} exp(-t^2) dt`, integrated numerically.
fn erf_by_quadrature(x: f64) -> f64 {
    // The integrand is below 1e-43 past |t| = 10.
    let upper = x.abs().min(10.0);
    let half = simpson(&|t: f64| (-t * t).exp(), 0.0, upper, 1e-15);
    x.signum() * 2.0 * half / std::f64::consts::PI.sqrt()
}

fn exp_by_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= x / k as f64;
        sum += term;
    }
    sum
}

#[test]
fn erf_matches_quadrature_everywhere_used() {
    let mut worst: f64 = 0.0;
    for d in [1.0, 5.0, 12.0, 40.0] {
        for pm in -40..=40 {
            let got = w_erf(pm, d).unwrap();
            let want = if pm == 0 { 0.0 } else { erf_by_quadrature(pm as f64 / d) };
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst < 1e-9, "max |erf - quadrature| = {worst:e}");
}

#[test]
fn erf_at_one() {
    let q = erf_by_quadrature(1.0);
    assert!((q - 0.842_700_792_949_714_9).abs() < 1e-12);
    assert!((w_erf(9, 9.0).unwrap() - q).abs() < 1e-12);
    assert_eq!(w_erf(-9, 9.0).unwrap(), -w_erf(9, 9.0).unwrap());
}

#[test]
fn tanh_at_one_matches_series() {
    let e2 = exp_by_series(2.0);
    let oracle = (e2 - 1.0) / (e2 + 1.0);
    assert!((oracle - 0.761_594_155_955_764_9).abs() < 1e-15);
    for d in [1.0, 7.0, 12.0] {
        assert!((w_tanh(d as i32, d).unwrap() - oracle).abs() < 1e-15);
    }
}

#[test]
fn exp_weight_values() {
    let e1 = 1.0 - 1.0 / exp_by_series(1.0);
    let e2 = 1.0 - 1.0 / exp_by_series(2.0);
    assert!((w_exp(12, 12.0).unwrap() - e1).abs() < 1e-15);
    assert!((w_exp(-24, 12.0).unwrap() + e2).abs() < 1e-15);
    assert!((e1 - 0.632_12).abs() < 1e-5 && (e2 - 0.864_66).abs() < 1e-5);
}

#[test]
fn pythagorean_high_precision_value() {
    // 4100^2.4 / (4100^2.4 + 4000^2.4) evaluated at 40 digits.
    let want = 0.514_811_233_033_153_8;
    let got = pythagorean_from_totals(4100, 4000, 2.4).unwrap();
    assert!((got - want).abs() < 1e-14, "{got}");
}

#[test]
fn pearson_hand_computed() {
    // Centered x: -1.5 -0.5 0.5 1.5; centered y: -1.5 0.5 -0.5 1.5.
    // Sxy = 2.25 - 0.25 - 0.25 + 2.25 = 4, Sxx = Syy = 5, r = 4/5.
    let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((r - 0.8).abs() < 1e-12);
}

fn random_problem(rng: &mut ChaCha8Rng) -> (Matrix, Vec<f64>) {
    let rows = rng.random_range(10..=50);
    let cols = rng.random_range(3..=10);
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = Matrix::from_row_major(rows, cols, data).unwrap();
    let truth: Vec<f64> = (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect();
    let y = x
        .mul_vec(&truth)
        .into_iter()
        .map(|v| v + rng.random_range(-0.3..0.3))
        .collect();
    (x, y)
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
    norm(&diff) / norm(b).max(f64::MIN_POSITIVE)
}

#[test]
fn gradient_descent_reaches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for instance in 0..20 {
        let (x, y) = random_problem(&mut rng);
        let lambda = [0.1, 1.0, 10.0][instance % 3];
        let cfg = GdConfig {
            lambda,
            max_iterations: 500_000,
            trace_every: 0,
            ..GdConfig::default()
        };
        let gd = ridge_gd(&x, &y, &cfg, None).unwrap();
        let exact = ridge_closed_form(&x, &y, lambda).unwrap();
        let rel = rel_diff(&gd.weights, &exact);
        assert!(rel < 1e-6, "instance {instance}: relative error {rel:e} after {} iterations", gd.iterations);
    }
}

#[test]
fn closed_form_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x = Matrix::from_row_major(5, 3, data).unwrap();
    let y: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let lambda = 0.7;
    let w = ridge_closed_form(&x, &y, lambda).unwrap();
    let gw = x.gram().mul_vec(&w);
    let xty = x.tr_mul_vec(&y);
    let resid: Vec<f64> = (0..3).map(|i| gw[i] + lambda * w[i] - xty[i]).collect();
    assert!(norm(&resid) < 1e-10);
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..10 {
        let (x, y) = random_problem(&mut rng);
        let lambda = rng.random_range(0.0..5.0);
        let w: Vec<f64> = (0..x.cols()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let analytic = ridge_gradient(&x, &y, &w, lambda);
        let numeric: Vec<f64> = (0..w.len())
            .map(|j| {
                let h = 1e-5 * w[j].abs().max(1.0);
                let mut up = w.clone();
                let mut down = w.clone();
                up[j] += h;
                down[j] -= h;
                (ridge_loss(&x, &y, &up, lambda) - ridge_loss(&x, &y, &down, lambda)) / (2.0 * h)
            })
            .collect();
        let rel = rel_diff(&analytic, &numeric);
        assert!(rel < 1e-6, "gradient mismatch {rel:e}");
    }
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
fn largest_eigenvalue(m: &Matrix) -> f64 {
    let mut v = vec![1.0; m.cols()];
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let mv = m.mul_vec(&v);
        let n = norm(&mv);
        v = mv.iter().map(|a| a / n).collect();
        lambda = n;
    }
    lambda
}

#[test]
fn loss_never_increases_below_inverse_lipschitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let (x, y) = random_problem(&mut rng);
        let lambda = 1.0;
        let mut a = x.gram();
        for i in 0..a.rows() {
            a[(i, i)] += lambda;
        }
        let lipschitz = 2.0 * largest_eigenvalue(&a);
        let cfg = GdConfig {
            lambda,
            learning_rate: Some(0.99 / lipschitz),
            max_iterations: 2_000,
            check_every: 1,
            trace_every: 0,
            ..GdConfig::default()
        };
        let out = ridge_gd(&x, &y, &cfg, None).unwrap();
        assert!(out.losses.len() > 10);
        for pair in out.losses.windows(2) {
            // Allow a few ulps of rounding once the iterates have settled.
            assert!(pair[1].1 <= pair[0].1 * (1.0 + 1e-14), "loss rose at iteration {}: {:e} -> {:e}", pair[1].0, pair[0].1, pair[1].1);
        }
        // The default step is also below 1/L.
        assert!(pdrank::regression::default_learning_rate(&x, lambda).unwrap() <= 1.0 / lipschitz);
    }
}

fn synthetic_seasons(seed: u64) -> Vec<pdrank::TeamSeason> {
    let cfg = SynthConfig {
        n_teams: 10,
        n_games: 40,
        n_seasons: 6,
        seed,
        ..SynthConfig::default()
    };
    build_team_seasons(&generate(&cfg).unwrap()).unwrap()
}

#[test]
fn learned_indicator_reproduces_final_trace() {
    let seasons = synthetic_seasons(1);
    let (x, y) = featurize(&seasons).unwrap();
    let cfg = GdConfig {
        max_iterations: 3_000,
        trace_every: 500,
        ..GdConfig::default()
    };
    let fit = ridge_gd_fit(&x, &y, &cfg).unwrap();
    let values: Vec<f64> = learned_weights_indicator(&seasons, &fit)
        .unwrap()
        .into_iter()
        .map(|v| v.value)
        .collect();
    let r = pearson(&values, &y.values).unwrap();
    let last = fit.final_correlation().unwrap();
    assert!((r - last).abs() < 1e-12, "{r} vs {last}");
    assert_eq!(fit.trace.last().unwrap().0, fit.iterations);
    assert!(fit.trace.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn row_permutation_leaves_fit_unchanged() {
    let seasons = synthetic_seasons(2);
    let mut shuffled = seasons.clone();
    shuffled.reverse();
    shuffled.rotate_left(7);
    let cfg = GdConfig {
        max_iterations: 2_000,
        trace_every: 0,
        ..GdConfig::default()
    };
    let fit = |s: &[pdrank::TeamSeason]| {
        let (x, y) = featurize(s).unwrap();
        ridge_gd_fit(&x, &y, &cfg).unwrap()
    };
    let (a, b) = (fit(&seasons), fit(&shuffled));
    for (p, q) in a.weights.as_slice().iter().zip(b.weights.as_slice()) {
        assert!((p - q).abs() < 1e-10);
    }
    let ia = learned_weights_indicator(&seasons, &a).unwrap();
    let ib = learned_weights_indicator(&shuffled, &a).unwrap();
    for v in &ib {
        let orig = ia.iter().find(|u| u.key == v.key).unwrap();
        assert_eq!(orig.value, v.value);
    }
}

#[test]
fn featurize_rows_sum_to_first_half() {
    let seasons = synthetic_seasons(3);
    let (x, y) = featurize(&seasons).unwrap();
    for (r, s) in seasons.iter().enumerate() {
        let sum: f64 = x.counts.row(r).iter().sum();
        assert_eq!(sum as usize, s.n_games() / 2);
        assert_eq!(x.first_half_games[r], s.n_games() / 2);
    }
    assert!(y.values.iter().all(|v| (0.0..=1.0).contains(v)));
}
