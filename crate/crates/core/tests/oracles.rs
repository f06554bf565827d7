//! Independent reference computations checked against the library.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use wsn_dps::correlation::{
    aggregated_rx, aggregated_traffic_bound, aggregated_tx, build_equicorrelation_matrix, mvn_box_probability,
    prediction_only_bound, prob_no_transmission, MvnOptions,
};
use wsn_dps::prediction::{accuracy_from_threshold, threshold_from_accuracy};
use wsn_dps::traffic::DisseminationMode;

/// Fraction of correlated normal draws (via a symmetric square root of
/// `sigma`) that land in the box, with its binomial standard error.
fn rejection_sample(sigma: &DMatrix<f64>, lower: &[f64], upper: &[f64], samples: usize, seed: u64) -> (f64, f64) {
    let n = sigma.nrows();
    let eig = SymmetricEigen::new(sigma.clone());
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = DVector::<f64>::zeros(n);
    let mut hits = 0usize;
    for _ in 0..samples {
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let x = &root * &z;
        if (0..n).all(|i| x[i] >= lower[i] && x[i] <= upper[i]) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// One-factor integral for the symmetric equicorrelated box:
/// `∫ φ(z) [Φ((q - √ρ z)/√(1-ρ)) - Φ((-q - √ρ z)/√(1-ρ))]^n dz`
/// by composite Simpson on [-12, 12].
fn one_factor(n: usize, alpha: f64, rho: f64) -> f64 {
    let std = Normal::standard();
    let q = std.inverse_cdf((1.0 - alpha) / 2.0).abs();
    if rho == 0.0 {
        return alpha.powi(n as i32);
    }
    let (a, s) = (rho.sqrt(), (1.0 - rho).sqrt());
    let g = |z: f64| {
        let inner = std.cdf((q - a * z) / s) - std.cdf((-q - a * z) / s);
        (-z * z / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt() * inner.powi(n as i32)
    };
    let steps = 20_000;
    let h = 24.0 / steps as f64;
    let mut acc = g(-12.0) + g(12.0);
    for k in 1..steps {
        let z = -12.0 + k as f64 * h;
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * g(z);
    }
    acc * h / 3.0
}

#[test]
fn box_probability_matches_rejection_sampling() {
    let sigma = build_equicorrelation_matrix(3, 0.5).unwrap();
    let est = mvn_box_probability(&sigma, &[-1.0; 3], &[1.0; 3], 1_000_000, 11).unwrap();
    let (p, se) = rejection_sample(sigma.as_matrix(), &[-1.0; 3], &[1.0; 3], 10_000_000, 5);
    let combined = (est.stderr.powi(2) + se.powi(2)).sqrt();
    assert!((est.p - p).abs() <= 3.0 * combined, "genz {} vs rejection {p} (combined se {combined})", est.p);
}

#[test]
fn asymmetric_box_matches_rejection_sampling() {
    let sigma = wsn_dps::correlation::CorrelationMatrix::from_rows(&[
        vec![1.0, 0.3, -0.2, 0.1],
        vec![0.3, 1.0, 0.4, 0.0],
        vec![-0.2, 0.4, 1.0, 0.25],
        vec![0.1, 0.0, 0.25, 1.0],
    ])
    .unwrap();
    let (lo, hi) = ([-1.5, -0.5, f64::NEG_INFINITY, -2.0], [0.7, 2.0, 0.3, 1.0]);
    let est = mvn_box_probability(&sigma, &lo, &hi, 400_000, 2).unwrap();
    let (p, se) = rejection_sample(sigma.as_matrix(), &lo, &hi, 4_000_000, 9);
    let combined = (est.stderr.powi(2) + se.powi(2)).sqrt();
    assert!((est.p - p).abs() <= 3.0 * combined, "genz {} vs rejection {p}", est.p);
}

#[test]
fn first_ring_tx_matches_rejection_sampling() {
    // D = 3: the first-ring node and its 8 descendants
    let tx = aggregated_tx(1, 3, 0.9, 0.5, MvnOptions::new(200_000, 1)).unwrap();
    let q = Normal::standard().inverse_cdf(0.05).abs();
    let sigma = build_equicorrelation_matrix(9, 0.5).unwrap();
    let (p, se) = rejection_sample(sigma.as_matrix(), &[-q; 9], &[q; 9], 2_000_000, 3);
    let combined = (tx.stderr.powi(2) + se.powi(2)).sqrt();
    assert!((tx.value - (1.0 - p)).abs() <= 3.0 * combined, "{} vs {}", tx.value, 1.0 - p);
}

#[test]
fn no_transmission_matches_one_factor_quadrature() {
    for &(n, alpha, rho) in &[
        (2, 0.9, 0.7),
        (5, 0.5, 0.3),
        (9, 0.95, 0.820068),
        (9, 0.5, 0.820068),
        (25, 0.95, 0.95),
        (25, 0.5, 0.5),
        (8, 0.9, 0.9),
    ] {
        let est = prob_no_transmission(n, alpha, rho, MvnOptions::new(200_000, 7)).unwrap();
        let exact = one_factor(n, alpha, rho);
        assert!(
            (est.p - exact).abs() <= 3.0 * est.stderr + 1e-9,
            "n={n} α={alpha} ρ={rho}: {} ± {} vs {exact}",
            est.p,
            est.stderr
        );
    }
}

#[test]
fn leaf_children_rx_is_exact_at_zero_correlation() {
    let rx = aggregated_rx(1, 2, 0.8, 0.0, MvnOptions::new(1000, 0)).unwrap();
    assert!((rx.value - 3.0 * 0.2).abs() < 1e-12);
}

#[test]
fn perfect_correlation_behaves_as_one_node() {
    for alpha in [0.5, 0.7, 0.9, 0.95] {
        for n in [2, 5, 10] {
            let est = prob_no_transmission(n, alpha, 1.0, MvnOptions::new(20_000, 1)).unwrap();
            assert!((est.p - alpha).abs() <= 3.0 * est.stderr + 1e-9, "n={n} α={alpha}: {}", est.p);
        }
    }
}

#[test]
fn bivariate_probability_grows_with_correlation() {
    for alpha in [0.5, 0.8, 0.95] {
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=10 {
            let rho = f64::from(k) / 10.0;
            let est = prob_no_transmission(2, alpha, rho, MvnOptions::new(100_000, 4)).unwrap();
            if let Some((p, se)) = prev {
                assert!(est.p >= p - 3.0 * (se + est.stderr), "α={alpha} ρ={rho}: {} < {p}", est.p);
            }
            prev = Some((est.p, est.stderr));
        }
    }
}

#[test]
fn threshold_quantiles_match_reference() {
    let std = Normal::standard();
    for alpha in [0.0, 0.1, 0.5, 0.683, 0.9, 0.95, 0.99, 0.999] {
        let eps = threshold_from_accuracy(alpha, 1.0).unwrap();
        assert!((eps - std.inverse_cdf((1.0 + alpha) / 2.0)).abs() < 1e-8, "α={alpha}");
        let back = 2.0 * std.cdf(eps) - 1.0;
        assert!((back - alpha).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn bound_never_exceeds_prediction_only(alpha in 0.0f64..=1.0, rings in 1u32..40, d_frac in 0.0f64..1.0, f in 0.001f64..2.0, period in 1.0f64..1e6) {
        let d = 1 + ((rings - 1) as f64 * d_frac) as u32;
        for mode in DisseminationMode::ALL {
            let agg = aggregated_traffic_bound(d, rings, alpha, f, period, mode).unwrap();
            let pred = prediction_only_bound(d, rings, alpha, f, period, mode).unwrap();
            prop_assert!(agg <= pred * (1.0 + 1e-12) + 1e-9, "{agg} > {pred}");
        }
    }

    #[test]
    fn threshold_round_trip(alpha in 0.0f64..0.999, sigma in 0.01f64..100.0) {
        let eps = threshold_from_accuracy(alpha, sigma).unwrap();
        let back = accuracy_from_threshold(eps, sigma).unwrap();
        prop_assert!((back - alpha).abs() <= 1e-9 * alpha.max(1e-3));
    }
}
