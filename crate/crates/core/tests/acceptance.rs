//! Acceptance checks. Each test prints one `PASS`/`FAIL` line.

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use wsn_dps::correlation::{
    aggregated_rx, aggregated_traffic_bound, prediction_only_bound, prob_no_transmission, MvnOptions,
};
use wsn_dps::prediction::{expected_dps_traffic, DpsConfig};
use wsn_dps::simulator::{analytical_expectations, build_tree, compare_with_model, generate_measurements, run, Scheme};
use wsn_dps::sweep::{cmd_sweep, cmd_validate, data_traffic, SweepSpec, ValidateSpec};
use wsn_dps::correlation::CorrelationSpec;
use wsn_dps::traffic::{baseline_node_traffic, DisseminationMode};

const SAMPLES: u64 = 1_000_000;
const F: f64 = 1.0 / 60.0;
const T: f64 = 259_200.0;

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    println!("criterion {id:>2} {} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

#[test]
fn c01_model_column_of_validation_table() {
    let expected = [(0.5, 92.0), (0.6, 81.1), (0.7, 66.4), (0.8, 48.7), (0.9, 28.0), (0.95, 15.8)];
    let mut worst: f64 = 0.0;
    let mut cells = Vec::new();
    for (i, &(alpha, pct)) in expected.iter().enumerate() {
        let est = prob_no_transmission(9, alpha, 0.820068, MvnOptions::new(SAMPLES, i as u64)).unwrap();
        let got = 100.0 * (1.0 - est.p);
        worst = worst.max((got - pct).abs());
        cells.push(format!("{alpha}:{got:.2}%"));
    }
    report(1, "model column", worst <= 1.5, &format!("{} (max |diff| {worst:.2} pp, limit 1.5)", cells.join(" ")));
}

/// Location of the Intel Berkeley lab trace: `INTEL_LAB_TRACE`, else
/// `data/intel-lab/data.txt` under the workspace root.
fn intel_lab_trace() -> Option<PathBuf> {
    let path = std::env::var_os("INTEL_LAB_TRACE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/intel-lab/data.txt"));
    path.exists().then_some(path)
}

#[test]
fn c02_real_data_column_of_validation_table() {
    let Some(path) = intel_lab_trace() else {
        report(
            2,
            "real-data column",
            false,
            "Intel-Lab trace not found (set INTEL_LAB_TRACE or place it at data/intel-lab/data.txt)",
        );
        return;
    };
    let expected = [87.3, 78.8, 67.4, 51.1, 27.6, 11.2];
    let mut spec = ValidateSpec::new(path);
    spec.samples = SAMPLES;
    let report_ = cmd_validate(&spec).unwrap();
    let worst = report_
        .table
        .iter()
        .zip(expected)
        .map(|(row, pct)| (row.real_percent - pct).abs())
        .fold(0.0, f64::max);
    let baselines = (report_.counts.no_dps_baseline, report_.counts.aggregation_baseline);
    let cells: Vec<String> = report_.table.iter().map(|r| format!("{}:{:.1}%", r.accuracy, r.real_percent)).collect();
    report(
        2,
        "real-data column",
        worst <= 4.0 && baselines == (20736, 2304),
        &format!("{} baselines {baselines:?} (max |diff| {worst:.2} pp, limit 4)", cells.join(" ")),
    );
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `1 - α^(m/2) <= (m/2)(1 - α)` decided without rounding. For odd `m`
/// the power is a square root, so compare squares once the right side of
/// `1 - (m/2)(1 - α) <= α^(m/2)` is known to be positive.
fn bernoulli_holds(alpha: &BigRational, m: u32) -> bool {
    let x = rational(i64::from(m), 2);
    let lhs = BigRational::one() - x * (BigRational::one() - alpha);
    if lhs <= BigRational::zero() {
        return true;
    }
    let alpha_m = num_traits::pow(alpha.clone(), m as usize);
    if m % 2 == 0 {
        lhs <= num_traits::pow(alpha.clone(), (m / 2) as usize)
    } else {
        lhs.clone() * lhs <= alpha_m
    }
}

#[test]
fn c03_bernoulli_inequality_exact() {
    let mut checked = 0;
    let mut violations = 0;
    for k in 0..=100 {
        let alpha = rational(k, 100);
        for m in 2..=100 {
            checked += 1;
            if !bernoulli_holds(&alpha, m) {
                violations += 1;
            }
        }
    }
    report(3, "1 - α^x <= x(1 - α)", violations == 0, &format!("{checked} grid points, {violations} violations"));
}

#[test]
fn c04_zero_correlation_matches_independence() {
    let mut worst_ratio: f64 = 0.0;
    let mut failures = 0;
    for n in 1..=10 {
        for alpha in [0.5, 0.7, 0.9, 0.95] {
            let est = prob_no_transmission(n, alpha, 0.0, MvnOptions::new(SAMPLES, n as u64)).unwrap();
            let diff = (est.p - alpha.powi(n as i32)).abs();
            let ratio = diff / (3.0 * est.stderr);
            worst_ratio = worst_ratio.max(ratio);
            failures += usize::from(ratio > 1.0);
        }
    }
    report(
        4,
        "zero-correlation oracle",
        failures == 0,
        &format!("40 cases, {failures} outside 3 stderr (worst |diff| / 3se = {worst_ratio:.3})"),
    );
}

#[test]
fn c05_simulator_agrees_with_model() {
    let slots = 10_000.0;
    let mut cases = 0;
    let mut failures = Vec::new();
    let mut exact_none = true;
    for (ci, &rings) in [2u32, 3, 5].iter().enumerate() {
        let tree = build_tree(3, rings, ci as u64).unwrap();
        let n = tree.len();
        for (ai, &alpha) in [0.5, 0.9].iter().enumerate() {
            for (ri, &rho) in [0.0, 0.5, 0.9].iter().enumerate() {
                let seed = (100 * ci + 10 * ai + ri) as u64;
                let trace =
                    generate_measurements(&CorrelationSpec::Rho(rho), &vec![20.0; n], &vec![2.0; n], 1.0, slots, seed)
                        .unwrap();
                let cfg = DpsConfig::uniform(alpha, 1.0, slots, DisseminationMode::GwUnicast);
                for scheme in Scheme::ALL {
                    cases += 1;
                    let result = run(scheme, &tree, &trace, &cfg, seed).unwrap();
                    let model = analytical_expectations(scheme, &tree, alpha, rho, cfg.mode, MvnOptions::new(SAMPLES, seed))
                        .unwrap();
                    let cmp = compare_with_model(&result, &model).unwrap();
                    let fr = cmp.first_ring;
                    if !(fr.tx.within() && fr.rx.within()) {
                        failures.push(format!(
                            "D={rings} α={alpha} ρ={rho} {scheme}: tx {:.0}/{:.1}±{:.1} rx {:.0}/{:.1}±{:.1}",
                            fr.tx.simulated, fr.tx.expected, fr.tx.tolerance, fr.rx.simulated, fr.rx.expected, fr.rx.tolerance
                        ));
                    }
                    if scheme == Scheme::None {
                        let eq = baseline_node_traffic(1, rings, 1.0, slots).unwrap();
                        for c in result.counters.iter().filter(|c| c.ring == 1) {
                            exact_none &= c.tx as f64 == eq.tx && c.rx as f64 == eq.rx;
                        }
                    }
                }
            }
        }
    }
    report(
        5,
        "simulator vs model",
        failures.is_empty() && exact_none,
        &format!(
            "{cases} cases, {} outside 3σ, no-optimization counters exact: {exact_none} {}",
            failures.len(),
            failures.join("; ")
        ),
    );
}

#[test]
fn c06_combined_savings_at_high_accuracy_and_correlation() {
    let opts = MvnOptions::new(SAMPLES, 6);
    let t = |s| data_traffic(s, 1, 5, 0.95, 0.95, F, T, opts).unwrap().0;
    let (combined, aggregation, none) = (t(Scheme::PredictionAggregation), t(Scheme::AggregationOnly), t(Scheme::None));
    let tx_share = 100.0 * combined.tx / aggregation.tx;
    let dissemination = wsn_dps::traffic::dissemination_cost(DisseminationMode::GwUnicast, 5).unwrap();
    let reduction = 100.0 * (1.0 - (combined.total() + dissemination) / none.total());
    report(
        6,
        "combined savings",
        (tx_share - 15.0).abs() <= 3.0 && reduction >= 95.0,
        &format!("first-ring tx {tx_share:.2}% of aggregation-only (15 ± 3), tx+rx reduction {reduction:.2}% (>= 95)"),
    );
}

#[test]
fn c07_accuracy_matters_more_than_correlation() {
    let tx = |alpha, rho, seed| {
        data_traffic(Scheme::PredictionAggregation, 1, 5, alpha, rho, F, T, MvnOptions::new(SAMPLES, seed))
            .unwrap()
            .0
            .tx
    };
    let base = tx(0.5, 0.5, 1);
    let alpha_effect = 100.0 * (1.0 - tx(0.9, 0.5, 2) / base);
    let rho_effect = 100.0 * (1.0 - tx(0.5, 0.9, 3) / base);
    let pass = (alpha_effect - 30.0).abs() <= 5.0 && (rho_effect - 6.5).abs() <= 3.0 && alpha_effect > rho_effect;
    report(
        7,
        "sensitivity ordering",
        pass,
        &format!("α 0.5→0.9 cuts first-ring tx by {alpha_effect:.2}% (30 ± 5), ρ 0.5→0.9 by {rho_effect:.2}% (6.5 ± 3)"),
    );
}

#[test]
fn c08_minimum_accuracy_boundary() {
    let mut worst: f64 = 0.0;
    for rings in [1, 2, 5, 10] {
        let gap = |alpha| {
            let cfg = DpsConfig::uniform(alpha, F, T, DisseminationMode::GwUnicast);
            expected_dps_traffic(&cfg, 1, rings).unwrap().total() - baseline_node_traffic(1, rings, F, T).unwrap().total()
        };
        // the gap is affine in α
        let (g0, g1) = (gap(0.0), gap(1.0));
        let root = g0 / (g0 - g1);
        worst = worst.max((root - 1.0 / (F * T)).abs() * F * T);
    }
    report(
        8,
        "minimum-accuracy boundary",
        worst <= 1e-12,
        &format!("crossing at 1/(fT) = {:.6e}, max relative error {worst:.2e} (<= 1e-12)", 1.0 / (F * T)),
    );
}

#[test]
fn c09_aggregation_bound_dominates() {
    let spec = SweepSpec::default();
    let (mut checked, mut violations) = (0, 0);
    for &rings in &spec.rings {
        for d in 1..=rings {
            for &alpha in &spec.accuracy {
                for mode in DisseminationMode::ALL {
                    checked += 1;
                    let agg = aggregated_traffic_bound(d, rings, alpha, F, T, mode).unwrap();
                    let pred = prediction_only_bound(d, rings, alpha, F, T, mode).unwrap();
                    violations += usize::from(agg > pred);
                }
            }
        }
    }
    report(9, "bound dominance", violations == 0, &format!("{checked} grid points, {violations} violations"));
}

#[test]
fn c10_energy_savings() {
    let spec = SweepSpec {
        rings: vec![5],
        accuracy: vec![0.95],
        rho: vec![0.9, 0.95],
        schemes: vec![Scheme::PredictionAggregation],
        samples: SAMPLES,
        ..SweepSpec::default()
    };
    let rows = cmd_sweep(&spec).unwrap();
    let worst = rows.iter().map(|r| r.energy_reduction_pct).fold(f64::INFINITY, f64::min);
    let cells: Vec<String> = rows.iter().map(|r| format!("ρ={}:{:.2}%", r.rho, r.energy_reduction_pct)).collect();
    report(10, "energy savings", worst >= 90.0, &format!("{} (>= 90)", cells.join(" ")));
}

#[test]
fn homogeneous_rx_bounds_the_realized_tree() {
    // D = 3 gives second-ring sub-trees of 3, 3 and 2 nodes; the ring model
    // rounds every child sub-tree up to 3.
    let tree = build_tree(3, 3, 0).unwrap();
    let opts = MvnOptions::new(SAMPLES, 1);
    for alpha in [0.5, 0.9] {
        for rho in [0.0, 0.5, 0.9] {
            let homogeneous = aggregated_rx(1, 3, alpha, rho, opts).unwrap();
            let model = analytical_expectations(Scheme::PredictionAggregation, &tree, alpha, rho, DisseminationMode::Independent, opts)
                .unwrap();
            for m in model.iter().filter(|m| m.ring == 1) {
                assert!(
                    homogeneous.value + 3.0 * homogeneous.stderr >= m.per_slot.rx - 3.0 * m.model_stderr.rx,
                    "α={alpha} ρ={rho}: {} < {}",
                    homogeneous.value,
                    m.per_slot.rx
                );
            }
        }
    }
}
