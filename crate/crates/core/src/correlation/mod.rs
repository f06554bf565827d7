//! Correlation-aware traffic under prediction plus in-network aggregation.
//!
//! A node that aggregates sends one packet per slot iff at least one
//! prediction in its sub-tree failed. With Gaussian errors and equicorrelated
//! nodes, "no prediction failed" is a box event of a multivariate normal.

mod matrix;
mod mvn;

pub use matrix::{build_equicorrelation_matrix, CorrelationMatrix, CorrelationSpec};
pub use mvn::{mvn_box_probability, MvnEstimate, MvnOptions, BATCHES, DEFAULT_SAMPLES};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::normal;
use crate::topology::SubtreeTable;
use crate::traffic::{dissemination_traffic, DisseminationMode, TrafficReport};

/// Rounds an expected count up to the next integer, ignoring float noise
/// from the ring recursion.
pub fn ceil_count(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

/// Probability that none of `n` equicorrelated nodes with accuracy `alpha`
/// mispredicts.
pub fn prob_no_transmission(n: usize, alpha: f64, rho: f64, opts: MvnOptions) -> Result<MvnEstimate> {
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("accuracy must lie in [0, 1], got {alpha}"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return domain(format!("correlation must lie in [0, 1], got {rho}"));
    }
    if n == 0 || alpha == 1.0 {
        return Ok(MvnEstimate::exact(1.0, opts.seed));
    }
    if alpha == 0.0 {
        return Ok(MvnEstimate::exact(0.0, opts.seed));
    }
    let q = normal::quantile((1.0 - alpha) / 2.0).abs();
    let sigma = build_equicorrelation_matrix(n, rho)?;
    mvn_box_probability(&sigma, &vec![-q; n], &vec![q; n], opts.samples, opts.seed)
}

/// Expected count with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    pub stderr: f64,
}

/// Expected transmissions per slot of an aggregating ring-`d` node: one
/// merged packet whenever its own prediction or any descendant's fails.
pub fn aggregated_tx(d: u32, rings: u32, alpha: f64, rho: f64, opts: MvnOptions) -> Result<Expectation> {
    let k = SubtreeTable::new(rings).subtree_size(d)?;
    let est = prob_no_transmission(1 + ceil_count(k), alpha, rho, opts)?;
    Ok(Expectation {
        value: 1.0 - est.p,
        stderr: est.stderr,
    })
}

/// Expected receptions per slot of an aggregating ring-`d` node: the sum over
/// its direct children of their transmit probabilities. Children are taken as
/// `ceil(I_d)` equal sub-trees of `ceil(K_d / I_d)` nodes each.
pub fn aggregated_rx(d: u32, rings: u32, alpha: f64, rho: f64, opts: MvnOptions) -> Result<Expectation> {
    let table = SubtreeTable::new(rings);
    let i = table.child_ratio(d)?;
    let k = table.subtree_size(d)?;
    if i == 0.0 {
        return Ok(Expectation::default());
    }
    let children = ceil_count(i);
    let members = ceil_count(k / i);
    let est = prob_no_transmission(members, alpha, rho, opts)?;
    Ok(Expectation {
        value: children as f64 * (1.0 - est.p),
        stderr: children as f64 * est.stderr,
    })
}

/// Expected traffic over one period of an aggregating ring-`d` node using
/// predictions, including its share of model dissemination.
#[allow(clippy::too_many_arguments)]
pub fn aggregated_traffic(
    d: u32,
    rings: u32,
    alpha: f64,
    rho: f64,
    f: f64,
    period: f64,
    mode: DisseminationMode,
    opts: MvnOptions,
) -> Result<(TrafficReport, Expectation)> {
    check_rate(f, period)?;
    let tx = aggregated_tx(d, rings, alpha, rho, opts)?;
    let rx = aggregated_rx(d, rings, alpha, rho, opts)?;
    let slots = f * period;
    let data = TrafficReport::new(tx.value, rx.value) * slots;
    let err = Expectation {
        value: (tx.value + rx.value) * slots,
        stderr: (tx.stderr + rx.stderr) * slots,
    };
    Ok((data + dissemination_traffic(mode, d, rings)?, err))
}

fn check_rate(f: f64, period: f64) -> Result<()> {
    if !(f > 0.0 && period > 0.0 && f.is_finite() && period.is_finite()) {
        return domain(format!("measurement rate and period must be > 0, got f={f}, T={period}"));
    }
    Ok(())
}

/// Upper bound on aggregated traffic reached at zero correlation:
/// `[(1 - α^(1+K_d)) + I_d (1 - α^(K_d/I_d))] f T + X_top`.
pub fn aggregated_traffic_bound(
    d: u32,
    rings: u32,
    alpha: f64,
    f: f64,
    period: f64,
    mode: DisseminationMode,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_rate(f, period)?;
    let table = SubtreeTable::new(rings);
    let k = table.subtree_size(d)?;
    let i = table.child_ratio(d)?;
    let tx = 1.0 - alpha.powf(1.0 + k);
    let rx = if i > 0.0 { i * (1.0 - alpha.powf(k / i)) } else { 0.0 };
    Ok((tx + rx) * f * period + dissemination_traffic(mode, d, rings)?.total())
}

/// Traffic bound of prediction without aggregation at average accuracy
/// `alpha`: `((1 + K_d) + K_d)(1 - α) f T + X_top`.
pub fn prediction_only_bound(
    d: u32,
    rings: u32,
    alpha: f64,
    f: f64,
    period: f64,
    mode: DisseminationMode,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_rate(f, period)?;
    let k = SubtreeTable::new(rings).subtree_size(d)?;
    Ok((2.0 * k + 1.0) * (1.0 - alpha) * f * period + dissemination_traffic(mode, d, rings)?.total())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("accuracy must lie in [0, 1], got {alpha}"));
    }
    Ok(())
}

/// Fisher-z average of the off-diagonal entries of a correlation matrix.
pub fn average_correlation(matrix: &CorrelationMatrix) -> Result<f64> {
    if matrix.dim() < 2 {
        return domain("average correlation needs at least two variables");
    }
    fisher_average(&matrix.off_diagonal())
}

/// `tanh(mean(atanh(r)))` over a set of correlation coefficients.
pub fn fisher_average(rs: &[f64]) -> Result<f64> {
    if rs.is_empty() {
        return domain("no correlation coefficients to average");
    }
    let mut sum = 0.0;
    for &r in rs {
        if !(r.abs() < 1.0) {
            return domain(format!("correlation {r} has an infinite Fisher z-score"));
        }
        sum += r.atanh();
    }
    Ok((sum / rs.len() as f64).tanh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn opts() -> MvnOptions {
        MvnOptions::new(200_000, 11)
    }

    #[test]
    fn empty_group_never_transmits() {
        for &(a, r) in &[(0.0, 0.0), (0.5, 0.3), (1.0, 1.0)] {
            let est = prob_no_transmission(0, a, r, opts()).unwrap();
            assert_eq!(est.p, 1.0);
            assert_eq!(est.stderr, 0.0);
        }
    }

    #[test]
    fn independent_nodes_multiply() {
        let est = prob_no_transmission(3, 0.9, 0.0, opts()).unwrap();
        assert!((est.p - 0.729).abs() <= 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn rho_outside_unit_interval_is_rejected() {
        assert!(prob_no_transmission(3, 0.9, -0.1, opts()).is_err());
        assert!(prob_no_transmission(3, 1.1, 0.1, opts()).is_err());
    }

    #[test]
    fn aggregated_tx_edges() {
        assert_eq!(aggregated_tx(1, 5, 1.0, 0.3, opts()).unwrap().value, 0.0);
        for rings in 1..=4 {
            let leaf = aggregated_tx(rings, rings, 0.8, 0.6, opts()).unwrap();
            assert_relative_eq!(leaf.value, 0.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn aggregated_rx_edges() {
        assert_eq!(aggregated_rx(3, 3, 0.5, 0.5, opts()).unwrap().value, 0.0);
        let rx = aggregated_rx(1, 2, 0.7, 0.0, opts()).unwrap();
        assert_relative_eq!(rx.value, 3.0 * 0.3, epsilon = 1e-12);
    }

    #[test]
    fn ceil_count_ignores_float_noise() {
        assert_eq!(ceil_count(24.000_000_000_000_004), 24);
        assert_eq!(ceil_count(8.0 / 3.0), 3);
        assert_eq!(ceil_count(5.0 / 3.0), 2);
        assert_eq!(ceil_count(0.0), 0);
    }

    #[test]
    fn bound_examples() {
        use DisseminationMode::*;
        for mode in DisseminationMode::ALL {
            let x = dissemination_traffic(mode, 2, 5).unwrap().total();
            assert_relative_eq!(aggregated_traffic_bound(2, 5, 1.0, 1.0, 10.0, mode).unwrap(), x);
        }
        let leaf = aggregated_traffic_bound(4, 4, 0.8, 2.0, 5.0, GwBroadcast).unwrap();
        assert_relative_eq!(leaf, 0.2 * 10.0 + 1.0, epsilon = 1e-12);
        let b = aggregated_traffic_bound(1, 5, 0.9, 1.0, 1.0, Independent).unwrap();
        assert_relative_eq!(b, (1.0 - 0.9f64.powi(25)) + 3.0 * (1.0 - 0.9f64.powi(8)), epsilon = 1e-12);
    }

    #[test]
    fn fisher_average_examples() {
        let m = build_equicorrelation_matrix(4, 0.5).unwrap();
        assert_relative_eq!(average_correlation(&m).unwrap(), 0.5, epsilon = 1e-15);
        // tanh((atanh 0.3 + atanh 0.7) / 2), evaluated with 30-digit arithmetic
        assert_relative_eq!(
            fisher_average(&[0.3, 0.7]).unwrap(),
            0.528_751_146_789_956,
            epsilon = 1e-15
        );
        assert!(fisher_average(&[0.2, 1.0]).is_err());
        assert!(average_correlation(&CorrelationMatrix::identity(1)).is_err());
    }
}
