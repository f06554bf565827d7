//! Expected traffic under a dual prediction scheme (DPS) without aggregation,
//! the minimum accuracy that makes the scheme pay off, and the mapping between
//! acceptance thresholds and prediction accuracy for Gaussian data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::normal;
use crate::topology::SubtreeTable;
use crate::traffic::{dissemination_cost, dissemination_traffic, DisseminationMode, TrafficReport};

/// Prediction accuracy, either one network-wide average or one value per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Accuracy {
    Uniform(f64),
    PerNode(BTreeMap<u32, f64>),
}

impl Accuracy {
    /// Network-wide average accuracy.
    pub fn mean(&self) -> f64 {
        match self {
            Accuracy::Uniform(a) => *a,
            Accuracy::PerNode(map) if map.is_empty() => 0.0,
            Accuracy::PerNode(map) => map.values().sum::<f64>() / map.len() as f64,
        }
    }

    pub fn of(&self, node: u32) -> Option<f64> {
        match self {
            Accuracy::Uniform(a) => Some(*a),
            Accuracy::PerNode(map) => map.get(&node).copied(),
        }
    }

    fn validate(&self) -> Result<()> {
        let check = |a: f64| {
            if (0.0..=1.0).contains(&a) {
                Ok(())
            } else {
                domain(format!("accuracy must lie in [0, 1], got {a}"))
            }
        };
        match self {
            Accuracy::Uniform(a) => check(*a),
            Accuracy::PerNode(map) => map.values().try_for_each(|&a| check(a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpsConfig {
    pub accuracy: Accuracy,
    /// Measurements per second.
    pub f: f64,
    /// Seconds between two prediction-model choices.
    pub period: f64,
    pub mode: DisseminationMode,
    /// Acceptance threshold in measurement units, if known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl DpsConfig {
    pub fn uniform(alpha: f64, f: f64, period: f64, mode: DisseminationMode) -> Self {
        Self {
            accuracy: Accuracy::Uniform(alpha),
            f,
            period,
            mode,
            epsilon: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.accuracy.validate()?;
        if !(self.f > 0.0 && self.f.is_finite()) {
            return domain(format!("measurement rate must be > 0, got {}", self.f));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return domain(format!("period must be > 0, got {}", self.period));
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0) {
                return domain(format!("acceptance threshold must be >= 0, got {eps}"));
            }
        }
        Ok(())
    }

    /// Measurements per period.
    pub fn slots(&self) -> f64 {
        self.f * self.period
    }
}

/// Expected traffic over one period at a ring-`d` node of a homogeneous
/// network whose nodes all predict with the configured average accuracy.
///
/// Data traffic is `(1 + K_d)(1 - α) f T` transmissions and `K_d (1 - α) f T`
/// receptions; the ring's share of model dissemination is added once.
pub fn expected_dps_traffic(cfg: &DpsConfig, d: u32, rings: u32) -> Result<TrafficReport> {
    cfg.validate()?;
    let k = SubtreeTable::new(rings).subtree_size(d)?;
    let miss = 1.0 - cfg.accuracy.mean();
    let data = TrafficReport::new((1.0 + k) * miss, k * miss) * cfg.slots();
    Ok(data + dissemination_traffic(cfg.mode, d, rings)?)
}

/// Expected traffic for one node given its own accuracy and those of all its
/// descendants.
pub fn subtree_dps_traffic(
    own_accuracy: f64,
    descendant_accuracies: &[f64],
    f: f64,
    period: f64,
    dissemination: TrafficReport,
) -> Result<TrafficReport> {
    let mut alphas = descendant_accuracies.to_vec();
    alphas.push(own_accuracy);
    Accuracy::PerNode(alphas.iter().copied().enumerate().map(|(i, a)| (i as u32, a)).collect())
        .validate()?;
    if !(f > 0.0 && period > 0.0) {
        return domain("measurement rate and period must be > 0");
    }
    let forwarded: f64 = descendant_accuracies.iter().map(|a| 1.0 - a).sum();
    let data = TrafficReport::new((1.0 - own_accuracy) + forwarded, forwarded) * (f * period);
    Ok(data + dissemination)
}

/// Lowest average accuracy at which a DPS without aggregation stops costing
/// more than it saves at a first-ring node.
pub fn min_required_accuracy(rings: u32, f: f64, period: f64, mode: DisseminationMode) -> Result<f64> {
    if rings == 0 {
        return domain("ring count must be >= 1");
    }
    if !(f > 0.0 && period > 0.0) {
        return domain("measurement rate and period must be > 0");
    }
    let slots = f * period;
    if slots < 1.0 {
        return domain(format!(
            "fewer than one measurement per period (f*T = {slots})"
        ));
    }
    let overhead = dissemination_cost(mode, rings)?;
    let d2 = rings as f64 * rings as f64;
    Ok((overhead / ((2.0 * d2 - 1.0) * slots)).min(1.0))
}

/// Accuracy of unbiased predictions of `N(μ, σ²)` data accepted within `±ε`:
/// `α = 1 - 2Φ(-ε/σ)`.
pub fn accuracy_from_threshold(epsilon: f64, sigma: f64) -> Result<f64> {
    if !(epsilon >= 0.0) || !(sigma >= 0.0) {
        return domain(format!(
            "threshold and standard deviation must be >= 0, got eps={epsilon}, sigma={sigma}"
        ));
    }
    if sigma == 0.0 {
        // a constant signal is always predicted exactly
        return Ok(1.0);
    }
    Ok(normal::central_mass(epsilon / sigma).clamp(0.0, 1.0))
}

/// Acceptance threshold that yields accuracy `alpha`: `ε = σ Φ⁻¹((1 + α)/2)`.
pub fn threshold_from_accuracy(alpha: f64, sigma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return domain(format!(
            "accuracy must lie in [0, 1) for a finite threshold, got {alpha}"
        ));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return domain(format!("standard deviation must be >= 0, got {sigma}"));
    }
    Ok(sigma * normal::central_half_width(alpha))
}
