//! Baseline node-to-gateway traffic, gateway-to-node traffic and the
//! overhead of disseminating prediction models.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::topology::SubtreeTable;

/// Expected transmissions and receptions at one node over some period.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrafficReport {
    pub tx: f64,
    pub rx: f64,
}

impl TrafficReport {
    pub fn new(tx: f64, rx: f64) -> Self {
        debug_assert!(tx >= 0.0 && rx >= 0.0);
        Self { tx, rx }
    }

    pub fn total(&self) -> f64 {
        self.tx + self.rx
    }
}

impl Add for TrafficReport {
    type Output = TrafficReport;

    fn add(self, rhs: Self) -> Self {
        TrafficReport::new(self.tx + rhs.tx, self.rx + rhs.rx)
    }
}

impl Mul<f64> for TrafficReport {
    type Output = TrafficReport;

    fn mul(self, k: f64) -> Self {
        TrafficReport::new(self.tx * k, self.rx * k)
    }
}

/// Where prediction models are chosen and how they travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisseminationMode {
    /// Node and gateway derive the same model without exchanging anything.
    Independent,
    /// Gateway chooses, one unicast packet per node.
    GwUnicast,
    /// Nodes choose and unicast their models to the gateway.
    SensorChosen,
    /// Gateway chooses, packets for a sub-tree are merged and split hop by hop.
    GwUnicastAggregated,
    /// Gateway chooses and broadcasts.
    GwBroadcast,
}

impl DisseminationMode {
    pub const ALL: [DisseminationMode; 5] = [
        DisseminationMode::Independent,
        DisseminationMode::GwUnicast,
        DisseminationMode::SensorChosen,
        DisseminationMode::GwUnicastAggregated,
        DisseminationMode::GwBroadcast,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DisseminationMode::Independent => "independent",
            DisseminationMode::GwUnicast => "gw-unicast",
            DisseminationMode::SensorChosen => "sensor-chosen",
            DisseminationMode::GwUnicastAggregated => "gw-unicast-aggregated",
            DisseminationMode::GwBroadcast => "gw-broadcast",
        }
    }

    /// True when the gateway picks the models.
    pub fn gateway_chosen(&self) -> bool {
        matches!(
            self,
            DisseminationMode::GwUnicast
                | DisseminationMode::GwUnicastAggregated
                | DisseminationMode::GwBroadcast
        )
    }
}

impl fmt::Display for DisseminationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DisseminationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DisseminationMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown dissemination mode '{s}' (expected one of: independent, gw-unicast, \
                     sensor-chosen, gw-unicast-aggregated, gw-broadcast)"
                ))
            })
    }
}

fn check_rate(f: f64, period: f64) -> Result<()> {
    if !(f > 0.0 && f.is_finite()) {
        return domain(format!("measurement rate must be > 0, got {f}"));
    }
    if !(period > 0.0 && period.is_finite()) {
        return domain(format!("period must be > 0, got {period}"));
    }
    Ok(())
}

/// Traffic at a ring-`d` node that forwards every measurement unmodified:
/// `(K_d + 1) f T` transmissions and `K_d f T` receptions.
pub fn baseline_node_traffic(d: u32, rings: u32, f: f64, period: f64) -> Result<TrafficReport> {
    check_rate(f, period)?;
    let k = SubtreeTable::new(rings).subtree_size(d)?;
    Ok(TrafficReport::new((k + 1.0) * f * period, k * f * period))
}

/// One gateway-to-every-node unicast round, as seen by a ring-`d` node.
pub fn gw_to_node_traffic(d: u32, rings: u32) -> Result<TrafficReport> {
    let k = SubtreeTable::new(rings).subtree_size(d)?;
    Ok(TrafficReport::new(k, k + 1.0))
}

/// Per-period dissemination traffic at a ring-`d` node, split into tx and rx.
pub fn dissemination_traffic(
    mode: DisseminationMode,
    d: u32,
    rings: u32,
) -> Result<TrafficReport> {
    let table = SubtreeTable::new(rings);
    let k = table.subtree_size(d)?;
    let i = table.child_ratio(d)?;
    Ok(match mode {
        DisseminationMode::Independent => TrafficReport::default(),
        DisseminationMode::GwUnicast => TrafficReport::new(k, k + 1.0),
        DisseminationMode::SensorChosen => TrafficReport::new(k + 1.0, k),
        DisseminationMode::GwUnicastAggregated => TrafficReport::new(i, 1.0),
        // a broadcast is counted as a single channel operation
        DisseminationMode::GwBroadcast => TrafficReport::new(0.0, 1.0),
    })
}

/// `X_top`: dissemination transmissions plus receptions at a first-ring node
/// per period.
pub fn dissemination_cost(mode: DisseminationMode, rings: u32) -> Result<f64> {
    Ok(dissemination_traffic(mode, 1, rings)?.total())
}
