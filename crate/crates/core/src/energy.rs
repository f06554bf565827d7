//! Per-node energy from expected traffic.
//!
//! `E = tx·En_TX + rx·En_RX + En_top + En_MIN`, with tx/rx costs scaled by the
//! payload factor for aggregated packets and `En_top` the cost of receiving or
//! sending one (aggregated) prediction-model update per period.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::topology::SubtreeTable;
use crate::traffic::{DisseminationMode, TrafficReport};

/// Per-operation energy costs in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    /// Energy per transmitted packet.
    pub en_tx: f64,
    /// Energy per received packet.
    pub en_rx: f64,
    /// Energy to keep the node alive over the period, radio traffic excluded.
    pub en_min: f64,
    /// Cost multiplier for aggregated packets.
    pub payload_scale: f64,
}

impl Default for EnergyParams {
    /// Illustrative TelosB-like profile (CC2420 radio at 0 dBm, ~40-byte frames,
    /// three days of sleep-dominated idle time). Not measured values.
    fn default() -> Self {
        Self {
            en_tx: 68e-6,
            en_rx: 73e-6,
            en_min: 3.9,
            payload_scale: 8.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("en_tx", self.en_tx), ("en_rx", self.en_rx), ("en_min", self.en_min)] {
            if !(v >= 0.0 && v.is_finite()) {
                return domain(format!("{name} must be a finite value >= 0, got {v}"));
            }
        }
        if !(self.payload_scale >= 1.0 && self.payload_scale.is_finite()) {
            return domain(format!("payload_scale must be >= 1, got {}", self.payload_scale));
        }
        Ok(())
    }
}

/// `En_top` for a ring-`d` node.
pub fn dissemination_energy(params: &EnergyParams, mode: DisseminationMode, d: u32, rings: u32) -> Result<f64> {
    let i = SubtreeTable::new(rings).child_ratio(d)?;
    Ok(match mode {
        DisseminationMode::Independent => 0.0,
        DisseminationMode::SensorChosen => i * params.en_rx + params.en_tx,
        _ => params.en_rx + i * params.en_tx,
    })
}

/// Energy spent on radio traffic, baseline excluded. `traffic` holds data
/// packets only; dissemination is charged through `mode`.
pub fn transmission_energy(
    traffic: &TrafficReport,
    params: &EnergyParams,
    mode: DisseminationMode,
    d: u32,
    rings: u32,
    aggregated: bool,
) -> Result<f64> {
    params.validate()?;
    let scale = if aggregated { params.payload_scale } else { 1.0 };
    let data = scale * (traffic.tx * params.en_tx + traffic.rx * params.en_rx);
    Ok(data + dissemination_energy(params, mode, d, rings)?)
}

/// Total expected energy of a ring-`d` node over one period.
pub fn node_energy(
    traffic: &TrafficReport,
    params: &EnergyParams,
    mode: DisseminationMode,
    d: u32,
    rings: u32,
    aggregated: bool,
) -> Result<f64> {
    Ok(transmission_energy(traffic, params, mode, d, rings, aggregated)? + params.en_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use DisseminationMode::*;

    fn params() -> EnergyParams {
        EnergyParams {
            en_tx: 2.0,
            en_rx: 3.0,
            en_min: 10.0,
            payload_scale: 8.0,
        }
    }

    #[test]
    fn idle_node_costs_baseline() {
        let e = node_energy(&TrafficReport::default(), &params(), Independent, 1, 3, false).unwrap();
        assert_eq!(e, 10.0);
    }

    #[test]
    fn single_transmission() {
        let e = node_energy(&TrafficReport::new(1.0, 0.0), &params(), Independent, 1, 3, false).unwrap();
        assert_eq!(e, 12.0);
    }

    #[test]
    fn payload_scale_applies_to_aggregated_packets() {
        let t = TrafficReport::new(1.0, 2.0);
        let plain = node_energy(&t, &params(), Independent, 1, 3, false).unwrap();
        let agg = node_energy(&t, &params(), Independent, 1, 3, true).unwrap();
        assert_eq!(plain, 10.0 + 8.0);
        assert_eq!(agg, 10.0 + 64.0);
        let unit = EnergyParams { payload_scale: 1.0, ..params() };
        assert_eq!(
            node_energy(&t, &unit, GwUnicast, 2, 4, true).unwrap(),
            node_energy(&t, &unit, GwUnicast, 2, 4, false).unwrap()
        );
    }

    #[test]
    fn dissemination_cases() {
        let p = params();
        // I_1 = 3 when D > 1
        assert_relative_eq!(dissemination_energy(&p, GwUnicast, 1, 5).unwrap(), 3.0 + 3.0 * 2.0);
        assert_relative_eq!(dissemination_energy(&p, SensorChosen, 1, 5).unwrap(), 3.0 * 3.0 + 2.0);
        assert_eq!(dissemination_energy(&p, Independent, 1, 5).unwrap(), 0.0);
        assert_eq!(dissemination_energy(&p, GwBroadcast, 5, 5).unwrap(), 3.0);
    }

    #[test]
    fn gateway_and_sensor_choice_sum() {
        let p = params();
        for rings in 1..=8 {
            for d in 1..=rings {
                let i = SubtreeTable::new(rings).child_ratio(d).unwrap();
                let sum = dissemination_energy(&p, GwUnicast, d, rings).unwrap()
                    + dissemination_energy(&p, SensorChosen, d, rings).unwrap();
                assert_relative_eq!(sum, (1.0 + i) * (p.en_tx + p.en_rx), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn invalid_params() {
        let bad = EnergyParams { payload_scale: 0.5, ..params() };
        assert!(node_energy(&TrafficReport::default(), &bad, Independent, 1, 2, true).is_err());
        let bad = EnergyParams { en_tx: -1.0, ..params() };
        assert!(bad.validate().is_err());
        assert!(EnergyParams::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn monotone_in_every_input(
            tx in 0.0f64..1e4, rx in 0.0f64..1e4, dtx in 0.0f64..10.0, drx in 0.0f64..10.0,
            etx in 0.0f64..1.0, erx in 0.0f64..1.0, emin in 0.0f64..100.0, de in 0.0f64..1.0,
            aggregated: bool,
        ) {
            let p = EnergyParams { en_tx: etx, en_rx: erx, en_min: emin, payload_scale: 4.0 };
            let e = |t: TrafficReport, p: EnergyParams| node_energy(&t, &p, GwUnicastAggregated, 1, 4, aggregated).unwrap();
            let base = e(TrafficReport::new(tx, rx), p);
            prop_assert!(e(TrafficReport::new(tx + dtx, rx), p) >= base);
            prop_assert!(e(TrafficReport::new(tx, rx + drx), p) >= base);
            let more_tx = EnergyParams { en_tx: etx + de, ..p };
            let more_rx = EnergyParams { en_rx: erx + de, ..p };
            let more_min = EnergyParams { en_min: emin + de, ..p };
            prop_assert!(e(TrafficReport::new(tx, rx), more_tx) >= base);
            prop_assert!(e(TrafficReport::new(tx, rx), more_rx) >= base);
            prop_assert!(e(TrafficReport::new(tx, rx), more_min) >= base);
        }
    }
}
