//! When does a dual prediction scheme pay for its own model dissemination?

use wsn_dps::prediction::{
    accuracy_from_threshold, expected_dps_traffic, min_required_accuracy, threshold_from_accuracy, DpsConfig,
};
use wsn_dps::traffic::{baseline_node_traffic, DisseminationMode};

fn main() -> wsn_dps::Result<()> {
    let (rings, f, period) = (5, 1.0 / 60.0, 259_200.0);
    let baseline = baseline_node_traffic(1, rings, f, period)?.total();

    for mode in DisseminationMode::ALL {
        let alpha_min = min_required_accuracy(rings, f, period, mode)?;
        println!("{:<22} minimum accuracy {alpha_min:.4e}", mode.as_str());
    }

    println!("\n alpha   first-ring packets   share of baseline");
    for alpha in [0.0, 0.5, 0.7, 0.9, 0.95, 0.99] {
        let cfg = DpsConfig::uniform(alpha, f, period, DisseminationMode::GwUnicast);
        let total = expected_dps_traffic(&cfg, 1, rings)?.total();
        println!("{alpha:>6}   {total:>18.1}   {:>16.2}%", 100.0 * total / baseline);
    }

    // thresholds in measurement units for a sensor with sigma = 0.4 degrees
    let sigma = 0.4;
    for alpha in [0.5, 0.9, 0.95] {
        let eps = threshold_from_accuracy(alpha, sigma)?;
        println!("alpha {alpha}: accept +/- {eps:.3} (back to {:.6})", accuracy_from_threshold(eps, sigma)?);
    }
    Ok(())
}
