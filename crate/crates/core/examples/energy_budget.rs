//! Radio energy of a first-ring node under each scheme with the default
//! (illustrative) energy profile.

use wsn_dps::correlation::MvnOptions;
use wsn_dps::energy::{node_energy, transmission_energy, EnergyParams};
use wsn_dps::simulator::Scheme;
use wsn_dps::sweep::data_traffic;
use wsn_dps::traffic::DisseminationMode;

fn main() -> wsn_dps::Result<()> {
    let params = EnergyParams::default();
    let (rings, f, period) = (5, 1.0 / 60.0, 259_200.0);
    let opts = MvnOptions::new(100_000, 5);

    for (alpha, rho) in [(0.5, 0.5), (0.9, 0.9), (0.95, 0.95)] {
        println!("alpha {alpha}, rho {rho}");
        let mut radio_none = None;
        for scheme in Scheme::ALL {
            let mode = if scheme.uses_prediction() { DisseminationMode::GwUnicast } else { DisseminationMode::Independent };
            let (traffic, _) = data_traffic(scheme, 1, rings, alpha, rho, f, period, opts)?;
            let radio = transmission_energy(&traffic, &params, mode, 1, rings, scheme.aggregates())?;
            let total = node_energy(&traffic, &params, mode, 1, rings, scheme.aggregates())?;
            let base = *radio_none.get_or_insert(radio);
            println!(
                "  {:<24} radio {radio:>7.3} J  total {total:>6.3} J  radio saving {:>5.1}%",
                scheme.as_str(),
                100.0 * (1.0 - radio / base)
            );
        }
    }
    Ok(())
}
