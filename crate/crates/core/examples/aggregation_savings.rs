//! First-ring traffic of the four schemes as correlation grows, next to the
//! zero-correlation bound.

use wsn_dps::correlation::{aggregated_traffic_bound, prediction_only_bound, MvnOptions};
use wsn_dps::simulator::Scheme;
use wsn_dps::sweep::data_traffic;
use wsn_dps::traffic::DisseminationMode;

fn main() -> wsn_dps::Result<()> {
    let (rings, alpha, f, period) = (5, 0.95, 1.0 / 60.0, 259_200.0);
    let mode = DisseminationMode::Independent;
    let opts = MvnOptions::new(100_000, 3);

    let bound = aggregated_traffic_bound(1, rings, alpha, f, period, mode)?;
    let pred = prediction_only_bound(1, rings, alpha, f, period, mode)?;
    println!("alpha {alpha}: zero-correlation bound {bound:.0}, prediction only {pred:.0} packets per period\n");

    println!("  rho      none   prediction  aggregation    combined   combined tx / aggregation tx");
    for rho in [0.0, 0.3, 0.5, 0.7, 0.9, 0.95] {
        let mut cells = Vec::new();
        for scheme in Scheme::ALL {
            cells.push(data_traffic(scheme, 1, rings, alpha, rho, f, period, opts)?.0);
        }
        println!(
            "{rho:>5} {:>9.0} {:>12.0} {:>12.0} {:>11.0} {:>14.1}%",
            cells[0].total(),
            cells[1].total(),
            cells[2].total(),
            cells[3].total(),
            100.0 * cells[3].tx / cells[2].tx
        );
    }
    Ok(())
}
