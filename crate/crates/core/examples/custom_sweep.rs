//! Builds a sweep programmatically and writes it as CSV to stdout, the same
//! table `wsn-dps sweep` produces.

use wsn_dps::simulator::Scheme;
use wsn_dps::sweep::{cmd_sweep, write_rows, OutputFormat, SweepSpec};
use wsn_dps::traffic::DisseminationMode;

fn main() -> wsn_dps::Result<()> {
    let spec = SweepSpec {
        rings: vec![3, 5],
        accuracy: vec![0.9],
        rho: vec![0.5, 0.9],
        mode: DisseminationMode::GwBroadcast,
        schemes: vec![Scheme::AggregationOnly, Scheme::PredictionAggregation],
        samples: 50_000,
        simulate: true,
        ..SweepSpec::default()
    };
    let rows = cmd_sweep(&spec)?;
    write_rows(&rows, OutputFormat::Csv, None)
}
