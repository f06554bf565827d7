//! Runs the trace pipeline. Pass an Intel-Lab `data.txt` (or a
//! `timestamp,node,value` CSV) to use real readings; without an argument a
//! synthetic nine-node trace with correlation 0.82 stands in.
//!
//!     cargo run --release --example trace_validation -- data.txt

use wsn_dps::correlation::CorrelationSpec;
use wsn_dps::simulator::generate_measurements;
use wsn_dps::validation::{parse_trace, validate_trace, TraceField, ValidationOptions, DEFAULT_ACCURACY_LEVELS, INTEL_LAB_NODES};

fn main() -> wsn_dps::Result<()> {
    let trace = match std::env::args().nth(1) {
        Some(path) => parse_trace(path, TraceField::Temperature)?.filter_nodes(&INTEL_LAB_NODES),
        None => generate_measurements(&CorrelationSpec::Rho(0.82), &[19.0; 9], &[0.6; 9], 1.0 / 300.0, 8.0 * 86_400.0, 1)?
            .to_measurement_trace(),
    };
    println!("{} readings from {} nodes", trace.len(), trace.nodes().len());

    let opts = ValidationOptions { samples: 200_000, ..ValidationOptions::default() };
    let report = validate_trace(&trace, &DEFAULT_ACCURACY_LEVELS, opts)?;
    println!(
        "average correlation {:.4}; baselines {} without aggregation, {} with",
        report.average_correlation, report.counts.no_dps_baseline, report.counts.aggregation_baseline
    );
    println!("accuracy   real    model   difference");
    for row in &report.table {
        println!(
            "{:>8}  {:>5.1}%  {:>5.1}%  {:>+6.1} pp",
            row.accuracy, row.real_percent, row.model_percent, row.difference
        );
    }
    Ok(())
}
