//! Simulates three days of one-per-minute readings on a 75-node tree and
//! checks every node against the model.

use wsn_dps::correlation::{CorrelationSpec, MvnOptions};
use wsn_dps::prediction::DpsConfig;
use wsn_dps::simulator::{analytical_expectations, build_tree, compare_with_model, generate_measurements, run, Scheme};
use wsn_dps::traffic::DisseminationMode;

fn main() -> wsn_dps::Result<()> {
    let (alpha, rho, seed) = (0.9, 0.8, 42);
    let tree = build_tree(3, 5, seed)?;
    let n = tree.len();
    let trace = generate_measurements(&CorrelationSpec::Rho(rho), &vec![21.0; n], &vec![0.5; n], 1.0 / 60.0, 259_200.0, seed)?;
    let cfg = DpsConfig::uniform(alpha, 1.0 / 60.0, 259_200.0, DisseminationMode::GwUnicastAggregated);
    println!("{n} nodes, {} slots", trace.slots());

    for scheme in Scheme::ALL {
        let result = run(scheme, &tree, &trace, &cfg, seed)?;
        let model = analytical_expectations(scheme, &tree, alpha, rho, cfg.mode, MvnOptions::new(100_000, seed))?;
        let cmp = compare_with_model(&result, &model)?;
        let first = result.first_ring_mean();
        println!(
            "{:<24} first ring tx {:>7.1} (model {:>7.1})  rx {:>7.1} (model {:>7.1})  gateway got {:>6}  flagged nodes {}",
            scheme.as_str(),
            first.tx,
            cmp.first_ring.tx.expected,
            first.rx,
            cmp.first_ring.rx.expected,
            result.gw_rx,
            cmp.flagged().len()
        );
    }
    Ok(())
}
