//! Per-ring populations and traffic of a five-ring network without any
//! optimization, and what one round of model dissemination costs.

use wsn_dps::topology::{RingTopology, SubtreeTable};
use wsn_dps::traffic::{baseline_node_traffic, dissemination_cost, gw_to_node_traffic, DisseminationMode};

fn main() -> wsn_dps::Result<()> {
    let topo = RingTopology::new(3, 5)?;
    let table = SubtreeTable::new(topo.rings());
    let (f, period) = (1.0 / 60.0, 3.0 * 86_400.0);

    println!("{} nodes in {} rings", topo.total_nodes(), topo.rings());
    println!("ring  nodes  I_d    K_d     tx/T      rx/T");
    for d in 1..=topo.rings() {
        let t = baseline_node_traffic(d, topo.rings(), f, period)?;
        println!(
            "{d:>4}  {:>5}  {:.2}  {:>5.2}  {:>8.0}  {:>8.0}",
            topo.ring_population(d)?,
            table.child_ratio(d)?,
            table.subtree_size(d)?,
            t.tx,
            t.rx
        );
    }

    let down = gw_to_node_traffic(1, topo.rings())?;
    println!("\nfirst ring relays one gateway round with {} tx and {} rx", down.tx, down.rx);
    for mode in DisseminationMode::ALL {
        println!("{:<22} {:>3} packets per period", mode.as_str(), dissemination_cost(mode, topo.rings())?);
    }
    Ok(())
}
