//! Ring model of a homogeneous multi-hop sensor network.
//!
//! The gateway sits in ring 0. Ring `d` holds `(2d - 1) C` nodes on average,
//! a node in ring `d` has `I_d` direct children and `K_d` descendants. `I_d`
//! and `K_d` are expectations and stay fractional here.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingTopology {
    /// Expected neighbours per node.
    c: u32,
    /// Number of rings (hops from the gateway to the furthest nodes).
    d: u32,
}

impl RingTopology {
    pub fn new(neighbors: u32, rings: u32) -> Result<Self> {
        if neighbors == 0 || rings == 0 {
            return domain(format!(
                "ring topology needs C >= 1 and D >= 1, got C={neighbors}, D={rings}"
            ));
        }
        Ok(Self {
            c: neighbors,
            d: rings,
        })
    }

    pub fn neighbors(&self) -> u32 {
        self.c
    }

    pub fn rings(&self) -> u32 {
        self.d
    }

    /// Expected population of ring `d`.
    pub fn ring_population(&self, d: u32) -> Result<f64> {
        ring_population(self.c, d, self.d)
    }

    pub fn total_nodes(&self) -> u64 {
        self.c as u64 * self.d as u64 * self.d as u64
    }

    /// Per-ring table of `(I_d, K_d)` for `d = 1..=D`.
    pub fn ring_table(&self) -> SubtreeTable {
        SubtreeTable::new(self.d)
    }
}

/// `N_d`: 0 for the gateway ring, `(2d - 1) C` otherwise.
pub fn ring_population(c: u32, d: u32, rings: u32) -> Result<f64> {
    if d > rings {
        return domain(format!("ring index {d} outside 0..={rings}"));
    }
    if d == 0 {
        return Ok(0.0);
    }
    Ok((2.0 * d as f64 - 1.0) * c as f64)
}

fn check_ring(d: u32, rings: u32) -> Result<()> {
    if rings == 0 {
        return domain("ring count must be >= 1");
    }
    if d == 0 || d > rings {
        return domain(format!("ring index {d} outside 1..={rings}"));
    }
    Ok(())
}

/// `I_d`, the expected number of direct children of a node in ring `d`.
pub fn child_ratio(d: u32, rings: u32) -> Result<f64> {
    check_ring(d, rings)?;
    Ok(child_ratio_unchecked(d, rings))
}

fn child_ratio_unchecked(d: u32, rings: u32) -> f64 {
    if d == rings {
        0.0
    } else {
        let d = d as f64;
        (2.0 * d + 1.0) / (2.0 * d - 1.0)
    }
}

/// `K_d`, the expected number of descendants of a node in ring `d`.
///
/// Uses the closed form `(D^2 - (d-1)^2) / (2d - 1) - 1` of the recursion
/// `K_d = I_d (K_{d+1} + 1)`, which is exact for integer results.
pub fn subtree_size(d: u32, rings: u32) -> Result<f64> {
    check_ring(d, rings)?;
    let (d, rings) = (f64::from(d), f64::from(rings));
    Ok((rings * rings - (d - 1.0).powi(2)) / (2.0 * d - 1.0) - 1.0)
}

/// Sum of ring populations; equals `C D^2`.
pub fn total_nodes(topo: &RingTopology) -> u64 {
    topo.total_nodes()
}

/// `I_d` and `K_d` for every ring of a `D`-ring network.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtreeTable {
    children: Vec<f64>,
    descendants: Vec<f64>,
}

impl SubtreeTable {
    pub fn new(rings: u32) -> Self {
        let n = rings as usize;
        let mut children = vec![0.0; n + 1];
        let mut descendants = vec![0.0; n + 1];
        for d in 1..=rings {
            children[d as usize] = child_ratio_unchecked(d, rings);
            descendants[d as usize] = subtree_size(d, rings).expect("ring index in range");
        }
        Self {
            children,
            descendants,
        }
    }

    pub fn rings(&self) -> u32 {
        (self.children.len() - 1) as u32
    }

    pub fn child_ratio(&self, d: u32) -> Result<f64> {
        check_ring(d, self.rings())?;
        Ok(self.children[d as usize])
    }

    pub fn subtree_size(&self, d: u32) -> Result<f64> {
        check_ring(d, self.rings())?;
        Ok(self.descendants[d as usize])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ring_population_examples() {
        assert_eq!(ring_population(5, 1, 3).unwrap(), 5.0);
        assert_eq!(ring_population(3, 0, 3).unwrap(), 0.0);
        assert_eq!(ring_population(3, 2, 3).unwrap(), 9.0);
        assert!(ring_population(3, 4, 3).is_err());
    }

    #[test]
    fn child_ratio_examples() {
        assert_eq!(child_ratio(3, 3).unwrap(), 0.0);
        assert_eq!(child_ratio(1, 3).unwrap(), 3.0);
        assert_relative_eq!(child_ratio(2, 5).unwrap(), 5.0 / 3.0);
        assert!(child_ratio(0, 3).is_err());
        assert!(child_ratio(4, 3).is_err());
    }

    #[test]
    fn subtree_size_examples() {
        assert_eq!(subtree_size(4, 4).unwrap(), 0.0);
        assert_relative_eq!(subtree_size(1, 3).unwrap(), 8.0, epsilon = 1e-12);
        assert_relative_eq!(subtree_size(1, 5).unwrap(), 24.0, epsilon = 1e-12);
        assert!(subtree_size(6, 5).is_err());
    }

    #[test]
    fn total_nodes_examples() {
        assert_eq!(RingTopology::new(3, 5).unwrap().total_nodes(), 75);
        assert_eq!(RingTopology::new(1, 1).unwrap().total_nodes(), 1);
        assert_eq!(total_nodes(&RingTopology::new(5, 3).unwrap()), 45);
        assert!(RingTopology::new(0, 3).is_err());
        assert!(RingTopology::new(3, 0).is_err());
    }

    #[test]
    fn populations_sum_to_cd2() {
        for c in 1..=50 {
            for rings in 1..=50 {
                let topo = RingTopology::new(c, rings).unwrap();
                let sum: f64 = (1..=rings)
                    .map(|d| topo.ring_population(d).unwrap())
                    .sum();
                assert_eq!(sum as u64, topo.total_nodes());
            }
        }
    }

    #[test]
    fn first_ring_subtree_is_d2_minus_one() {
        for rings in 2..=50u32 {
            let k1 = subtree_size(1, rings).unwrap();
            assert_eq!(k1, (rings * rings - 1) as f64);
        }
    }

    #[test]
    fn subtree_strictly_decreases_outward() {
        for rings in 2..=30u32 {
            let table = SubtreeTable::new(rings);
            for d in 1..rings {
                assert!(table.subtree_size(d).unwrap() > table.subtree_size(d + 1).unwrap());
            }
        }
    }

    #[test]
    fn closed_form_matches_recursion() {
        for rings in 1..=20u32 {
            let table = SubtreeTable::new(rings);
            // K_D = 0, K_d = I_d (K_{d+1} + 1)
            let mut k = 0.0;
            for d in (1..=rings).rev() {
                if d < rings {
                    k = child_ratio(d, rings).unwrap() * (k + 1.0);
                }
                assert_relative_eq!(subtree_size(d, rings).unwrap(), k, max_relative = 1e-13);
                assert_eq!(table.subtree_size(d).unwrap(), subtree_size(d, rings).unwrap());
                assert_eq!(table.child_ratio(d).unwrap(), child_ratio(d, rings).unwrap());
            }
        }
    }
}
