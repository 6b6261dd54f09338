use serde::{Deserialize, Serialize};
use translocal_core::graph::{
    connectivity_from_counts, enumerate_max_cliques, renormalize, Clique, FixedPoint, Graph, RenormConfig,
};

use super::{err, Outcome};
use crate::{row, Table, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub interbonds: f64,
    pub n1: f64,
    pub n2: f64,
    pub expected_log10: f64,
    pub oracle_graphs: usize,
    pub oracle_max_nodes: usize,
    pub oracle_edge_prob: f64,
    pub complete_sizes: Vec<usize>,
    pub cycle_len: usize,
    pub fixed_point_steps: usize,
    pub max_steps: usize,
    pub overlap_min: usize,
    pub min_clique_size: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            interbonds: 1e79,
            n1: 1e75,
            n2: 1e75,
            expected_log10: -71.0,
            oracle_graphs: 100,
            oracle_max_nodes: 12,
            oracle_edge_prob: 0.5,
            complete_sizes: (2..=8).collect(),
            cycle_len: 5,
            fixed_point_steps: 2,
            max_steps: 8,
            overlap_min: 1,
            min_clique_size: 2,
        }
    }
}

impl super::Params for Params {
    fn validate(&self) -> Result<(), String> {
        if !(1..=20).contains(&self.oracle_max_nodes) {
            return Err("oracle_max_nodes must lie in 1..=20 (brute force is exponential)".into());
        }
        if self.cycle_len < 4 {
            return Err("cycle_len must be at least 4".into());
        }
        if self.complete_sizes.iter().any(|&n| n < 2) {
            return Err("complete_sizes entries must be >= 2".into());
        }
        Ok(())
    }
}

/// Maximal cliques by checking every vertex subset.
fn brute_force(g: &Graph, min_size: usize) -> Vec<Clique> {
    let n = g.node_count();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if members.len() < min_size || !g.is_clique(&members) {
            continue;
        }
        let maximal = (0..n)
            .filter(|&v| mask & (1 << v) == 0)
            .all(|v| members.iter().any(|&u| !g.has_edge(u, v)));
        if maximal {
            out.push(Clique { members });
        }
    }
    out.sort();
    out
}

fn fixed_point_text(fp: FixedPoint) -> String {
    match fp {
        FixedPoint::Reached { level } => format!("reached@{level}"),
        FixedPoint::Undecided { level } => format!("undecided@{level}"),
        FixedPoint::NotReached => "not_reached".into(),
    }
}

pub fn run(p: &Params, seed: u64) -> Result<Outcome, String> {
    let mut out = Outcome::default();

    let c = connectivity_from_counts(p.interbonds, p.n1, p.n2).map_err(err)?;
    let mut conn = Table::new("connectivity", &["interbonds", "n1", "n2", "log10_c"]);
    conn.push(row![format!("{:e}", p.interbonds), format!("{:e}", p.n1), format!("{:e}", p.n2), c.log10]);
    out.tables.push(conn);
    out.notes.push(format!("connectivity c = {:e}", 10f64.powf(c.log10)));
    out.verdicts.push(Verdict::within("connectivity_log10", c.log10, p.expected_log10, 1e-12));

    let mut oracle = Table::new("clique_oracle", &["graph_seed", "nodes", "edges", "cliques", "brute_force", "match"]);
    let mut mismatches = 0;
    for i in 0..p.oracle_graphs as u64 {
        let n = 1 + (i as usize % p.oracle_max_nodes);
        let g = Graph::erdos_renyi(n, p.oracle_edge_prob, seed.wrapping_add(i)).map_err(err)?;
        let fast = enumerate_max_cliques(&g, 1);
        let slow = brute_force(&g, 1);
        let same = fast == slow;
        mismatches += usize::from(!same);
        oracle.push(row![seed.wrapping_add(i), n, g.edge_count(), fast.len(), slow.len(), u8::from(same)]);
    }
    out.tables.push(oracle);
    out.verdicts.push(Verdict::at_most("clique_oracle_mismatches", mismatches as f64, 0.0));

    let petersen = enumerate_max_cliques(&Graph::petersen(), 1);
    let all_edges = petersen.iter().all(|c| c.len() == 2);
    out.verdicts.push(Verdict::within("petersen_max_cliques", petersen.len() as f64, 15.0, 0.0));
    out.verdicts.push(Verdict::flag("petersen_cliques_are_edges", all_edges));

    let cfg = RenormConfig {
        max_steps: p.max_steps,
        overlap_min: p.overlap_min,
        min_clique_size: p.min_clique_size,
        ..Default::default()
    };
    let mut renorm = Table::new("renormalization", &["graph", "level", "nodes", "edges", "fixed_point"]);
    let mut collapsed = true;
    let mut cases: Vec<(String, Graph)> = p.complete_sizes.iter().map(|&n| (format!("K{n}"), Graph::complete(n))).collect();
    cases.push((format!("C{}", p.cycle_len), Graph::cycle(p.cycle_len)));
    for (name, g) in &cases {
        let r = renormalize(g, &cfg).map_err(err)?;
        let fp = fixed_point_text(r.fixed_point);
        for level in &r.levels {
            renorm.push(row![name, level.level_index, level.graph.node_count(), level.graph.edge_count(), fp]);
        }
        if name.starts_with('K') {
            collapsed &= r.levels.get(1).is_some_and(|l| l.graph.node_count() == 1 && l.graph.edge_count() == 0);
        } else {
            // applications of the map needed before the repeat is seen
            let steps = match r.fixed_point {
                FixedPoint::Reached { level } => level + 1,
                _ => usize::MAX,
            };
            out.verdicts.push(Verdict::new(
                "cycle_fixed_point_steps",
                steps as f64,
                format!("<= {}", p.fixed_point_steps),
                steps <= p.fixed_point_steps,
            ));
        }
    }
    out.tables.push(renorm);
    out.verdicts.push(Verdict::flag("complete_graphs_collapse_to_k1", collapsed));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass() {
        let out = run(&Params::default(), 0).unwrap();
        assert!(out.passed(), "{:?}", out.verdicts);
        assert!(out.notes[0].contains("1e-71"));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force(&Graph::complete(3), 1).len(), 1);
        assert_eq!(brute_force(&Graph::path(3), 1).len(), 2);
        assert_eq!(brute_force(&Graph::new(2), 1).len(), 2);
    }
}
