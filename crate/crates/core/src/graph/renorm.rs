use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{enumerate_max_cliques, fingerprint, isomorphic, EdgeKind, Graph, GraphError};

/// One level of the clique-graph hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormalizationLevel {
    pub graph: Graph,
    /// `lineage[i]` lists the previous-level nodes forming new node `i`.
    pub lineage: Vec<Vec<usize>>,
    pub level_index: usize,
}

impl RenormalizationLevel {
    pub fn identity(graph: Graph) -> Self {
        let lineage = (0..graph.node_count()).map(|i| vec![i]).collect();
        Self {
            graph,
            lineage,
            level_index: 0,
        }
    }
}

/// Builds the clique graph: one node per maximal clique of size at least
/// `min_size`, adjacent when two cliques share at least `overlap_min` nodes.
pub fn clique_graph(
    g: &Graph,
    min_size: usize,
    overlap_min: usize,
) -> Result<RenormalizationLevel, GraphError> {
    if overlap_min == 0 {
        return Err(GraphError::InvalidOverlap);
    }
    let cliques = enumerate_max_cliques(g, min_size);
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); g.node_count()];
    for (ci, c) in cliques.iter().enumerate() {
        for &m in &c.members {
            containing[m].push(ci);
        }
    }
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for list in &containing {
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                *shared.entry((a, b)).or_default() += 1;
            }
        }
    }
    let mut next = Graph::new(cliques.len());
    for ((a, b), count) in shared {
        if count >= overlap_min {
            next.add_edge(a, b, EdgeKind::Local)?;
        }
    }
    Ok(RenormalizationLevel {
        graph: next,
        lineage: cliques.into_iter().map(|c| c.members).collect(),
        level_index: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormConfig {
    pub max_steps: usize,
    pub overlap_min: usize,
    pub min_clique_size: usize,
    /// Largest node count for which the exact isomorphism test is run.
    pub exact_bound: usize,
}

impl Default for RenormConfig {
    fn default() -> Self {
        Self {
            max_steps: 8,
            overlap_min: 1,
            min_clique_size: 2,
            exact_bound: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FixedPoint {
    /// `levels[level]` and its clique graph are isomorphic.
    Reached { level: usize },
    /// Invariant fingerprints of `levels[level]` and its successor agree but
    /// the graphs were too large for the exact check.
    Undecided { level: usize },
    NotReached,
}

#[derive(Debug, Clone)]
pub struct Renormalization {
    pub levels: Vec<RenormalizationLevel>,
    pub fixed_point: FixedPoint,
}

/// Iterates the clique-graph map until a fixed point, an undecided
/// comparison, or `max_steps` applications.
///
/// A single-node graph maps to itself whatever `min_clique_size` says.
pub fn renormalize(g: &Graph, cfg: &RenormConfig) -> Result<Renormalization, GraphError> {
    if cfg.max_steps == 0 {
        return Err(GraphError::NoSteps);
    }
    let mut levels = vec![RenormalizationLevel::identity(g.clone())];
    let mut fixed_point = FixedPoint::NotReached;
    for step in 1..=cfg.max_steps {
        let current = &levels[step - 1].graph;
        let min_size = if current.node_count() == 1 {
            1
        } else {
            cfg.min_clique_size
        };
        let mut next = clique_graph(current, min_size, cfg.overlap_min)?;
        next.level_index = step;
        let n = current.node_count().max(next.graph.node_count());
        let verdict = if n <= cfg.exact_bound {
            isomorphic(current, &next.graph).then_some(FixedPoint::Reached { level: step - 1 })
        } else {
            (fingerprint(current) == fingerprint(&next.graph))
                .then_some(FixedPoint::Undecided { level: step - 1 })
        };
        levels.push(next);
        if let Some(v) = verdict {
            fixed_point = v;
            break;
        }
    }
    Ok(Renormalization {
        levels,
        fixed_point,
    })
}
