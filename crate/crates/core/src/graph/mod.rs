//! Graph substrate: periodic lattices with shortcuts, random graphs,
//! maximal cliques, clique-graph renormalization, connectivity statistics
//! and structurally dynamic rewiring.

mod cliques;
mod io;
mod iso;
mod renorm;
mod rewire;
mod stats;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cliques::{enumerate_max_cliques, Clique};
pub use io::{read_edge_list, write_edge_list};
pub use iso::{fingerprint, isomorphic, Fingerprint};
pub use renorm::{
    clique_graph, renormalize, FixedPoint, RenormConfig, Renormalization, RenormalizationLevel,
};
pub use rewire::{rewire_step, RewireParams};
pub use stats::{
    connectivity, connectivity_from_counts, spreading_ensemble, spreading_statistic,
    Connectivity, SpreadingEnsemble, SpreadingReport,
};

/// Errors raised by graph construction and graph statistics.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GraphError {
    #[error("lattice dimension must be 1, 2 or 3, got {0}")]
    InvalidDims(usize),
    #[error("lattice side must be at least 2, got {0}")]
    SideTooSmall(usize),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("node sets must be nonempty")]
    EmptySet,
    #[error("node sets overlap at node {0}")]
    Overlap(usize),
    #[error("interbond count {interbonds} exceeds the maximum {max}")]
    TooManyInterbonds { interbonds: f64, max: f64 },
    #[error("invalid count {0}")]
    InvalidCount(f64),
    #[error("threshold {0} outside (0, pi]")]
    InvalidThreshold(f64),
    #[error("expected {expected} phases, got {got}")]
    PhaseLength { expected: usize, got: usize },
    #[error("max_steps must be at least 1")]
    NoSteps,
    #[error("overlap_min must be at least 1")]
    InvalidOverlap,
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Whether an edge belongs to the near-order lattice or is a long-range shortcut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    Local,
    Translocal,
}

impl EdgeKind {
    pub fn code(self) -> char {
        match self {
            EdgeKind::Local => 'L',
            EdgeKind::Translocal => 'T',
        }
    }
}

/// Periodic hypercubic lattice of `side^dims` sites, row-major (last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeShape {
    pub side: usize,
    pub dims: usize,
}

impl LatticeShape {
    pub fn new(side: usize, dims: usize) -> Result<Self, GraphError> {
        if !(1..=3).contains(&dims) {
            return Err(GraphError::InvalidDims(dims));
        }
        if side < 2 {
            return Err(GraphError::SideTooSmall(side));
        }
        Ok(Self { side, dims })
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, node: usize) -> Vec<usize> {
        let mut c = vec![0; self.dims];
        let mut rest = node;
        for axis in (0..self.dims).rev() {
            c[axis] = rest % self.side;
            rest /= self.side;
        }
        c
    }

    pub fn index(&self, coord: &[usize]) -> usize {
        coord.iter().fold(0, |acc, &c| acc * self.side + c % self.side)
    }

    /// Nearest neighbours under periodic wrap, deduplicated and sorted.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let c = self.coord(node);
        let mut out = BTreeSet::new();
        for axis in 0..self.dims {
            for step in [1, self.side - 1] {
                let mut n = c.clone();
                n[axis] = (n[axis] + step) % self.side;
                let idx = self.index(&n);
                if idx != node {
                    out.insert(idx);
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        u != v && self.displacement(u, v).iter().map(|d| d.unsigned_abs()).sum::<usize>() == 1
    }

    /// Minimum-image displacement from `u` to `v`, per axis.
    pub fn displacement(&self, u: usize, v: usize) -> Vec<isize> {
        let (a, b) = (self.coord(u), self.coord(v));
        let side = self.side as isize;
        a.iter()
            .zip(&b)
            .map(|(&x, &y)| {
                let mut d = (y as isize - x as isize).rem_euclid(side);
                if d > side / 2 {
                    d -= side;
                }
                d
            })
            .collect()
    }

    /// Periodic Euclidean distance in lattice units.
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.displacement(u, v)
            .iter()
            .map(|&d| (d * d) as f64)
            .sum::<f64>()
            .sqrt()
    }
}

/// Undirected simple graph with tagged edges.
///
/// Node ids are `0..node_count`. When a lattice shape is attached, local
/// edges join lattice neighbours and translocal edges do not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: BTreeMap<(usize, usize), EdgeKind>,
    adjacency: Vec<BTreeSet<usize>>,
    lattice: Option<LatticeShape>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            edges: BTreeMap::new(),
            adjacency: vec![BTreeSet::new(); node_count],
            lattice: None,
        }
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(node_count);
        for &(u, v) in edges {
            g.add_edge(u, v, EdgeKind::Local)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert(u, v, EdgeKind::Local);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 1..n {
            g.insert(u - 1, u, EdgeKind::Local);
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        if n > 2 {
            g.insert(n - 1, 0, EdgeKind::Local);
        }
        g
    }

    pub fn petersen() -> Self {
        let mut g = Self::new(10);
        for i in 0..5 {
            g.insert(i, (i + 1) % 5, EdgeKind::Local);
            g.insert(i, i + 5, EdgeKind::Local);
            g.insert(5 + i, 5 + (i + 2) % 5, EdgeKind::Local);
        }
        g
    }

    /// G(n, p) with every edge tagged translocal (no lattice metric).
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Self, GraphError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphError::InvalidProbability(p));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    g.insert(u, v, EdgeKind::Translocal);
                }
            }
        }
        Ok(g)
    }

    /// Periodic lattice plus random shortcuts.
    ///
    /// Every node independently sprouts, with probability `shortcut_prob`,
    /// one translocal edge to a node drawn uniformly among those that are
    /// neither itself, a lattice neighbour, nor already adjacent.
    pub fn lattice_with_shortcuts(
        side: usize,
        dims: usize,
        shortcut_prob: f64,
        seed: u64,
    ) -> Result<Self, GraphError> {
        let shape = LatticeShape::new(side, dims)?;
        if !(0.0..=1.0).contains(&shortcut_prob) {
            return Err(GraphError::InvalidProbability(shortcut_prob));
        }
        let n = shape.len();
        let mut g = Self::new(n);
        g.lattice = Some(shape);
        for u in 0..n {
            for v in shape.neighbors(u) {
                if u < v {
                    g.insert(u, v, EdgeKind::Local);
                }
            }
        }
        if shortcut_prob == 0.0 {
            return Ok(g);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for u in 0..n {
            if !rng.random_bool(shortcut_prob) {
                continue;
            }
            let candidates: Vec<usize> = (0..n)
                .filter(|&v| v != u && !g.has_edge(u, v) && !shape.is_adjacent(u, v))
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let v = candidates[rng.random_range(0..candidates.len())];
            g.insert(u, v, EdgeKind::Translocal);
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn count_kind(&self, kind: EdgeKind) -> usize {
        self.edges.values().filter(|&&k| k == kind).count()
    }

    pub fn lattice(&self) -> Option<LatticeShape> {
        self.lattice
    }

    pub fn set_lattice(&mut self, shape: Option<LatticeShape>) {
        self.lattice = shape;
    }

    /// Edges as `(u, v, kind)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeKind)> + '_ {
        self.edges.iter().map(|(&(u, v), &k)| (u, v, k))
    }

    pub fn edge_kind(&self, u: usize, v: usize) -> Option<EdgeKind> {
        self.edges.get(&key(u, v)).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&key(u, v))
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[u].iter().copied()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize, kind: EdgeKind) -> Result<bool, GraphError> {
        for node in [u, v] {
            if node >= self.node_count {
                return Err(GraphError::NodeOutOfRange {
                    node,
                    node_count: self.node_count,
                });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(self.insert(u, v, kind))
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Option<EdgeKind> {
        let kind = self.edges.remove(&key(u, v))?;
        self.adjacency[u].remove(&v);
        self.adjacency[v].remove(&u);
        Some(kind)
    }

    fn insert(&mut self, u: usize, v: usize, kind: EdgeKind) -> bool {
        if u == v || self.has_edge(u, v) {
            return false;
        }
        self.edges.insert(key(u, v), kind);
        self.adjacency[u].insert(v);
        self.adjacency[v].insert(u);
        true
    }

    /// Checks the structural invariants, including lattice tagging when a
    /// lattice shape is attached.
    pub fn validate(&self) -> Result<(), String> {
        for (&(u, v), &kind) in &self.edges {
            if u >= v || v >= self.node_count {
                return Err(format!("bad edge ({u}, {v})"));
            }
            if let Some(shape) = self.lattice {
                let adjacent = shape.is_adjacent(u, v);
                match kind {
                    EdgeKind::Local if !adjacent => {
                        return Err(format!("local edge ({u}, {v}) is not a lattice bond"))
                    }
                    EdgeKind::Translocal if adjacent => {
                        return Err(format!("translocal edge ({u}, {v}) joins lattice neighbours"))
                    }
                    _ => {}
                }
            }
        }
        let degree_sum: usize = self.adjacency.iter().map(BTreeSet::len).sum();
        if degree_sum != 2 * self.edges.len() {
            return Err("adjacency out of sync with edge set".into());
        }
        Ok(())
    }

    /// True when every pair of `nodes` is joined by an edge.
    pub fn is_clique(&self, nodes: &[usize]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(i, &u)| nodes[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }
}

/// Wraps an angle difference to `[-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut d = x.rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_square_lattice_has_two_n_edges() {
        let g = Graph::lattice_with_shortcuts(4, 2, 0.0, 3).unwrap();
        assert_eq!(g.node_count(), 16);
        assert_eq!(g.count_kind(EdgeKind::Local), 32);
        assert_eq!(g.count_kind(EdgeKind::Translocal), 0);
        g.validate().unwrap();
    }

    #[test]
    fn degenerate_ring_deduplicates() {
        let g = Graph::lattice_with_shortcuts(2, 1, 0.0, 0).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn lattice_argument_errors() {
        assert_eq!(
            Graph::lattice_with_shortcuts(4, 4, 0.0, 0),
            Err(GraphError::InvalidDims(4))
        );
        assert_eq!(
            Graph::lattice_with_shortcuts(1, 2, 0.0, 0),
            Err(GraphError::SideTooSmall(1))
        );
        assert!(Graph::lattice_with_shortcuts(4, 2, 1.5, 0).is_err());
    }

    #[test]
    fn shortcut_count_matches_binomial_mean() {
        // Each node sprouts independently, so the count is Binomial(64, 0.1).
        let seeds = 200;
        let total: usize = (0..seeds)
            .map(|s| {
                let g = Graph::lattice_with_shortcuts(8, 2, 0.1, s).unwrap();
                g.validate().unwrap();
                g.count_kind(EdgeKind::Translocal)
            })
            .sum();
        let mean = total as f64 / seeds as f64;
        let sigma_of_mean = (64.0 * 0.1 * 0.9 / seeds as f64).sqrt();
        assert!((mean - 6.4).abs() <= 3.0 * sigma_of_mean, "mean {mean}");
    }

    #[test]
    fn seeded_constructors_reproduce() {
        let a = Graph::lattice_with_shortcuts(6, 2, 0.3, 11).unwrap();
        let b = Graph::lattice_with_shortcuts(6, 2, 0.3, 11).unwrap();
        assert_eq!(a, b);
        let c = Graph::erdos_renyi(30, 0.2, 5).unwrap();
        let d = Graph::erdos_renyi(30, 0.2, 5).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn lattice_geometry() {
        let s = LatticeShape::new(8, 2).unwrap();
        let u = s.index(&[0, 0]);
        let v = s.index(&[7, 0]);
        assert!(s.is_adjacent(u, v));
        assert_eq!(s.distance(u, s.index(&[4, 4])), (32.0f64).sqrt());
        assert_eq!(s.neighbors(u).len(), 4);
    }

    #[test]
    fn add_edge_rejects_bad_input() {
        let mut g = Graph::new(3);
        assert_eq!(g.add_edge(0, 0, EdgeKind::Local), Err(GraphError::SelfLoop(0)));
        assert!(g.add_edge(0, 5, EdgeKind::Local).is_err());
        assert_eq!(g.add_edge(0, 1, EdgeKind::Local), Ok(true));
        assert_eq!(g.add_edge(1, 0, EdgeKind::Translocal), Ok(false));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-0.25) + 0.25).abs() < 1e-15);
    }
}
