use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{wrap_angle, EdgeKind, Graph, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewireParams {
    /// Phase-difference threshold in `(0, pi]`.
    pub threshold: f64,
    pub toggle_prob: f64,
    /// Pair draws attempted per replacement edge.
    pub max_attempts: usize,
}

impl RewireParams {
    pub fn new(threshold: f64, toggle_prob: f64) -> Self {
        Self {
            threshold,
            toggle_prob,
            max_attempts: 64,
        }
    }
}

/// One step of phase-driven rewiring of the translocal edges.
///
/// Each translocal edge whose endpoints differ in phase by more than the
/// threshold is removed with probability `toggle_prob`; every removal is
/// followed by an attempt to add a translocal edge between a random pair of
/// non-adjacent, non-lattice-neighbour nodes whose phase difference is below
/// the threshold. Local edges are never touched.
pub fn rewire_step(
    g: &Graph,
    phases: &[f64],
    params: &RewireParams,
    seed: u64,
) -> Result<Graph, GraphError> {
    if !(params.threshold > 0.0 && params.threshold <= PI) {
        return Err(GraphError::InvalidThreshold(params.threshold));
    }
    if !(0.0..=1.0).contains(&params.toggle_prob) {
        return Err(GraphError::InvalidProbability(params.toggle_prob));
    }
    if phases.len() != g.node_count() {
        return Err(GraphError::PhaseLength {
            expected: g.node_count(),
            got: phases.len(),
        });
    }
    let mut next = g.clone();
    if params.toggle_prob == 0.0 || g.node_count() < 2 {
        return Ok(next);
    }
    let diff = |u: usize, v: usize| wrap_angle(phases[u] - phases[v]).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<(usize, usize)> = g
        .edges()
        .filter(|&(u, v, k)| k == EdgeKind::Translocal && diff(u, v) > params.threshold)
        .map(|(u, v, _)| (u, v))
        .collect();
    let n = g.node_count();
    for (u, v) in candidates {
        if !rng.random_bool(params.toggle_prob) {
            continue;
        }
        next.remove_edge(u, v);
        for _ in 0..params.max_attempts {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let lattice_bond = g.lattice().is_some_and(|s| s.is_adjacent(a, b));
            if a != b && !lattice_bond && !next.has_edge(a, b) && diff(a, b) < params.threshold {
                next.insert(a, b, EdgeKind::Translocal);
                break;
            }
        }
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn local_edges(g: &Graph) -> Vec<(usize, usize)> {
        g.edges()
            .filter(|e| e.2 == EdgeKind::Local)
            .map(|(u, v, _)| (u, v))
            .collect()
    }

    #[test]
    fn zero_probability_is_identity() {
        let g = Graph::lattice_with_shortcuts(6, 2, 0.5, 1).unwrap();
        let phases: Vec<f64> = (0..36).map(|i| i as f64).collect();
        let next = rewire_step(&g, &phases, &RewireParams::new(0.5, 0.0), 3).unwrap();
        assert_eq!(next, g);
    }

    #[test]
    fn equal_phases_prevent_removals() {
        let g = Graph::lattice_with_shortcuts(6, 2, 0.5, 1).unwrap();
        let next = rewire_step(&g, &[0.7; 36], &RewireParams::new(PI, 1.0), 3).unwrap();
        assert_eq!(next, g);
    }

    #[test]
    fn cross_cluster_shortcuts_are_cut() {
        let g = Graph::lattice_with_shortcuts(8, 2, 0.6, 5).unwrap();
        // left half at phase 0, right half at pi
        let shape = g.lattice().unwrap();
        let phases: Vec<f64> = (0..64)
            .map(|i| if shape.coord(i)[1] < 4 { 0.0 } else { PI })
            .collect();
        let cross = |h: &Graph| {
            h.edges()
                .filter(|&(u, v, k)| k == EdgeKind::Translocal && phases[u] != phases[v])
                .count()
        };
        assert!(cross(&g) > 0);
        let next = rewire_step(&g, &phases, &RewireParams::new(PI / 2.0, 1.0), 8).unwrap();
        assert_eq!(cross(&next), 0);
        assert_eq!(local_edges(&next), local_edges(&g));
        next.validate().unwrap();
    }

    #[test]
    fn rejects_bad_threshold() {
        let g = Graph::cycle(4);
        let err = rewire_step(&g, &[0.0; 4], &RewireParams::new(0.0, 0.5), 0).unwrap_err();
        assert_eq!(err, GraphError::InvalidThreshold(0.0));
        assert!(rewire_step(&g, &[0.0; 4], &RewireParams::new(4.0, 0.5), 0).is_err());
        assert!(rewire_step(&g, &[0.0; 3], &RewireParams::new(1.0, 0.5), 0).is_err());
    }

    proptest! {
        #[test]
        fn local_edges_and_node_count_preserved(
            seed in 0u64..1000,
            threshold in 0.1f64..PI,
            prob in 0.0f64..1.0,
        ) {
            let g = Graph::lattice_with_shortcuts(6, 2, 0.4, seed).unwrap();
            let phases: Vec<f64> = (0..36).map(|i| (i as f64 * 1.7 + seed as f64).sin() * 3.0).collect();
            let next = rewire_step(&g, &phases, &RewireParams::new(threshold, prob), seed).unwrap();
            prop_assert_eq!(next.node_count(), g.node_count());
            prop_assert_eq!(local_edges(&next), local_edges(&g));
            prop_assert!(next.validate().is_ok());
            let again = rewire_step(&g, &phases, &RewireParams::new(threshold, prob), seed).unwrap();
            prop_assert_eq!(again, next);
        }
    }
}
