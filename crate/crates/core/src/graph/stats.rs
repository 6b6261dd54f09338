use serde::{Deserialize, Serialize};

use super::{Graph, GraphError};

fn membership(g: &Graph, sets: &[&[usize]]) -> Result<Vec<Option<usize>>, GraphError> {
    let mut owner = vec![None; g.node_count()];
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(GraphError::EmptySet);
        }
        for &u in *set {
            if u >= g.node_count() {
                return Err(GraphError::NodeOutOfRange {
                    node: u,
                    node_count: g.node_count(),
                });
            }
            if owner[u].is_some() {
                return Err(GraphError::Overlap(u));
            }
            owner[u] = Some(i);
        }
    }
    Ok(owner)
}

fn interbonds(g: &Graph, from: &[usize], owner: &[Option<usize>], target: usize) -> usize {
    from.iter()
        .map(|&u| g.neighbors(u).filter(|&v| owner[v] == Some(target)).count())
        .sum()
}

/// Fraction of possible interbonds present between two disjoint node sets.
pub fn connectivity(g: &Graph, s1: &[usize], s2: &[usize]) -> Result<f64, GraphError> {
    let owner = membership(g, &[s1, s2])?;
    let count = interbonds(g, s1, &owner, 1);
    Ok(count as f64 / (s1.len() as f64 * s2.len() as f64))
}

/// Connectivity held as a base-10 logarithm so that astronomically small
/// values stay representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Connectivity {
    pub log10: f64,
}

impl Connectivity {
    pub fn value(&self) -> f64 {
        10f64.powf(self.log10)
    }
}

/// `n_interbonds / (n1 * n2)` evaluated in log space.
pub fn connectivity_from_counts(
    n_interbonds: f64,
    n1: f64,
    n2: f64,
) -> Result<Connectivity, GraphError> {
    for x in [n1, n2] {
        if !(x.is_finite() && x > 0.0) {
            return Err(GraphError::InvalidCount(x));
        }
    }
    if !(n_interbonds.is_finite() && n_interbonds >= 0.0) {
        return Err(GraphError::InvalidCount(n_interbonds));
    }
    let log_max = n1.log10() + n2.log10();
    if n_interbonds == 0.0 {
        return Ok(Connectivity {
            log10: f64::NEG_INFINITY,
        });
    }
    let log10 = n_interbonds.log10() - log_max;
    // tolerate the rounding of n1 * n2 itself
    if log10 > 4.0 * f64::EPSILON * log_max.abs().max(1.0) {
        return Err(GraphError::TooManyInterbonds {
            interbonds: n_interbonds,
            max: 10f64.powf(log_max),
        });
    }
    Ok(Connectivity {
        log10: log10.min(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingReport {
    /// Interbonds between the union of the parts and the target.
    pub union_count: usize,
    pub part_counts: Vec<usize>,
    pub sum_of_parts: usize,
}

/// Counts interbonds from each part of a source partition to `target`.
///
/// For disjoint parts the union count equals the sum of part counts; the
/// report is only returned when that additivity holds.
pub fn spreading_statistic(
    g: &Graph,
    target: &[usize],
    parts: &[Vec<usize>],
) -> Result<SpreadingReport, GraphError> {
    let mut sets: Vec<&[usize]> = vec![target];
    sets.extend(parts.iter().map(Vec::as_slice));
    let owner = membership(g, &sets)?;
    let part_counts: Vec<usize> = parts.iter().map(|p| interbonds(g, p, &owner, 0)).collect();
    let union: Vec<usize> = parts.iter().flatten().copied().collect();
    let union_count = interbonds(g, &union, &owner, 0);
    let sum_of_parts = part_counts.iter().sum();
    assert_eq!(union_count, sum_of_parts, "interbond counting must be additive");
    Ok(SpreadingReport {
        union_count,
        part_counts,
        sum_of_parts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadingEnsemble {
    pub seeds: usize,
    pub mean_part_count: f64,
    pub std_part_count: f64,
    /// Binomial expectation `part_size * target_size * p`.
    pub expected_mean: f64,
    pub expected_std: f64,
    /// Standard deviation over mean of the per-part counts.
    pub relative_spread: f64,
}

/// Spreading statistics over an Erdős–Rényi ensemble. The target is nodes
/// `0..target_size`; part `i` is the next block of `part_size` nodes.
pub fn spreading_ensemble(
    n: usize,
    p: f64,
    target_size: usize,
    parts: usize,
    part_size: usize,
    seeds: std::ops::Range<u64>,
) -> Result<SpreadingEnsemble, GraphError> {
    if target_size + parts * part_size > n {
        return Err(GraphError::NodeOutOfRange {
            node: target_size + parts * part_size,
            node_count: n,
        });
    }
    let target: Vec<usize> = (0..target_size).collect();
    let partition: Vec<Vec<usize>> = (0..parts)
        .map(|i| {
            let start = target_size + i * part_size;
            (start..start + part_size).collect()
        })
        .collect();
    let mut counts = Vec::new();
    let n_seeds = seeds.end.saturating_sub(seeds.start) as usize;
    for seed in seeds {
        let g = Graph::erdos_renyi(n, p, seed)?;
        let report = spreading_statistic(&g, &target, &partition)?;
        counts.extend(report.part_counts.iter().map(|&c| c as f64));
    }
    let m = counts.len().max(1) as f64;
    let mean = counts.iter().sum::<f64>() / m;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let trials = (part_size * target_size) as f64;
    Ok(SpreadingEnsemble {
        seeds: n_seeds,
        mean_part_count: mean,
        std_part_count: var.sqrt(),
        expected_mean: trials * p,
        expected_std: (trials * p * (1.0 - p)).sqrt(),
        relative_spread: if mean > 0.0 { var.sqrt() / mean } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeKind;
    use proptest::prelude::*;

    #[test]
    fn connectivity_examples() {
        let mut full = Graph::new(5);
        for u in 0..2 {
            for v in 2..5 {
                full.add_edge(u, v, EdgeKind::Translocal).unwrap();
            }
        }
        assert_eq!(connectivity(&full, &[0, 1], &[2, 3, 4]).unwrap(), 1.0);
        assert_eq!(connectivity(&Graph::new(5), &[0, 1], &[2, 3, 4]).unwrap(), 0.0);
        let g = Graph::from_edges(5, &[(0, 2), (1, 4), (2, 3)]).unwrap();
        assert_eq!(connectivity(&g, &[0, 1], &[2, 3, 4]).unwrap(), 2.0 / 6.0);
    }

    #[test]
    fn connectivity_rejects_bad_sets() {
        let g = Graph::new(4);
        assert_eq!(connectivity(&g, &[], &[1]), Err(GraphError::EmptySet));
        assert_eq!(connectivity(&g, &[0, 1], &[1, 2]), Err(GraphError::Overlap(1)));
    }

    #[test]
    fn log_space_counts() {
        let c = connectivity_from_counts(1e79, 1e75, 1e75).unwrap();
        assert_eq!(c.log10, -71.0);
        assert!((c.value() / 1e-71 - 1.0).abs() < 1e-12);
        assert_eq!(connectivity_from_counts(0.0, 10.0, 20.0).unwrap().value(), 0.0);
        assert_eq!(connectivity_from_counts(200.0, 10.0, 20.0).unwrap().value(), 1.0);
        assert!(matches!(
            connectivity_from_counts(201.0, 10.0, 20.0),
            Err(GraphError::TooManyInterbonds { .. })
        ));
    }

    #[test]
    fn spreading_is_additive_and_empty_graph_is_zero() {
        let g = Graph::erdos_renyi(60, 0.2, 1).unwrap();
        let parts = vec![(10..20).collect(), (20..35).collect(), (35..60).collect()];
        let r = spreading_statistic(&g, &(0..10).collect::<Vec<_>>(), &parts).unwrap();
        assert_eq!(r.union_count, r.sum_of_parts);
        let e = spreading_statistic(&Graph::new(60), &[0, 1], &parts).unwrap();
        assert_eq!(e.union_count, 0);
        assert!(e.part_counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn er_part_counts_follow_binomial() {
        let e = spreading_ensemble(200, 0.05, 20, 4, 20, 0..100).unwrap();
        assert_eq!(e.expected_mean, 20.0);
        let sigma_of_mean = e.expected_std / (400.0f64).sqrt();
        assert!(
            (e.mean_part_count - e.expected_mean).abs() <= 4.0 * sigma_of_mean,
            "{e:?}"
        );
        assert!((e.std_part_count / e.expected_std - 1.0).abs() < 0.2);
    }

    proptest! {
        #[test]
        fn connectivity_symmetric_and_bounded(seed in 0u64..500, split in 1usize..19) {
            let g = Graph::erdos_renyi(20, 0.3, seed).unwrap();
            let s1: Vec<usize> = (0..split).collect();
            let s2: Vec<usize> = (split..20).collect();
            let a = connectivity(&g, &s1, &s2).unwrap();
            let b = connectivity(&g, &s2, &s1).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
