use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Graph;

/// Cheap isomorphism invariants used above the exact-check bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub node_count: usize,
    pub edge_count: usize,
    pub degrees: Vec<usize>,
    pub triangles: usize,
}

pub fn fingerprint(g: &Graph) -> Fingerprint {
    let mut degrees: Vec<usize> = (0..g.node_count()).map(|u| g.degree(u)).collect();
    degrees.sort_unstable();
    let mut triangles = 0;
    for (u, v, _) in g.edges() {
        triangles += g.neighbors(u).filter(|&w| w > v && g.has_edge(v, w)).count();
    }
    Fingerprint {
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        degrees,
        triangles,
    }
}

/// Exact isomorphism test (edge kinds ignored).
///
/// Joint colour refinement on both graphs, then backtracking over
/// colour-compatible assignments. Intended for desk-scale graphs.
pub fn isomorphic(a: &Graph, b: &Graph) -> bool {
    if fingerprint(a) != fingerprint(b) {
        return false;
    }
    let n = a.node_count();
    if n == 0 {
        return true;
    }
    let adj_a: Vec<Vec<usize>> = (0..n).map(|u| a.neighbors(u).collect()).collect();
    let adj_b: Vec<Vec<usize>> = (0..n).map(|u| b.neighbors(u).collect()).collect();
    let (col_a, col_b) = refine(&adj_a, &adj_b);

    let mut hist_a = col_a.clone();
    let mut hist_b = col_b.clone();
    hist_a.sort_unstable();
    hist_b.sort_unstable();
    if hist_a != hist_b {
        return false;
    }

    // assign rare colours first, then follow connectivity
    let mut class_size: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &col_a {
        *class_size.entry(c).or_default() += 1;
    }
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .min_by_key(|&v| {
                let linked = adj_a[v].iter().any(|&w| placed[w]);
                (!linked, class_size[&col_a[v]], v)
            })
            .expect("unplaced vertex");
        placed[next] = true;
        order.push(next);
    }

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    backtrack(0, &order, &adj_a, b, &col_a, &col_b, &mut map, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    depth: usize,
    order: &[usize],
    adj_a: &[Vec<usize>],
    b: &Graph,
    col_a: &[usize],
    col_b: &[usize],
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    for cand in 0..col_b.len() {
        if used[cand] || col_b[cand] != col_a[v] {
            continue;
        }
        let consistent = order[..depth].iter().all(|&w| {
            let edge_a = adj_a[v].binary_search(&w).is_ok();
            edge_a == b.has_edge(cand, map[w])
        });
        if !consistent {
            continue;
        }
        map[v] = cand;
        used[cand] = true;
        if backtrack(depth + 1, order, adj_a, b, col_a, col_b, map, used) {
            return true;
        }
        used[cand] = false;
        map[v] = usize::MAX;
    }
    false
}

fn refine(adj_a: &[Vec<usize>], adj_b: &[Vec<usize>]) -> (Vec<usize>, Vec<usize>) {
    let mut col_a: Vec<usize> = adj_a.iter().map(Vec::len).collect();
    let mut col_b: Vec<usize> = adj_b.iter().map(Vec::len).collect();
    let classes = |a: &[usize], b: &[usize]| {
        let mut all: Vec<usize> = a.iter().chain(b).copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    };
    let mut count = classes(&col_a, &col_b);
    loop {
        let signature = |adj: &[Vec<usize>], col: &[usize], v: usize| {
            let mut nb: Vec<usize> = adj[v].iter().map(|&w| col[w]).collect();
            nb.sort_unstable();
            (col[v], nb)
        };
        let sig_a: Vec<_> = (0..adj_a.len()).map(|v| signature(adj_a, &col_a, v)).collect();
        let sig_b: Vec<_> = (0..adj_b.len()).map(|v| signature(adj_b, &col_b, v)).collect();
        let mut ids: BTreeMap<&(usize, Vec<usize>), usize> = BTreeMap::new();
        for s in sig_a.iter().chain(&sig_b) {
            let next = ids.len();
            ids.entry(s).or_insert(next);
        }
        let new_a: Vec<usize> = sig_a.iter().map(|s| ids[s]).collect();
        let new_b: Vec<usize> = sig_b.iter().map(|s| ids[s]).collect();
        let new_count = ids.len();
        col_a = new_a;
        col_b = new_b;
        if new_count == count {
            return (col_a, col_b);
        }
        count = new_count;
    }
}
