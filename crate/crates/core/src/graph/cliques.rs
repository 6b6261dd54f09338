use serde::{Deserialize, Serialize};

use super::Graph;

/// A maximal complete subgraph, members sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clique {
    pub members: Vec<usize>,
}

impl Clique {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn overlap(&self, other: &Clique) -> usize {
        intersect(&self.members, &other.members).len()
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// All maximal cliques with at least `min_size` members, sorted
/// lexicographically.
///
/// Bron–Kerbosch with Tomita pivoting, seeded from a degeneracy ordering so
/// that sparse graphs only recurse on small candidate sets.
pub fn enumerate_max_cliques(g: &Graph, min_size: usize) -> Vec<Clique> {
    let n = g.node_count();
    let adj: Vec<Vec<usize>> = (0..n).map(|u| g.neighbors(u).collect()).collect();
    let order = degeneracy_order(&adj);
    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }

    let mut out = Vec::new();
    for &v in &order {
        let (mut p, mut x) = (Vec::new(), Vec::new());
        for &w in &adj[v] {
            if position[w] > position[v] {
                p.push(w);
            } else {
                x.push(w);
            }
        }
        p.sort_unstable();
        x.sort_unstable();
        let mut r = vec![v];
        expand(&adj, &mut r, p, x, &mut out);
    }

    let mut cliques: Vec<Clique> = out
        .into_iter()
        .filter(|c| c.len() >= min_size.max(1))
        .map(|mut members| {
            members.sort_unstable();
            Clique { members }
        })
        .collect();
    cliques.sort();
    cliques
}

fn expand(
    adj: &[Vec<usize>],
    r: &mut Vec<usize>,
    mut p: Vec<usize>,
    mut x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    // pivot maximizes |P ∩ N(u)| over P ∪ X
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| intersect(&p, &adj[u]).len())
        .expect("P is nonempty");
    let candidates: Vec<usize> = p
        .iter()
        .copied()
        .filter(|v| adj[pivot].binary_search(v).is_err())
        .collect();
    for v in candidates {
        r.push(v);
        expand(adj, r, intersect(&p, &adj[v]), intersect(&x, &adj[v]), out);
        r.pop();
        p.retain(|&w| w != v);
        let pos = x.binary_search(&v).unwrap_or_else(|e| e);
        x.insert(pos, v);
    }
}

fn degeneracy_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<std::collections::BTreeSet<usize>> =
        vec![Default::default(); max_deg + 1];
    for v in 0..n {
        buckets[degree[v]].insert(v);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let d = buckets.iter().position(|b| !b.is_empty()).expect("vertices remain");
        let v = *buckets[d].iter().next().expect("bucket nonempty");
        buckets[d].remove(&v);
        removed[v] = true;
        order.push(v);
        for &w in &adj[v] {
            if !removed[w] {
                buckets[degree[w]].remove(&w);
                degree[w] -= 1;
                buckets[degree[w]].insert(w);
            }
        }
    }
    order
}
