//! Brute-force references and model lists shared by integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use clusterx::model::{build_lr_tfi, build_nn_tfi, random_two_body, Hamiltonian};

/// A multiset of term ids, sorted.
pub type Multiset = Vec<usize>;

fn sites(h: &Hamiltonian, ids: &[usize]) -> BTreeSet<usize> {
    ids.iter().flat_map(|&z| h.term(z).support.iter().copied()).collect()
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    r
}

/// Connectivity of the term-overlap hypergraph of a multiset, by union-find.
pub fn naive_connected(h: &Hamiltonian, ids: &[usize]) -> bool {
    let distinct: Vec<usize> = ids.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut parent: Vec<usize> = (0..distinct.len()).collect();
    for a in 0..distinct.len() {
        for b in a + 1..distinct.len() {
            let sa = &h.term(distinct[a]).support;
            if h.term(distinct[b]).support.iter().any(|s| sa.contains(s)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let root = find(&mut parent, 0);
    (0..distinct.len()).all(|i| find(&mut parent, i) == root)
}

/// Every ordered tuple of term ids of length `1..=m`, sorted, deduplicated,
/// and filtered for connectivity.
pub fn naive_polymers(h: &Hamiltonian, m: usize) -> BTreeSet<Multiset> {
    let n_terms = h.terms().len();
    let mut out = BTreeSet::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::new();
        for tuple in &frontier {
            for z in 0..n_terms {
                let mut t = tuple.clone();
                t.push(z);
                let mut sorted = t.clone();
                sorted.sort_unstable();
                if naive_connected(h, &sorted) {
                    out.insert(sorted);
                }
                next.push(t);
            }
        }
        frontier = next;
    }
    out
}

/// `(1/n!) Σ_{connected spanning C ⊆ G} (−1)^{|E(C)|}` over all `2^|E|`
/// edge subsets.
pub fn exhaustive_ursell(n: usize, edges: &[(usize, usize)]) -> f64 {
    let mut total: i64 = 0;
    for mask in 0u64..(1u64 << edges.len()) {
        let chosen: Vec<(usize, usize)> = edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
        let mut parent: Vec<usize> = (0..n).collect();
        for &(a, b) in &chosen {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        if (0..n).all(|v| find(&mut parent, v) == root) {
            total += if chosen.len().is_multiple_of(2) { 1 } else { -1 };
        }
    }
    total as f64 / (1..=n).product::<usize>() as f64
}

/// All connected labeled graphs on `n` vertices, as edge lists.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    (0u64..(1u64 << pairs.len()))
        .map(|mask| pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect::<Vec<_>>())
        .filter(|edges| {
            let mut parent: Vec<usize> = (0..n).collect();
            for &(a, b) in edges {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
            let root = find(&mut parent, 0);
            (0..n).all(|v| find(&mut parent, v) == root)
        })
        .collect()
}

/// Clusters with `‖Γ‖ ≤ m` from ordered tuples of naive polymers, keyed by
/// the sorted polymer list and carrying the exhaustive Ursell value.
pub fn naive_clusters(h: &Hamiltonian, m: usize) -> BTreeMap<Vec<Multiset>, f64> {
    let polymers: Vec<Multiset> = naive_polymers(h, m).into_iter().collect();
    let mut out = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut frontier: Vec<(Vec<usize>, usize)> = vec![(vec![], 0)];
    while let Some((tuple, norm)) = frontier.pop() {
        if !tuple.is_empty() {
            let mut key: Vec<Multiset> = tuple.iter().map(|&i| polymers[i].clone()).collect();
            key.sort();
            if seen.insert(key.clone()) {
                let n = key.len();
                let mut edges = Vec::new();
                for a in 0..n {
                    for b in a + 1..n {
                        if !sites(h, &key[a]).is_disjoint(&sites(h, &key[b])) {
                            edges.push((a, b));
                        }
                    }
                }
                let phi = exhaustive_ursell(n, &edges);
                if phi != 0.0 {
                    out.insert(key, phi);
                }
            }
        }
        for (i, p) in polymers.iter().enumerate() {
            if norm + p.len() <= m {
                let mut t = tuple.clone();
                t.push(i);
                frontier.push((t, norm + p.len()));
            }
        }
    }
    out
}

/// A named model with the decay exponent used for its certificate.
pub struct TestModel {
    pub name: String,
    pub h: Hamiltonian,
    pub alpha: f64,
}

/// LR-TFI at `J = 1, h = 0.25` for `N ∈ {4, 6, 8}` and `α ∈ {1.5, 2.5}`,
/// the nearest-neighbour chain (certified with `α = 2`), and five seeded
/// random two-body models.
pub fn certificate_models(max_n: usize) -> Vec<TestModel> {
    let mut out = Vec::new();
    for n in [4, 6, 8].into_iter().filter(|&n| n <= max_n) {
        for alpha in [1.5, 2.5] {
            out.push(TestModel { name: format!("lr_tfi N={n} alpha={alpha}"), h: build_lr_tfi(n, alpha, 1.0, 0.25).unwrap(), alpha });
        }
        out.push(TestModel { name: format!("nn_tfi N={n}"), h: build_nn_tfi(n, 1.0, 0.25).unwrap(), alpha: 2.0 });
    }
    for seed in 0..5u64 {
        let n = 4 + (seed as usize % 3);
        if n <= max_n {
            out.push(TestModel { name: format!("random N={n} seed={seed}"), h: random_two_body(n, n + 2, n / 2, 1.0, seed).unwrap(), alpha: 2.0 });
        }
    }
    out
}
