//! Polymers (connected multisets of terms), clusters of polymers, their
//! incompatibility graphs, and Ursell coefficients.
//!
//! Clusters are generated from their union: every cluster Γ with
//! `‖Γ‖ = n` merges into a single connected multiset `U` of norm `n`, so the
//! clusters are exactly the multiset partitions of each enumerated polymer
//! into connected parts whose incompatibility graph is connected.

use std::collections::HashMap;
use std::sync::OnceLock;

use parking_lot::RwLock;

use crate::error::{Error, Result};
use crate::model::{Hamiltonian, Term};

/// Default largest incompatibility graph handed to [`ursell`].
pub const DEFAULT_URSELL_CAP: usize = 8;

/// Largest graph the Ursell recursion accepts at all (3^n work, i64 counts).
pub const URSELL_HARD_LIMIT: usize = 16;

/// Supports are disjoint.
pub fn terms_compatible(a: &Term, b: &Term) -> bool {
    sorted_disjoint(&a.support, &b.support)
}

fn sorted_disjoint(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

/// A connected multiset of terms, stored as sorted `(term id, count)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polymer {
    entries: Vec<(usize, usize)>,
    norm: usize,
    support: Vec<usize>,
}

impl Polymer {
    /// Builds a multiset from `(term id, count)` pairs, merging repeats and
    /// dropping zero counts. Connectivity is not checked here.
    pub fn from_counts(h: &Hamiltonian, counts: &[(usize, usize)]) -> Self {
        let mut entries: Vec<(usize, usize)> = Vec::with_capacity(counts.len());
        let mut sorted = counts.to_vec();
        sorted.sort_unstable();
        for (id, c) in sorted {
            if c == 0 {
                continue;
            }
            match entries.last_mut() {
                Some(last) if last.0 == id => last.1 += c,
                _ => entries.push((id, c)),
            }
        }
        Self::from_sorted(h, entries)
    }

    pub(crate) fn from_sorted(h: &Hamiltonian, entries: Vec<(usize, usize)>) -> Self {
        let norm = entries.iter().map(|e| e.1).sum();
        let mut support: Vec<usize> = entries.iter().flat_map(|&(id, _)| h.term(id).support.iter().copied()).collect();
        support.sort_unstable();
        support.dedup();
        Self { entries, norm, support }
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// Total multiplicity `‖γ‖`.
    pub fn norm(&self) -> usize {
        self.norm
    }

    /// Number of distinct terms `|γ|`.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn count(&self, id: usize) -> usize {
        self.entries.binary_search_by_key(&id, |e| e.0).map_or(0, |i| self.entries[i].1)
    }

    pub fn compatible(&self, other: &Polymer) -> bool {
        sorted_disjoint(&self.support, &other.support)
    }

    pub fn is_connected(&self, h: &Hamiltonian) -> bool {
        let ids: Vec<usize> = self.entries.iter().map(|e| e.0).collect();
        components(&ids, |a, b| !terms_compatible(h.term(a), h.term(b))) == 1
    }
}

/// Number of connected components of `items` under `adjacent`.
fn components(items: &[usize], adjacent: impl Fn(usize, usize) -> bool) -> usize {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent(items[i], items[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                    count -= 1;
                }
            }
        }
    }
    count
}

/// Restricts enumeration to polymers touching a site or overlapping a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Site(usize),
    Term(usize),
}

/// Term-overlap adjacency shared by the enumerators.
#[derive(Debug, Clone)]
pub(crate) struct TermGraph {
    n_terms: usize,
    overlap: Vec<bool>,
    max_arity: usize,
}

impl TermGraph {
    pub(crate) fn new(h: &Hamiltonian) -> Self {
        let n_terms = h.terms().len();
        let mut overlap = vec![false; n_terms * n_terms];
        for a in 0..n_terms {
            for b in 0..n_terms {
                overlap[a * n_terms + b] = !terms_compatible(h.term(a), h.term(b));
            }
        }
        Self { n_terms, overlap, max_arity: h.k().max(1) }
    }

    pub(crate) fn overlaps(&self, a: usize, b: usize) -> bool {
        self.overlap[a * self.n_terms + b]
    }
}

/// Depth-first enumeration of connected multisets with `‖γ‖ ≤ m`, in
/// lexicographic order of their sorted `(term id, count)` sequences.
pub struct PolymerEnumerator<'h> {
    h: &'h Hamiltonian,
    graph: TermGraph,
    m: usize,
    anchor: Option<Anchor>,
    seq: Vec<(usize, usize)>,
    size: usize,
    started: bool,
    done: bool,
}

impl<'h> PolymerEnumerator<'h> {
    pub fn new(h: &'h Hamiltonian, m: usize, anchor: Option<Anchor>) -> Self {
        Self { h, graph: TermGraph::new(h), m, anchor, seq: Vec::new(), size: 0, started: false, done: false }
    }

    fn descend(&mut self) -> bool {
        let next = self.seq.last().map_or(0, |e| e.0 + 1);
        if self.size < self.m && next < self.graph.n_terms {
            self.seq.push((next, 1));
            self.size += 1;
            true
        } else {
            false
        }
    }

    fn sibling(&mut self) -> bool {
        while let Some(&(t, c)) = self.seq.last() {
            if self.size < self.m {
                self.seq.last_mut().unwrap().1 += 1;
                self.size += 1;
                return true;
            }
            self.size -= c;
            if t + 1 < self.graph.n_terms {
                *self.seq.last_mut().unwrap() = (t + 1, 1);
                self.size += 1;
                return true;
            }
            self.seq.pop();
        }
        false
    }

    fn components(&self) -> usize {
        let ids: Vec<usize> = self.seq.iter().map(|e| e.0).collect();
        components(&ids, |a, b| self.graph.overlaps(a, b))
    }

    fn anchored(&self, support: &[usize]) -> bool {
        match self.anchor {
            None => true,
            Some(Anchor::Site(s)) => support.binary_search(&s).is_ok(),
            Some(Anchor::Term(z)) => !sorted_disjoint(support, &self.h.term(z).support),
        }
    }
}

impl Iterator for PolymerEnumerator<'_> {
    type Item = Polymer;

    fn next(&mut self) -> Option<Polymer> {
        if self.done {
            return None;
        }
        let mut moved = if self.started {
            self.descend() || self.sibling()
        } else {
            self.started = true;
            self.descend()
        };
        while moved {
            let comps = self.components();
            // One added term merges at most k components.
            if comps - 1 > (self.graph.max_arity - 1) * (self.m - self.size) {
                moved = self.sibling();
                continue;
            }
            if comps == 1 {
                let polymer = Polymer::from_sorted(self.h, self.seq.clone());
                if self.anchored(&polymer.support) {
                    return Some(polymer);
                }
            }
            moved = self.descend() || self.sibling();
        }
        self.done = true;
        None
    }
}

/// Lists connected multisets with `‖γ‖ ≤ m`, optionally anchored.
pub fn enumerate_connected_multisets(h: &Hamiltonian, m: usize, anchor: Option<Anchor>) -> PolymerEnumerator<'_> {
    PolymerEnumerator::new(h, m, anchor)
}

/// Undirected simple graph on `n` vertices with a sorted edge list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IncompatibilityGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl IncompatibilityGraph {
    /// Self-loops and duplicate edges are dropped.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut list: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .inspect(|&(_, b)| assert!(b < n, "edge endpoint {b} out of range"))
            .collect();
        list.sort_unstable();
        list.dedup();
        Self { n, edges: list }
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))))
    }

    /// Graph on the labeled copies of `parts`; copies of one polymer are
    /// always adjacent.
    pub fn from_parts(parts: &[(Polymer, usize)]) -> Self {
        let mut owner = Vec::new();
        for (i, (_, c)) in parts.iter().enumerate() {
            owner.extend(std::iter::repeat_n(i, *c));
        }
        let n = owner.len();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let (pa, pb) = (owner[a], owner[b]);
                if pa == pb || !parts[pa].0.compatible(&parts[pb].0) {
                    edges.push((a, b));
                }
            }
        }
        Self::new(n, edges)
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && components(&(0..self.n).collect::<Vec<_>>(), |a, b| self.edges.binary_search(&(a, b)).is_ok()) == 1
    }

    fn adjacency_masks(&self) -> Vec<u32> {
        let mut adj = vec![0u32; self.n];
        for &(a, b) in &self.edges {
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
        }
        adj
    }

    fn key(&self) -> (usize, u128) {
        let mut mask = 0u128;
        for &(a, b) in &self.edges {
            mask |= 1 << pair_index(a, b);
        }
        (self.n, mask)
    }
}

fn pair_index(a: usize, b: usize) -> usize {
    b * (b - 1) / 2 + a
}

/// Signed count `Σ_S (−1)^{|S|}` over spanning connected edge subsets, by
/// splitting off the component of the lowest vertex.
fn connected_signed_count(g: &IncompatibilityGraph) -> i64 {
    let n = g.n;
    let adj = g.adjacency_masks();
    let full = (1u32 << n) - 1;
    let edgeless = |set: u32| {
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            if adj[v] & set != 0 {
                return false;
            }
            rest &= rest - 1;
        }
        true
    };
    let mut conn = vec![0i64; 1 << n];
    for set in 1..=full {
        let low = set & set.wrapping_neg();
        let mut value = i64::from(edgeless(set));
        let rest = set ^ low;
        // Proper subsets W of `set` that contain `low`.
        let mut sub = rest;
        loop {
            let w = sub | low;
            if w != set {
                let complement = set ^ w;
                if edgeless(complement) {
                    value -= conn[w as usize];
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        conn[set as usize] = value;
    }
    conn[full as usize]
}

/// Memo table of signed spanning-subgraph counts.
#[derive(Debug, Default)]
pub struct UrsellTable {
    memo: RwLock<HashMap<(usize, u128), i64>>,
}

impl UrsellTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n! · φ(G)`, exact.
    pub fn signed_count(&self, g: &IncompatibilityGraph, cap: usize) -> Result<i64> {
        let cap = cap.min(URSELL_HARD_LIMIT);
        if g.n > cap {
            return Err(Error::UrsellCap { vertices: g.n, cap });
        }
        if !g.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        let key = g.key();
        if let Some(&v) = self.memo.read().get(&key) {
            return Ok(v);
        }
        let v = connected_signed_count(g);
        self.memo.write().insert(key, v);
        Ok(v)
    }
}

fn global_table() -> &'static UrsellTable {
    static TABLE: OnceLock<UrsellTable> = OnceLock::new();
    TABLE.get_or_init(UrsellTable::new)
}

/// `φ(G) = (1/n!) Σ_{S spanning connected} (−1)^{|S|}` for graphs up to
/// [`DEFAULT_URSELL_CAP`] vertices.
pub fn ursell(g: &IncompatibilityGraph) -> Result<f64> {
    ursell_with_cap(g, DEFAULT_URSELL_CAP)
}

pub fn ursell_with_cap(g: &IncompatibilityGraph, cap: usize) -> Result<f64> {
    let count = global_table().signed_count(g, cap)?;
    Ok(count as f64 / factorial(g.n))
}

pub(crate) fn signed_count(g: &IncompatibilityGraph, cap: usize) -> Result<i64> {
    global_table().signed_count(g, cap)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Sub-multisets of a fixed multiset, indexed in mixed radix.
#[derive(Debug, Clone)]
pub(crate) struct SubSpace {
    pub(crate) counts: Vec<usize>,
    pub(crate) strides: Vec<usize>,
    pub(crate) size: usize,
}

impl SubSpace {
    pub(crate) fn new(counts: Vec<usize>) -> Self {
        let mut strides = Vec::with_capacity(counts.len());
        let mut size = 1;
        for &c in &counts {
            strides.push(size);
            size *= c + 1;
        }
        Self { counts, strides, size }
    }

    pub(crate) fn digit(&self, index: usize, item: usize) -> usize {
        (index / self.strides[item]) % (self.counts[item] + 1)
    }

    pub(crate) fn full(&self) -> usize {
        self.size - 1
    }

    /// `a ≤ b` componentwise.
    pub(crate) fn fits(&self, a: usize, b: usize) -> bool {
        (0..self.counts.len()).all(|i| self.digit(a, i) <= self.digit(b, i))
    }
}

/// One way to split a multiset into connected parts: `(sub-multiset index,
/// repeat count)` with distinct parts in decreasing index order.
pub(crate) type Partition = Vec<(usize, usize)>;

/// Partitions of the multiset `space` (items related by `overlap`) into
/// connected parts with a connected incompatibility graph, in canonical
/// order. Each part is a [`SubSpace`] index.
pub(crate) fn cluster_partitions(space: &SubSpace, overlap: &dyn Fn(usize, usize) -> bool) -> Vec<Partition> {
    let items = space.counts.len();
    let present = |idx: usize| -> Vec<usize> { (0..items).filter(|&i| space.digit(idx, i) > 0).collect() };
    let connected = |idx: usize| components(&present(idx), overlap) == 1;
    let parts: Vec<usize> = (1..space.size).rev().filter(|&p| connected(p)).collect();
    let touches = |a: usize, b: usize| {
        let (pa, pb) = (present(a), present(b));
        pa.iter().any(|&x| pb.iter().any(|&y| x == y || overlap(x, y)))
    };

    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn recurse(space: &SubSpace, parts: &[usize], start: usize, remaining: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(stack.clone());
            return;
        }
        for (pos, &p) in parts.iter().enumerate().skip(start) {
            if space.fits(p, remaining) {
                stack.push(p);
                recurse(space, parts, pos, remaining - p, stack, out);
                stack.pop();
            }
        }
    }
    let mut raw = Vec::new();
    recurse(space, &parts, 0, space.full(), &mut stack, &mut raw);
    for chosen in raw {
        let mut grouped: Partition = Vec::new();
        for p in chosen {
            match grouped.last_mut() {
                Some(last) if last.0 == p => last.1 += 1,
                _ => grouped.push((p, 1)),
            }
        }
        let distinct: Vec<usize> = grouped.iter().map(|g| g.0).collect();
        if components(&distinct, touches) == 1 {
            out.push(grouped);
        }
    }
    out
}

/// Signed-count graph of a partition: copies in part order.
pub(crate) fn partition_graph(space: &SubSpace, partition: &Partition, overlap: &dyn Fn(usize, usize) -> bool) -> IncompatibilityGraph {
    let items = space.counts.len();
    let mut owner = Vec::new();
    for (i, &(_, c)) in partition.iter().enumerate() {
        owner.extend(std::iter::repeat_n(i, c));
    }
    let present: Vec<Vec<usize>> = partition.iter().map(|&(p, _)| (0..items).filter(|&i| space.digit(p, i) > 0).collect()).collect();
    let touch: Vec<Vec<bool>> = (0..partition.len())
        .map(|a| (0..partition.len()).map(|b| a == b || present[a].iter().any(|&x| present[b].iter().any(|&y| x == y || overlap(x, y)))).collect())
        .collect();
    let n = owner.len();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if touch[owner[a]][owner[b]] {
                edges.push((a, b));
            }
        }
    }
    IncompatibilityGraph::new(n, edges)
}

/// A multiset of polymers with connected incompatibility graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Distinct polymers with their repeat counts.
    pub parts: Vec<(Polymer, usize)>,
    /// Tuple length `Σ counts`.
    pub n: usize,
    /// `‖Γ‖ = Σ count · ‖γ‖`.
    pub norm: usize,
    /// `n! · φ`, exact.
    pub signed_count: i64,
    pub ursell: f64,
    /// `n! / Π counts!`.
    pub factor: u64,
}

impl Cluster {
    pub fn graph(&self) -> IncompatibilityGraph {
        IncompatibilityGraph::from_parts(&self.parts)
    }
}

/// Streams every cluster with `‖Γ‖ ≤ m`, ordered by union polymer and then
/// by partition.
pub struct ClusterIter<'h> {
    h: &'h Hamiltonian,
    polymers: PolymerEnumerator<'h>,
    pending: std::vec::IntoIter<Cluster>,
    cap: usize,
    error: Option<Error>,
}

impl Iterator for ClusterIter<'_> {
    type Item = Result<Cluster>;

    fn next(&mut self) -> Option<Self::Item> {
        if let Some(e) = self.error.take() {
            return Some(Err(e));
        }
        loop {
            if let Some(c) = self.pending.next() {
                return Some(Ok(c));
            }
            let union = self.polymers.next()?;
            match clusters_of_union(self.h, &union, self.cap) {
                Ok(list) => self.pending = list.into_iter(),
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// All clusters whose polymers merge into `union`.
pub fn clusters_of_union(h: &Hamiltonian, union: &Polymer, cap: usize) -> Result<Vec<Cluster>> {
    let ids: Vec<usize> = union.entries.iter().map(|e| e.0).collect();
    let space = SubSpace::new(union.entries.iter().map(|e| e.1).collect());
    let overlap = |a: usize, b: usize| !terms_compatible(h.term(ids[a]), h.term(ids[b]));
    let mut out = Vec::new();
    for partition in cluster_partitions(&space, &overlap) {
        let parts: Vec<(Polymer, usize)> = partition
            .iter()
            .map(|&(p, c)| {
                let entries = (0..ids.len())
                    .filter_map(|i| {
                        let d = space.digit(p, i);
                        (d > 0).then_some((ids[i], d))
                    })
                    .collect();
                (Polymer::from_sorted(h, entries), c)
            })
            .collect();
        let graph = partition_graph(&space, &partition, &overlap);
        let n = graph.vertices();
        let signed = signed_count(&graph, cap)?;
        let denom: u64 = parts.iter().map(|&(_, c)| factorial(c) as u64).product();
        out.push(Cluster { n, norm: union.norm, signed_count: signed, ursell: signed as f64 / factorial(n), factor: factorial(n) as u64 / denom, parts });
    }
    Ok(out)
}

/// Streams all clusters with `‖Γ‖ ≤ m`.
pub fn enumerate_clusters(h: &Hamiltonian, m: usize) -> ClusterIter<'_> {
    enumerate_clusters_with_cap(h, m, DEFAULT_URSELL_CAP)
}

pub fn enumerate_clusters_with_cap(h: &Hamiltonian, m: usize, cap: usize) -> ClusterIter<'_> {
    let error = (m > cap.min(URSELL_HARD_LIMIT)).then_some(Error::UrsellCap { vertices: m, cap });
    ClusterIter { h, polymers: PolymerEnumerator::new(h, if error.is_some() { 0 } else { m }, None), pending: Vec::new().into_iter(), cap, error }
}

/// Number of clusters with `‖Γ‖ ≤ m`, checked against `(N+1)^{km} · m!`.
/// With `N` in place of `N+1` the ceiling already fails for one site at
/// `m = 2` (three clusters against a ceiling of two).
pub fn count_clusters(h: &Hamiltonian, m: usize) -> Result<u64> {
    let mut count = 0u64;
    for c in enumerate_clusters(h, m) {
        c?;
        count += 1;
    }
    let ceiling = (h.n_sites() as f64 + 1.0).powi((h.k() * m) as i32) * factorial(m);
    assert!(count as f64 <= ceiling, "{count} clusters exceed the ceiling {ceiling}");
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use crate::model::{build_lr_tfi, Lattice, TermSpec};

    fn single_term() -> Hamiltonian {
        Hamiltonian::new(Lattice::chain(1).unwrap(), 2, vec![TermSpec::new(vec![0], pauli::z())]).unwrap()
    }

    fn two_disjoint() -> Hamiltonian {
        Hamiltonian::new(Lattice::chain(2).unwrap(), 2, vec![TermSpec::new(vec![0], pauli::z()), TermSpec::new(vec![1], pauli::x())]).unwrap()
    }

    fn entries(list: Vec<Polymer>) -> Vec<Vec<(usize, usize)>> {
        list.into_iter().map(|p| p.entries).collect()
    }

    #[test]
    fn compatibility_is_support_disjointness() {
        let zz = pauli::z().kron(&pauli::z());
        let h = Hamiltonian::new(
            Lattice::chain(4).unwrap(),
            2,
            vec![TermSpec::new(vec![0, 1], zz.clone()), TermSpec::new(vec![2, 3], zz.clone()), TermSpec::new(vec![1, 2], zz.clone())],
        )
        .unwrap();
        assert!(terms_compatible(h.term(0), h.term(1)));
        assert!(!terms_compatible(h.term(0), h.term(2)));
        assert!(!terms_compatible(h.term(0), h.term(0)));
    }

    #[test]
    fn single_term_polymers() {
        let h = single_term();
        let got = entries(enumerate_connected_multisets(&h, 3, None).collect());
        assert_eq!(got, vec![vec![(0, 1)], vec![(0, 2)], vec![(0, 3)]]);
    }

    #[test]
    fn disjoint_terms_never_mix() {
        let h = two_disjoint();
        let got = entries(enumerate_connected_multisets(&h, 2, None).collect());
        assert_eq!(got, vec![vec![(0, 1)], vec![(0, 2)], vec![(1, 1)], vec![(1, 2)]]);
    }

    #[test]
    fn anchors_filter_by_support() {
        let h = build_lr_tfi(3, 2.0, 1.0, 0.25).unwrap();
        for p in enumerate_connected_multisets(&h, 2, Some(Anchor::Site(2))) {
            assert!(p.support().contains(&2));
        }
        let field0 = h.terms().iter().position(|t| t.support == vec![0]).unwrap();
        for p in enumerate_connected_multisets(&h, 2, Some(Anchor::Term(field0))) {
            assert!(p.support().contains(&0));
        }
    }

    #[test]
    fn single_term_clusters() {
        let h = single_term();
        let clusters: Vec<Cluster> = enumerate_clusters(&h, 2).collect::<Result<_>>().unwrap();
        assert_eq!(clusters.len(), 3);
        type Shape = (Vec<(Vec<(usize, usize)>, usize)>, f64, u64);
        let shapes: Vec<Shape> = clusters.iter().map(|c| (c.parts.iter().map(|(p, k)| (p.entries.clone(), *k)).collect(), c.ursell, c.factor)).collect();
        assert_eq!(shapes, vec![(vec![(vec![(0, 1)], 1)], 1.0, 1), (vec![(vec![(0, 2)], 1)], 1.0, 1), (vec![(vec![(0, 1)], 2)], -0.5, 1),]);
        assert_eq!(count_clusters(&h, 1).unwrap(), 1);
        assert_eq!(count_clusters(&h, 2).unwrap(), 3);
    }

    #[test]
    fn disjoint_terms_form_no_mixed_cluster() {
        let h = two_disjoint();
        for c in enumerate_clusters(&h, 2) {
            let c = c.unwrap();
            let ids: Vec<usize> = c.parts.iter().flat_map(|(p, _)| p.entries.iter().map(|e| e.0)).collect();
            assert!(ids.iter().all(|&i| i == ids[0]));
        }
    }

    #[test]
    fn ursell_small_graphs() {
        assert_eq!(ursell(&IncompatibilityGraph::new(1, [])).unwrap(), 1.0);
        assert_eq!(ursell(&IncompatibilityGraph::new(2, [(0, 1)])).unwrap(), -0.5);
        assert!((ursell(&IncompatibilityGraph::complete(3)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((ursell(&IncompatibilityGraph::new(3, [(0, 1), (1, 2)])).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ursell_of_complete_graph_is_alternating_inverse() {
        // Complete graphs give (−1)^{n−1}/n.
        for n in 1..=8 {
            let phi = ursell(&IncompatibilityGraph::complete(n)).unwrap();
            let expected = if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64;
            assert!((phi - expected).abs() < 1e-15, "n = {n}: {phi}");
        }
    }

    #[test]
    fn ursell_rejects_disconnected_and_oversized() {
        assert_eq!(ursell(&IncompatibilityGraph::new(2, [])), Err(Error::DisconnectedGraph));
        assert!(matches!(ursell(&IncompatibilityGraph::complete(9)), Err(Error::UrsellCap { vertices: 9, cap: 8 })));
        assert!(ursell_with_cap(&IncompatibilityGraph::complete(9), 10).is_ok());
    }

    #[test]
    fn cluster_enumeration_reports_cap() {
        let h = single_term();
        let first = enumerate_clusters(&h, 9).next().unwrap();
        assert!(matches!(first, Err(Error::UrsellCap { .. })));
    }

    #[test]
    fn polymer_counts_and_support() {
        let h = build_lr_tfi(3, 2.0, 1.0, 0.25).unwrap();
        let p = Polymer::from_counts(&h, &[(2, 1), (0, 2), (2, 1)]);
        assert_eq!(p.entries(), &[(0, 2), (2, 2)]);
        assert_eq!(p.norm(), 4);
        assert_eq!(p.distinct(), 2);
        assert_eq!(p.count(2), 2);
        assert_eq!(p.count(1), 0);
    }
}
