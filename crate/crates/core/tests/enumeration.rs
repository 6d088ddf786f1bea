mod support;

use std::collections::{BTreeMap, BTreeSet};

use clusterx::model::{build_lr_tfi, random_two_body};
use clusterx::polymers::{enumerate_clusters, enumerate_connected_multisets, ursell, Anchor, IncompatibilityGraph};
use support::{connected_graphs, exhaustive_ursell, naive_clusters, naive_polymers, Multiset};

fn expand(entries: &[(usize, usize)]) -> Multiset {
    entries.iter().flat_map(|&(z, c)| std::iter::repeat_n(z, c)).collect()
}

#[test]
fn polymers_match_brute_force() {
    for h in [build_lr_tfi(3, 1.5, 1.0, 0.25).unwrap(), random_two_body(3, 3, 2, 1.0, 7).unwrap()] {
        for m in 1..=3 {
            let fast: Vec<Multiset> = enumerate_connected_multisets(&h, m, None).map(|p| expand(p.entries())).collect();
            let unique: BTreeSet<Multiset> = fast.iter().cloned().collect();
            assert_eq!(unique.len(), fast.len(), "duplicates at m={m}");
            assert_eq!(unique, naive_polymers(&h, m), "m={m}");
        }
    }
}

#[test]
fn clusters_match_brute_force() {
    let h = build_lr_tfi(3, 1.5, 1.0, 0.25).unwrap();
    for m in 1..=3 {
        let naive = naive_clusters(&h, m);
        let mut fast = BTreeMap::new();
        for cluster in enumerate_clusters(&h, m) {
            let cluster = cluster.unwrap();
            let mut key: Vec<Multiset> = cluster.parts.iter().flat_map(|(p, c)| std::iter::repeat_n(expand(p.entries()), *c)).collect();
            key.sort();
            assert!(fast.insert(key, cluster.ursell).is_none());
        }
        assert_eq!(fast.len(), naive.len(), "m={m}");
        for (key, phi) in &naive {
            let got = fast.get(key).unwrap_or_else(|| panic!("missing cluster {key:?}"));
            assert!((got - phi).abs() < 1e-15, "{key:?}: {got} vs {phi}");
        }
    }
}

#[test]
fn ursell_matches_exhaustive_and_alternates() {
    for n in 1..=5 {
        for edges in connected_graphs(n) {
            let phi = ursell(&IncompatibilityGraph::new(n, edges.iter().copied())).unwrap();
            assert!((phi - exhaustive_ursell(n, &edges)).abs() < 1e-15, "n={n} {edges:?}");
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!(sign * phi > 0.0);
        }
    }
}

#[test]
fn ursell_sign_on_six_vertices() {
    for edges in connected_graphs(6) {
        let phi = ursell(&IncompatibilityGraph::new(6, edges.iter().copied())).unwrap();
        assert!(phi < 0.0, "{edges:?}");
    }
}

#[test]
fn yielded_polymers_are_connected() {
    let h = random_two_body(6, 8, 3, 1.0, 3).unwrap();
    for p in enumerate_connected_multisets(&h, 4, None) {
        assert!(p.is_connected(&h));
        assert!(support::naive_connected(&h, &expand(p.entries())));
    }
}

#[test]
fn site_anchors_cover_the_unanchored_enumeration() {
    let h = build_lr_tfi(5, 2.5, 1.0, 0.25).unwrap();
    let all: BTreeSet<Multiset> = enumerate_connected_multisets(&h, 3, None).map(|p| expand(p.entries())).collect();
    let mut union = BTreeSet::new();
    for s in 0..h.n_sites() {
        for p in enumerate_connected_multisets(&h, 3, Some(Anchor::Site(s))) {
            assert!(p.support().contains(&s));
            union.insert(expand(p.entries()));
        }
    }
    assert_eq!(union, all);
}

#[test]
fn enumeration_is_deterministic() {
    let h = random_two_body(5, 6, 2, 1.0, 11).unwrap();
    let run = || enumerate_clusters(&h, 3).map(|c| c.unwrap()).collect::<Vec<_>>();
    assert_eq!(run(), run());
}
