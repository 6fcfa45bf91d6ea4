use proptest::prelude::*;

use sdplstm::depgraph::{DependencyGraph, Edge, PathError};

fn graph(n: usize, pairs: &[(usize, usize)]) -> DependencyGraph {
    let edges = pairs
        .iter()
        .map(|&(a, b)| (a % n, b % n))
        .filter(|(a, b)| a != b)
        .map(|(a, b)| Edge::new(a, b, "dep"));
    DependencyGraph::new("p", n, edges).unwrap()
}

fn arb_graph() -> impl Strategy<Value = DependencyGraph> {
    (2usize..=10, prop::collection::vec((0usize..10, 0usize..10), 0..20)).prop_map(|(n, e)| graph(n, &e))
}

/// Hop count by relaxing distances to a fixed point.
fn distances(g: &DependencyGraph, src: usize) -> Vec<Option<usize>> {
    let mut d = vec![None; g.node_count];
    d[src] = Some(0);
    loop {
        let mut changed = false;
        for e in &g.edges {
            for (a, b) in [(e.head, e.dependent), (e.dependent, e.head)] {
                if let Some(da) = d[a] {
                    if d[b].is_none_or(|db| da + 1 < db) {
                        d[b] = Some(da + 1);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

fn hops(g: &DependencyGraph, a: usize, b: usize) -> Option<usize> {
    g.shortest_path(a, b).ok().map(|p| p.len())
}

proptest! {
    #[test]
    fn path_length_matches_relaxation(g in arb_graph(), a in 0usize..10, b in 0usize..10) {
        let (a, b) = (a % g.node_count, b % g.node_count);
        prop_assume!(a != b);
        let d = distances(&g, a);
        match g.shortest_path(a, b) {
            Ok(p) => {
                prop_assert_eq!(Some(p.len()), d[b]);
                prop_assert!(g.is_valid_path(&p));
                prop_assert_eq!((p.nodes[0], *p.nodes.last().unwrap()), (a, b));
            }
            Err(PathError::Disconnected { .. }) => prop_assert_eq!(d[b], None),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn symmetric_and_deterministic(g in arb_graph(), a in 0usize..10, b in 0usize..10) {
        let (a, b) = (a % g.node_count, b % g.node_count);
        prop_assume!(a != b);
        prop_assert_eq!(hops(&g, a, b), hops(&g, b, a));
        prop_assert_eq!(g.shortest_path(a, b).ok(), g.shortest_path(a, b).ok());
    }

    #[test]
    fn triangle_inequality(g in arb_graph(), a in 0usize..10, b in 0usize..10, c in 0usize..10) {
        let n = g.node_count;
        let (a, b, c) = (a % n, b % n, c % n);
        prop_assume!(a != b && b != c && a != c);
        if let (Some(ac), Some(ab), Some(bc)) = (hops(&g, a, c), hops(&g, a, b), hops(&g, b, c)) {
            prop_assert!(ac <= ab + bc);
        }
    }
}
