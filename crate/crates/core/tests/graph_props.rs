mod common;

use common::arb_graph;
use gnncolor::graph::{parse_dimacs, parse_edge_list, read_binary, write_binary, write_dimacs, write_edge_list};
use gnncolor::{load_graph, save_graph, CsrGraph};
use proptest::prelude::*;

fn edge_list_text(g: &CsrGraph) -> Vec<u8> {
    let mut buf = Vec::new();
    write_edge_list(g, &mut buf).unwrap();
    buf
}

/// Drops isolated vertices the way edge-list compaction does.
fn without_isolated(g: &CsrGraph) -> CsrGraph {
    let mut id = vec![u32::MAX; g.num_vertices()];
    let mut next = 0;
    for u in g.vertices() {
        if g.degree(u) > 0 {
            id[u as usize] = next;
            next += 1;
        }
    }
    CsrGraph::from_edges(next as usize, g.edges().map(|(u, v)| (id[u as usize], id[v as usize])))
}

proptest! {
    #[test]
    fn loading_is_deterministic(g in arb_graph(40)) {
        let text = edge_list_text(&g);
        let a = parse_edge_list(&text[..]).unwrap();
        let b = parse_edge_list(&text[..]).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn line_order_does_not_matter(g in arb_graph(30), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut lines: Vec<String> = g.edges().map(|(u, v)| if seed % 2 == 0 { format!("{u} {v}") } else { format!("{v} {u}") }).collect();
        lines.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let shuffled = parse_edge_list(lines.join("\n").as_bytes()).unwrap();
        prop_assert_eq!(shuffled, parse_edge_list(&edge_list_text(&g)[..]).unwrap());
    }

    #[test]
    fn degrees_sum_to_twice_edges_and_adjacency_is_symmetric(g in arb_graph(60)) {
        let total: usize = g.vertices().map(|u| g.degree(u)).sum();
        prop_assert_eq!(total, 2 * g.num_edges());
        for u in g.vertices() {
            for &v in g.neighbors(u) {
                prop_assert!(v != u);
                prop_assert!(g.neighbors(v).contains(&u));
            }
            prop_assert!(g.neighbors(u).windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn edge_list_round_trip(g in arb_graph(50)) {
        let compact = without_isolated(&g);
        let back = parse_edge_list(&edge_list_text(&compact)[..]).unwrap();
        prop_assert_eq!(back, compact);
    }

    #[test]
    fn dimacs_and_binary_round_trip(g in arb_graph(50)) {
        let mut col = Vec::new();
        write_dimacs(&g, &mut col).unwrap();
        prop_assert_eq!(&parse_dimacs(&col[..]).unwrap(), &g);
        let mut bin = Vec::new();
        write_binary(&g, &mut bin).unwrap();
        prop_assert_eq!(read_binary(&bin[..]).unwrap(), g);
    }
}

#[test]
fn files_round_trip_by_extension() {
    let dir = tempfile::tempdir().unwrap();
    let g = CsrGraph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]);
    for name in ["g.edges", "g.txt", "g.col", "g.csrg"] {
        let path = dir.path().join(name);
        save_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g, "{name}");
    }
}
