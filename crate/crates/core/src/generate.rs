//! Random and structured graph generators, plus the small built-in corpus
//! used for training and evaluation when no downloaded data is at hand.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CsrGraph, Vertex};
use crate::manifest::Split;

/// `G(n, m)`: `m` distinct edges chosen uniformly.
pub fn gnm<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> CsrGraph {
    let max_edges = n * n.saturating_sub(1) / 2;
    assert!(m <= max_edges, "G({n}, {m}) has too many edges");
    if n < 2 || m == 0 {
        return CsrGraph::from_edges(n, []);
    }
    // Dense requests: sample the complement-free way by shuffling all pairs.
    if m * 3 > max_edges {
        let mut pairs: Vec<(Vertex, Vertex)> = (0..n as Vertex)
            .flat_map(|u| (u + 1..n as Vertex).map(move |v| (u, v)))
            .collect();
        pairs.shuffle(rng);
        pairs.truncate(m);
        return CsrGraph::from_edges(n, pairs);
    }
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.random_range(0..n as Vertex);
        let v = rng.random_range(0..n as Vertex);
        if u != v && seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v));
        }
    }
    CsrGraph::from_edges(n, edges)
}

/// Approximately `m` uniform edges, sampled with replacement and merged.
/// Much cheaper than [`gnm`] when `m` is in the millions.
pub fn gnm_fast<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> CsrGraph {
    assert!(n >= 2 || m == 0, "need two vertices for an edge");
    let edges: Vec<(Vertex, Vertex)> = (0..m)
        .map(|_| {
            let u = rng.random_range(0..n as Vertex);
            let mut v = rng.random_range(0..n as Vertex - 1);
            if v >= u {
                v += 1;
            }
            (u, v)
        })
        .collect();
    CsrGraph::from_edges(n, edges)
}

/// `G(n, p)`, quadratic in `n`.
pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> CsrGraph {
    let mut edges = Vec::new();
    for u in 0..n as Vertex {
        for v in u + 1..n as Vertex {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    CsrGraph::from_edges(n, edges)
}

/// Preferential attachment: each new vertex links to `k` distinct earlier
/// vertices chosen proportionally to degree.
pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> CsrGraph {
    assert!(k >= 1 && n > k, "need n > k >= 1");
    let mut edges = Vec::with_capacity(n * k);
    // Endpoint list: sampling uniformly from it is degree-proportional.
    let mut ends: Vec<Vertex> = Vec::with_capacity(2 * n * k);
    for u in 0..=k as Vertex {
        for v in 0..u {
            edges.push((v, u));
            ends.extend([u, v]);
        }
    }
    let mut targets = Vec::with_capacity(k);
    for u in k as Vertex + 1..n as Vertex {
        targets.clear();
        while targets.len() < k {
            let t = ends[rng.random_range(0..ends.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, u));
            ends.extend([u, t]);
        }
    }
    CsrGraph::from_edges(n, edges)
}

/// Chung-Lu graph with power-law expected degrees `w_i ∝ (i + 1)^(-1/(γ-1))`
/// scaled to mean `avg_degree`; each pair is joined with probability
/// `min(1, w_u w_v / Σw)`. Quadratic in `n`.
pub fn chung_lu<R: Rng + ?Sized>(n: usize, gamma: f64, avg_degree: f64, rng: &mut R) -> CsrGraph {
    assert!(gamma > 2.0, "power-law exponent must exceed 2");
    let raw: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(-1.0 / (gamma - 1.0))).collect();
    let scale = avg_degree * n as f64 / raw.iter().sum::<f64>();
    let w: Vec<f64> = raw.iter().map(|x| x * scale).collect();
    let total: f64 = w.iter().sum();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool((w[u] * w[v] / total).min(1.0)) {
                edges.push((u as Vertex, v as Vertex));
            }
        }
    }
    CsrGraph::from_edges(n, edges)
}

/// Unit-square random geometric graph.
pub fn random_geometric<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> CsrGraph {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random(), rng.random())).collect();
    let cells = ((1.0 / radius).floor() as usize).clamp(1, 1024);
    let cell_of = |x: f64| ((x * cells as f64) as usize).min(cells - 1);
    let mut grid = vec![Vec::new(); cells * cells];
    for (i, &(x, y)) in pts.iter().enumerate() {
        grid[cell_of(x) * cells + cell_of(y)].push(i);
    }
    let r2 = radius * radius;
    let mut edges = Vec::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        let (cx, cy) = (cell_of(x), cell_of(y));
        for gx in cx.saturating_sub(1)..=(cx + 1).min(cells - 1) {
            for gy in cy.saturating_sub(1)..=(cy + 1).min(cells - 1) {
                for &j in &grid[gx * cells + gy] {
                    let (dx, dy) = (pts[j].0 - x, pts[j].1 - y);
                    if j > i && dx * dx + dy * dy <= r2 {
                        edges.push((i as Vertex, j as Vertex));
                    }
                }
            }
        }
    }
    CsrGraph::from_edges(n, edges)
}

/// Queen moves on a `rows x cols` board.
pub fn queen(rows: usize, cols: usize) -> CsrGraph {
    let id = |r: usize, c: usize| (r * cols + c) as Vertex;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            for r2 in 0..rows {
                for c2 in 0..cols {
                    let same_line = r == r2 || c == c2 || r.abs_diff(r2) == c.abs_diff(c2);
                    if same_line && id(r, c) < id(r2, c2) {
                        edges.push((id(r, c), id(r2, c2)));
                    }
                }
            }
        }
    }
    CsrGraph::from_edges(rows * cols, edges)
}

/// Mycielski graph `M_k`: triangle-free with chromatic number `k`
/// (`M_2 = K2`).
pub fn mycielski(k: usize) -> CsrGraph {
    assert!(k >= 2, "Mycielski graphs start at k = 2");
    let mut n = 2usize;
    let mut edges: Vec<(Vertex, Vertex)> = vec![(0, 1)];
    for _ in 2..k {
        let mut next = edges.clone();
        for &(u, v) in &edges {
            next.push((u, v + n as Vertex));
            next.push((v, u + n as Vertex));
        }
        let apex = (2 * n) as Vertex;
        next.extend((0..n as Vertex).map(|u| (u + n as Vertex, apex)));
        edges = next;
        n = 2 * n + 1;
    }
    CsrGraph::from_edges(n, edges)
}

/// Ring lattice with `k` neighbors per side, each edge rewired with
/// probability `beta`.
pub fn watts_strogatz<R: Rng + ?Sized>(n: usize, k: usize, beta: f64, rng: &mut R) -> CsrGraph {
    assert!(n > 2 * k, "ring too small for k = {k}");
    let mut edges = Vec::with_capacity(n * k);
    for u in 0..n {
        for step in 1..=k {
            let v = if rng.random_bool(beta) {
                rng.random_range(0..n)
            } else {
                (u + step) % n
            };
            edges.push((u as Vertex, v as Vertex));
        }
    }
    CsrGraph::from_edges(n, edges)
}

/// `parts` equal blocks; intra-block edges with `p_in`, others with `p_out`.
pub fn planted_partition<R: Rng + ?Sized>(n: usize, parts: usize, p_in: f64, p_out: f64, rng: &mut R) -> CsrGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if u % parts == v % parts { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u as Vertex, v as Vertex));
            }
        }
    }
    CsrGraph::from_edges(n, edges)
}

/// Road-like: a grid with some streets removed and a few diagonals added.
pub fn road_grid<R: Rng + ?Sized>(rows: usize, cols: usize, keep: f64, diagonal: f64, rng: &mut R) -> CsrGraph {
    let id = |r: usize, c: usize| (r * cols + c) as Vertex;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols && rng.random_bool(keep) {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows && rng.random_bool(keep) {
                edges.push((id(r, c), id(r + 1, c)));
            }
            if r + 1 < rows && c + 1 < cols && rng.random_bool(diagonal) {
                edges.push((id(r, c), id(r + 1, c + 1)));
            }
        }
    }
    CsrGraph::from_edges(rows * cols, edges)
}

/// Randomly relabels vertices so that IDs carry no structure.
pub fn shuffle_ids<R: Rng + ?Sized>(g: &CsrGraph, rng: &mut R) -> CsrGraph {
    let mut perm: Vec<Vertex> = g.vertices().collect();
    perm.shuffle(rng);
    CsrGraph::from_edges(
        g.num_vertices(),
        g.edges().map(|(u, v)| (perm[u as usize], perm[v as usize])),
    )
}

#[derive(Clone, Debug)]
pub struct CorpusGraph {
    pub name: String,
    pub split: Split,
    pub graph: CsrGraph,
}

/// Thirty small graphs loosely following the mix of a public graph
/// collection: mostly heavy-tailed social/web-like graphs, then random,
/// road-like, small-world and classic benchmark instances. Two thirds are
/// tagged `train`, the rest `test`. Deterministic in `seed`.
pub fn desk_corpus(seed: u64) -> Vec<CorpusGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(30);
    let mut push = |name: String, g: CsrGraph, rng: &mut ChaCha8Rng| {
        let split = if out.len() % 3 == 2 { Split::Test } else { Split::Train };
        let graph = shuffle_ids(&g, rng);
        out.push(CorpusGraph { name, split, graph });
    };
    for i in 0..10 {
        let n = 400 + 100 * i;
        let gamma = 2.1 + 0.1 * (i % 6) as f64;
        let avg = 4.0 + 2.0 * (i % 4) as f64;
        let g = chung_lu(n, gamma, avg, &mut rng);
        push(format!("powerlaw_{n}_{i}"), g, &mut rng);
    }
    for i in 0..6 {
        let n = 400 + 150 * i;
        let k = 2 + i % 4;
        let g = barabasi_albert(n, k, &mut rng);
        push(format!("ba_{n}_{k}"), g, &mut rng);
    }
    for i in 0..4 {
        let n = 300 + 150 * i;
        let g = gnm(n, n * (3 + i), &mut rng);
        push(format!("er_{n}_{}", 3 + i), g, &mut rng);
    }
    for i in 0..3 {
        let (rows, cols) = (20 + 5 * i, 25 + 5 * i);
        let g = road_grid(rows, cols, 0.85, 0.15, &mut rng);
        push(format!("road_{rows}x{cols}"), g, &mut rng);
    }
    for i in 0..2 {
        let n = 500 + 200 * i;
        let g = random_geometric(n, 0.05 + 0.01 * i as f64, &mut rng);
        push(format!("rgg_{n}"), g, &mut rng);
    }
    for i in 0..2 {
        let n = 500 + 200 * i;
        let g = watts_strogatz(n, 3 + i, 0.1, &mut rng);
        push(format!("ws_{n}_{}", 3 + i), g, &mut rng);
    }
    push(
        "pp_300_5".into(),
        planted_partition(300, 5, 0.08, 0.01, &mut rng),
        &mut rng,
    );
    push("queen8_8".into(), queen(8, 8), &mut rng);
    push("myciel6".into(), mycielski(6), &mut rng);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(17)
    }

    #[test]
    fn gnm_has_exact_edge_count() {
        for (n, m) in [(10, 0), (10, 45), (50, 30), (50, 1000), (1, 0)] {
            let g = gnm(n, m, &mut rng());
            assert_eq!((g.num_vertices(), g.num_edges()), (n, m));
        }
    }

    #[test]
    fn gnm_fast_is_close() {
        let g = gnm_fast(10_000, 50_000, &mut rng());
        assert!(g.num_edges() <= 50_000 && g.num_edges() > 49_000);
    }

    #[test]
    fn mycielski_sizes() {
        // M_k has 3 * 2^(k-2) - 1 vertices.
        assert_eq!(mycielski(2).num_edges(), 1);
        let m3 = mycielski(3);
        assert_eq!((m3.num_vertices(), m3.num_edges()), (5, 5));
        let m4 = mycielski(4);
        assert_eq!((m4.num_vertices(), m4.num_edges()), (11, 20));
        let m6 = mycielski(6);
        assert_eq!((m6.num_vertices(), m6.num_edges()), (47, 236));
    }

    #[test]
    fn queen_degrees() {
        let g = queen(8, 8);
        assert_eq!(g.num_edges(), 728);
        // A corner queen attacks 7 + 7 + 7 squares.
        assert_eq!(g.degree(0), 21);
    }

    #[test]
    fn ba_degree_sum() {
        let g = barabasi_albert(200, 3, &mut rng());
        assert_eq!(g.num_edges(), 6 + 3 * 196);
        assert!(g.vertices().all(|u| g.degree(u) >= 3));
    }

    #[test]
    fn shuffle_preserves_degree_sequence() {
        let g = barabasi_albert(100, 2, &mut rng());
        let h = shuffle_ids(&g, &mut rng());
        let mut a: Vec<usize> = g.vertices().map(|u| g.degree(u)).collect();
        let mut b: Vec<usize> = h.vertices().map(|u| h.degree(u)).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
        assert_eq!(g.num_edges(), h.num_edges());
    }

    #[test]
    fn corpus_is_deterministic_and_split() {
        let a = desk_corpus(1);
        let b = desk_corpus(1);
        assert_eq!(a.len(), 30);
        assert_eq!(a.iter().filter(|c| c.split == Split::Train).count(), 20);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.graph, y.graph);
        }
        let names: HashSet<&str> = a.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names.len(), 30);
    }
}
