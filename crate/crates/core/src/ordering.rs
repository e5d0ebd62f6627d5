//! Classical ordering heuristics, each producing a [`PriorityMap`].
//!
//! Smallest-degree-last uses the round-based formulation everywhere: all
//! vertices of minimum residual degree are peeled simultaneously and share
//! the round index as priority.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};

use rayon::prelude::*;

use crate::coloring::{ColorScratch, Coloring};
use crate::graph::{CsrGraph, Vertex};
use crate::parallel;
use crate::priority::PriorityMap;

/// First fit: input order.
pub fn order_ff(g: &CsrGraph) -> PriorityMap {
    let n = g.num_vertices();
    PriorityMap::from_finite((0..n).map(|u| (n - u) as f64).collect())
}

pub fn par_order_ff(g: &CsrGraph, workers: usize) -> PriorityMap {
    let n = g.num_vertices();
    let values = parallel::pool(workers).install(|| (0..n).into_par_iter().map(|u| (n - u) as f64).collect());
    PriorityMap::from_finite(values)
}

/// Largest degree first.
pub fn order_lf(g: &CsrGraph) -> PriorityMap {
    PriorityMap::from_finite(g.vertices().map(|u| g.degree(u) as f64).collect())
}

pub fn par_order_lf(g: &CsrGraph, workers: usize) -> PriorityMap {
    let n = g.num_vertices() as Vertex;
    let values = parallel::pool(workers).install(|| (0..n).into_par_iter().map(|u| g.degree(u) as f64).collect());
    PriorityMap::from_finite(values)
}

/// Peeling state of a removed vertex in [`order_sl`].
const REMOVED: u32 = u32::MAX;

/// Round members whose adjacency rows [`order_sl`] fetches together.
const ROW_BATCH: usize = 32;

/// Smallest degree last, round-based. Runs in O(n + m) using lazily
/// invalidated degree buckets.
pub fn order_sl(g: &CsrGraph) -> PriorityMap {
    let n = g.num_vertices();
    assert!(g.max_degree() < REMOVED as usize, "degree too large for peeling state");
    // Residual degree, or REMOVED.
    let mut state: Vec<u32> = g.vertices().map(|u| g.degree(u) as u32).collect();
    let mut buckets = initial_buckets(g);
    // Degrees only fall, so a vertex enters each bucket at most once and can
    // be pushed on every decrement. Pushes for removed neighbors land in a
    // discard bucket, which keeps the neighbor loop free of unpredictable
    // branches.
    let discard = buckets.len();
    buckets.push(Vec::new());
    let mut round_of = vec![0u32; n];
    let mut members = Vec::new();
    let mut remaining = n;
    let mut cursor = 0usize;
    let mut round = 0u32;

    while remaining > 0 {
        cursor = next_round(&mut buckets, cursor, &mut members, |v| {
            let s = state[v as usize];
            (s != REMOVED).then_some(s as usize)
        });
        for &u in &members {
            state[u as usize] = REMOVED;
            round_of[u as usize] = round;
        }
        remaining -= members.len();
        for batch in members.chunks(ROW_BATCH) {
            // Touch the batch's rows up front so their cache misses overlap.
            let first = batch
                .iter()
                .fold(0, |acc, &u| acc ^ g.neighbors(u).first().copied().unwrap_or(0));
            std::hint::black_box(first);
            for &u in batch {
                for &w in g.neighbors(u) {
                    let s = state[w as usize];
                    let (next, target) = if s != REMOVED {
                        (s - 1, (s - 1) as usize)
                    } else {
                        (s, discard)
                    };
                    state[w as usize] = next;
                    buckets[target].push(w);
                    cursor = cursor.min(target);
                }
            }
        }
        buckets[discard].clear();
        round += 1;
    }
    PriorityMap::from_finite(round_of.into_iter().map(f64::from).collect())
}

/// Parallel round-based smallest degree last. Round members are peeled
/// together; residual degrees drop through atomic decrements and each round
/// ends at a barrier. Output is identical to [`order_sl`].
pub fn par_order_sl(g: &CsrGraph, workers: usize) -> PriorityMap {
    let n = g.num_vertices();
    let pool = parallel::pool(workers);
    let deg: Vec<AtomicU32> = pool.install(|| {
        g.vertices()
            .into_par_iter()
            .map(|u| AtomicU32::new(g.degree(u) as u32))
            .collect()
    });
    let touched: Vec<AtomicBool> = pool.install(|| (0..n).into_par_iter().map(|_| AtomicBool::new(false)).collect());
    let mut buckets = initial_buckets(g);
    let mut removed = vec![false; n];
    let mut round_of = vec![0u32; n];
    let mut members = Vec::new();
    let mut remaining = n;
    let mut cursor = 0usize;
    let mut round = 0u32;

    while remaining > 0 {
        cursor = next_round(&mut buckets, cursor, &mut members, |v| {
            (!removed[v as usize]).then(|| deg[v as usize].load(Ordering::Relaxed) as usize)
        });
        for &u in &members {
            removed[u as usize] = true;
            round_of[u as usize] = round;
        }
        remaining -= members.len();

        let removed = &removed;
        let touched_lists: Vec<Vec<Vertex>> = pool.install(|| {
            members
                .par_iter()
                .with_min_len(256)
                .fold(Vec::new, |mut local, &u| {
                    for &w in g.neighbors(u) {
                        if !removed[w as usize] {
                            deg[w as usize].fetch_sub(1, Ordering::AcqRel);
                            if !touched[w as usize].swap(true, Ordering::AcqRel) {
                                local.push(w);
                            }
                        }
                    }
                    local
                })
                .collect()
        });
        for w in touched_lists.into_iter().flatten() {
            touched[w as usize].store(false, Ordering::Relaxed);
            let d = deg[w as usize].load(Ordering::Relaxed) as usize;
            buckets[d].push(w);
            cursor = cursor.min(d);
        }
        round += 1;
    }
    PriorityMap::from_finite(round_of.into_iter().map(f64::from).collect())
}

fn initial_buckets(g: &CsrGraph) -> Vec<Vec<Vertex>> {
    let mut buckets = vec![Vec::new(); g.max_degree() + 1];
    for u in g.vertices() {
        buckets[g.degree(u)].push(u);
    }
    buckets
}

/// Advances `cursor` to the lowest bucket holding a live vertex and moves
/// those vertices into `members`. `live_degree` returns `None` for removed
/// vertices; stale entries fail the comparison against the bucket index.
fn next_round<F>(buckets: &mut [Vec<Vertex>], mut cursor: usize, members: &mut Vec<Vertex>, live_degree: F) -> usize
where
    F: Fn(Vertex) -> Option<usize>,
{
    members.clear();
    loop {
        let bucket = &mut buckets[cursor];
        members.extend(bucket.iter().copied().filter(|&v| live_degree(v) == Some(cursor)));
        bucket.clear();
        if !members.is_empty() {
            return cursor;
        }
        cursor += 1;
    }
}

/// Incidence degree: repeatedly select the vertex with the most selected
/// neighbors, then highest degree, then lowest ID.
pub fn order_id(g: &CsrGraph) -> PriorityMap {
    let n = g.num_vertices();
    let mut incidence = vec![0u32; n];
    let mut selected = vec![false; n];
    let mut values = vec![0.0; n];
    let mut heap: BinaryHeap<(u32, u32, Reverse<Vertex>)> =
        g.vertices().map(|u| (0, g.degree(u) as u32, Reverse(u))).collect();
    let mut position = 0;
    while let Some((inc, _, Reverse(u))) = heap.pop() {
        let ui = u as usize;
        if selected[ui] || inc != incidence[ui] {
            continue;
        }
        selected[ui] = true;
        values[ui] = (n - position) as f64;
        position += 1;
        for &w in g.neighbors(u) {
            let wi = w as usize;
            if !selected[wi] {
                incidence[wi] += 1;
                heap.push((incidence[wi], g.degree(w) as u32, Reverse(w)));
            }
        }
    }
    PriorityMap::from_finite(values)
}

/// Saturation degree (DSatur) ordering.
pub fn order_sd(g: &CsrGraph) -> PriorityMap {
    sd_simulation(g).0
}

/// Runs the full saturation-degree coloring, returning both its selection
/// order as priorities and the coloring it produced along the way.
pub fn sd_simulation(g: &CsrGraph) -> (PriorityMap, Coloring) {
    let n = g.num_vertices();
    let mut state = Saturation::new(g);
    let mut values = vec![0.0; n];
    let mut position = 0;
    while let Some((_, _, u)) = state.pop_max() {
        state.color(u);
        values[u as usize] = (n - position) as f64;
        position += 1;
    }
    (PriorityMap::from_finite(values), state.into_coloring())
}

/// Round-based saturation degree used for training labels: each step takes
/// every uncolored vertex sharing the maximal (saturation, degree) key,
/// colors them in ascending ID order, and gives them one shared priority.
pub fn order_sd_rounds(g: &CsrGraph) -> PriorityMap {
    let n = g.num_vertices();
    let mut state = Saturation::new(g);
    let mut round_of = vec![0u32; n];
    let mut round = 0u32;
    let mut members = Vec::new();
    while let Some((sat, deg, first)) = state.pop_max() {
        members.clear();
        members.push(first);
        while let Some(u) = state.pop_if_key(sat, deg) {
            members.push(u);
        }
        for &u in &members {
            state.color(u);
            round_of[u as usize] = round;
        }
        round += 1;
    }
    PriorityMap::from_finite(round_of.into_iter().map(|r| f64::from(round - r)).collect())
}

struct Saturation<'g> {
    g: &'g CsrGraph,
    colors: Vec<u32>,
    saturation: Vec<u32>,
    seen: Vec<HashSet<u32>>,
    heap: BinaryHeap<(u32, u32, Reverse<Vertex>)>,
    scratch: ColorScratch,
}

impl<'g> Saturation<'g> {
    fn new(g: &'g CsrGraph) -> Self {
        let n = g.num_vertices();
        Saturation {
            g,
            colors: vec![u32::MAX; n],
            saturation: vec![0; n],
            seen: vec![HashSet::new(); n],
            heap: g.vertices().map(|u| (0, g.degree(u) as u32, Reverse(u))).collect(),
            scratch: ColorScratch::new(),
        }
    }

    fn is_current(&self, sat: u32, u: Vertex) -> bool {
        self.colors[u as usize] == u32::MAX && self.saturation[u as usize] == sat
    }

    fn pop_max(&mut self) -> Option<(u32, u32, Vertex)> {
        while let Some((sat, deg, Reverse(u))) = self.heap.pop() {
            if self.is_current(sat, u) {
                return Some((sat, deg, u));
            }
        }
        None
    }

    /// Pops the next live entry only if it carries exactly this key.
    fn pop_if_key(&mut self, sat: u32, deg: u32) -> Option<Vertex> {
        while let Some(&(s, d, Reverse(u))) = self.heap.peek() {
            if (s, d) != (sat, deg) {
                return None;
            }
            self.heap.pop();
            if self.is_current(s, u) {
                return Some(u);
            }
        }
        None
    }

    fn color(&mut self, u: Vertex) {
        let nbrs = self.g.neighbors(u);
        let colors = &self.colors;
        let c = self
            .scratch
            .min_absent(nbrs.len(), nbrs.iter().map(|&v| colors[v as usize]));
        self.colors[u as usize] = c;
        for &w in nbrs {
            let wi = w as usize;
            if self.colors[wi] == u32::MAX && self.seen[wi].insert(c) {
                self.saturation[wi] += 1;
                self.heap
                    .push((self.saturation[wi], self.g.degree(w) as u32, Reverse(w)));
            }
        }
        self.seen[u as usize] = HashSet::new();
    }

    fn into_coloring(self) -> Coloring {
        Coloring::from_colors(self.colors)
    }
}

/// Classical heuristics selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Heuristic {
    Ff,
    Lf,
    Sl,
    Id,
    Sd,
}

impl Heuristic {
    pub const ALL: [Heuristic; 5] = [
        Heuristic::Ff,
        Heuristic::Lf,
        Heuristic::Sl,
        Heuristic::Id,
        Heuristic::Sd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Ff => "ff",
            Heuristic::Lf => "lf",
            Heuristic::Sl => "sl",
            Heuristic::Id => "id",
            Heuristic::Sd => "sd",
        }
    }

    /// Sequential ordering.
    pub fn order(self, g: &CsrGraph) -> PriorityMap {
        match self {
            Heuristic::Ff => order_ff(g),
            Heuristic::Lf => order_lf(g),
            Heuristic::Sl => order_sl(g),
            Heuristic::Id => order_id(g),
            Heuristic::Sd => order_sd(g),
        }
    }

    /// Parallel ordering where one exists; ID and SD stay sequential.
    pub fn par_order(self, g: &CsrGraph, workers: usize) -> PriorityMap {
        match self {
            Heuristic::Ff => par_order_ff(g, workers),
            Heuristic::Lf => par_order_lf(g, workers),
            Heuristic::Sl => par_order_sl(g, workers),
            Heuristic::Id | Heuristic::Sd => self.order(g),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Heuristic::ALL
            .into_iter()
            .find(|h| h.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown heuristic {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::greedy_color;

    fn k3() -> CsrGraph {
        CsrGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)])
    }

    fn path(n: u32) -> CsrGraph {
        CsrGraph::from_edges(n as usize, (1..n).map(|i| (i - 1, i)))
    }

    fn star(leaves: u32) -> CsrGraph {
        CsrGraph::from_edges(leaves as usize + 1, (1..=leaves).map(|i| (0, i)))
    }

    #[test]
    fn ff_examples() {
        assert_eq!(order_ff(&k3()).values(), &[3.0, 2.0, 1.0]);
        let single = CsrGraph::from_edges(1, []);
        assert_eq!(order_ff(&single).values(), &[1.0]);
        assert_eq!(order_ff(&path(5)).order(), vec![0, 1, 2, 3, 4]);
        assert_eq!(par_order_ff(&path(5), 3), order_ff(&path(5)));
    }

    #[test]
    fn lf_examples() {
        let s = star(4);
        let pm = order_lf(&s);
        assert!((1..5).all(|leaf| pm.precedes(0, leaf)));
        assert_eq!(order_lf(&k3()).order(), vec![0, 1, 2]);
        let pm = order_lf(&path(4));
        assert_eq!(pm.values(), &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(pm.order(), vec![1, 2, 0, 3]);
        assert_eq!(par_order_lf(&path(4), 2), pm);
    }

    #[test]
    fn sl_examples() {
        assert_eq!(order_sl(&path(4)).values(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(order_sl(&k3()).values(), &[0.0, 0.0, 0.0]);
        let pm = order_sl(&star(4));
        assert_eq!(pm.values(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(pm.order()[0], 0);
    }

    #[test]
    fn sl_peels_pendant_path_one_round_at_a_time() {
        // Triangle with a pendant path 2-3-4-5.
        let g = CsrGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5)]);
        let seq = order_sl(&g);
        assert_eq!(seq.values(), &[3.0, 3.0, 3.0, 2.0, 1.0, 0.0]);
        assert_eq!(par_order_sl(&g, 3), seq);
    }

    #[test]
    fn sl_isolated_and_empty() {
        let g = CsrGraph::from_edges(3, [(1, 2)]);
        assert_eq!(order_sl(&g).values(), &[0.0, 1.0, 1.0]);
        assert!(order_sl(&CsrGraph::default()).is_empty());
    }

    #[test]
    fn id_examples() {
        let single = CsrGraph::from_edges(1, []);
        assert_eq!(order_id(&single).values(), &[1.0]);
        assert_eq!(order_id(&k3()).order(), vec![0, 1, 2]);
        assert_eq!(order_id(&path(3)).values(), &[2.0, 3.0, 1.0]);
    }

    #[test]
    fn sd_examples() {
        let pm = order_sd(&k3());
        assert_eq!(pm.order(), vec![0, 1, 2]);
        assert_eq!(greedy_color(&k3(), &pm).num_colors(), 3);
        let pm = order_sd(&path(3));
        assert_eq!(pm.order(), vec![1, 0, 2]);
        assert_eq!(greedy_color(&path(3), &pm).num_colors(), 2);
    }

    #[test]
    fn sd_replay_reproduces_simulation() {
        let g = CsrGraph::from_edges(
            7,
            [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 3), (1, 5)],
        );
        let (pm, sim) = sd_simulation(&g);
        assert_eq!(greedy_color(&g, &pm), sim);
    }

    #[test]
    fn sd_rounds_groups_equal_keys() {
        // Star: the center has the unique max degree, then all leaves share
        // saturation 1 and degree 1.
        let pm = order_sd_rounds(&star(4));
        assert_eq!(pm.values(), &[2.0, 1.0, 1.0, 1.0, 1.0]);
        // K3: degree ties put every vertex in the opening round.
        assert_eq!(order_sd_rounds(&k3()).values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn heuristic_names() {
        for h in Heuristic::ALL {
            assert_eq!(h.name().parse::<Heuristic>().unwrap(), h);
        }
        assert!("dsatur".parse::<Heuristic>().is_err());
        assert_eq!("LF".parse::<Heuristic>().unwrap(), Heuristic::Lf);
    }
}
