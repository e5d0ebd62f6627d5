//! Greedy and Jones-Plassmann coloring driven by a [`PriorityMap`].

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU32, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{CsrGraph, Vertex};
use crate::parallel;
use crate::priority::PriorityMap;

const UNCOLORED: u32 = u32::MAX;

/// Frontier slice handed to one rayon task.
const JP_GRAIN: usize = 1024;

/// Vertices per task when orienting edges.
const JP_BLOCK: usize = 4096;

/// Set in a JP state word once the vertex is colored.
const COLORED: u32 = 1 << 31;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u32>,
    num_colors: usize,
    max_color_multiplicity: usize,
}

impl Coloring {
    pub fn from_colors(colors: Vec<u32>) -> Self {
        let num_colors = colors.iter().max().map_or(0, |&c| c as usize + 1);
        let max_color_multiplicity = match num_colors {
            0 => 0,
            k => colors.iter().filter(|&&c| c as usize == k - 1).count(),
        };
        Coloring {
            colors,
            num_colors,
            max_color_multiplicity,
        }
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn into_colors(self) -> Vec<u32> {
        self.colors
    }

    #[inline]
    pub fn color(&self, u: Vertex) -> u32 {
        self.colors[u as usize]
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    /// Number of vertices carrying the highest color.
    pub fn max_color_multiplicity(&self) -> usize {
        self.max_color_multiplicity
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# coloring {} {}", self.colors.len(), self.num_colors)?;
        for c in &self.colors {
            writeln!(out, "{c}")?;
        }
        out.flush()
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(1, "empty coloring file"))?;
        let fields: Vec<usize> = header
            .strip_prefix("# coloring ")
            .map(|rest| rest.split_whitespace().filter_map(|t| t.parse().ok()).collect())
            .unwrap_or_default();
        let [n, k] = fields[..] else {
            return Err(Error::parse(1, "expected `# coloring <n> <num_colors>` header"));
        };
        let mut colors = Vec::with_capacity(n);
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            colors.push(
                line.parse::<u32>()
                    .map_err(|_| Error::parse(idx + 2, format!("malformed color {line:?}")))?,
            );
        }
        let coloring = Coloring::from_colors(colors);
        if coloring.colors.len() != n || coloring.num_colors != k {
            return Err(Error::Format("coloring header does not match body".into()));
        }
        Ok(coloring)
    }
}

/// Reusable scratch for "smallest color absent from a neighborhood".
///
/// Marks are version-stamped so nothing is cleared between vertices.
#[derive(Default)]
pub struct ColorScratch {
    stamp: Vec<u32>,
    epoch: u32,
}

impl ColorScratch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Smallest color not produced by `colors`. At most `bound` values are
    /// expected, so any color `>= bound` cannot affect the answer.
    #[inline]
    pub fn min_absent(&mut self, bound: usize, colors: impl Iterator<Item = u32>) -> u32 {
        if self.stamp.len() <= bound {
            self.stamp.resize(bound + 1, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        for c in colors {
            if (c as usize) < bound {
                self.stamp[c as usize] = self.epoch;
            }
        }
        let mut c = 0;
        while self.stamp[c] == self.epoch {
            c += 1;
        }
        c as u32
    }
}

/// Sequential greedy coloring in `precedes` order.
pub fn greedy_color(g: &CsrGraph, pm: &PriorityMap) -> Coloring {
    assert_eq!(pm.len(), g.num_vertices(), "priority map does not match graph");
    let mut colors = vec![UNCOLORED; g.num_vertices()];
    let mut scratch = ColorScratch::new();
    for u in pm.order() {
        let nbrs = g.neighbors(u);
        colors[u as usize] = scratch.min_absent(nbrs.len(), nbrs.iter().map(|&v| colors[v as usize]));
    }
    Coloring::from_colors(colors)
}

/// Jones-Plassmann coloring on `workers` threads.
///
/// Edges are oriented by `precedes`; a vertex is colored once all of its
/// predecessors are. The result equals [`greedy_color`] for any worker count.
pub fn jp_color(g: &CsrGraph, pm: &PriorityMap, workers: usize) -> Coloring {
    assert_eq!(pm.len(), g.num_vertices(), "priority map does not match graph");
    let n = g.num_vertices();
    let offsets = g.row_offsets();
    parallel::pool(workers).install(|| {
        // Per directed edge (u, v): does v precede u? Built once so the
        // coloring sweep reads it sequentially instead of the priorities.
        let blocks: Vec<(Vec<AtomicU32>, Vec<bool>)> = (0..n)
            .into_par_iter()
            .step_by(JP_BLOCK)
            .map(|lo| {
                let hi = (lo + JP_BLOCK).min(n);
                let mut pred = Vec::with_capacity(offsets[hi] - offsets[lo]);
                let mut state = Vec::with_capacity(hi - lo);
                for u in lo as Vertex..hi as Vertex {
                    let before = pred.len();
                    pred.extend(g.neighbors(u).iter().map(|&v| pm.precedes(v, u)));
                    let count = pred[before..].iter().filter(|&&p| p).count();
                    state.push(AtomicU32::new(count as u32));
                }
                (state, pred)
            })
            .collect();
        let mut state = Vec::with_capacity(n);
        let mut pred = Vec::with_capacity(g.col_indices().len());
        for (s, p) in blocks {
            state.extend(s);
            pred.extend(p);
        }
        // Uncolored: remaining predecessor count. Colored: COLORED | color.
        let mut frontier: Vec<Vertex> = (0..n as Vertex)
            .into_par_iter()
            .filter(|&u| state[u as usize].load(Ordering::Relaxed) == 0)
            .collect();

        while !frontier.is_empty() {
            let buffers: Vec<Vec<Vertex>> = frontier
                .par_chunks(JP_GRAIN)
                .map_init(ColorScratch::new, |scratch, chunk| {
                    let mut next = Vec::new();
                    for &u in chunk {
                        let range = g.edge_range(u);
                        let nbrs = &g.col_indices()[range.clone()];
                        let is_pred = &pred[range];
                        let c = scratch.min_absent(
                            nbrs.len(),
                            nbrs.iter()
                                .zip(is_pred)
                                .filter(|(_, &p)| p)
                                .map(|(&v, _)| state[v as usize].load(Ordering::Acquire) & !COLORED),
                        );
                        state[u as usize].store(COLORED | c, Ordering::Release);
                        for (&v, _) in nbrs.iter().zip(is_pred).filter(|(_, &p)| !p) {
                            if state[v as usize].fetch_sub(1, Ordering::AcqRel) == 1 {
                                next.push(v);
                            }
                        }
                    }
                    next
                })
                .collect();
            frontier = buffers.concat();
        }

        Coloring::from_colors(state.into_iter().map(|s| s.into_inner() & !COLORED).collect())
    })
}

/// Recolors greedily with `p(u) = prev(u)`: highest color class first.
/// Never uses more colors than `prev`.
///
/// Panics if `prev` is not a proper coloring of `g`.
pub fn culberson_recolor(g: &CsrGraph, prev: &Coloring) -> Coloring {
    assert!(validate(g, prev), "culberson_recolor needs a proper coloring");
    let pm = PriorityMap::from_finite(prev.colors.iter().map(|&c| c as f64).collect());
    greedy_color(g, &pm)
}

/// Applies [`culberson_recolor`] `iterations` times, returning every
/// intermediate coloring (not including `start`).
pub fn culberson_chain(g: &CsrGraph, start: &Coloring, iterations: usize) -> Vec<Coloring> {
    let mut chain: Vec<Coloring> = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let next = culberson_recolor(g, chain.last().unwrap_or(start));
        chain.push(next);
    }
    chain
}

/// Proper and contiguous (every color below `num_colors` used).
pub fn validate(g: &CsrGraph, col: &Coloring) -> bool {
    let n = g.num_vertices();
    if col.colors.len() != n {
        return false;
    }
    let proper = g
        .vertices()
        .all(|u| g.neighbors(u).iter().all(|&v| col.color(u) != col.color(v)));
    if !proper {
        return false;
    }
    let mut used = vec![false; col.num_colors];
    for &c in &col.colors {
        used[c as usize] = true;
    }
    used.into_iter().all(|b| b)
}
