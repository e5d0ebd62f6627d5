//! Forward evaluation of a [`GnnModel`] over a CSR graph.
//!
//! [`sage_layer`] is the plain per-vertex definition. [`infer_priorities`]
//! runs the same arithmetic in blocks: neighbor means for a block of
//! vertices are gathered into a small buffer, then multiplied by the layer
//! weights while the block is still in cache. Each output row is produced by
//! exactly one task with a fixed summation order, so results do not depend
//! on the worker count.

use rayon::prelude::*;

use super::model::{GnnModel, SageLayer, HIDDEN, INPUT_FEATURES};
use crate::graph::CsrGraph;
use crate::parallel;
use crate::priority::PriorityMap;

/// Vertices aggregated before each weight multiplication.
const BLOCK: usize = 64;
/// Vertices per parallel task.
const CHUNK: usize = 2048;

/// Dense row-major `rows x cols` matrix of vertex features.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FeatureMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), rows * cols, "feature matrix size mismatch");
        FeatureMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, u: usize) -> &[f32] {
        &self.data[u * self.cols..(u + 1) * self.cols]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Row sums: the priority read-out.
    pub fn row_sums(&self) -> Vec<f32> {
        self.data.chunks_exact(self.cols).map(row_sum).collect()
    }
}

#[inline]
fn row_sum(row: &[f32]) -> f32 {
    row.iter().fold(0.0, |acc, &x| acc + x)
}

/// `H0[u] = (deg(u) / max(1, Δ), u / max(1, n - 1))`.
pub fn initial_features(g: &CsrGraph) -> FeatureMatrix {
    let n = g.num_vertices();
    let mut data = vec![0.0; n * INPUT_FEATURES];
    fill_initial_features(g, &mut data);
    FeatureMatrix::from_vec(n, INPUT_FEATURES, data)
}

fn fill_initial_features(g: &CsrGraph, out: &mut [f32]) {
    let n = g.num_vertices();
    let max_deg = g.max_degree().max(1) as f32;
    let max_id = n.saturating_sub(1).max(1) as f32;
    for (u, row) in out.chunks_exact_mut(INPUT_FEATURES).enumerate() {
        row[0] = g.degree(u as u32) as f32 / max_deg;
        row[1] = u as f32 / max_id;
    }
}

/// One GraphSAGE layer, evaluated vertex by vertex:
/// `out[u] = act(concat(H[u], mean_{v in N(u)} H[v]) · W + b)`, with a zero
/// mean for isolated vertices. `act` is ReLU when `apply_activation`,
/// identity otherwise.
pub fn sage_layer(g: &CsrGraph, h: &FeatureMatrix, layer: &SageLayer, apply_activation: bool) -> FeatureMatrix {
    assert_eq!(h.cols, layer.d_in(), "feature width does not match layer");
    assert_eq!(h.rows, g.num_vertices(), "feature rows do not match graph");
    let (d_in, d_out) = (layer.d_in(), layer.d_out());
    let mut out = FeatureMatrix::zeros(h.rows, d_out);
    let mut concat = vec![0.0f32; 2 * d_in];
    for u in g.vertices() {
        let nbrs = g.neighbors(u);
        concat[..d_in].copy_from_slice(h.row(u as usize));
        let mean = &mut concat[d_in..];
        mean.fill(0.0);
        for &v in nbrs {
            for (m, &x) in mean.iter_mut().zip(h.row(v as usize)) {
                *m += x;
            }
        }
        if !nbrs.is_empty() {
            let deg = nbrs.len() as f32;
            mean.iter_mut().for_each(|m| *m /= deg);
        }
        let row = &mut out.data[u as usize * d_out..(u as usize + 1) * d_out];
        for (j, o) in row.iter_mut().enumerate() {
            let mut z = layer.bias()[j];
            for (k, &x) in concat.iter().enumerate() {
                z += x * layer.w(k, j);
            }
            *o = if apply_activation { z.max(0.0) } else { z };
        }
    }
    out
}

/// Ping-pong feature buffers kept across calls on graphs of similar size.
#[derive(Default)]
pub struct InferenceBuffers {
    current: Vec<f32>,
    next: Vec<f32>,
}

impl InferenceBuffers {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Final-layer features (ReLU on every layer but the last).
pub fn forward(g: &CsrGraph, model: &GnnModel, workers: usize) -> FeatureMatrix {
    let mut bufs = InferenceBuffers::new();
    run_layers(g, model, workers, &mut bufs);
    let n = g.num_vertices();
    bufs.current.truncate(n * HIDDEN);
    FeatureMatrix::from_vec(n, HIDDEN, bufs.current)
}

/// Priorities `p(u) = sum(H_L[u])`.
pub fn infer_priorities(g: &CsrGraph, model: &GnnModel, workers: usize) -> PriorityMap {
    infer_priorities_with(g, model, workers, &mut InferenceBuffers::new())
}

/// [`infer_priorities`] reusing caller-owned buffers.
pub fn infer_priorities_with(
    g: &CsrGraph,
    model: &GnnModel,
    workers: usize,
    bufs: &mut InferenceBuffers,
) -> PriorityMap {
    run_layers(g, model, workers, bufs);
    let n = g.num_vertices();
    let sums = &bufs.current[..n * HIDDEN];
    let values: Vec<f64> = if workers == 1 {
        sums.chunks_exact(HIDDEN).map(|r| row_sum(r) as f64).collect()
    } else {
        parallel::pool(workers).install(|| sums.par_chunks_exact(HIDDEN).map(|r| row_sum(r) as f64).collect())
    };
    // A finite model on finite features can still overflow f32; clamp so the
    // priority map stays total.
    let values = values
        .into_iter()
        .map(|p| {
            if p.is_nan() {
                0.0
            } else {
                p.clamp(f32::MIN as f64, f32::MAX as f64)
            }
        })
        .collect();
    PriorityMap::from_finite(values)
}

fn run_layers(g: &CsrGraph, model: &GnnModel, workers: usize, bufs: &mut InferenceBuffers) {
    let n = g.num_vertices();
    bufs.current.resize(n * INPUT_FEATURES, 0.0);
    fill_initial_features(g, &mut bufs.current[..n * INPUT_FEATURES]);
    let last = model.num_layers() - 1;
    for (l, layer) in model.layers().iter().enumerate() {
        bufs.next.resize(n * layer.d_out(), 0.0);
        let input = &bufs.current[..n * layer.d_in()];
        let output = &mut bufs.next[..n * layer.d_out()];
        let relu = l != last;
        if workers == 1 {
            for (ci, out) in output.chunks_mut(CHUNK * HIDDEN).enumerate() {
                layer_chunk(g, input, layer, relu, ci * CHUNK, out);
            }
        } else {
            parallel::pool(workers).install(|| {
                output
                    .par_chunks_mut(CHUNK * HIDDEN)
                    .enumerate()
                    .for_each(|(ci, out)| layer_chunk(g, input, layer, relu, ci * CHUNK, out));
            });
        }
        std::mem::swap(&mut bufs.current, &mut bufs.next);
    }
}

/// Evaluates rows `first..first + out.len() / 16` of one layer.
fn layer_chunk(g: &CsrGraph, input: &[f32], layer: &SageLayer, relu: bool, first: usize, out: &mut [f32]) {
    debug_assert_eq!(layer.d_out(), HIDDEN);
    let d_in = layer.d_in();
    let width = 2 * d_in;
    let mut gathered = [0.0f32; BLOCK * 2 * HIDDEN];
    let weight = layer.weight();
    let bias: [f32; HIDDEN] = layer.bias().try_into().expect("hidden width");

    for (bi, out_block) in out.chunks_mut(BLOCK * HIDDEN).enumerate() {
        let base = first + bi * BLOCK;
        let rows = out_block.len() / HIDDEN;

        for i in 0..rows {
            let u = base + i;
            let dst = &mut gathered[i * width..(i + 1) * width];
            dst[..d_in].copy_from_slice(&input[u * d_in..(u + 1) * d_in]);
            let mean = &mut dst[d_in..];
            mean.fill(0.0);
            let nbrs = g.neighbors(u as u32);
            for &v in nbrs {
                let src = &input[v as usize * d_in..(v as usize + 1) * d_in];
                for (m, &x) in mean.iter_mut().zip(src) {
                    *m += x;
                }
            }
            if !nbrs.is_empty() {
                let deg = nbrs.len() as f32;
                mean.iter_mut().for_each(|m| *m /= deg);
            }
        }

        for (i, dst) in out_block.chunks_exact_mut(HIDDEN).enumerate() {
            let x = &gathered[i * width..(i + 1) * width];
            let mut acc = bias;
            for (k, &xk) in x.iter().enumerate() {
                let w = &weight[k * HIDDEN..(k + 1) * HIDDEN];
                for j in 0..HIDDEN {
                    acc[j] += xk * w[j];
                }
            }
            if relu {
                acc.iter_mut().for_each(|a| *a = a.max(0.0));
            }
            dst.copy_from_slice(&acc);
        }
    }
}
