//! Test oracles and graph strategies shared by the integration tests.
#![allow(dead_code)]

use gnncolor::gnn::GnnModel;
use gnncolor::train::{loss_and_gradient, make_labels, LabelSource};
use gnncolor::{CsrGraph, Vertex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Graphs with up to `max_n` vertices and density drawn per case.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = CsrGraph> {
    (1..=max_n, 0.0f64..1.0).prop_flat_map(|(n, density)| {
        let max_edges = n * (n - 1) / 2;
        let m = (max_edges as f64 * density * density) as usize;
        proptest::collection::vec((0..n as Vertex, 0..n as Vertex), m..=m)
            .prop_map(move |edges| CsrGraph::from_edges(n, edges))
    })
}

pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> CsrGraph {
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

/// Degeneracy by removing one minimum-degree vertex at a time.
pub fn degeneracy(g: &CsrGraph) -> usize {
    let n = g.num_vertices();
    let mut removed = vec![false; n];
    let mut deg: Vec<usize> = g.vertices().map(|u| g.degree(u)).collect();
    let mut best = 0;
    for _ in 0..n {
        let u = (0..n).filter(|&u| !removed[u]).min_by_key(|&u| deg[u]).unwrap();
        best = best.max(deg[u]);
        removed[u] = true;
        for &v in g.neighbors(u as Vertex) {
            if !removed[v as usize] {
                deg[v as usize] -= 1;
            }
        }
    }
    best
}

/// Exhaustive optimal coloring by backtracking on vertex 0..n order.
pub fn optimal_coloring(g: &CsrGraph) -> Vec<u32> {
    let n = g.num_vertices();
    for k in 1..=n.max(1) as u32 {
        let mut colors = vec![u32::MAX; n];
        if try_color(g, 0, k, &mut colors) {
            return colors;
        }
    }
    Vec::new()
}

fn try_color(g: &CsrGraph, u: usize, k: u32, colors: &mut [u32]) -> bool {
    if u == colors.len() {
        return true;
    }
    for c in 0..k {
        if g.neighbors(u as Vertex).iter().all(|&v| colors[v as usize] != c) {
            colors[u] = c;
            if try_color(g, u + 1, k, colors) {
                return true;
            }
        }
    }
    colors[u] = u32::MAX;
    false
}

pub fn is_connected(g: &CsrGraph) -> bool {
    let n = g.num_vertices();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0 as Vertex];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in g.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Straightforward proper-coloring check, independent of the library's.
pub fn is_proper(g: &CsrGraph, colors: &[u32]) -> bool {
    g.edges().all(|(u, v)| colors[u as usize] != colors[v as usize])
}

/// Finite-difference step.
pub const FD_STEP: f64 = 1e-3;
pub const GRAD_REL_TOL: f64 = 1e-3;

/// Mean clamped BCE over directed edges, written from scratch.
pub fn reference_loss(g: &CsrGraph, model: &GnnModel<f64>, labels: &[bool]) -> f64 {
    reference(g, model, labels).0
}

/// Loss plus the on/off pattern of every hidden ReLU.
fn reference(g: &CsrGraph, model: &GnnModel<f64>, labels: &[bool]) -> (f64, Vec<bool>) {
    let mut pattern = Vec::new();
    let n = g.num_vertices();
    let max_deg = g.max_degree().max(1) as f64;
    let max_id = (n.max(2) - 1) as f64;
    let mut h: Vec<Vec<f64>> = (0..n)
        .map(|u| vec![g.degree(u as u32) as f64 / max_deg, u as f64 / max_id])
        .collect();
    let last = model.num_layers() - 1;
    for (l, layer) in model.layers().iter().enumerate() {
        let mut next = Vec::with_capacity(n);
        for u in 0..n {
            let nbrs = g.neighbors(u as u32);
            let mut x = h[u].clone();
            let mut mean = vec![0.0; layer.d_in()];
            for &v in nbrs {
                for (m, hv) in mean.iter_mut().zip(&h[v as usize]) {
                    *m += hv;
                }
            }
            if !nbrs.is_empty() {
                mean.iter_mut().for_each(|m| *m /= nbrs.len() as f64);
            }
            x.extend(mean);
            let out: Vec<f64> = (0..layer.d_out())
                .map(|j| {
                    let z = layer.bias()[j] + x.iter().enumerate().map(|(k, xk)| xk * layer.w(k, j)).sum::<f64>();
                    if l == last {
                        z
                    } else {
                        pattern.push(z > 0.0);
                        z.max(0.0)
                    }
                })
                .collect();
            next.push(out);
        }
        h = next;
    }
    let p: Vec<f64> = h.iter().map(|row| row.iter().sum()).collect();
    let mut loss = 0.0;
    let mut e = 0;
    for u in g.vertices() {
        for &v in g.neighbors(u) {
            let y_hat = (1.0 / (1.0 + (-(p[u as usize] - p[v as usize])).exp())).clamp(1e-7, 1.0 - 1e-7);
            loss -= if labels[e] { y_hat.ln() } else { (1.0 - y_hat).ln() };
            e += 1;
        }
    }
    (loss / e as f64, pattern)
}

pub fn six_vertex_graph() -> CsrGraph {
    CsrGraph::from_edges(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5), (1, 4)])
}

fn test_model(layers: usize, seed: u64) -> GnnModel<f32> {
    let mut model = GnnModel::init(layers, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    for (i, b) in model
        .layers_mut()
        .iter_mut()
        .flat_map(|l| l.bias_mut().iter_mut())
        .enumerate()
    {
        *b = 0.05 * ((i % 5) as f32 - 2.0);
    }
    model
}

/// Central differences are only meaningful when no hidden ReLU switches
/// inside `[θ - h, θ + h]`.
fn kink_free(g: &CsrGraph, model: &GnnModel<f64>, labels: &[bool]) -> bool {
    let base = reference(g, model, labels).1;
    (0..model.num_params()).all(|i| {
        [FD_STEP, -FD_STEP].iter().all(|&step| {
            let mut m = model.clone();
            *m.params_mut().nth(i).unwrap() += step;
            reference(g, &m, labels).1 == base
        })
    })
}

/// Worst relative disagreement between analytic and central-difference
/// gradients, over every parameter of a `layers`-deep model.
pub fn gradient_check(layers: usize, seed: u64, source: LabelSource) -> f64 {
    let g = six_vertex_graph();
    let labels = make_labels(&g, source);
    let (model32, model) = (seed..seed + 1000)
        .map(|s| test_model(layers, s))
        .map(|m| {
            let m64 = m.cast::<f64>();
            (m, m64)
        })
        .find(|(_, m)| kink_free(&g, m, labels.as_slice()))
        .expect("some seed gives a kink-free model");
    let (loss, grad) = loss_and_gradient(&g, &model, labels.as_slice());
    assert!((loss - reference_loss(&g, &model, labels.as_slice())).abs() < 1e-12);

    let analytic: Vec<f64> = grad.params().copied().collect();
    let mut worst = 0.0f64;
    for (i, &a) in analytic.iter().enumerate() {
        let mut plus = model.clone();
        let mut minus = model.clone();
        *plus.params_mut().nth(i).unwrap() += FD_STEP;
        *minus.params_mut().nth(i).unwrap() -= FD_STEP;
        let fd = (reference_loss(&g, &plus, labels.as_slice()) - reference_loss(&g, &minus, labels.as_slice()))
            / (2.0 * FD_STEP);
        let scale = a.abs().max(fd.abs());
        let err = (a - fd).abs();
        // Parameters with vanishing gradients are compared absolutely.
        let rel = if scale > 1e-6 { err / scale } else { err };
        worst = worst.max(rel);
    }

    // Single precision lands on the same gradient.
    let (loss32, grad32) = loss_and_gradient(&g, &model32, labels.as_slice());
    assert!((loss32 as f64 - loss).abs() < 1e-5);
    for (a32, a) in grad32.params().zip(&analytic) {
        assert!((*a32 as f64 - a).abs() <= 1e-4 * a.abs().max(1e-2));
    }
    worst
}
