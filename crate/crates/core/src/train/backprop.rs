//! Reverse-mode gradients of the edge classification loss.
//!
//! Generic over the float type so the same code runs in `f32` for training
//! and in `f64` when checked against finite differences.

use num_traits::Float;

use super::metrics::BCE_EPS;
use crate::gnn::{GnnModel, SageLayer, INPUT_FEATURES};
use crate::graph::CsrGraph;

/// Per-layer activations kept for the backward pass.
struct LayerCache<T> {
    /// `n x 2*d_in`: own features followed by the neighbor mean.
    concat: Vec<T>,
    /// `n x d_out`, before the activation.
    pre: Vec<T>,
}

/// Everything the backward pass needs from one forward evaluation.
pub struct ForwardCache<T> {
    caches: Vec<LayerCache<T>>,
    priorities: Vec<T>,
}

impl<T: Float> ForwardCache<T> {
    /// `p(u) = sum(H_L[u])`.
    pub fn priorities(&self) -> &[T] {
        &self.priorities
    }
}

pub fn initial_features_t<T: Float>(g: &CsrGraph) -> Vec<T> {
    let n = g.num_vertices();
    let max_deg = T::from(g.max_degree().max(1)).unwrap();
    let max_id = T::from(n.saturating_sub(1).max(1)).unwrap();
    let mut h = Vec::with_capacity(n * INPUT_FEATURES);
    for u in g.vertices() {
        h.push(T::from(g.degree(u)).unwrap() / max_deg);
        h.push(T::from(u).unwrap() / max_id);
    }
    h
}

fn layer_forward<T: Float>(g: &CsrGraph, h: &[T], layer: &SageLayer<T>) -> LayerCache<T> {
    let n = g.num_vertices();
    let (d_in, d_out) = (layer.d_in(), layer.d_out());
    let mut concat = vec![T::zero(); n * 2 * d_in];
    let mut pre = vec![T::zero(); n * d_out];
    for u in g.vertices() {
        let u_idx = u as usize;
        let c = &mut concat[u_idx * 2 * d_in..(u_idx + 1) * 2 * d_in];
        c[..d_in].copy_from_slice(&h[u_idx * d_in..(u_idx + 1) * d_in]);
        let nbrs = g.neighbors(u);
        for &v in nbrs {
            let hv = &h[v as usize * d_in..(v as usize + 1) * d_in];
            for (m, &x) in c[d_in..].iter_mut().zip(hv) {
                *m = *m + x;
            }
        }
        if !nbrs.is_empty() {
            let deg = T::from(nbrs.len()).unwrap();
            c[d_in..].iter_mut().for_each(|m| *m = *m / deg);
        }
        let z = &mut pre[u_idx * d_out..(u_idx + 1) * d_out];
        for (j, zj) in z.iter_mut().enumerate() {
            let mut acc = layer.bias()[j];
            for (k, &x) in c.iter().enumerate() {
                acc = acc + x * layer.w(k, j);
            }
            *zj = acc;
        }
    }
    LayerCache { concat, pre }
}

/// Runs the model and keeps what the backward pass needs. Matches
/// [`crate::gnn::sage_layer`] arithmetic for `T = f32`.
pub fn forward_cached<T: Float>(g: &CsrGraph, model: &GnnModel<T>) -> ForwardCache<T> {
    let mut h = initial_features_t::<T>(g);
    let last = model.num_layers() - 1;
    let mut caches = Vec::with_capacity(model.num_layers());
    for (l, layer) in model.layers().iter().enumerate() {
        let cache = layer_forward(g, &h, layer);
        h = if l == last {
            cache.pre.clone()
        } else {
            cache.pre.iter().map(|&z| z.max(T::zero())).collect()
        };
        caches.push(cache);
    }
    let d_out = model.layers()[last].d_out();
    let priorities = h
        .chunks_exact(d_out)
        .map(|row| row.iter().fold(T::zero(), |a, &x| a + x))
        .collect();
    ForwardCache { caches, priorities }
}

/// `σ(p(u) - p(v))` for every directed edge, in `col_indices` order.
pub fn edge_probabilities<T: Float>(g: &CsrGraph, priorities: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(g.col_indices().len());
    for u in g.vertices() {
        let pu = priorities[u as usize];
        out.extend(g.neighbors(u).iter().map(|&v| sigmoid(pu - priorities[v as usize])));
    }
    out
}

pub(crate) fn sigmoid<T: Float>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Mean binary cross-entropy over all directed edges and its gradient with
/// respect to every model parameter, returned as a model-shaped value.
///
/// Clamped predictions contribute zero gradient. ReLU has derivative 0 at 0.
pub fn loss_and_gradient<T: Float>(g: &CsrGraph, model: &GnnModel<T>, labels: &[bool]) -> (T, GnnModel<T>) {
    let cache = forward_cached(g, model);
    let mut grad = GnnModel::<T>::zeros(model.num_layers()).expect("model has a valid layer count");
    let edges = labels.len();
    assert_eq!(edges, g.col_indices().len(), "one label per directed edge");
    if edges == 0 {
        return (T::zero(), grad);
    }

    let eps = T::from(BCE_EPS).unwrap();
    let inv_edges = T::one() / T::from(edges).unwrap();
    let n = g.num_vertices();
    let mut loss = T::zero();
    let mut d_prio = vec![T::zero(); n];
    let p = &cache.priorities;
    let mut e = 0;
    for u in g.vertices() {
        for &v in g.neighbors(u) {
            let y_hat = sigmoid(p[u as usize] - p[v as usize]);
            let clamped = y_hat.max(eps).min(T::one() - eps);
            let y = if labels[e] { T::one() } else { T::zero() };
            loss = loss - (y * clamped.ln() + (T::one() - y) * (T::one() - clamped).ln());
            if clamped == y_hat {
                // d/ds of BCE(σ(s)) is σ(s) - y.
                let ds = (y_hat - y) * inv_edges;
                d_prio[u as usize] = d_prio[u as usize] + ds;
                d_prio[v as usize] = d_prio[v as usize] - ds;
            }
            e += 1;
        }
    }
    loss = loss * inv_edges;

    let last = model.num_layers() - 1;
    let d_last = model.layers()[last].d_out();
    // Gradient w.r.t. the current layer's output H_{l+1}.
    let mut d_h: Vec<T> = d_prio.iter().flat_map(|&d| std::iter::repeat_n(d, d_last)).collect();
    for l in (0..=last).rev() {
        let layer = &model.layers()[l];
        let lc = &cache.caches[l];
        let (d_in, d_out) = (layer.d_in(), layer.d_out());
        let mut d_z = d_h;
        if l != last {
            for (dz, &z) in d_z.iter_mut().zip(&lc.pre) {
                if z <= T::zero() {
                    *dz = T::zero();
                }
            }
        }
        let gl = &mut grad.layers_mut()[l];
        for u in 0..n {
            let dz = &d_z[u * d_out..(u + 1) * d_out];
            let c = &lc.concat[u * 2 * d_in..(u + 1) * 2 * d_in];
            for (k, &ck) in c.iter().enumerate() {
                let row = &mut gl.weight_mut()[k * d_out..(k + 1) * d_out];
                for (w, &d) in row.iter_mut().zip(dz) {
                    *w = *w + ck * d;
                }
            }
            for (b, &d) in gl.bias_mut().iter_mut().zip(dz) {
                *b = *b + d;
            }
        }
        if l == 0 {
            break;
        }
        // Back through the concat: own part to u, mean part split over N(u).
        let mut d_prev = vec![T::zero(); n * d_in];
        let mut d_c = vec![T::zero(); 2 * d_in];
        for u in g.vertices() {
            let u_idx = u as usize;
            let dz = &d_z[u_idx * d_out..(u_idx + 1) * d_out];
            for (k, dc) in d_c.iter_mut().enumerate() {
                *dc = dz
                    .iter()
                    .enumerate()
                    .fold(T::zero(), |a, (j, &d)| a + layer.w(k, j) * d);
            }
            for (dst, &src) in d_prev[u_idx * d_in..(u_idx + 1) * d_in].iter_mut().zip(&d_c[..d_in]) {
                *dst = *dst + src;
            }
            let nbrs = g.neighbors(u);
            if nbrs.is_empty() {
                continue;
            }
            let inv_deg = T::one() / T::from(nbrs.len()).unwrap();
            for &v in nbrs {
                let row = &mut d_prev[v as usize * d_in..(v as usize + 1) * d_in];
                for (dst, &src) in row.iter_mut().zip(&d_c[d_in..]) {
                    *dst = *dst + src * inv_deg;
                }
            }
        }
        d_h = d_prev;
    }
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{forward, infer_priorities};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_graph() -> CsrGraph {
        CsrGraph::from_edges(7, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (1, 5)])
    }

    #[test]
    fn cached_forward_matches_inference() {
        let g = sample_graph();
        let model = GnnModel::init(3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let cache = forward_cached(&g, &model);
        let sums = forward(&g, &model, 1).row_sums();
        assert_eq!(cache.priorities(), &sums[..]);
        let pm = infer_priorities(&g, &model, 1);
        for (u, &p) in cache.priorities().iter().enumerate() {
            assert_eq!(pm.get(u as u32), p as f64);
        }
    }

    #[test]
    fn zero_model_is_stationary() {
        let g = sample_graph();
        let labels = vec![true; g.col_indices().len()];
        let (loss, grad) = loss_and_gradient(&g, &GnnModel::<f32>::zeros(2).unwrap(), &labels);
        assert!((loss - std::f32::consts::LN_2).abs() < 1e-6);
        assert!(grad.params().all(|&x| x == 0.0));
    }

    #[test]
    fn edgeless_graph_has_zero_loss() {
        let g = CsrGraph::from_edges(3, []);
        let model = GnnModel::init(2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let (loss, grad) = loss_and_gradient(&g, &model, &[]);
        assert_eq!(loss, 0.0);
        assert!(grad.params().all(|&x| x == 0.0));
    }

    #[test]
    fn sigmoid_is_symmetric() {
        for x in [-30.0f32, -2.5, 0.0, 0.1, 7.0, 50.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-6);
        }
        assert_eq!(sigmoid(0.0f64), 0.5);
    }
}
