use num_traits::Float;

use super::backprop::sigmoid;
use crate::gnn::{infer_priorities, GnnModel};
use crate::graph::{CsrGraph, Vertex};

/// Predictions are clamped to `[BCE_EPS, 1 - BCE_EPS]` before taking logs.
pub const BCE_EPS: f64 = 1e-7;

/// Mean binary cross-entropy.
pub fn bce_loss<T: Float>(predictions: &[T], labels: &[bool]) -> T {
    assert_eq!(predictions.len(), labels.len(), "prediction/label length mismatch");
    if predictions.is_empty() {
        return T::zero();
    }
    let eps = T::from(BCE_EPS).unwrap();
    let total = predictions.iter().zip(labels).fold(T::zero(), |acc, (&p, &y)| {
        let p = p.max(eps).min(T::one() - eps);
        acc - if y { p.ln() } else { (T::one() - p).ln() }
    });
    total / T::from(predictions.len()).unwrap()
}

/// Confusion counts for the positive class at threshold 0.5 (exactly 0.5
/// counts as negative).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn add<T: Float>(&mut self, predictions: &[T], labels: &[bool]) {
        assert_eq!(predictions.len(), labels.len(), "prediction/label length mismatch");
        let half = T::from(0.5).unwrap();
        for (&p, &y) in predictions.iter().zip(labels) {
            match (p > half, y) {
                (true, true) => self.tp += 1,
                (true, false) => self.fp += 1,
                (false, true) => self.fn_ += 1,
                (false, false) => {}
            }
        }
    }

    /// `2PR / (P + R)`, or 0 when undefined.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if self.tp == 0 || denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

pub fn f1_score<T: Float>(predictions: &[T], labels: &[bool]) -> f64 {
    let mut c = Confusion::default();
    c.add(predictions, labels);
    c.f1()
}

/// Probability that `u` is colored before its neighbor `v`.
pub fn predict_edge(model: &GnnModel, g: &CsrGraph, u: Vertex, v: Vertex) -> f64 {
    debug_assert!(g.has_edge(u, v), "predict_edge on non-adjacent pair");
    let pm = infer_priorities(g, model, 1);
    sigmoid(pm.get(u) - pm.get(v))
}
