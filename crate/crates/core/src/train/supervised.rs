use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::backprop::{edge_probabilities, forward_cached, loss_and_gradient};
use super::labels::{make_labels, EdgeLabelSet, LabelSource};
use super::metrics::Confusion;
use crate::coloring::greedy_color;
use crate::error::{Error, Result};
use crate::gnn::{infer_priorities, GnnModel, MAX_LAYERS, MIN_LAYERS};
use crate::graph::CsrGraph;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
    pub seed: u64,
    pub labels: LabelSource,
    pub layers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 0,
            labels: LabelSource::Sl,
            layers: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |b: f32| b > 0.0 && b < 1.0;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if !unit(self.beta1) || !unit(self.beta2) {
            return Err(Error::Config(format!(
                "Adam betas must lie in (0, 1), got {} and {}",
                self.beta1, self.beta2
            )));
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::Config(format!(
                "Adam epsilon must be positive, got {}",
                self.eps
            )));
        }
        if !(MIN_LAYERS..=MAX_LAYERS).contains(&self.layers) {
            return Err(Error::Config(format!(
                "layer count must be in {MIN_LAYERS}..={MAX_LAYERS}, got {}",
                self.layers
            )));
        }
        Ok(())
    }
}

/// Seeded Glorot initialization for `cfg.layers` layers.
pub fn parameter_init(cfg: &TrainConfig) -> Result<GnnModel> {
    cfg.validate()?;
    GnnModel::init(cfg.layers, &mut ChaCha8Rng::seed_from_u64(cfg.seed))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    /// Mean training loss over the epoch's mini-batches, before each step.
    pub loss: f32,
    /// F1 over all directed edges of the evaluation graphs.
    pub f1: f64,
    /// Total greedy colors over the evaluation graphs.
    pub holdout_colors: usize,
}

pub fn write_history<W: Write>(history: &[EpochMetrics], mut out: W) -> std::io::Result<()> {
    writeln!(out, "epoch,loss,f1,holdout_colors")?;
    for m in history {
        writeln!(out, "{},{},{},{}", m.epoch, m.loss, m.f1, m.holdout_colors)?;
    }
    out.flush()
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: GnnModel,
    pub history: Vec<EpochMetrics>,
}

/// Graphs with their labels precomputed once.
pub struct LabeledGraph<'a> {
    pub graph: &'a CsrGraph,
    pub labels: EdgeLabelSet,
}

pub fn label_all(graphs: &[CsrGraph], source: LabelSource) -> Vec<LabeledGraph<'_>> {
    graphs
        .iter()
        .map(|g| LabeledGraph {
            graph: g,
            labels: make_labels(g, source),
        })
        .collect()
}

/// Edge F1 and total greedy colors of `model` on `eval`.
pub fn evaluate(model: &GnnModel, eval: &[LabeledGraph<'_>]) -> (f64, usize) {
    let mut confusion = Confusion::default();
    let mut colors = 0;
    for lg in eval {
        let cache = forward_cached(lg.graph, model);
        confusion.add(&edge_probabilities(lg.graph, cache.priorities()), lg.labels.as_slice());
        let pm = infer_priorities(lg.graph, model, 1);
        colors += greedy_color(lg.graph, &pm).num_colors();
    }
    (confusion.f1(), colors)
}

pub fn train_supervised(train: &[CsrGraph], holdout: &[CsrGraph], cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_supervised_with(train, holdout, cfg, |_, _| {})
}

/// One Adam step per training graph per epoch, graphs visited in a seeded
/// shuffled order. Metrics are taken on `holdout`, or on `train` when
/// `holdout` is empty. `on_epoch` sees each epoch's metrics and model.
pub fn train_supervised_with<F>(
    train: &[CsrGraph],
    holdout: &[CsrGraph],
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpochMetrics, &GnnModel),
{
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Config("no training graphs".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = GnnModel::init(cfg.layers, &mut rng)?;
    let mut adam = Adam::new(model.num_params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

    let train_set = label_all(train, cfg.labels);
    let holdout_set = label_all(holdout, cfg.labels);
    let eval = if holdout_set.is_empty() {
        &train_set
    } else {
        &holdout_set
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        for &gi in &order {
            let lg = &train_set[gi];
            let (loss, grad) = loss_and_gradient(lg.graph, &model, lg.labels.as_slice());
            if !loss.is_finite() || !grad.is_finite() {
                return Err(Error::Diverged {
                    seed: cfg.seed,
                    epoch,
                    graph: gi,
                    loss,
                });
            }
            loss_sum += loss as f64;
            adam.update(&mut model, &grad);
        }
        let (f1, holdout_colors) = evaluate(&model, eval);
        let metrics = EpochMetrics {
            epoch,
            loss: (loss_sum / train.len() as f64) as f32,
            f1,
            holdout_colors,
        };
        on_epoch(&metrics, &model);
        history.push(metrics);
    }
    Ok(TrainOutcome { model, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_graphs() -> Vec<CsrGraph> {
        vec![
            CsrGraph::from_edges(5, (1..5).map(|i| (0, i))),
            CsrGraph::from_edges(6, (1..6).map(|i| (i - 1, i))),
            CsrGraph::from_edges(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (1, 4)]),
        ]
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = [
            TrainConfig {
                lr: 0.0,
                ..Default::default()
            },
            TrainConfig {
                beta1: 1.0,
                ..Default::default()
            },
            TrainConfig {
                beta2: 0.0,
                ..Default::default()
            },
            TrainConfig {
                layers: 5,
                ..Default::default()
            },
            TrainConfig {
                layers: 1,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn parameter_init_is_seeded() {
        let cfg = TrainConfig {
            seed: 42,
            layers: 3,
            ..Default::default()
        };
        let a = parameter_init(&cfg).unwrap();
        assert_eq!(a, parameter_init(&cfg).unwrap());
        for layer in a.layers() {
            assert!(layer.bias().iter().all(|&b| b == 0.0));
            let bound = (6.0 / (2 * layer.d_in() + layer.d_out()) as f32).sqrt();
            assert!(layer.weight().iter().all(|w| w.abs() <= bound));
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let cfg = TrainConfig {
            epochs: 0,
            seed: 3,
            ..Default::default()
        };
        let out = train_supervised(&small_graphs(), &[], &cfg).unwrap();
        assert!(out.history.is_empty());
        assert_eq!(out.model, parameter_init(&cfg).unwrap());
    }

    #[test]
    fn one_step_reduces_loss_on_same_graph() {
        let g = &small_graphs()[0];
        let labels = make_labels(g, LabelSource::Sl);
        let mut model = parameter_init(&TrainConfig {
            seed: 11,
            ..Default::default()
        })
        .unwrap();
        let (before, grad) = loss_and_gradient(g, &model, labels.as_slice());
        Adam::new(model.num_params(), 1e-3, 0.9, 0.999, 1e-8).update(&mut model, &grad);
        let (after, _) = loss_and_gradient(g, &model, labels.as_slice());
        assert!(after < before, "{after} >= {before}");
    }

    #[test]
    fn history_is_deterministic() {
        let cfg = TrainConfig {
            epochs: 5,
            seed: 7,
            ..Default::default()
        };
        let a = train_supervised(&small_graphs(), &[], &cfg).unwrap();
        let b = train_supervised(&small_graphs(), &[], &cfg).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.model, b.model);
        assert_eq!(a.history.len(), 5);
        let mut csv = Vec::new();
        write_history(&a.history, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("epoch,loss,f1,holdout_colors\n1,"));
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn empty_training_set_is_rejected() {
        assert!(train_supervised(&[], &[], &TrainConfig::default()).is_err());
    }
}
