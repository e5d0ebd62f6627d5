//! Neuroevolution of trained models against the number of colors they
//! produce on a fixed graph set.

use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;

use crate::coloring::greedy_color;
use crate::error::{Error, Result};
use crate::gnn::{infer_priorities_with, GnnModel, InferenceBuffers};
use crate::graph::CsrGraph;
use crate::parallel;

/// Range of the fresh values crossover fills in.
const CROSSOVER_NOISE: f32 = 0.1;

/// Lower is better: total colors, then total size of the highest color
/// class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fitness {
    pub colors: usize,
    pub tiebreak: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub model: GnnModel,
    pub fitness: Fitness,
}

pub fn fitness(model: &GnnModel, graphs: &[CsrGraph]) -> Result<Fitness> {
    if graphs.is_empty() {
        return Err(Error::Config("fitness needs at least one graph".into()));
    }
    Ok(fitness_with(model, graphs, &mut InferenceBuffers::new()))
}

fn fitness_with(model: &GnnModel, graphs: &[CsrGraph], bufs: &mut InferenceBuffers) -> Fitness {
    let mut f = Fitness::default();
    for g in graphs {
        let col = greedy_color(g, &infer_priorities_with(g, model, 1, bufs));
        f.colors += col.num_colors();
        f.tiebreak += col.max_color_multiplicity();
    }
    f
}

fn normal(sigma: f32) -> Normal<f32> {
    Normal::new(0.0, sigma).expect("sigma is finite and nonnegative")
}

/// Adds `N(0, σ²)` to every parameter.
pub fn mutate_gaussian<R: Rng + ?Sized>(model: &GnnModel, sigma: f32, rng: &mut R) -> GnnModel {
    let noise = normal(sigma);
    let mut child = model.clone();
    for p in child.params_mut() {
        *p += noise.sample(rng);
    }
    child
}

/// Perturbs one output feature of one layer: its incoming weight column and
/// its bias.
pub fn mutate_node<R: Rng + ?Sized>(model: &GnnModel, sigma: f32, rng: &mut R) -> GnnModel {
    let noise = normal(sigma);
    let mut child = model.clone();
    let l = rng.random_range(0..child.num_layers());
    let layer = &mut child.layers_mut()[l];
    let (rows, d_out) = (2 * layer.d_in(), layer.d_out());
    let j = rng.random_range(0..d_out);
    for k in 0..rows {
        layer.weight_mut()[k * d_out + j] += noise.sample(rng);
    }
    layer.bias_mut()[j] += noise.sample(rng);
    child
}

/// Per layer, the half of positions with the largest `max(|a|, |b|)` take
/// the larger-magnitude parent's value (`a` on ties); the rest are drawn
/// uniformly from `[-0.1, 0.1]`.
pub fn crossover_significant<R: Rng + ?Sized>(a: &GnnModel, b: &GnnModel, rng: &mut R) -> GnnModel {
    assert_eq!(a.num_layers(), b.num_layers(), "crossover parents differ in depth");
    let mut child = a.clone();
    for ((cl, la), lb) in child.layers_mut().iter_mut().zip(a.layers()).zip(b.layers()) {
        let pa: Vec<f32> = la.params().copied().collect();
        let pb: Vec<f32> = lb.params().copied().collect();
        let mag = |i: usize| pa[i].abs().max(pb[i].abs());
        let mut rank: Vec<usize> = (0..pa.len()).collect();
        rank.sort_by(|&i, &j| mag(j).total_cmp(&mag(i)).then(i.cmp(&j)));
        let mut keep = vec![false; pa.len()];
        for &i in &rank[..pa.len().div_ceil(2)] {
            keep[i] = true;
        }
        for (i, p) in cl.params_mut().enumerate() {
            *p = if !keep[i] {
                rng.random_range(-CROSSOVER_NOISE..=CROSSOVER_NOISE)
            } else if pb[i].abs() > pa[i].abs() {
                pb[i]
            } else {
                pa[i]
            };
        }
    }
    child
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveConfig {
    pub population: usize,
    pub truncation: usize,
    pub generations: usize,
    pub seed: u64,
    /// Relative weights of Gaussian mutation, node mutation and crossover.
    pub operator_weights: [f64; 3],
    pub sigma: f32,
    pub workers: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            population: 100,
            truncation: 20,
            generations: 500,
            seed: 0,
            operator_weights: [0.4, 0.3, 0.3],
            sigma: 0.01,
            workers: 1,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.truncation < 1 || self.truncation > self.population {
            return Err(Error::Config(format!(
                "truncation size must be in 1..={}, got {}",
                self.population, self.truncation
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.workers == 0 {
            return Err(Error::Config("need at least one worker".into()));
        }
        WeightedIndex::new(self.operator_weights).map_err(|e| Error::Config(format!("operator weights: {e}")))?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerationRecord {
    /// 0 is the initial population.
    pub generation: usize,
    pub best_colors: usize,
    pub best_tiebreak: usize,
}

pub fn write_history<W: Write>(history: &[GenerationRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "generation,best_colors,best_tiebreak")?;
    for r in history {
        writeln!(out, "{},{},{}", r.generation, r.best_colors, r.best_tiebreak)?;
    }
    out.flush()
}

#[derive(Clone, Debug)]
pub struct EvolveOutcome {
    pub best: Individual,
    pub history: Vec<GenerationRecord>,
}

/// Builds a population of `size` from checkpoints: each checkpoint once as
/// is, then Gaussian-jittered copies of them in turn.
pub fn seed_population<R: Rng + ?Sized>(
    checkpoints: &[GnnModel],
    size: usize,
    sigma: f32,
    rng: &mut R,
) -> Result<Vec<GnnModel>> {
    if checkpoints.is_empty() {
        return Err(Error::Config("no checkpoints to seed from".into()));
    }
    check_same_depth(checkpoints)?;
    let mut pop: Vec<GnnModel> = checkpoints.iter().take(size).cloned().collect();
    let mut i = 0;
    while pop.len() < size {
        pop.push(mutate_gaussian(&checkpoints[i % checkpoints.len()], sigma, rng));
        i += 1;
    }
    Ok(pop)
}

fn check_same_depth(models: &[GnnModel]) -> Result<()> {
    let depth = models[0].num_layers();
    if let Some(m) = models.iter().find(|m| m.num_layers() != depth) {
        return Err(Error::Config(format!(
            "cannot mix {depth}-layer and {}-layer models in one population",
            m.num_layers()
        )));
    }
    Ok(())
}

fn evaluate_all(models: Vec<GnnModel>, graphs: &[CsrGraph], workers: usize) -> Vec<Individual> {
    let eval = |bufs: &mut InferenceBuffers, model: GnnModel| {
        let fitness = fitness_with(&model, graphs, bufs);
        Individual { model, fitness }
    };
    if workers == 1 {
        let mut bufs = InferenceBuffers::new();
        models.into_iter().map(|m| eval(&mut bufs, m)).collect()
    } else {
        parallel::pool(workers).install(|| models.into_par_iter().map_init(InferenceBuffers::new, eval).collect())
    }
}

pub fn evolve(initial: Vec<GnnModel>, graphs: &[CsrGraph], cfg: &EvolveConfig) -> Result<EvolveOutcome> {
    evolve_with(initial, graphs, cfg, |_, _| {})
}

/// Truncation selection with elitism. `on_generation` sees each
/// generation's record and champion, starting with generation 0.
pub fn evolve_with<F>(
    initial: Vec<GnnModel>,
    graphs: &[CsrGraph],
    cfg: &EvolveConfig,
    mut on_generation: F,
) -> Result<EvolveOutcome>
where
    F: FnMut(&GenerationRecord, &Individual),
{
    cfg.validate()?;
    if graphs.is_empty() {
        return Err(Error::Config("evolution needs at least one graph".into()));
    }
    if initial.len() != cfg.population {
        return Err(Error::Config(format!(
            "initial population has {} models, expected {}",
            initial.len(),
            cfg.population
        )));
    }
    check_same_depth(&initial)?;
    if initial.iter().any(|m| !m.is_finite()) {
        return Err(Error::Model("initial population contains non-finite parameters".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let operators = WeightedIndex::new(cfg.operator_weights).expect("validated");
    let mut pop = evaluate_all(initial, graphs, cfg.workers);
    // Stable sort: equal fitness keeps the earlier slot, so the elite stays first.
    pop.sort_by_key(|ind| ind.fitness);
    let mut history = Vec::with_capacity(cfg.generations + 1);
    let mut record = |generation: usize, champion: &Individual, history: &mut Vec<GenerationRecord>| {
        let r = GenerationRecord {
            generation,
            best_colors: champion.fitness.colors,
            best_tiebreak: champion.fitness.tiebreak,
        };
        on_generation(&r, champion);
        history.push(r);
    };
    record(0, &pop[0], &mut history);

    for generation in 1..=cfg.generations {
        let parents = &pop[..cfg.truncation];
        let mut children = Vec::with_capacity(cfg.population - 1);
        for _ in 1..cfg.population {
            let a = &parents[rng.random_range(0..parents.len())].model;
            let child = match operators.sample(&mut rng) {
                0 => mutate_gaussian(a, cfg.sigma, &mut rng),
                1 => mutate_node(a, cfg.sigma, &mut rng),
                _ => {
                    let b = &parents[rng.random_range(0..parents.len())].model;
                    crossover_significant(a, b, &mut rng)
                }
            };
            children.push(child);
        }
        let mut next = Vec::with_capacity(cfg.population);
        next.push(pop.swap_remove(0));
        next.extend(evaluate_all(children, graphs, cfg.workers));
        next.sort_by_key(|ind| ind.fitness);
        pop = next;
        record(generation, &pop[0], &mut history);
    }
    let best = pop.swap_remove(0);
    Ok(EvolveOutcome { best, history })
}
