use std::fmt;
use std::str::FromStr;

use crate::graph::{CsrGraph, Vertex};
use crate::ordering::{order_lf, order_sd_rounds, order_sl};
use crate::priority::PriorityMap;

/// Heuristic whose priorities become the supervised target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LabelSource {
    /// Round-based smallest degree last.
    #[default]
    Sl,
    /// Round-based saturation degree.
    Sd,
    /// Largest degree first with its ID tie-break, so no edge ties.
    Lf,
}

impl LabelSource {
    pub fn priorities(self, g: &CsrGraph) -> PriorityMap {
        match self {
            LabelSource::Sl => order_sl(g),
            LabelSource::Sd => order_sd_rounds(g),
            LabelSource::Lf => order_lf(g),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LabelSource::Sl => "sl",
            LabelSource::Sd => "sd",
            LabelSource::Lf => "lf",
        }
    }
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabelSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sl" => Ok(LabelSource::Sl),
            "sd" => Ok(LabelSource::Sd),
            "lf" => Ok(LabelSource::Lf),
            _ => Err(format!("unknown label source {s:?}")),
        }
    }
}

/// One label per directed edge, indexed like the graph's `col_indices`:
/// edge `e` in `u`'s range is `(u, col_indices[e])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLabelSet {
    labels: Vec<bool>,
}

impl EdgeLabelSet {
    /// `L(u, v) = 1` iff `P(u) > P(v)` strictly. Ties label both directions 0.
    pub fn from_priorities(g: &CsrGraph, pm: &PriorityMap) -> Self {
        let mut labels = Vec::with_capacity(g.col_indices().len());
        for u in g.vertices() {
            labels.extend(g.neighbors(u).iter().map(|&v| pm.get(u) > pm.get(v)));
        }
        EdgeLabelSet { labels }
    }

    /// `L(u, v) = 1` iff `u` precedes `v`, ID tie-break included.
    pub fn from_order(g: &CsrGraph, pm: &PriorityMap) -> Self {
        let mut labels = Vec::with_capacity(g.col_indices().len());
        for u in g.vertices() {
            labels.extend(g.neighbors(u).iter().map(|&v| pm.precedes(u, v)));
        }
        EdgeLabelSet { labels }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Label of directed edge `(u, v)`; `None` if not adjacent.
    pub fn label(&self, g: &CsrGraph, u: Vertex, v: Vertex) -> Option<bool> {
        let offset = g.neighbors(u).binary_search(&v).ok()?;
        Some(self.labels[g.edge_range(u).start + offset])
    }
}

/// SL and SD label by strict priority, so round-mates tie at 0/0. LF uses
/// its total order.
pub fn make_labels(g: &CsrGraph, source: LabelSource) -> EdgeLabelSet {
    let pm = source.priorities(g);
    match source {
        LabelSource::Lf => EdgeLabelSet::from_order(g, &pm),
        LabelSource::Sl | LabelSource::Sd => EdgeLabelSet::from_priorities(g, &pm),
    }
}
