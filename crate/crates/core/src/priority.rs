use std::cmp::Ordering;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::Vertex;

/// One finite priority per vertex. Higher priority is colored first; equal
/// priorities fall back to the lower vertex ID.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorityMap {
    values: Vec<f64>,
}

impl PriorityMap {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(u) = values.iter().position(|p| !p.is_finite()) {
            return Err(Error::Priority(format!("priority of vertex {u} is {}", values[u])));
        }
        Ok(PriorityMap { values })
    }

    /// Callers guarantee every value is finite.
    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|p| p.is_finite()));
        PriorityMap { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: Vertex) -> f64 {
        self.values[u as usize]
    }

    /// True iff `u` is processed before `v`.
    #[inline]
    pub fn precedes(&self, u: Vertex, v: Vertex) -> bool {
        let (pu, pv) = (self.get(u), self.get(v));
        pu > pv || (pu == pv && u < v)
    }

    /// Total order consistent with [`precedes`](Self::precedes).
    pub fn compare(&self, u: Vertex, v: Vertex) -> Ordering {
        self.get(v)
            .partial_cmp(&self.get(u))
            .expect("priorities are finite")
            .then(u.cmp(&v))
    }

    /// Vertices sorted into processing order.
    pub fn order(&self) -> Vec<Vertex> {
        let mut order: Vec<Vertex> = (0..self.values.len() as Vertex).collect();
        order.sort_unstable_by(|&u, &v| self.compare(u, v));
        order
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# priorities {}", self.values.len())?;
        for p in &self.values {
            writeln!(out, "{p}")?;
        }
        out.flush()
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let n = match lines.next() {
            Some((_, line)) => {
                let line = line?;
                line.strip_prefix("# priorities ")
                    .and_then(|s| s.trim().parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(1, "expected `# priorities <n>` header"))?
            }
            None => return Err(Error::parse(1, "empty priority file")),
        };
        let mut values = Vec::with_capacity(n);
        for (idx, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let p = line
                .parse::<f64>()
                .map_err(|_| Error::parse(idx + 1, format!("malformed priority {line:?}")))?;
            values.push(p);
        }
        if values.len() != n {
            return Err(Error::Format(format!(
                "header declares {n} priorities, found {}",
                values.len()
            )));
        }
        PriorityMap::new(values)
    }
}
