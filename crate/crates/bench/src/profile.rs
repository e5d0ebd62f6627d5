//! Performance profiles over color counts: for each heuristic and each `k`,
//! the fraction of instances it colors with at most `k` more colors than
//! the best heuristic on that instance.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::records::RunRecord;
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub heuristics: Vec<String>,
    /// `fractions[k][h]`.
    pub fractions: Vec<Vec<f64>>,
}

/// Builds the profile up to `max_k`, or up to the largest observed gap.
/// Each (instance, heuristic) pair uses its best repetition.
pub fn performance_profile(records: &[RunRecord], max_k: Option<usize>) -> Result<Profile, CliError> {
    let mut best: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for r in records {
        let slot = best
            .entry(&r.heuristic)
            .or_default()
            .entry(&r.instance)
            .or_insert(r.colors);
        *slot = (*slot).min(r.colors);
    }
    if best.is_empty() {
        return Err(CliError::Invalid("no run records".into()));
    }
    let instances: BTreeSet<&str> = best.values().next().unwrap().keys().copied().collect();
    for (h, per) in &best {
        if !per.keys().copied().eq(instances.iter().copied()) {
            return Err(CliError::Invalid(format!(
                "heuristic {h} covers a different instance set"
            )));
        }
    }
    let winner: BTreeMap<&str, usize> = instances
        .iter()
        .map(|&i| (i, best.values().map(|per| per[i]).min().unwrap()))
        .collect();
    let gaps: Vec<Vec<usize>> = best
        .values()
        .map(|per| instances.iter().map(|&i| per[i] - winner[i]).collect())
        .collect();
    let max_gap = gaps.iter().flatten().copied().max().unwrap_or(0);
    let k_max = max_k.unwrap_or(max_gap);
    let total = instances.len() as f64;
    let fractions = (0..=k_max)
        .map(|k| {
            gaps.iter()
                .map(|g| g.iter().filter(|&&d| d <= k).count() as f64 / total)
                .collect()
        })
        .collect();
    Ok(Profile {
        heuristics: best.keys().map(|h| h.to_string()).collect(),
        fractions,
    })
}

impl Profile {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,{}", self.heuristics.join(","))?;
        for (k, row) in self.fractions.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|f| format!("{f}")).collect();
            writeln!(out, "{k},{}", cells.join(","))?;
        }
        out.flush()
    }
}
