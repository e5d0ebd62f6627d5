use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use gnncolor::gnn::{infer_priorities, GnnModel};
use gnncolor::{culberson_recolor, greedy_color, jp_color, validate, Coloring, CsrGraph, Heuristic, PriorityMap};

use crate::records::RunRecord;
use crate::CliError;

/// What produces the priorities for a run.
#[derive(Clone, Debug)]
pub enum HeuristicSpec {
    Classic(Heuristic),
    /// Learned model loaded from a weight file.
    Gnn {
        path: PathBuf,
        model: GnnModel,
    },
    /// Fixed priorities read from a file.
    File {
        path: PathBuf,
        priorities: PriorityMap,
    },
}

impl HeuristicSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if let Some(path) = s.strip_prefix("gnn:") {
            let model =
                GnnModel::load(path).map_err(|e| CliError::Invalid(format!("cannot load model {path}: {e}")))?;
            return Ok(HeuristicSpec::Gnn {
                path: path.into(),
                model,
            });
        }
        if let Some(path) = s.strip_prefix("prio:") {
            let file = File::open(path).map_err(|e| CliError::Invalid(format!("cannot open {path}: {e}")))?;
            let priorities = PriorityMap::read(BufReader::new(file))?;
            return Ok(HeuristicSpec::File {
                path: path.into(),
                priorities,
            });
        }
        Heuristic::from_str(s).map(HeuristicSpec::Classic).map_err(|_| {
            CliError::Invalid(format!(
                "unknown heuristic {s:?} (expected ff, lf, sl, id, sd, gnn:<path> or prio:<path>)"
            ))
        })
    }

    pub fn name(&self) -> String {
        match self {
            HeuristicSpec::Classic(h) => h.name().to_owned(),
            HeuristicSpec::Gnn { path, .. } => format!("gnn:{}", path.display()),
            HeuristicSpec::File { path, .. } => format!("prio:{}", path.display()),
        }
    }

    /// Sequential orderings use one thread; `parallel` uses the parallel
    /// variant where one exists.
    pub fn priorities(&self, g: &CsrGraph, parallel: bool, workers: usize) -> Result<PriorityMap, CliError> {
        let w = if parallel { workers } else { 1 };
        match self {
            HeuristicSpec::Classic(h) if parallel => Ok(h.par_order(g, workers)),
            HeuristicSpec::Classic(h) => Ok(h.order(g)),
            HeuristicSpec::Gnn { model, .. } => Ok(infer_priorities(g, model, w)),
            HeuristicSpec::File { priorities, .. } => {
                if priorities.len() != g.num_vertices() {
                    return Err(CliError::Invalid(format!(
                        "priority file has {} entries, graph has {} vertices",
                        priorities.len(),
                        g.num_vertices()
                    )));
                }
                Ok(priorities.clone())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Seq,
    Par,
}

#[derive(Clone, Debug)]
pub struct ColorRun {
    pub records: Vec<RunRecord>,
    /// Coloring of the fastest repetition, after any recoloring.
    pub coloring: Coloring,
    pub best_rep: usize,
}

/// Times ordering plus coloring `reps` times, then applies `culberson`
/// recoloring passes to the result. Every coloring is validated before its
/// record is produced; deterministic heuristics must agree across reps.
pub fn color_graph(
    instance: &str,
    g: &CsrGraph,
    spec: &HeuristicSpec,
    mode: Mode,
    workers: usize,
    reps: usize,
    culberson: usize,
) -> Result<ColorRun, CliError> {
    if reps == 0 {
        return Err(CliError::Invalid("need at least one repetition".into()));
    }
    if workers == 0 {
        return Err(CliError::Invalid("need at least one worker".into()));
    }
    let name = spec.name();
    let mut records = Vec::with_capacity(reps + culberson);
    let mut best: Option<(f64, usize, Coloring)> = None;
    for rep in 0..reps {
        let start = Instant::now();
        let pm = spec.priorities(g, mode == Mode::Par, workers)?;
        let col = match mode {
            Mode::Seq => greedy_color(g, &pm),
            Mode::Par => jp_color(g, &pm, workers),
        };
        let seconds = start.elapsed().as_secs_f64();
        if !validate(g, &col) {
            return Err(CliError::Validation(format!(
                "{name} produced an improper coloring of {instance}"
            )));
        }
        if let Some((_, _, first)) = &best {
            if first.colors() != col.colors() {
                return Err(CliError::Validation(format!(
                    "{name} colored {instance} differently across repetitions"
                )));
            }
        }
        records.push(RunRecord {
            instance: instance.to_owned(),
            heuristic: name.clone(),
            workers: if mode == Mode::Par { workers } else { 1 },
            rep,
            seconds,
            colors: col.num_colors(),
        });
        if best.as_ref().is_none_or(|(t, _, _)| seconds < *t) {
            best = Some((seconds, rep, col));
        }
    }
    let (_, best_rep, mut coloring) = best.expect("reps > 0");
    for i in 1..=culberson {
        let start = Instant::now();
        let next = culberson_recolor(g, &coloring);
        let seconds = start.elapsed().as_secs_f64();
        if !validate(g, &next) || next.num_colors() > coloring.num_colors() {
            return Err(CliError::Validation(format!(
                "recoloring pass {i} on {instance} went wrong"
            )));
        }
        records.push(RunRecord {
            instance: instance.to_owned(),
            heuristic: format!("{name}+culberson{i}"),
            workers: 1,
            rep: i,
            seconds,
            colors: next.num_colors(),
        });
        coloring = next;
    }
    Ok(ColorRun {
        records,
        coloring,
        best_rep,
    })
}

/// Instance name used in records: the file stem.
pub fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}
