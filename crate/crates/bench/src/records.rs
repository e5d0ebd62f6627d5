use std::io::{BufRead, Write};

use crate::CliError;

pub const HEADER: &str = "instance,heuristic,workers,rep,seconds,colors";

/// One timed coloring run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub heuristic: String,
    pub workers: usize,
    pub rep: usize,
    pub seconds: f64,
    pub colors: usize,
}

impl RunRecord {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{},{},{:.9},{}",
            self.instance, self.heuristic, self.workers, self.rep, self.seconds, self.colors
        )
    }
}

/// Reads records written by [`RunRecord::write_csv`]. Header lines (there
/// may be several when files were concatenated) are skipped.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<RunRecord>, CliError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Invalid(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line == HEADER {
            continue;
        }
        let bad = |what: &str| CliError::Invalid(format!("record line {}: {what}", idx + 1));
        // Heuristic names may contain commas only if quoted; they never do.
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad("expected 6 fields"));
        }
        let seconds: f64 = fields[4].parse().map_err(|_| bad("bad seconds"))?;
        if seconds.is_nan() || seconds < 0.0 {
            return Err(bad("negative time"));
        }
        records.push(RunRecord {
            instance: fields[0].to_owned(),
            heuristic: fields[1].to_owned(),
            workers: fields[2].parse().map_err(|_| bad("bad workers"))?,
            rep: fields[3].parse().map_err(|_| bad("bad rep"))?,
            seconds,
            colors: fields[5].parse().map_err(|_| bad("bad colors"))?,
        });
    }
    Ok(records)
}
