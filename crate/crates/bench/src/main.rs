use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gnncolor::generate::desk_corpus;
use gnncolor::genetic::{self, evolve_with, seed_population, EvolveConfig};
use gnncolor::gnn::GnnModel;
use gnncolor::manifest::{Manifest, ManifestEntry, Split};
use gnncolor::train::{self, train_supervised, LabelSource, TrainConfig};
use gnncolor::{load_graph, save_graph};
use gnncolor_bench::profile::performance_profile;
use gnncolor_bench::records::{read_records, HEADER};
use gnncolor_bench::run::{color_graph, instance_name, HeuristicSpec, Mode};
use gnncolor_bench::CliError;

#[derive(Parser)]
#[command(
    name = "gnncolor",
    version,
    about = "Graph coloring with classic and learned vertex orderings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Color a graph and print one CSV run record per repetition.
    Color {
        graph: PathBuf,
        /// ff, lf, sl, id, sd, gnn:<weights> or prio:<priority file>.
        #[arg(long, default_value = "sl")]
        heuristic: String,
        #[arg(long, value_enum, default_value = "seq")]
        mode: Mode,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Recoloring passes applied to the best repetition.
        #[arg(long, default_value_t = 0)]
        culberson: usize,
        /// Write the final coloring here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the priorities a heuristic assigns.
    Order {
        graph: PathBuf,
        #[arg(long, default_value = "sl")]
        heuristic: String,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Supervised training on the manifest's train split.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value = "sl")]
        labels: LabelSource,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value_t = 200)]
        epochs: usize,
        #[arg(long, default_value_t = 0.001)]
        lr: f32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Checkpoint path.
        #[arg(long)]
        out: PathBuf,
        /// Metric history CSV; defaults to the checkpoint path with `.csv`.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Genetic refinement of checkpoints on the manifest's train split.
    Evolve {
        #[arg(long)]
        manifest: PathBuf,
        /// Initial checkpoints; repeat the flag for several.
        #[arg(long = "init", required = true)]
        init: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        population: usize,
        #[arg(long, default_value_t = 20)]
        truncation: usize,
        #[arg(long, default_value_t = 500)]
        generations: usize,
        #[arg(long, default_value_t = 0.01)]
        sigma: f32,
        /// Weights of Gaussian mutation, node mutation and crossover.
        #[arg(long, num_args = 3, value_delimiter = ',', default_values_t = [0.4, 0.3, 0.3])]
        weights: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Champion checkpoint, rewritten every `--checkpoint-every` generations and at the end.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        checkpoint_every: usize,
        /// Fitness history CSV; defaults to the checkpoint path with `.csv`.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Performance profile CSV from run record files.
    Profile {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Largest k; defaults to the largest observed gap.
        #[arg(long)]
        max_k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the built-in corpus as DIMACS files plus a manifest.
    Corpus {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Color {
            graph,
            heuristic,
            mode,
            workers,
            reps,
            culberson,
            out,
        } => {
            let spec = HeuristicSpec::parse(&heuristic)?;
            let g = load_graph(&graph)?;
            let result = color_graph(&instance_name(&graph), &g, &spec, mode, workers, reps, culberson)?;
            let stdout = io::stdout();
            let mut w = stdout.lock();
            writeln!(w, "{HEADER}")?;
            for r in &result.records {
                r.write_csv(&mut w)?;
            }
            let best = &result.records[result.best_rep];
            eprintln!(
                "best of {reps}: {:.6} s, {} colors; final {} colors",
                best.seconds,
                best.colors,
                result.coloring.num_colors()
            );
            if let Some(path) = out {
                result.coloring.write(BufWriter::new(File::create(path)?))?;
            }
            Ok(())
        }
        Command::Order {
            graph,
            heuristic,
            workers,
            out,
        } => {
            let spec = HeuristicSpec::parse(&heuristic)?;
            let g = load_graph(&graph)?;
            let pm = spec.priorities(&g, workers > 1, workers)?;
            match out {
                Some(path) => pm.write(BufWriter::new(File::create(path)?))?,
                None => pm.write(io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Train {
            manifest,
            labels,
            layers,
            epochs,
            lr,
            seed,
            out,
            history,
        } => {
            let manifest = Manifest::load(&manifest)?;
            let train_graphs = manifest.load_split(Split::Train)?;
            let mut holdout = manifest.load_split(Split::Valid)?;
            if holdout.is_empty() {
                holdout = manifest.load_split(Split::Test)?;
            }
            let cfg = TrainConfig {
                epochs,
                lr,
                seed,
                labels,
                layers,
                ..Default::default()
            };
            let outcome = train_supervised(&train_graphs, &holdout, &cfg)?;
            outcome.model.save(&out)?;
            let history = history.unwrap_or_else(|| out.with_extension("csv"));
            train::write_history(&outcome.history, BufWriter::new(File::create(&history)?))?;
            if let Some(last) = outcome.history.last() {
                eprintln!(
                    "epoch {}: loss {:.5}, f1 {:.4}, holdout colors {}",
                    last.epoch, last.loss, last.f1, last.holdout_colors
                );
            }
            Ok(())
        }
        Command::Evolve {
            manifest,
            init,
            population,
            truncation,
            generations,
            sigma,
            weights,
            seed,
            workers,
            out,
            checkpoint_every,
            history,
        } => {
            let manifest = Manifest::load(&manifest)?;
            let graphs = manifest.load_split(Split::Train)?;
            let checkpoints = init.iter().map(GnnModel::load).collect::<Result<Vec<_>, _>>()?;
            let cfg = EvolveConfig {
                population,
                truncation,
                generations,
                seed,
                operator_weights: [weights[0], weights[1], weights[2]],
                sigma,
                workers,
            };
            cfg.validate()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pop = seed_population(&checkpoints, population, sigma, &mut rng)?;
            let mut save_error = None;
            let outcome = evolve_with(pop, &graphs, &cfg, |record, champion| {
                if checkpoint_every > 0 && record.generation % checkpoint_every == 0 {
                    if let Err(e) = champion.model.save(&out) {
                        save_error.get_or_insert(e);
                    }
                }
            })?;
            if let Some(e) = save_error {
                return Err(e.into());
            }
            outcome.best.model.save(&out)?;
            let history = history.unwrap_or_else(|| out.with_extension("csv"));
            genetic::write_history(&outcome.history, BufWriter::new(File::create(&history)?))?;
            eprintln!(
                "champion: {} colors, tiebreak {}",
                outcome.best.fitness.colors, outcome.best.fitness.tiebreak
            );
            Ok(())
        }
        Command::Profile { records, max_k, out } => {
            let mut all = Vec::new();
            for path in &records {
                all.extend(read_records(BufReader::new(File::open(path)?))?);
            }
            let profile = performance_profile(&all, max_k)?;
            match out {
                Some(path) => profile.write_csv(BufWriter::new(File::create(path)?))?,
                None => profile.write_csv(io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Corpus { dir, seed } => write_corpus(&dir, seed),
    }
}

fn write_corpus(dir: &Path, seed: u64) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest::default();
    for item in desk_corpus(seed) {
        let file = format!("{}.col", item.name);
        save_graph(&item.graph, dir.join(&file))?;
        manifest.entries.push(ManifestEntry {
            path: file.into(),
            split: item.split,
            url: None,
        });
    }
    manifest.write(BufWriter::new(File::create(dir.join("manifest.txt"))?))?;
    eprintln!("wrote {} graphs to {}", manifest.entries.len(), dir.display());
    Ok(())
}
