use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lsnas::benchmark::{mean_random_accuracy, read_objective_csv, write_front_csv};
use lsnas::experiment::{group_by_algorithm, read_logs, run_experiment, ExperimentConfig, StoredRun};
use lsnas::stats::{archive_metric, pairwise, success_rate_curve, write_comparisons, Metric};
use lsnas::{exhaustive_pareto_front, generate_synthetic, BenchmarkTable, ObjectiveVector, SearchSpace};

mod export;

#[derive(Parser)]
#[command(name = "lsnas", version, about = "Architecture search experiments on tabular benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a seeded synthetic benchmark over a whole space.
    GenSynthetic {
        /// Space file or builtin:macronas / builtin:macronas_large.
        #[arg(long)]
        space: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        ruggedness: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact Pareto front of a complete table.
    Front {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "builtin:macronas")]
        space: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every repetition of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pairwise Mann-Whitney U tests between algorithms at one snapshot.
    Stats {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long, default_value = "hv_val")]
        metric: Metric,
        #[arg(long)]
        at: usize,
        #[arg(long)]
        out: PathBuf,
        /// Reference front CSV, required for igd.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Number of single-objective runs within ε of the optimum, per evaluation count.
    Success {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "builtin:macronas")]
        space: String,
        /// Random architectures sampled for the mean random accuracy.
        #[arg(long, default_value_t = 1_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the CSVs read by the plotting scripts.
    Export {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long)]
        what: What,
        #[arg(long)]
        out: PathBuf,
        /// Moving-average window for traces.
        #[arg(long, default_value_t = 75)]
        window: usize,
        /// Reference front CSV; adds igd to the convergence export.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Convergence,
    Fronts,
    Trace,
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load_reference(path: Option<&Path>) -> Result<Option<Vec<ObjectiveVector>>> {
    path.map(|p| read_objective_csv(p).with_context(|| format!("reading reference {}", p.display())))
        .transpose()
}

fn logs_of(dir: &Path) -> Result<Vec<StoredRun>> {
    read_logs(dir).with_context(|| format!("reading logs from {}", dir.display()))
}

fn stats(logs: &Path, metric: Metric, at: usize, out: &Path, reference: Option<&Path>) -> Result<()> {
    let reference = load_reference(reference)?;
    let runs = logs_of(logs)?;
    let mut groups = Vec::new();
    for (alg, runs) in group_by_algorithm(&runs) {
        let values = runs
            .iter()
            .map(|r| {
                let archive = r
                    .log
                    .snapshot(at)
                    .with_context(|| format!("run {} has no snapshot at {at}", r.log.run_id))?;
                Ok(archive_metric(archive, metric, reference.as_deref())?)
            })
            .collect::<Result<Vec<f64>>>()?;
        groups.push((alg.to_string(), values));
    }
    if groups.len() < 2 {
        bail!("need runs of at least two algorithms in {}", logs.display());
    }
    let rows = pairwise(&groups, metric, at)?;
    let mut w = create(out)?;
    write_comparisons(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn success(
    logs: &Path,
    eps: f64,
    table: &Path,
    space: &str,
    samples: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let table = BenchmarkTable::load(table, SearchSpace::resolve(space)?)?;
    let acc_star = table.best_acc_val().context("benchmark table is empty")?;
    let acc_bar = mean_random_accuracy(&table, samples, seed)?;
    let runs = logs_of(logs)?;
    let mut w: Box<dyn Write> = match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(w, "# acc_star={acc_star} acc_bar={acc_bar} eps={eps}")?;
    writeln!(w, "algorithm,evaluations,succeeded,runs")?;
    for (alg, runs) in group_by_algorithm(&runs) {
        let logs: Vec<_> = runs.iter().map(|r| r.log.clone()).collect();
        let curve = success_rate_curve(&logs, acc_star, acc_bar, eps)?;
        for (i, c) in curve.iter().enumerate() {
            writeln!(w, "{alg},{},{c},{}", i + 1, logs.len())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenSynthetic {
            space,
            seed,
            ruggedness,
            out,
        } => {
            let table = generate_synthetic(&SearchSpace::resolve(&space)?, seed, ruggedness)?;
            table.save(&out)?;
            eprintln!("wrote {} records to {}", table.len(), out.display());
        }
        Command::Front { table, space, out } => {
            let table = BenchmarkTable::load(&table, SearchSpace::resolve(&space)?)?;
            let front = exhaustive_pareto_front(&table)?;
            let mut w = create(&out)?;
            write_front_csv(&front, &mut w)?;
            w.flush()?;
            eprintln!("wrote {} front points to {}", front.len(), out.display());
        }
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            for log in run_experiment(&config)? {
                println!(
                    "{} evaluations={} archive={} stop={}",
                    log.run_id,
                    log.unique_count(),
                    log.final_archive.len(),
                    log.stop
                );
            }
        }
        Command::Stats {
            logs,
            metric,
            at,
            out,
            reference,
        } => stats(&logs, metric, at, &out, reference.as_deref())?,
        Command::Success {
            logs,
            eps,
            table,
            space,
            samples,
            seed,
            out,
        } => success(&logs, eps, &table, &space, samples, seed, out.as_deref())?,
        Command::Export {
            logs,
            what,
            out,
            window,
            reference,
        } => {
            let runs = logs_of(&logs)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            match what {
                What::Convergence => export::convergence(&runs, &out, load_reference(reference.as_deref())?.as_deref())?,
                What::Fronts => export::fronts(&runs, &out)?,
                What::Trace => export::traces(&runs, &out, window)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
