//! Experiment configuration, repeated seeded runs and the on-disk run log
//! format.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmark::{BenchmarkTable, Evaluator, ObjectiveSpec, SyntheticLandscape};
use crate::error::{Error, Result};
use crate::evo::{ga::ga, gomea, nsga2::nsga2, Hyperparameters};
use crate::local::{local_search, random_search};
use crate::pareto::{Archive, ArchiveEntry, ObjectiveVector};
use crate::rng::seeded;
use crate::run::{default_snapshots, Algorithm, Mode, Run, RunLog, RunSettings, Snapshot, StopReason, TraceEntry};
use crate::space::{Genotype, SearchSpace};

pub const TRACE_HEADER: &str = "eval_index,canonical_key,f1,f2,acc_test,complexity";
const ARCHIVE_HEADER: &str = "canonical_key,f1,f2,acc_test,eval_index";

/// Parameters of a generated benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub seed: u64,
    pub ruggedness: f64,
}

fn default_repetitions() -> usize {
    1
}

fn default_mode() -> Mode {
    Mode::Multi
}

/// One experiment: an algorithm run `repetitions` times on one benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Space file, or `builtin:macronas` / `builtin:macronas_large`.
    pub space: String,
    /// Benchmark CSV; exclusive with `synthetic`.
    #[serde(default)]
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSource>,
    pub algorithm: Algorithm,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Unique-architecture evaluations per run.
    pub budget: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Run `r` uses seed `base_seed + r`.
    #[serde(default)]
    pub base_seed: u64,
    /// Snapshot points; the log-spaced default when absent.
    #[serde(default)]
    pub snapshots: Option<Vec<usize>>,
    #[serde(default)]
    pub complexity_min: Option<f64>,
    #[serde(default)]
    pub complexity_max: Option<f64>,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    pub output_dir: PathBuf,
    /// Consecutive cache hits before a run is declared stalled.
    #[serde(default)]
    pub max_idle_evaluations: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut config = Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &Path| if p.is_relative() { base.join(p) } else { p.to_path_buf() };
        if !config.space.starts_with("builtin:") {
            config.space = rebase(Path::new(&config.space)).to_string_lossy().into_owned();
        }
        config.table = config.table.as_deref().map(rebase);
        config.output_dir = rebase(&config.output_dir);
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if !self.algorithm.supports(self.mode) {
            return bad(format!("algorithm {} does not run in {} mode", self.algorithm, self.mode));
        }
        match (&self.table, &self.synthetic) {
            (Some(_), Some(_)) => return bad("give either table or synthetic, not both".into()),
            (None, None) => return bad("one of table or synthetic is required".into()),
            _ => {}
        }
        if let Some(points) = &self.snapshots {
            if let Some(&p) = points.iter().find(|&&p| p == 0 || p > self.budget) {
                return bad(format!("snapshot {p} outside [1, {}]", self.budget));
            }
        }
        match (self.complexity_min, self.complexity_max) {
            (Some(lo), Some(hi)) if lo >= hi => return bad(format!("complexity_min {lo} >= complexity_max {hi}")),
            (Some(_), None) | (None, Some(_)) => {
                return bad("complexity_min and complexity_max go together".into())
            }
            _ => {}
        }
        if self.max_idle_evaluations == Some(0) {
            return bad("max_idle_evaluations must be at least 1".into());
        }
        Ok(())
    }

    /// SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serializes")))
    }

    pub fn settings(&self) -> RunSettings {
        let mut s = RunSettings::new(self.budget);
        s.snapshots = self.snapshots.clone().unwrap_or_else(|| default_snapshots(self.budget));
        if let Some(m) = self.max_idle_evaluations {
            s.max_idle_evaluations = m;
        }
        s
    }

    pub fn build_evaluator(&self) -> Result<Box<dyn Evaluator>> {
        let space = SearchSpace::resolve(&self.space)?;
        let overrides = |kind| match (self.complexity_min, self.complexity_max) {
            (Some(lo), Some(hi)) => ObjectiveSpec::new(lo, hi, kind).map(Some),
            _ => Ok(None),
        };
        if let Some(path) = &self.table {
            let table = BenchmarkTable::load(path, space)?;
            let kind = table.objective_spec().complexity_kind;
            return Ok(match overrides(kind)? {
                Some(spec) => Box::new(table.with_spec(spec)),
                None => Box::new(table),
            });
        }
        let source = self.synthetic.as_ref().ok_or_else(|| Error::Config("no benchmark source".into()))?;
        let landscape = SyntheticLandscape::new(space, source.seed, source.ruggedness)?;
        let kind = landscape.objective_spec().complexity_kind;
        Ok(match overrides(kind)? {
            Some(spec) => Box::new(landscape.with_spec(spec)),
            None => Box::new(landscape),
        })
    }
}

pub fn run_id(algorithm: Algorithm, mode: Mode, seed: u64) -> String {
    format!("{algorithm}_{mode}_{seed}")
}

/// One run of `algorithm` with its own cache, archive and random stream.
pub fn execute<E: Evaluator + ?Sized>(
    evaluator: &E,
    algorithm: Algorithm,
    mode: Mode,
    settings: RunSettings,
    seed: u64,
    params: &Hyperparameters,
) -> Result<RunLog> {
    if !algorithm.supports(mode) {
        return Err(Error::Config(format!("algorithm {algorithm} does not run in {mode} mode")));
    }
    let mut run = Run::new(evaluator, settings)?;
    let mut rng = seeded(seed);
    let outcome = match algorithm {
        Algorithm::Rs => random_search(&mut run, &mut rng),
        Algorithm::Ls => local_search(&mut run, &mut rng, mode),
        Algorithm::Nsga2 => nsga2(&mut run, &mut rng, params),
        Algorithm::Mogomea => gomea::mo_gomea(&mut run, &mut rng, params),
        Algorithm::Ga => ga(&mut run, &mut rng, params),
        Algorithm::Gomea => gomea::gomea(&mut run, &mut rng, params),
    };
    run.finish(outcome, run_id(algorithm, mode, seed), seed, algorithm, mode)
}

/// Runs every repetition (in parallel) and returns the logs in seed order.
pub fn run_repetitions<E: Evaluator + ?Sized>(evaluator: &E, config: &ExperimentConfig) -> Result<Vec<RunLog>> {
    config.validate()?;
    let settings = config.settings();
    (0..config.repetitions as u64)
        .into_par_iter()
        .map(|r| {
            execute(
                evaluator,
                config.algorithm,
                config.mode,
                settings.clone(),
                config.base_seed + r,
                &config.hyperparameters,
            )
        })
        .collect()
}

/// Runs the experiment and writes every log to the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunLog>> {
    config.validate()?;
    let evaluator = config.build_evaluator()?;
    let logs = run_repetitions(evaluator.as_ref(), config)?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let meta = ExperimentMeta::new(config, evaluator.objective_spec());
    logs.par_iter().try_for_each(|log| write_log(dir, log, &meta))?;
    Ok(logs)
}

/// Provenance shared by all runs of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    pub config_hash: String,
    pub space: String,
    pub source: String,
    pub objective_spec: ObjectiveSpec,
    pub hyperparameters: Hyperparameters,
}

impl ExperimentMeta {
    pub fn new(config: &ExperimentConfig, spec: &ObjectiveSpec) -> Self {
        let source = match (&config.table, &config.synthetic) {
            (Some(t), _) => t.display().to_string(),
            (None, Some(s)) => format!("synthetic seed={} ruggedness={}", s.seed, s.ruggedness),
            (None, None) => String::new(),
        };
        Self {
            config_hash: config.hash(),
            space: config.space.clone(),
            source,
            objective_spec: *spec,
            hyperparameters: config.hyperparameters.clone(),
        }
    }
}

/// The `run_<id>.json` sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub run_id: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub budget: usize,
    pub unique_evaluations: usize,
    pub stop: StopReason,
    pub truncated: bool,
    /// The trivial net is always evaluation 1.
    pub trivial_eval_index: usize,
    pub snapshots: Vec<usize>,
    pub markers: Vec<(usize, String)>,
    #[serde(flatten)]
    pub experiment: ExperimentMeta,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}

fn archive_file(dir: &Path, id: &str, label: &str) -> PathBuf {
    dir.join(format!("archive_{id}_{label}.csv"))
}

pub fn write_trace<W: Write>(trace: &[TraceEntry], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for t in trace {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t.eval_index, t.key, t.objectives.f1, t.objectives.f2, t.acc_test, t.complexity
        )?;
    }
    Ok(())
}

/// Writes `trace_<id>.csv`, `archive_<id>_<snapshot>.csv` for every
/// snapshot, `archive_<id>_final.csv` and `run_<id>.json`.
pub fn write_log(dir: &Path, log: &RunLog, experiment: &ExperimentMeta) -> Result<()> {
    let id = &log.run_id;
    let write = |path: PathBuf, f: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<()> {
        let mut w = create(&path)?;
        f(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    };
    write(dir.join(format!("trace_{id}.csv")), &|w| write_trace(&log.trace, w))?;
    for s in &log.snapshots {
        write(archive_file(dir, id, &s.at.to_string()), &|w| s.archive.write_csv(w))?;
    }
    write(archive_file(dir, id, "final"), &|w| log.final_archive.write_csv(w))?;
    let meta = RunMeta {
        run_id: id.clone(),
        seed: log.seed,
        algorithm: log.algorithm,
        mode: log.mode,
        budget: log.budget,
        unique_evaluations: log.unique_count(),
        stop: log.stop,
        truncated: log.truncated,
        trivial_eval_index: 1,
        snapshots: log.snapshots.iter().map(|s| s.at).collect(),
        markers: log.markers.clone(),
        experiment: experiment.clone(),
    };
    write(dir.join(format!("run_{id}.json")), &|w| {
        serde_json::to_writer_pretty(&mut *w, &meta).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Reads a CSV with a fixed header, handing each row's fields to `row`.
fn read_rows(path: &Path, header: &str, mut row: impl FnMut(usize, &[&str]) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    if first.as_deref().map(str::trim) != Some(header) {
        return Err(parse_err(path, 1, format!("expected header {header:?}")));
    }
    let columns = header.split(',').count();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != columns {
            return Err(parse_err(path, i + 2, format!("expected {columns} fields, found {}", fields.len())));
        }
        row(i + 2, &fields)?;
    }
    Ok(())
}

fn number<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad number {field:?}")))
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceEntry>> {
    let mut out = Vec::new();
    read_rows(path, TRACE_HEADER, |line, f| {
        out.push(TraceEntry {
            eval_index: number(path, line, f[0])?,
            key: Genotype::parse_key(f[1]).map_err(|e| parse_err(path, line, e.to_string()))?,
            objectives: ObjectiveVector::new(number(path, line, f[2])?, number(path, line, f[3])?),
            acc_test: number(path, line, f[4])?,
            complexity: number(path, line, f[5])?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_archive(path: &Path) -> Result<Archive> {
    let mut archive = Archive::new();
    read_rows(path, ARCHIVE_HEADER, |line, f| {
        let entry = ArchiveEntry {
            key: Genotype::parse_key(f[0]).map_err(|e| parse_err(path, line, e.to_string()))?,
            objectives: ObjectiveVector::new(number(path, line, f[1])?, number(path, line, f[2])?),
            acc_test: number(path, line, f[3])?,
            eval_index: number(path, line, f[4])?,
        };
        if !archive.update(entry) {
            return Err(parse_err(path, line, "entry is dominated by or equal to an earlier one"));
        }
        Ok(())
    })?;
    Ok(archive)
}

/// A run log read back from disk, with its sidecar.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub meta: RunMeta,
    pub log: RunLog,
}

pub fn read_log(dir: &Path, id: &str) -> Result<StoredRun> {
    let meta_path = dir.join(format!("run_{id}.json"));
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(format!("reading {}", meta_path.display()), e))?;
    let meta: RunMeta =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", meta_path.display())))?;
    let trace = read_trace(&dir.join(format!("trace_{id}.csv")))?;
    let snapshots = meta
        .snapshots
        .iter()
        .map(|&at| {
            Ok(Snapshot {
                at,
                archive: read_archive(&archive_file(dir, id, &at.to_string()))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let final_archive = read_archive(&archive_file(dir, id, "final"))?;
    let log = RunLog {
        run_id: meta.run_id.clone(),
        seed: meta.seed,
        algorithm: meta.algorithm,
        mode: meta.mode,
        budget: meta.budget,
        trace,
        snapshots,
        final_archive,
        stop: meta.stop,
        truncated: meta.truncated,
        markers: meta.markers.clone(),
    };
    Ok(StoredRun { meta, log })
}

/// Every run found in `dir`, ordered by run id.
pub fn read_logs(dir: &Path) -> Result<Vec<StoredRun>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(format!("listing {}", dir.display()), e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(id) = name.strip_prefix("run_").and_then(|n| n.strip_suffix(".json")) {
            ids.push(id.to_string());
        }
    }
    ids.sort();
    if ids.is_empty() {
        return Err(Error::InvalidArgument(format!("no run logs in {}", dir.display())));
    }
    ids.iter().map(|id| read_log(dir, id)).collect()
}

/// Runs grouped by algorithm name, in algorithm order.
pub fn group_by_algorithm(runs: &[StoredRun]) -> BTreeMap<Algorithm, Vec<&StoredRun>> {
    let mut groups: BTreeMap<Algorithm, Vec<&StoredRun>> = BTreeMap::new();
    for r in runs {
        groups.entry(r.log.algorithm).or_default().push(r);
    }
    groups
}
