//! Per-run evaluation context: unique-architecture budget, elitist archive,
//! evaluation trace and archive snapshots.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::benchmark::{objectives, Evaluation, EvaluationCache, Evaluator};
use crate::error::{Error, Result};
use crate::pareto::{Archive, ArchiveEntry, ObjectiveVector};
use crate::space::{Genotype, SearchSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Rs,
    Ls,
    Nsga2,
    Mogomea,
    Ga,
    Gomea,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Rs,
        Algorithm::Ls,
        Algorithm::Nsga2,
        Algorithm::Mogomea,
        Algorithm::Ga,
        Algorithm::Gomea,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rs => "rs",
            Algorithm::Ls => "ls",
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Mogomea => "mogomea",
            Algorithm::Ga => "ga",
            Algorithm::Gomea => "gomea",
        }
    }

    pub fn supports(self, mode: Mode) -> bool {
        match mode {
            Mode::Multi => matches!(self, Algorithm::Rs | Algorithm::Ls | Algorithm::Nsga2 | Algorithm::Mogomea),
            Mode::Single => matches!(self, Algorithm::Rs | Algorithm::Ls | Algorithm::Ga | Algorithm::Gomea),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Multi,
    Single,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Multi => "multi",
            Mode::Single => "single",
        })
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    /// The unique-evaluation budget was reached.
    Budget,
    /// Every architecture the evaluator can serve has been evaluated.
    Exhausted,
    /// Too many consecutive evaluations hit the cache.
    Stalled,
    /// The algorithm ended on its own before the budget.
    Finished,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Budget => "budget",
            StopReason::Exhausted => "exhausted",
            StopReason::Stalled => "stalled",
            StopReason::Finished => "finished",
        })
    }
}

/// Control-flow signal raised by [`Run::evaluate`].
#[derive(Debug)]
pub enum Halt {
    Stop(StopReason),
    Failed(Error),
}

impl From<Error> for Halt {
    fn from(e: Error) -> Self {
        Halt::Failed(e)
    }
}

pub type Step<T = ()> = std::result::Result<T, Halt>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub budget: usize,
    /// Unique-evaluation counts at which the archive is snapshotted.
    pub snapshots: Vec<usize>,
    /// Consecutive cache hits after which a run is declared stalled.
    pub max_idle_evaluations: usize,
}

pub const DEFAULT_MAX_IDLE: usize = 1_000_000;

impl RunSettings {
    pub fn new(budget: usize) -> Self {
        Self {
            budget,
            snapshots: default_snapshots(budget),
            max_idle_evaluations: DEFAULT_MAX_IDLE,
        }
    }

    pub fn with_snapshots(mut self, snapshots: Vec<usize>) -> Self {
        self.snapshots = snapshots;
        self
    }
}

/// Log-spaced default schedule clipped to `[1, budget]`.
pub fn default_snapshots(budget: usize) -> Vec<usize> {
    [10, 100, 700, 1_000, 2_500, 10_000, 18_000, 100_000]
        .into_iter()
        .filter(|&s| s >= 1 && s <= budget)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub eval_index: usize,
    pub key: Genotype,
    pub objectives: ObjectiveVector,
    pub acc_test: f64,
    pub complexity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub at: usize,
    pub archive: Archive,
}

/// Result of one evaluation request.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub key: Genotype,
    pub objectives: ObjectiveVector,
    pub eval: Evaluation,
    /// The architecture had not been evaluated before in this run.
    pub new: bool,
    /// The evaluation entered the archive.
    pub archived: bool,
}

/// In-memory record of one finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub run_id: String,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub budget: usize,
    pub trace: Vec<TraceEntry>,
    pub snapshots: Vec<Snapshot>,
    pub final_archive: Archive,
    pub stop: StopReason,
    /// Set when the run ended before spending its budget.
    pub truncated: bool,
    /// Algorithm-specific instrumentation: `(unique count, label)`.
    pub markers: Vec<(usize, String)>,
}

impl RunLog {
    pub fn unique_count(&self) -> usize {
        self.trace.len()
    }

    /// Archive at the snapshot taken at `at` evaluations.
    pub fn snapshot(&self, at: usize) -> Option<&Archive> {
        self.snapshots.iter().find(|s| s.at == at).map(|s| &s.archive)
    }
}

pub struct Run<'a, E: Evaluator + ?Sized> {
    evaluator: &'a E,
    settings: RunSettings,
    distinct: Option<u128>,
    cache: EvaluationCache,
    archive: Archive,
    trace: Vec<TraceEntry>,
    snapshots: Vec<Snapshot>,
    schedule: Vec<usize>,
    next_snapshot: usize,
    idle: usize,
    markers: Vec<(usize, String)>,
}

impl<'a, E: Evaluator + ?Sized> Run<'a, E> {
    pub fn new(evaluator: &'a E, settings: RunSettings) -> Result<Self> {
        if settings.budget == 0 {
            return Err(Error::Config("budget must be at least 1".into()));
        }
        let mut schedule = settings.snapshots.clone();
        schedule.sort_unstable();
        schedule.dedup();
        if let Some(&last) = schedule.last() {
            if last > settings.budget {
                return Err(Error::Config(format!(
                    "snapshot {last} exceeds budget {}",
                    settings.budget
                )));
            }
        }
        if schedule.first() == Some(&0) {
            return Err(Error::Config("snapshot points start at 1".into()));
        }
        Ok(Self {
            evaluator,
            distinct: evaluator.distinct_architectures(),
            settings,
            cache: EvaluationCache::new(),
            archive: Archive::new(),
            trace: Vec::new(),
            snapshots: Vec::new(),
            schedule,
            next_snapshot: 0,
            idle: 0,
            markers: Vec::new(),
        })
    }

    pub fn space(&self) -> &'a SearchSpace {
        self.evaluator.space()
    }

    pub fn unique_count(&self) -> usize {
        self.cache.unique_count()
    }

    pub fn budget(&self) -> usize {
        self.settings.budget
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn is_cached(&self, g: &Genotype) -> bool {
        self.cache.contains(&self.space().canonicalize(g))
    }

    pub fn mark(&mut self, label: impl Into<String>) {
        self.markers.push((self.unique_count(), label.into()));
    }

    /// Whether the next evaluation request would halt.
    pub fn check(&self) -> Step {
        let unique = self.unique_count();
        if unique >= self.settings.budget {
            return Err(Halt::Stop(StopReason::Budget));
        }
        if self.distinct.is_some_and(|d| unique as u128 >= d) {
            return Err(Halt::Stop(StopReason::Exhausted));
        }
        if self.idle >= self.settings.max_idle_evaluations {
            return Err(Halt::Stop(StopReason::Stalled));
        }
        Ok(())
    }

    /// Evaluates `g`, charging the budget only for architectures not seen
    /// before in this run, and offers new ones to the archive.
    pub fn evaluate(&mut self, g: &Genotype) -> Step<Evaluated> {
        self.check()?;
        let (key, hit, new) = objectives(self.evaluator, g, &mut self.cache)?;
        let mut archived = false;
        if new {
            self.idle = 0;
            let eval_index = self.cache.unique_count();
            archived = self.archive.update(ArchiveEntry {
                key: key.clone(),
                objectives: hit.objectives,
                acc_test: hit.eval.acc_test,
                eval_index,
            });
            self.trace.push(TraceEntry {
                eval_index,
                key: key.clone(),
                objectives: hit.objectives,
                acc_test: hit.eval.acc_test,
                complexity: hit.eval.complexity,
            });
            while self.next_snapshot < self.schedule.len() && self.schedule[self.next_snapshot] == eval_index {
                self.snapshots.push(Snapshot {
                    at: eval_index,
                    archive: self.archive.clone(),
                });
                self.next_snapshot += 1;
            }
        } else {
            self.idle += 1;
        }
        Ok(Evaluated {
            key,
            objectives: hit.objectives,
            eval: hit.eval,
            new,
            archived,
        })
    }

    /// Closes the run. Snapshot points the run never reached receive the
    /// final archive.
    pub fn finish(
        mut self,
        outcome: Step,
        run_id: impl Into<String>,
        seed: u64,
        algorithm: Algorithm,
        mode: Mode,
    ) -> Result<RunLog> {
        let stop = match outcome {
            Ok(()) => StopReason::Finished,
            Err(Halt::Stop(reason)) => reason,
            Err(Halt::Failed(e)) => return Err(e),
        };
        let truncated = self.unique_count() < self.settings.budget;
        for &at in &self.schedule[self.next_snapshot..] {
            self.snapshots.push(Snapshot {
                at,
                archive: self.archive.clone(),
            });
        }
        Ok(RunLog {
            run_id: run_id.into(),
            seed,
            algorithm,
            mode,
            budget: self.settings.budget,
            trace: self.trace,
            snapshots: self.snapshots,
            final_archive: self.archive,
            stop,
            truncated,
            markers: self.markers,
        })
    }
}
