//! Cached-evaluation tables, objective normalization, synthetic surrogate
//! landscapes and unique-architecture accounting.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pareto::{dominates, ObjectiveVector};
use crate::rng::{mix64, seeded, unit_f64};
use crate::space::{Genotype, SearchSpace};

pub const CSV_HEADER: &str = "genotype,acc_val,acc_test,complexity";

/// Largest space `generate_synthetic` will tabulate.
pub const MAX_ENUMERABLE: u128 = 10_000_000;

const CONFLICT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityKind {
    Mmacs,
    Parameters,
}

impl fmt::Display for ComplexityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComplexityKind::Mmacs => "mmacs",
            ComplexityKind::Parameters => "parameters",
        })
    }
}

impl FromStr for ComplexityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmacs" => Ok(ComplexityKind::Mmacs),
            "parameters" => Ok(ComplexityKind::Parameters),
            other => Err(Error::InvalidArgument(format!("unknown complexity kind {other:?}"))),
        }
    }
}

/// Normalization bounds for the complexity objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub complexity_min: f64,
    pub complexity_max: f64,
    pub complexity_kind: ComplexityKind,
}

impl ObjectiveSpec {
    pub fn new(complexity_min: f64, complexity_max: f64, kind: ComplexityKind) -> Result<Self> {
        if !(complexity_min.is_finite() && complexity_max.is_finite())
            || complexity_min >= complexity_max
        {
            return Err(Error::InvalidArgument(format!(
                "complexity range [{complexity_min}, {complexity_max}] is empty"
            )));
        }
        Ok(Self {
            complexity_min,
            complexity_max,
            complexity_kind: kind,
        })
    }

    /// `1 - normalize(complexity)`, clamped to `[0, 1]`.
    pub fn efficiency(&self, complexity: f64) -> f64 {
        let span = self.complexity_max - self.complexity_min;
        (1.0 - (complexity - self.complexity_min) / span).clamp(0.0, 1.0)
    }

    pub fn objectives(&self, eval: &Evaluation) -> ObjectiveVector {
        ObjectiveVector::new(eval.acc_val.clamp(0.0, 1.0), self.efficiency(eval.complexity))
    }
}

/// Raw measurements of one architecture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub acc_val: f64,
    pub acc_test: f64,
    pub complexity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub key: Genotype,
    pub eval: Evaluation,
}

/// Anything that can score canonical genotypes: a stored table or a
/// generative landscape.
pub trait Evaluator: Sync {
    fn space(&self) -> &SearchSpace;

    fn objective_spec(&self) -> &ObjectiveSpec;

    /// Raw measurements of a canonical genotype.
    fn evaluate_canonical(&self, key: &Genotype) -> Result<Evaluation>;

    /// Number of distinct architectures the evaluator can serve, if bounded.
    fn distinct_architectures(&self) -> Option<u128> {
        self.space().count_distinct_architectures().ok()
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkTable {
    space: SearchSpace,
    records: Vec<BenchmarkRecord>,
    index: HashMap<Genotype, usize>,
    spec: ObjectiveSpec,
    complete: bool,
}

impl BenchmarkTable {
    /// Builds a table from raw rows, canonicalizing and deduplicating them.
    /// Without an explicit spec the observed complexity extremes are used.
    pub fn from_records(
        space: SearchSpace,
        rows: impl IntoIterator<Item = BenchmarkRecord>,
        spec: Option<ObjectiveSpec>,
    ) -> Result<Self> {
        let mut records: Vec<BenchmarkRecord> = Vec::new();
        let mut index: HashMap<Genotype, usize> = HashMap::new();
        for row in rows {
            space.validate(&row.key)?;
            check_ranges(&row.eval).map_err(|msg| Error::InvalidArgument(format!("{}: {msg}", row.key)))?;
            let key = space.canonicalize(&row.key);
            match index.get(&key) {
                Some(&i) => {
                    let prev = &records[i].eval;
                    let diff = (prev.acc_val - row.eval.acc_val)
                        .abs()
                        .max((prev.acc_test - row.eval.acc_test).abs())
                        .max((prev.complexity - row.eval.complexity).abs());
                    if diff > CONFLICT_TOLERANCE {
                        return Err(Error::ConflictingRecords {
                            key: key.key(),
                            msg: format!("values differ by {diff}"),
                        });
                    }
                }
                None => {
                    index.insert(key.clone(), records.len());
                    records.push(BenchmarkRecord { key, eval: row.eval });
                }
            }
        }
        records.sort_by(|a, b| a.key.cmp(&b.key));
        for (i, r) in records.iter().enumerate() {
            index.insert(r.key.clone(), i);
        }

        let spec = match spec {
            Some(s) => s,
            None => {
                let (lo, hi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r.eval.complexity), hi.max(r.eval.complexity))
                });
                ObjectiveSpec::new(lo, hi, ComplexityKind::Mmacs).map_err(|_| {
                    Error::InvalidArgument(
                        "observed complexity range is degenerate; supply complexity_min/max metadata"
                            .into(),
                    )
                })?
            }
        };
        let complete = space
            .count_distinct_architectures()
            .map(|n| n == records.len() as u128)
            .unwrap_or(false);
        Ok(Self {
            space,
            records,
            index,
            spec,
            complete,
        })
    }

    pub fn load(path: impl AsRef<Path>, space: SearchSpace) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Self::read_csv(BufReader::new(file), path, space)
    }

    /// Parses the benchmark CSV format. `origin` only labels error messages.
    pub fn read_csv<R: BufRead>(reader: R, origin: &Path, space: SearchSpace) -> Result<Self> {
        if space.alphabet_sizes().iter().any(|&a| a > 10) {
            return Err(Error::InvalidArgument(
                "benchmark CSV requires alphabets of at most 10 symbols".into(),
            ));
        }
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut meta: Option<(Option<ComplexityKind>, Option<f64>, Option<f64>)> = None;
        let mut header_seen = false;
        let mut rows = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(format!("reading {}", origin.display()), e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                if let Some(comment) = line.strip_prefix('#') {
                    if meta.is_some() {
                        return Err(parse_err(lineno, "more than one metadata line".into()));
                    }
                    meta = Some(parse_metadata(comment).map_err(|m| parse_err(lineno, m))?);
                    continue;
                }
                if line.trim() != CSV_HEADER {
                    return Err(parse_err(lineno, format!("expected header {CSV_HEADER:?}")));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(parse_err(lineno, format!("expected 4 fields, found {}", fields.len())));
            }
            let g = fields[0];
            if g.len() != space.len() || !g.bytes().all(|b| b.is_ascii_digit()) {
                return Err(parse_err(
                    lineno,
                    format!("genotype {g:?} is not {} decimal digits", space.len()),
                ));
            }
            let key = Genotype(g.bytes().map(|b| b - b'0').collect());
            space.validate(&key).map_err(|e| parse_err(lineno, e.to_string()))?;
            let num = |s: &str, name: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(lineno, format!("bad {name} value {s:?}")))
            };
            let eval = Evaluation {
                acc_val: num(fields[1], "acc_val")?,
                acc_test: num(fields[2], "acc_test")?,
                complexity: num(fields[3], "complexity")?,
            };
            check_ranges(&eval).map_err(|m| parse_err(lineno, m))?;
            rows.push(BenchmarkRecord { key, eval });
        }
        if !header_seen {
            return Err(parse_err(0, "missing header".into()));
        }
        let spec = match meta {
            Some((kind, Some(lo), Some(hi))) => Some(ObjectiveSpec::new(
                lo,
                hi,
                kind.unwrap_or(ComplexityKind::Mmacs),
            )?),
            Some((Some(kind), None, None)) => {
                let mut t = Self::from_records(space, rows, None)?;
                t.spec.complexity_kind = kind;
                return Ok(t);
            }
            Some((_, None, None)) | None => None,
            Some(_) => {
                return Err(parse_err(1, "complexity_min and complexity_max must be given together".into()))
            }
        };
        Self::from_records(space, rows, spec)
    }

    /// Writes the table in ascending key order, metadata line first.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# complexity_kind={} complexity_min={} complexity_max={}",
            self.spec.complexity_kind, self.spec.complexity_min, self.spec.complexity_max
        )?;
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{}",
                r.key, r.eval.acc_val, r.eval.acc_test, r.eval.complexity
            )?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path)
            .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn records(&self) -> &[BenchmarkRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn get(&self, canonical: &Genotype) -> Option<&BenchmarkRecord> {
        self.index.get(canonical).map(|&i| &self.records[i])
    }

    pub fn with_spec(mut self, spec: ObjectiveSpec) -> Self {
        self.spec = spec;
        self
    }

    /// Best validation accuracy over the whole table.
    pub fn best_acc_val(&self) -> Option<f64> {
        self.records.iter().map(|r| r.eval.acc_val).reduce(f64::max)
    }
}

impl Evaluator for BenchmarkTable {
    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn objective_spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    fn evaluate_canonical(&self, key: &Genotype) -> Result<Evaluation> {
        self.get(key)
            .map(|r| r.eval)
            .ok_or_else(|| Error::MissingArchitecture(key.key()))
    }

    fn distinct_architectures(&self) -> Option<u128> {
        if self.complete {
            Some(self.records.len() as u128)
        } else {
            self.space.count_distinct_architectures().ok()
        }
    }
}

fn check_ranges(e: &Evaluation) -> std::result::Result<(), String> {
    if !(0.0..=1.0).contains(&e.acc_val) || !(0.0..=1.0).contains(&e.acc_test) {
        return Err("accuracies must lie in [0, 1]".into());
    }
    if e.complexity < 0.0 {
        return Err("complexity must be nonnegative".into());
    }
    Ok(())
}

type Metadata = (Option<ComplexityKind>, Option<f64>, Option<f64>);

fn parse_metadata(comment: &str) -> std::result::Result<Metadata, String> {
    let mut kind = None;
    let mut lo = None;
    let mut hi = None;
    for token in comment.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| format!("metadata token {token:?} is not key=value"))?;
        let number = || v.parse::<f64>().map_err(|_| format!("bad number {v:?} for {k}"));
        match k {
            "complexity_kind" => kind = Some(v.parse().map_err(|e: Error| e.to_string())?),
            "complexity_min" => lo = Some(number()?),
            "complexity_max" => hi = Some(number()?),
            other => return Err(format!("unknown metadata key {other:?}")),
        }
    }
    Ok((kind, lo, hi))
}

/// Run-local memo of evaluated architectures.
#[derive(Debug, Clone, Default)]
pub struct EvaluationCache {
    seen: HashMap<Genotype, CachedEvaluation>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CachedEvaluation {
    pub objectives: ObjectiveVector,
    pub eval: Evaluation,
}

impl EvaluationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unique_count(&self) -> usize {
        self.seen.len()
    }

    pub fn get(&self, canonical: &Genotype) -> Option<&CachedEvaluation> {
        self.seen.get(canonical)
    }

    pub fn contains(&self, canonical: &Genotype) -> bool {
        self.seen.contains_key(canonical)
    }
}

/// Objective vector of `g`, consulting and filling `cache`. The flag tells
/// whether the architecture was new to the cache.
pub fn objectives<E: Evaluator + ?Sized>(
    evaluator: &E,
    g: &Genotype,
    cache: &mut EvaluationCache,
) -> Result<(Genotype, CachedEvaluation, bool)> {
    let key = evaluator.space().canonicalize(g);
    if let Some(hit) = cache.seen.get(&key) {
        return Ok((key, *hit, false));
    }
    let eval = evaluator.evaluate_canonical(&key)?;
    let hit = CachedEvaluation {
        objectives: evaluator.objective_spec().objectives(&eval),
        eval,
    };
    cache.seen.insert(key.clone(), hit);
    Ok((key, hit, true))
}

/// Point of an exact Pareto front.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub key: Genotype,
    pub objectives: ObjectiveVector,
    pub acc_test: f64,
    pub complexity: f64,
}

/// Exact Pareto front of a complete table, ascending `f1`. One representative
/// (smallest key) per distinct objective vector.
pub fn exhaustive_pareto_front(table: &BenchmarkTable) -> Result<Vec<FrontPoint>> {
    if !table.is_complete() {
        return Err(Error::IncompleteTable);
    }
    Ok(front_of_records(table.records(), table.objective_spec()))
}

/// Pareto front of an arbitrary record set under `spec`.
pub fn front_of_records(records: &[BenchmarkRecord], spec: &ObjectiveSpec) -> Vec<FrontPoint> {
    let mut pts: Vec<FrontPoint> = records
        .iter()
        .map(|r| FrontPoint {
            key: r.key.clone(),
            objectives: spec.objectives(&r.eval),
            acc_test: r.eval.acc_test,
            complexity: r.eval.complexity,
        })
        .collect();
    // descending f1, then descending f2, then ascending key
    pts.sort_by(|a, b| {
        b.objectives
            .f1
            .total_cmp(&a.objectives.f1)
            .then(b.objectives.f2.total_cmp(&a.objectives.f2))
            .then(a.key.cmp(&b.key))
    });
    let mut front: Vec<FrontPoint> = Vec::new();
    let mut best_f2 = f64::NEG_INFINITY;
    for p in pts {
        if p.objectives.f2 > best_f2 {
            best_f2 = p.objectives.f2;
            front.push(p);
        }
    }
    front.reverse();
    debug_assert!(front
        .windows(2)
        .all(|w| !dominates(&w[0].objectives, &w[1].objectives)));
    front
}

pub fn write_front_csv<W: Write>(front: &[FrontPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "canonical_key,f1,f2,acc_test,complexity")?;
    for p in front {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.key, p.objectives.f1, p.objectives.f2, p.acc_test, p.complexity
        )?;
    }
    Ok(())
}

/// Reads the `f1,f2` columns of any CSV carrying them (front or archive dumps).
pub fn read_objective_csv(path: impl AsRef<Path>) -> Result<Vec<ObjectiveVector>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let col = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| parse_err(1, format!("missing column {name}")))
    };
    let (i1, i2) = (col("f1")?, col("f2")?);
    lines
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let get = |j: usize| {
                fields
                    .get(j)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| parse_err(i + 1, format!("bad row {line:?}")))
            };
            Ok(ObjectiveVector::new(get(i1)?, get(i2)?))
        })
        .collect()
}

/// Seeded generative surrogate for accuracy and complexity.
///
/// Accuracy is an affine squash of per-cell gains plus `ruggedness`-weighted
/// pairwise interaction terms between cells of the canonical genotype.
/// Complexity is the sum of per-cell costs. Identity cells contribute
/// nothing to either. Within a segment a cell's gain and cost depend only on
/// its symbol, so at zero ruggedness every scalarization of the two
/// objectives is a sum of per-position terms.
#[derive(Debug, Clone)]
pub struct SyntheticLandscape {
    space: SearchSpace,
    seed: u64,
    ruggedness: f64,
    /// `gain[pos][symbol]`, zero for identity.
    gain: Vec<Vec<f64>>,
    cost: Vec<Vec<f64>>,
    /// Dense `[i][j][si][sj]` table for `i < j`, scaled by ruggedness.
    interaction: Vec<f64>,
    max_alphabet: usize,
    score_min: f64,
    score_max: f64,
    spec: ObjectiveSpec,
}

const ACC_FLOOR: f64 = 0.10;
const ACC_CEIL: f64 = 0.95;
const TEST_NOISE: f64 = 0.01;

impl SyntheticLandscape {
    pub fn new(space: SearchSpace, seed: u64, ruggedness: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ruggedness) {
            return Err(Error::InvalidArgument(format!("ruggedness {ruggedness} outside [0, 1]")));
        }
        let mut rng = seeded(seed);
        let n = space.len();
        let max_alphabet = *space.alphabet_sizes().iter().max().unwrap_or(&2);

        // one gain/cost table per segment (shared by its positions) or free position
        let mut gain = vec![Vec::new(); n];
        let mut cost = vec![Vec::new(); n];
        let mut units: Vec<Vec<usize>> = space.segments().iter().map(|&(s, e)| (s..e).collect()).collect();
        units.extend(space.free_positions().map(|p| vec![p]));
        units.sort();
        for unit in &units {
            let first = unit[0];
            let id = space.identity(first);
            let stage_cost = rng.gen_range(0.5..2.0);
            let (g, c): (Vec<f64>, Vec<f64>) = (0..space.alphabet_size(first) as u8)
                .map(|s| {
                    if Some(s) == id {
                        (0.0, 0.0)
                    } else {
                        (rng.gen_range(0.1..1.0), stage_cost * rng.gen_range(0.5..2.0))
                    }
                })
                .unzip();
            for &p in unit {
                gain[p] = g.clone();
                cost[p] = c.clone();
            }
        }

        let pairs = (n * n.saturating_sub(1) / 2).max(1) as f64;
        let scale = ruggedness * 0.5 * n as f64 / pairs.sqrt();
        let mut interaction = vec![0.0; n * n * max_alphabet * max_alphabet];
        let mut inter_lo = 0.0;
        let mut inter_hi = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (mut lo, mut hi) = (0.0f64, 0.0f64);
                for si in 0..space.alphabet_size(i) {
                    for sj in 0..space.alphabet_size(j) {
                        let w = rng.gen_range(-1.0..1.0) * scale;
                        if Some(si as u8) == space.identity(i) || Some(sj as u8) == space.identity(j) {
                            continue;
                        }
                        interaction[((i * n + j) * max_alphabet + si) * max_alphabet + sj] = w;
                        lo = lo.min(w);
                        hi = hi.max(w);
                    }
                }
                inter_lo += lo;
                inter_hi += hi;
            }
        }

        let mut score_min = inter_lo;
        let mut score_max = inter_hi;
        let mut complexity_min = 0.0;
        let mut complexity_max = 0.0;
        for p in 0..n {
            score_min += gain[p].iter().copied().fold(f64::INFINITY, f64::min);
            score_max += gain[p].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            complexity_min += cost[p].iter().copied().fold(f64::INFINITY, f64::min);
            complexity_max += cost[p].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
        let spec = ObjectiveSpec::new(complexity_min, complexity_max, ComplexityKind::Mmacs)?;
        Ok(Self {
            space,
            seed,
            ruggedness,
            gain,
            cost,
            interaction,
            max_alphabet,
            score_min,
            score_max,
            spec,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ruggedness(&self) -> f64 {
        self.ruggedness
    }

    /// Replaces the exact complexity bounds, e.g. with configured overrides.
    pub fn with_spec(mut self, spec: ObjectiveSpec) -> Self {
        self.spec = spec;
        self
    }

    fn score(&self, g: &[u8]) -> f64 {
        let n = g.len();
        let mut s: f64 = g.iter().enumerate().map(|(p, &x)| self.gain[p][x as usize]).sum();
        if self.ruggedness > 0.0 {
            let a = self.max_alphabet;
            for i in 0..n {
                for j in (i + 1)..n {
                    s += self.interaction[((i * n + j) * a + g[i] as usize) * a + g[j] as usize];
                }
            }
        }
        s
    }

    fn noise(&self, key: &Genotype) -> f64 {
        let h = key
            .symbols()
            .iter()
            .fold(mix64(self.seed ^ 0x5eed_7e57), |h, &s| mix64(h ^ u64::from(s)));
        TEST_NOISE * (2.0 * unit_f64(h) - 1.0)
    }

    /// Tabulates every architecture. Fails for spaces larger than
    /// [`MAX_ENUMERABLE`].
    pub fn tabulate(&self) -> Result<BenchmarkTable> {
        let count = self.space.count_distinct_architectures()?;
        if count > MAX_ENUMERABLE {
            return Err(Error::SpaceTooLarge(count));
        }
        let records = self
            .space
            .canonical_genotypes()
            .into_iter()
            .map(|key| {
                let eval = self.evaluate_canonical(&key).expect("landscape is total");
                BenchmarkRecord { key, eval }
            })
            .collect::<Vec<_>>();
        BenchmarkTable::from_records(self.space.clone(), records, Some(self.spec))
    }
}

impl Evaluator for SyntheticLandscape {
    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn objective_spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    fn evaluate_canonical(&self, key: &Genotype) -> Result<Evaluation> {
        self.space.validate(key)?;
        let g = key.symbols();
        let span = self.score_max - self.score_min;
        let unit = if span > 0.0 {
            ((self.score(g) - self.score_min) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let acc_val = ACC_FLOOR + (ACC_CEIL - ACC_FLOOR) * unit;
        let acc_test = (acc_val + self.noise(key)).clamp(0.0, 1.0);
        let complexity = g.iter().enumerate().map(|(p, &x)| self.cost[p][x as usize]).sum();
        Ok(Evaluation {
            acc_val,
            acc_test,
            complexity,
        })
    }
}

/// Tabulated synthetic benchmark for `space`.
pub fn generate_synthetic(space: &SearchSpace, seed: u64, ruggedness: f64) -> Result<BenchmarkTable> {
    let count = space.count_distinct_architectures()?;
    if count > MAX_ENUMERABLE {
        return Err(Error::SpaceTooLarge(count));
    }
    SyntheticLandscape::new(space.clone(), seed, ruggedness)?.tabulate()
}

/// Mean validation accuracy of `samples` uniformly drawn genotypes.
pub fn mean_random_accuracy<E: Evaluator + ?Sized>(evaluator: &E, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = seeded(seed);
    let space = evaluator.space();
    let mut total = 0.0;
    for _ in 0..samples {
        let g = space.canonicalize(&space.random_genotype(&mut rng));
        total += evaluator.evaluate_canonical(&g)?.acc_val;
    }
    Ok(total / samples.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceDescription;

    fn toy_space(seg: usize, free: usize) -> SearchSpace {
        let length = seg + free;
        let mut identity_symbol = vec![Some(0u8); seg];
        identity_symbol.extend(std::iter::repeat(None).take(free));
        SearchSpace::new(SpaceDescription {
            length,
            alphabet_sizes: vec![3; length],
            identity_symbol,
            segments: if seg > 0 { vec![(0, seg)] } else { vec![] },
            labels: None,
        })
        .unwrap()
    }

    fn read(text: &str, space: SearchSpace) -> Result<BenchmarkTable> {
        BenchmarkTable::read_csv(text.as_bytes(), Path::new("inline.csv"), space)
    }

    #[test]
    fn load_deduplicates_equivalent_rows() {
        let text = "genotype,acc_val,acc_test,complexity\n010,0.5,0.5,2\n100,0.5,0.5,2\n000,0.1,0.1,0\n";
        let t = read(text, toy_space(3, 0)).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t.get(&Genotype(vec![1, 0, 0])).is_some());
        assert_eq!(t.objective_spec().complexity_min, 0.0);
        assert_eq!(t.objective_spec().complexity_max, 2.0);
    }

    #[test]
    fn load_keys_rows_by_canonical_form() {
        let space = SearchSpace::macronas();
        let text = "# complexity_kind=mmacs complexity_min=10 complexity_max=50\n\
                    genotype,acc_val,acc_test,complexity\n01201020112001,0.912,0.905,31.25\n";
        let t = read(text, space.clone()).unwrap();
        let key = space.canonicalize(&Genotype::parse_key("01201020112001").unwrap());
        assert_eq!(key.key(), "12001200112010");
        let rec = t.get(&key).unwrap();
        assert_eq!(rec.eval.acc_val, 0.912);
        assert_eq!(rec.eval.complexity, 31.25);
        assert!(!t.is_complete());
        assert_eq!(t.objective_spec().complexity_max, 50.0);
    }

    #[test]
    fn load_rejects_conflicts_and_malformed_rows() {
        let space = toy_space(3, 0);
        let conflict = "genotype,acc_val,acc_test,complexity\n010,0.5,0.5,2\n001,0.51,0.5,2\n000,0,0,0\n";
        assert!(matches!(read(conflict, space.clone()), Err(Error::ConflictingRecords { .. })));
        let short = "genotype,acc_val,acc_test,complexity\n01,0.5,0.5,2\n";
        assert!(matches!(read(short, space.clone()), Err(Error::Parse { line: 2, .. })));
        let out_of_alphabet = "genotype,acc_val,acc_test,complexity\n013,0.5,0.5,2\n";
        assert!(read(out_of_alphabet, space.clone()).is_err());
        let bad_acc = "genotype,acc_val,acc_test,complexity\n010,1.5,0.5,2\n000,0,0,0\n";
        assert!(read(bad_acc, space.clone()).is_err());
        let no_header = "010,0.5,0.5,2\n";
        assert!(read(no_header, space).is_err());
    }

    #[test]
    fn normalization_endpoints_and_caching() {
        let space = toy_space(2, 0);
        let text = "genotype,acc_val,acc_test,complexity\n00,0.1,0.1,1\n10,0.5,0.4,3\n20,0.6,0.6,5\n11,0.7,0.6,4\n12,0.7,0.7,4\n21,0.8,0.7,4\n22,0.9,0.8,5\n";
        let t = read(text, space).unwrap();
        assert!(t.is_complete());
        let mut cache = EvaluationCache::new();
        let (_, lo, new) = objectives(&t, &Genotype(vec![0, 0]), &mut cache).unwrap();
        assert!(new);
        assert_eq!(lo.objectives.f2, 1.0);
        let (_, hi, _) = objectives(&t, &Genotype(vec![2, 2]), &mut cache).unwrap();
        assert_eq!(hi.objectives.f2, 0.0);
        assert_eq!(cache.unique_count(), 2);
        let (_, again, new) = objectives(&t, &Genotype(vec![0, 2]), &mut cache).unwrap();
        assert!(new);
        let (_, twice, new2) = objectives(&t, &Genotype(vec![2, 0]), &mut cache).unwrap();
        assert!(!new2);
        assert_eq!(again, twice);
        assert_eq!(cache.unique_count(), 3);
    }

    #[test]
    fn efficiency_is_monotone() {
        let spec = ObjectiveSpec::new(2.0, 10.0, ComplexityKind::Parameters).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=80 {
            let f2 = spec.efficiency(2.0 + i as f64 * 0.1);
            assert!((0.0..=1.0).contains(&f2));
            assert!(f2 < prev);
            prev = f2;
        }
        assert_eq!(spec.efficiency(-5.0), 1.0);
        assert_eq!(spec.efficiency(50.0), 0.0);
        assert!(ObjectiveSpec::new(1.0, 1.0, ComplexityKind::Mmacs).is_err());
    }

    #[test]
    fn missing_key_in_complete_table_errors() {
        let space = toy_space(1, 0);
        let t = read("genotype,acc_val,acc_test,complexity\n0,0.1,0.1,0\n1,0.2,0.2,1\n", space).unwrap();
        assert!(!t.is_complete());
        assert!(matches!(
            t.evaluate_canonical(&Genotype(vec![2])),
            Err(Error::MissingArchitecture(_))
        ));
    }

    #[test]
    fn front_of_listed_records() {
        let space = toy_space(0, 2);
        // nine free-position records; four carry the listed objective vectors
        let mut rows = String::from("# complexity_min=0 complexity_max=10\ngenotype,acc_val,acc_test,complexity\n");
        let listed = [(0.2, 0.9), (0.5, 0.5), (0.4, 0.6), (0.5, 0.4)];
        let mut k = 0;
        for a in 0..3 {
            for b in 0..3 {
                let (f1, f2) = listed.get(k).copied().unwrap_or((0.1, 0.1));
                rows.push_str(&format!("{a}{b},{f1},{f1},{}\n", (1.0 - f2) * 10.0));
                k += 1;
            }
        }
        let t = read(&rows, space).unwrap();
        let front: Vec<(f64, f64)> = exhaustive_pareto_front(&t)
            .unwrap()
            .iter()
            .map(|p| (p.objectives.f1, (p.objectives.f2 * 1e9).round() / 1e9))
            .collect();
        assert_eq!(front, vec![(0.2, 0.9), (0.4, 0.6), (0.5, 0.5)]);
    }

    #[test]
    fn front_of_single_record_and_incomplete_table() {
        let spec = ObjectiveSpec::new(0.0, 1.0, ComplexityKind::Mmacs).unwrap();
        let rec = BenchmarkRecord {
            key: Genotype(vec![1]),
            eval: Evaluation { acc_val: 0.3, acc_test: 0.3, complexity: 0.5 },
        };
        let front = front_of_records(std::slice::from_ref(&rec), &spec);
        assert_eq!(front.len(), 1);
        assert_eq!(front[0].key, rec.key);
        assert_eq!(front[0].objectives, ObjectiveVector::new(0.3, 0.5));

        let t = read(
            "# complexity_min=0 complexity_max=1\ngenotype,acc_val,acc_test,complexity\n0,0.3,0.3,0.5\n",
            toy_space(0, 1),
        )
        .unwrap();
        assert!(matches!(exhaustive_pareto_front(&t), Err(Error::IncompleteTable)));
    }

    #[test]
    fn synthetic_is_deterministic_and_identity_is_cheapest() {
        let space = toy_space(4, 2);
        let a = generate_synthetic(&space, 9, 0.4).unwrap();
        let b = generate_synthetic(&space, 9, 0.4).unwrap();
        let (mut ba, mut bb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ba).unwrap();
        b.write_csv(&mut bb).unwrap();
        assert_eq!(ba, bb);
        assert!(a.is_complete());

        let macro_space = SearchSpace::macronas();
        let landscape = SyntheticLandscape::new(macro_space.clone(), 1, 0.3).unwrap();
        let trivial = macro_space.trivial_genotype().unwrap();
        let e = landscape.evaluate_canonical(&trivial).unwrap();
        assert_eq!(e.complexity, 0.0);
        assert_eq!(landscape.objective_spec().objectives(&e).f2, 1.0);
    }

    #[test]
    fn synthetic_round_trips_through_csv() {
        let space = toy_space(3, 1);
        let t = generate_synthetic(&space, 4, 0.2).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = BenchmarkTable::read_csv(buf.as_slice(), Path::new("x"), space).unwrap();
        assert_eq!(back.records(), t.records());
        assert_eq!(back.objective_spec(), t.objective_spec());
    }

    #[test]
    fn synthetic_guards_space_size() {
        assert!(matches!(
            generate_synthetic(&SearchSpace::macronas_large(), 1, 0.0),
            Err(Error::SpaceTooLarge(_))
        ));
        // the landscape itself still serves the large space
        let l = SyntheticLandscape::new(SearchSpace::macronas_large(), 1, 0.3).unwrap();
        let g = l.space().trivial_or_fallback();
        assert!(l.evaluate_canonical(&g).is_ok());
    }

    #[test]
    fn evaluation_ignores_identity_placement() {
        let space = SearchSpace::macronas();
        let l = SyntheticLandscape::new(space.clone(), 3, 0.5).unwrap();
        let mut rng = seeded(1);
        let mut cache = EvaluationCache::new();
        for _ in 0..200 {
            let g = space.random_genotype(&mut rng);
            let c = space.canonicalize(&g);
            let (_, a, _) = objectives(&l, &g, &mut cache).unwrap();
            let (_, b, _) = objectives(&l, &c, &mut cache).unwrap();
            assert_eq!(a, b);
        }
        assert!(cache.unique_count() as u128 <= space.count_distinct_architectures().unwrap());
    }
}
