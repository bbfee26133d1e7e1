//! Bi-objective Pareto machinery. Both objectives are maximized and live in
//! `[0, 1]`; the hypervolume reference point is the origin.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Genotype;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    /// Validation accuracy.
    pub f1: f64,
    /// One minus normalized complexity.
    pub f2: f64,
}

impl ObjectiveVector {
    pub const fn new(f1: f64, f2: f64) -> Self {
        Self { f1, f2 }
    }

    pub fn get(&self, objective: usize) -> f64 {
        match objective {
            0 => self.f1,
            1 => self.f2,
            _ => panic!("objective index {objective} out of range"),
        }
    }
}

/// Strict Pareto domination: componentwise `>=` and not equal.
pub fn dominates(x: &ObjectiveVector, y: &ObjectiveVector) -> bool {
    x.f1 >= y.f1 && x.f2 >= y.f2 && (x.f1 != y.f1 || x.f2 != y.f2)
}

/// Nondominated subset, one representative per distinct vector, sorted by
/// ascending `f1`.
pub fn maxima(points: &[ObjectiveVector]) -> Vec<ObjectiveVector> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| b.f1.total_cmp(&a.f1).then(b.f2.total_cmp(&a.f2)));
    let mut out: Vec<ObjectiveVector> = Vec::new();
    let mut best_f2 = f64::NEG_INFINITY;
    for p in sorted {
        if p.f2 > best_f2 {
            out.push(p);
            best_f2 = p.f2;
        }
    }
    out.reverse();
    out
}

/// Area dominated by `front` above the origin.
pub fn hypervolume(front: &[ObjectiveVector]) -> f64 {
    // maxima are sorted by ascending f1, hence descending f2
    let staircase = maxima(front);
    let mut area = 0.0;
    let mut covered_f2 = 0.0;
    for p in staircase.iter().rev() {
        if p.f2 > covered_f2 {
            area += p.f1.max(0.0) * (p.f2 - covered_f2);
            covered_f2 = p.f2;
        }
    }
    area
}

/// Inverse generational distance: mean distance from each reference point
/// to its nearest front point.
pub fn igd(front: &[ObjectiveVector], reference: &[ObjectiveVector]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::InvalidArgument("igd reference set is empty".into()));
    }
    if front.is_empty() {
        return Err(Error::InvalidArgument("igd front is empty".into()));
    }
    let total: f64 = reference
        .iter()
        .map(|r| {
            front
                .iter()
                .map(|p| (p.f1 - r.f1).hypot(p.f2 - r.f2))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / reference.len() as f64)
}

pub fn scalarize(alpha: f64, v: &ObjectiveVector) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(alpha * v.f1 + (1.0 - alpha) * v.f2)
}

/// Success threshold `acc_star - eps * (acc_star - acc_bar)`, where `acc_bar`
/// is the mean accuracy of randomly sampled architectures.
pub fn epsilon_threshold(acc_star: f64, acc_bar: f64, eps: f64) -> Result<f64> {
    if acc_bar > acc_star {
        return Err(Error::InvalidArgument(format!(
            "mean random accuracy {acc_bar} exceeds optimum {acc_star}"
        )));
    }
    Ok(acc_star - eps * (acc_star - acc_bar))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub key: Genotype,
    pub objectives: ObjectiveVector,
    pub acc_test: f64,
    /// Unique-evaluation count at which the entry was discovered.
    pub eval_index: usize,
}

/// Unbounded elitist archive of mutually nondominated solutions.
///
/// Entries are kept sorted by ascending `f1`, which for a 2-D nondominated
/// set means strictly descending `f2`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives).collect()
    }

    pub fn hypervolume(&self) -> f64 {
        hypervolume(&self.objectives())
    }

    pub fn contains_key(&self, key: &Genotype) -> bool {
        self.entries.iter().any(|e| &e.key == key)
    }

    /// True if some entry dominates or equals `v`.
    pub fn covers(&self, v: &ObjectiveVector) -> bool {
        let idx = self.entries.partition_point(|e| e.objectives.f1 < v.f1);
        idx < self.entries.len() && self.entries[idx].objectives.f2 >= v.f2
    }

    /// Inserts `candidate` unless an entry dominates or equals it, removing
    /// every entry it dominates. Returns whether it was inserted.
    pub fn update(&mut self, candidate: ArchiveEntry) -> bool {
        let v = candidate.objectives;
        // first entry with f1 >= v.f1 has the largest f2 among those
        let idx = self.entries.partition_point(|e| e.objectives.f1 < v.f1);
        if idx < self.entries.len() && self.entries[idx].objectives.f2 >= v.f2 {
            return false;
        }
        let mut end = idx;
        if end < self.entries.len() && self.entries[end].objectives.f1 == v.f1 {
            end += 1;
        }
        let mut start = idx;
        while start > 0 && self.entries[start - 1].objectives.f2 <= v.f2 {
            start -= 1;
        }
        self.entries.splice(start..end, std::iter::once(candidate));
        debug_assert!(self.is_consistent());
        true
    }

    fn is_consistent(&self) -> bool {
        self.entries.windows(2).all(|w| {
            w[0].objectives.f1 < w[1].objectives.f1 && w[0].objectives.f2 > w[1].objectives.f2
        })
    }

    /// CSV dump `canonical_key,f1,f2,acc_test,eval_index`, ascending `f1`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "canonical_key,f1,f2,acc_test,eval_index")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{}",
                e.key, e.objectives.f1, e.objectives.f2, e.acc_test, e.eval_index
            )?;
        }
        Ok(())
    }
}
