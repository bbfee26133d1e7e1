//! Run statistics: Mann-Whitney U with Bonferroni correction, success-rate
//! curves, per-snapshot quality indicators and smoothed complexity traces.

use std::fmt;
use std::str::FromStr;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::pareto::{epsilon_threshold, hypervolume, igd, maxima, Archive, ObjectiveVector};
use crate::run::{Mode, RunLog};

/// Largest smaller-sample size for which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 8;

/// Family-wise significance level.
pub const ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Whether `p` comes from the exact null distribution.
    pub exact: bool,
}

/// Two-sided Mann-Whitney U test. Ties receive midranks. The p-value is
/// exact when the smaller sample has at most [`EXACT_LIMIT`] values and there
/// are no ties, otherwise it uses the normal approximation with tie-corrected
/// variance and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("Mann-Whitney U needs two nonempty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("Mann-Whitney U sample contains NaN".into()));
    }
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let mut pooled: Vec<(f64, bool)> = a.iter().map(|&v| (v, true)).chain(b.iter().map(|&v| (v, false))).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j share their average
        let midrank = (i + 1 + j) as f64 / 2.0;
        let in_a = pooled[i..j].iter().filter(|p| p.1).count();
        rank_sum_a += midrank * in_a as f64;
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let u = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;

    if n1.min(n2) <= EXACT_LIMIT && tie_term == 0.0 {
        // distribution of the smaller sample's U; U_a + U_b = n1 n2
        let (small, large, u_small) = if n1 <= n2 {
            (n1, n2, u)
        } else {
            (n2, n1, (n1 * n2) as f64 - u)
        };
        let counts = exact_u_counts(small, large);
        let total: u128 = counts.iter().sum();
        let k = u_small.round() as usize;
        let lower: u128 = counts[..=k].iter().sum();
        let upper: u128 = counts[k..].iter().sum();
        let tail = lower.min(upper) as f64 / total as f64;
        return Ok(MannWhitney {
            u,
            p: (2.0 * tail).min(1.0),
            exact: true,
        });
    }

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let mean = n1f * n2f / 2.0;
    let variance = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / variance.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * (1.0 - normal.cdf(z))).min(1.0)
    };
    Ok(MannWhitney { u, p, exact: false })
}

/// Number of rank arrangements giving each value of U for a sample of size
/// `m` against one of size `n`, without ties. Index = U.
pub fn exact_u_counts(m: usize, n: usize) -> Vec<u128> {
    // f[i][u] for the current j: arrangements of i first-sample and j
    // second-sample values with U = u. The largest value either comes from
    // the first sample (exceeding all j others) or from the second.
    let max_u = m * n;
    let mut f = vec![vec![0u128; max_u + 1]; m + 1];
    for row in f.iter_mut() {
        row[0] = 1;
    }
    for j in 1..=n {
        for i in 1..=m {
            for u in (0..=i * j).rev() {
                let from_first = if u >= j { f[i - 1][u - j] } else { 0 };
                // f[i][u] still holds the value for j - 1
                f[i][u] += from_first;
            }
        }
    }
    std::mem::take(&mut f[m])
}

/// Bonferroni-adjusted p-value for a family of `m` comparisons.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m.max(1) as f64).min(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub a: String,
    pub b: String,
    pub metric: Metric,
    pub at: usize,
    pub u: f64,
    pub p: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

/// All pairwise tests between groups at one snapshot for one metric; the
/// Bonferroni family is the set of these pairs.
pub fn pairwise(groups: &[(String, Vec<f64>)], metric: Metric, at: usize) -> Result<Vec<Comparison>> {
    let k = groups.len();
    let m = k * k.saturating_sub(1) / 2;
    let mut out = Vec::with_capacity(m);
    for i in 0..k {
        for j in (i + 1)..k {
            let t = mann_whitney_u(&groups[i].1, &groups[j].1)?;
            let p_adjusted = bonferroni(t.p, m);
            out.push(Comparison {
                a: groups[i].0.clone(),
                b: groups[j].0.clone(),
                metric,
                at,
                u: t.u,
                p: t.p,
                p_adjusted,
                significant: p_adjusted < ALPHA,
            });
        }
    }
    Ok(out)
}

pub const COMPARISON_HEADER: &str = "a,b,metric,snapshot,u,p,p_adjusted,significant";

pub fn write_comparisons<W: std::io::Write>(rows: &[Comparison], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{COMPARISON_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.a, r.b, r.metric, r.at, r.u, r.p, r.p_adjusted, r.significant
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    HvVal,
    HvTest,
    Igd,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::HvVal => "hv_val",
            Metric::HvTest => "hv_test",
            Metric::Igd => "igd",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Metric::HvVal, Metric::HvTest, Metric::Igd]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric {s:?}")))
    }
}

/// Hypervolume of `archive` with test accuracy in place of `f1`. The entries
/// stay those selected on validation accuracy; the substitution can make
/// some dominated, so maxima are taken before the sweep.
pub fn hv_test(archive: &Archive) -> f64 {
    let points: Vec<ObjectiveVector> = archive
        .entries()
        .iter()
        .map(|e| ObjectiveVector::new(e.acc_test, e.objectives.f2))
        .collect();
    hypervolume(&maxima(&points))
}

pub fn archive_metric(archive: &Archive, metric: Metric, reference: Option<&[ObjectiveVector]>) -> Result<f64> {
    match metric {
        Metric::HvVal => Ok(archive.hypervolume()),
        Metric::HvTest => Ok(hv_test(archive)),
        Metric::Igd => {
            let reference = reference.ok_or_else(|| Error::InvalidArgument("igd needs a reference front".into()))?;
            igd(&archive.objectives(), reference)
        }
    }
}

/// `(snapshot, value)` for every snapshot of `log`.
pub fn metric_series(log: &RunLog, metric: Metric, reference: Option<&[ObjectiveVector]>) -> Result<Vec<(usize, f64)>> {
    log.snapshots
        .iter()
        .map(|s| Ok((s.at, archive_metric(&s.archive, metric, reference)?)))
        .collect()
}

/// Number of runs whose best `f1` so far reaches the ε threshold, for every
/// unique-evaluation count from 1 to the longest trace. Shorter runs keep
/// their final state.
pub fn success_rate_curve(logs: &[RunLog], acc_star: f64, acc_bar: f64, eps: f64) -> Result<Vec<usize>> {
    if let Some(log) = logs.iter().find(|l| l.mode == Mode::Multi) {
        return Err(Error::InvalidArgument(format!(
            "success rates need single-objective runs; {} is multi-objective",
            log.run_id
        )));
    }
    let threshold = epsilon_threshold(acc_star, acc_bar, eps)?;
    let horizon = logs.iter().map(|l| l.trace.len()).max().unwrap_or(0);
    let mut curve = vec![0usize; horizon];
    for log in logs {
        if let Some(first) = log.trace.iter().position(|t| t.objectives.f1 >= threshold) {
            for c in &mut curve[first..] {
                *c += 1;
            }
        }
    }
    Ok(curve)
}

/// Moving average with a centered window of `window` values, shrunk at both
/// ends to the available values.
pub fn complexity_trace(values: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let n = values.len();
    let before = (window - 1) / 2;
    let after = window - 1 - before;
    // direct sums keep window 1 and constant traces exact
    Ok((0..n)
        .map(|i| {
            let window = &values[i.saturating_sub(before)..(i + after + 1).min(n)];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect())
}

/// Linearly interpolated percentile (`q` in [0, 100]) of unsorted values.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 100.0) / 100.0 * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}
