//! CSV exports for the plotting scripts.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::Result;
use lsnas::experiment::StoredRun;
use lsnas::stats::{complexity_trace, metric_series, percentile, Metric};
use lsnas::{Archive, ObjectiveVector};

use crate::create;

/// `convergence_runs.csv` with one value per run and snapshot, and
/// `convergence.csv` with the median and 25/75th percentiles across runs.
pub fn convergence(runs: &[StoredRun], out: &Path, reference: Option<&[ObjectiveVector]>) -> Result<()> {
    let mut metrics = vec![Metric::HvVal, Metric::HvTest];
    if reference.is_some() {
        metrics.push(Metric::Igd);
    }
    let mut long = create(&out.join("convergence_runs.csv"))?;
    writeln!(long, "algorithm,mode,run_id,seed,metric,snapshot,value")?;
    // (algorithm, mode, metric, snapshot) -> values, config hashes
    let mut cells: BTreeMap<(String, String, &str, usize), (Vec<f64>, Vec<String>)> = BTreeMap::new();
    for run in runs {
        let log = &run.log;
        for &metric in &metrics {
            for (at, value) in metric_series(log, metric, reference)? {
                writeln!(
                    long,
                    "{},{},{},{},{metric},{at},{value}",
                    log.algorithm, log.mode, log.run_id, log.seed
                )?;
                let cell = cells
                    .entry((log.algorithm.to_string(), log.mode.to_string(), metric.name(), at))
                    .or_default();
                cell.0.push(value);
                if !cell.1.contains(&run.meta.experiment.config_hash) {
                    cell.1.push(run.meta.experiment.config_hash.clone());
                }
            }
        }
    }
    long.flush()?;

    let mut summary = create(&out.join("convergence.csv"))?;
    writeln!(summary, "algorithm,mode,metric,snapshot,runs,median,p25,p75,config_hash")?;
    for ((alg, mode, metric, at), (values, hashes)) in &cells {
        let q = |p| percentile(values, p).expect("nonempty cell");
        writeln!(
            summary,
            "{alg},{mode},{metric},{at},{},{},{},{},{}",
            values.len(),
            q(50.0),
            q(25.0),
            q(75.0),
            hashes.join(";")
        )?;
    }
    summary.flush()?;
    Ok(())
}

/// `fronts.csv`: every archive dump, snapshots and final, in long format.
pub fn fronts(runs: &[StoredRun], out: &Path) -> Result<()> {
    let mut w = create(&out.join("fronts.csv"))?;
    writeln!(w, "algorithm,mode,run_id,snapshot,canonical_key,f1,f2,acc_test,eval_index,config_hash")?;
    for run in runs {
        let log = &run.log;
        let dumps = log
            .snapshots
            .iter()
            .map(|s| (s.at.to_string(), &s.archive))
            .chain(std::iter::once(("final".to_string(), &log.final_archive)));
        for (label, archive) in dumps {
            write_archive(&mut w, run, &label, archive)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_archive(w: &mut impl Write, run: &StoredRun, label: &str, archive: &Archive) -> Result<()> {
    let log = &run.log;
    for e in archive.entries() {
        writeln!(
            w,
            "{},{},{},{label},{},{},{},{},{},{}",
            log.algorithm,
            log.mode,
            log.run_id,
            e.key,
            e.objectives.f1,
            e.objectives.f2,
            e.acc_test,
            e.eval_index,
            run.meta.experiment.config_hash
        )?;
    }
    Ok(())
}

/// `traces.csv`: raw and smoothed complexity along every run.
pub fn traces(runs: &[StoredRun], out: &Path, window: usize) -> Result<()> {
    let mut w = create(&out.join("traces.csv"))?;
    writeln!(w, "algorithm,mode,run_id,eval_index,f1,f2,complexity,complexity_smoothed,window")?;
    for run in runs {
        let log = &run.log;
        let raw: Vec<f64> = log.trace.iter().map(|t| t.complexity).collect();
        let smooth = complexity_trace(&raw, window)?;
        for (t, s) in log.trace.iter().zip(smooth) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{s},{window}",
                log.algorithm, log.mode, log.run_id, t.eval_index, t.objectives.f1, t.objectives.f2, t.complexity
            )?;
        }
    }
    w.flush()?;
    Ok(())
}
