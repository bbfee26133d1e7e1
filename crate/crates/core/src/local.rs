//! Random search and the random-restart scalarized local search.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::benchmark::Evaluator;
use crate::pareto::{scalarize, ObjectiveVector};
use crate::rng::RunRng;
use crate::run::{Evaluated, Mode, Run, Step};
use crate::space::Genotype;

/// Seeds the archive with the trivial net, then samples uniformly.
pub fn random_search<E: Evaluator + ?Sized>(run: &mut Run<'_, E>, rng: &mut RunRng) -> Step {
    let space = run.space();
    run.evaluate(&space.trivial_or_fallback())?;
    loop {
        let g = space.random_genotype(rng);
        run.evaluate(&g)?;
    }
}

/// Seeds the archive with the trivial net, then repeats single passes of
/// coordinate-wise best-improvement from uniformly random starts. In
/// multi-objective mode each restart draws its own scalarization weight; in
/// single-objective mode the weight is fixed to 1 (accuracy only).
pub fn local_search<E: Evaluator + ?Sized>(run: &mut Run<'_, E>, rng: &mut RunRng, mode: Mode) -> Step {
    let space = run.space();
    run.evaluate(&space.trivial_or_fallback())?;
    loop {
        run.mark("restart");
        let start = space.random_genotype(rng);
        let first = run.evaluate(&start)?;
        let alpha = match mode {
            Mode::Multi => rng.gen::<f64>(),
            Mode::Single => 1.0,
        };
        let mut order: Vec<usize> = (0..space.len()).collect();
        order.shuffle(rng);
        improvement_pass(run, start, first, alpha, &order, |_| ())?;
    }
}

/// One pass over `order`. For each variable every alternative symbol is
/// evaluated and the best scalarized one kept; the incumbent wins ties, then
/// the lowest symbol. `observe` sees the scalarized value of the current
/// solution after each variable.
pub(crate) fn improvement_pass<E: Evaluator + ?Sized>(
    run: &mut Run<'_, E>,
    mut current: Genotype,
    mut current_eval: Evaluated,
    alpha: f64,
    order: &[usize],
    mut observe: impl FnMut(f64),
) -> Step<Genotype> {
    let space = run.space();
    let value = |v: &ObjectiveVector| scalarize(alpha, v).expect("alpha drawn from [0, 1]");
    for &pos in order {
        let incumbent = current.0[pos];
        let mut best_symbol = incumbent;
        let mut best_value = value(&current_eval.objectives);
        let mut best_eval = None;
        for s in 0..space.alphabet_size(pos) as u8 {
            if s == incumbent {
                continue;
            }
            let mut candidate = current.clone();
            candidate.0[pos] = s;
            let e = run.evaluate(&candidate)?;
            let v = value(&e.objectives);
            if v > best_value {
                best_value = v;
                best_symbol = s;
                best_eval = Some(e);
            }
        }
        if let Some(e) = best_eval {
            current.0[pos] = best_symbol;
            current_eval = e;
        }
        observe(best_value);
    }
    Ok(current)
}
