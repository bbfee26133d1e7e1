use rand::seq::SliceRandom;
use rand::Rng;

use super::{initial_genotypes, mutate, uniform_crossover, Hyperparameters, Member};
use crate::benchmark::Evaluator;
use crate::rng::RunRng;
use crate::run::{Run, Step};

/// Generational GA maximizing `f1`: uniform crossover, optional mutation and
/// size-2 tournaments over the joint parent and offspring pool.
///
/// Survivor selection shuffles the pool into disjoint pairs and keeps each
/// pair's winner, so the best member of the pool always survives.
pub fn ga<E: Evaluator + ?Sized>(run: &mut Run<'_, E>, rng: &mut RunRng, params: &Hyperparameters) -> Step {
    let space = run.space();
    let size = params.ga_population.max(2);
    let rate = params.mutation_rate_for(space.len());

    let mut population = Vec::with_capacity(size);
    for g in initial_genotypes(space, size, rng) {
        let e = run.evaluate(&g)?;
        population.push(Member {
            genotype: g,
            objectives: e.objectives,
        });
    }

    let mut converged = false;
    loop {
        run.mark("generation");
        if !converged && population.iter().all(|m| m.genotype == population[0].genotype) {
            converged = true;
            run.mark("converged");
        }

        let mut order: Vec<usize> = (0..population.len()).collect();
        order.shuffle(rng);
        let mut offspring = Vec::with_capacity(size);
        for pair in order.chunks(2) {
            let a = &population[pair[0]].genotype;
            let b = &population[pair[pair.len() - 1]].genotype;
            let (mut c1, mut c2) = uniform_crossover(a, b, rng);
            if params.ga_mutation {
                mutate(space, &mut c1, rate, rng);
                mutate(space, &mut c2, rate, rng);
            }
            for child in [c1, c2] {
                if offspring.len() < size {
                    let e = run.evaluate(&child)?;
                    offspring.push(Member {
                        genotype: child,
                        objectives: e.objectives,
                    });
                }
            }
        }

        let mut pool: Vec<Member> = population.into_iter().chain(offspring).collect();
        pool.shuffle(rng);
        let mut survivors = Vec::with_capacity(size);
        let mut rest = pool.into_iter();
        while let (Some(x), Some(y)) = (rest.next(), rest.next()) {
            let x_wins = match x.objectives.f1.total_cmp(&y.objectives.f1) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => rng.gen::<bool>(),
            };
            survivors.push(if x_wins { x } else { y });
        }
        population = survivors;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::generate_synthetic;
    use crate::rng::seeded;
    use crate::run::{Algorithm, Mode, RunSettings, StopReason};
    use crate::space::SearchSpace;

    #[test]
    fn population_best_never_drops() {
        let table = generate_synthetic(&SearchSpace::macronas(), 4, 0.3).unwrap();
        let mut run = Run::new(&table, RunSettings::new(3_000)).unwrap();
        let out = ga(&mut run, &mut seeded(5), &Hyperparameters::default());
        let log = run.finish(out, "ga", 5, Algorithm::Ga, Mode::Single).unwrap();
        assert_eq!(log.stop, StopReason::Budget);
        // best-so-far at each generation boundary is nondecreasing
        let mut prev = 0.0;
        for (at, label) in &log.markers {
            if label != "generation" {
                continue;
            }
            let best = log.trace[..*at].iter().map(|t| t.objectives.f1).fold(0.0, f64::max);
            assert!(best >= prev);
            prev = best;
        }
    }

    #[test]
    fn without_mutation_converges_and_stalls() {
        let table = generate_synthetic(&SearchSpace::macronas(), 4, 0.3).unwrap();
        let params = Hyperparameters {
            ga_mutation: false,
            ga_population: 20,
            ..Hyperparameters::default()
        };
        let mut settings = RunSettings::new(100_000);
        settings.max_idle_evaluations = 5_000;
        let mut run = Run::new(&table, settings).unwrap();
        let out = ga(&mut run, &mut seeded(9), &params);
        let log = run.finish(out, "ga", 9, Algorithm::Ga, Mode::Single).unwrap();
        assert_eq!(log.stop, StopReason::Stalled);
        assert!(log.truncated);
        let (at, _) = log.markers.iter().find(|(_, l)| l == "converged").expect("converged");
        assert_eq!(*at, log.unique_count());
    }
}
