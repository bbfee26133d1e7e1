//! Gene-pool optimal mixing under the interleaved multi-start scheme (IMS):
//! MO-GOMEA for two objectives and GOMEA for accuracy alone.

use rand::Rng;

use super::cluster::cluster_population;
use super::linkage::LinkageTree;
use super::{initial_genotypes, Hyperparameters, Member};
use crate::benchmark::Evaluator;
use crate::pareto::{dominates, ObjectiveVector};
use crate::rng::RunRng;
use crate::run::{Run, Step};
use crate::space::Genotype;

#[derive(Debug)]
struct Population {
    members: Vec<Member>,
    generations: usize,
    /// Archive insertions made during each generation.
    contributions: Vec<usize>,
    retired: bool,
}

impl Population {
    fn converged(&self) -> bool {
        self.members.iter().all(|m| m.genotype == self.members[0].genotype)
    }

    fn recent_contributions(&self) -> usize {
        self.contributions.iter().rev().take(2).sum()
    }

    fn mean_f1(&self) -> f64 {
        self.members.iter().map(|m| m.objectives.f1).sum::<f64>() / self.members.len() as f64
    }
}

/// Best solution found so far in single-objective mode.
#[derive(Debug, Clone)]
struct Elite {
    genotype: Genotype,
    fitness: f64,
}

impl Elite {
    fn offer(&mut self, g: &Genotype, fitness: f64) {
        if fitness > self.fitness {
            self.fitness = fitness;
            self.genotype = g.clone();
        }
    }
}

trait Variant {
    fn generation<E: Evaluator + ?Sized>(
        &mut self,
        run: &mut Run<'_, E>,
        pop: &mut Population,
        rng: &mut RunRng,
    ) -> Step<usize>;

    /// Marks populations that should stop evolving.
    fn retire(&self, pops: &mut [Population]);

    fn observe_member(&mut self, _m: &Member) {}
}

struct Ims<V> {
    variant: V,
    populations: Vec<Population>,
    ticks: Vec<usize>,
    base: usize,
    interleave: usize,
}

impl<V: Variant> Ims<V> {
    fn new(variant: V, params: &Hyperparameters) -> Self {
        Self {
            variant,
            populations: Vec::new(),
            ticks: Vec::new(),
            base: params.ims_base.max(1),
            interleave: params.ims_interleave.max(1),
        }
    }

    fn spawn<E: Evaluator + ?Sized>(&mut self, run: &mut Run<'_, E>, rng: &mut RunRng) -> Step {
        let idx = self.populations.len();
        let size = self.base.saturating_mul(1usize << idx.min(40));
        run.mark(format!("population {size}"));
        let mut members = Vec::with_capacity(size.min(run.budget()));
        for g in initial_genotypes(run.space(), size, rng) {
            let e = run.evaluate(&g)?;
            let m = Member {
                genotype: g,
                objectives: e.objectives,
            };
            self.variant.observe_member(&m);
            members.push(m);
        }
        self.populations.push(Population {
            members,
            generations: 0,
            contributions: Vec::new(),
            retired: false,
        });
        self.ticks.push(0);
        Ok(())
    }

    /// One step of the interleaved recursion starting at population `idx`.
    fn step<E: Evaluator + ?Sized>(&mut self, run: &mut Run<'_, E>, rng: &mut RunRng, mut idx: usize) -> Step {
        loop {
            if idx == self.populations.len() {
                return self.spawn(run, rng);
            }
            if self.populations[idx].retired {
                idx += 1;
                continue;
            }
            let mut pop = std::mem::replace(
                &mut self.populations[idx],
                Population {
                    members: Vec::new(),
                    generations: 0,
                    contributions: Vec::new(),
                    retired: true,
                },
            );
            let result = self.variant.generation(run, &mut pop, rng);
            pop.generations += 1;
            if let Ok(added) = result {
                pop.contributions.push(added);
            }
            self.populations[idx] = pop;
            result?;
            self.variant.retire(&mut self.populations);
            self.ticks[idx] += 1;
            if self.ticks[idx] % self.interleave != 0 {
                return Ok(());
            }
            idx += 1;
        }
    }

    fn run<E: Evaluator + ?Sized>(&mut self, run: &mut Run<'_, E>, rng: &mut RunRng) -> Step {
        loop {
            self.step(run, rng, 0)?;
        }
    }
}

struct MultiObjective {
    clusters: usize,
}

impl Variant for MultiObjective {
    fn generation<E: Evaluator + ?Sized>(
        &mut self,
        run: &mut Run<'_, E>,
        pop: &mut Population,
        rng: &mut RunRng,
    ) -> Step<usize> {
        let space = run.space();
        let objs: Vec<ObjectiveVector> = pop.members.iter().map(|m| m.objectives).collect();
        let clustering = cluster_population(&objs, self.clusters);
        let parents: Vec<Genotype> = pop.members.iter().map(|m| m.genotype.clone()).collect();
        let mut added = 0;

        for c in 0..clustering.k {
            let members = clustering.members(c);
            if members.is_empty() {
                continue;
            }
            let refs: Vec<&Genotype> = members.iter().map(|&i| &parents[i]).collect();
            let tree = LinkageTree::learn(&refs, space.alphabet_sizes());
            let extreme = clustering.extreme_objective(c);

            for &i in &members {
                let mut current = pop.members[i].clone();
                let start = current.objectives;
                for subset in tree.shuffled(rng) {
                    let donor = &parents[members[rng.gen_range(0..members.len())]];
                    if subset.iter().all(|&p| donor.0[p] == current.genotype.0[p]) {
                        continue;
                    }
                    let mut candidate = current.genotype.clone();
                    for &p in subset {
                        candidate.0[p] = donor.0[p];
                    }
                    let e = run.evaluate(&candidate)?;
                    added += usize::from(e.archived);
                    let (old, new) = (current.objectives, e.objectives);
                    // mixing extreme and archive moves could otherwise drift
                    // below where the member started
                    let accept = !dominates(&start, &new)
                        && (dominates(&new, &old)
                        || new == old
                        || extreme.is_some_and(|o| new.get(o) > old.get(o))
                        || e.archived
                        || run.archive().contains_key(&e.key));
                    if accept {
                        current = Member {
                            genotype: candidate,
                            objectives: new,
                        };
                    }
                }
                pop.members[i] = current;
            }
        }
        Ok(added)
    }

    fn retire(&self, pops: &mut [Population]) {
        for i in 0..pops.len() {
            if pops[i].retired {
                continue;
            }
            let overtaken = pops[i + 1..]
                .iter()
                .any(|p| !p.retired && p.generations >= 2 && p.recent_contributions() > pops[i].recent_contributions());
            if pops[i].converged() || overtaken {
                pops[i].retired = true;
            }
        }
    }
}

struct SingleObjective {
    elite: Elite,
    added: usize,
}

impl SingleObjective {
    fn mix<E: Evaluator + ?Sized>(
        &mut self,
        run: &mut Run<'_, E>,
        current: &mut Member,
        donor: &Genotype,
        subset: &[usize],
    ) -> Step<Option<f64>> {
        if subset.iter().all(|&p| donor.0[p] == current.genotype.0[p]) {
            return Ok(None);
        }
        let mut candidate = current.genotype.clone();
        for &p in subset {
            candidate.0[p] = donor.0[p];
        }
        let e = run.evaluate(&candidate)?;
        self.added += usize::from(e.archived);
        self.elite.offer(&candidate, e.objectives.f1);
        if e.objectives.f1 >= current.objectives.f1 {
            *current = Member {
                genotype: candidate,
                objectives: e.objectives,
            };
        }
        Ok(Some(e.objectives.f1))
    }
}

impl Variant for SingleObjective {
    fn generation<E: Evaluator + ?Sized>(
        &mut self,
        run: &mut Run<'_, E>,
        pop: &mut Population,
        rng: &mut RunRng,
    ) -> Step<usize> {
        let space = run.space();
        let parents: Vec<Genotype> = pop.members.iter().map(|m| m.genotype.clone()).collect();
        let refs: Vec<&Genotype> = parents.iter().collect();
        let tree = LinkageTree::learn(&refs, space.alphabet_sizes());
        let n = parents.len();
        self.added = 0;

        for i in 0..n {
            let mut current = pop.members[i].clone();
            let start = current.objectives.f1;
            for subset in tree.shuffled(rng) {
                // any member but the recipient, when there is one
                let d = if n > 1 {
                    let d = rng.gen_range(0..n - 1);
                    d + usize::from(d >= i)
                } else {
                    i
                };
                self.mix(run, &mut current, &parents[d], subset)?;
            }

            if current.objectives.f1 <= start {
                let elite = self.elite.genotype.clone();
                let mut improved = false;
                for subset in tree.shuffled(rng) {
                    let before = current.clone();
                    let fitness = self.mix(run, &mut current, &elite, subset)?;
                    match fitness {
                        Some(f) if f > before.objectives.f1 => {
                            improved = true;
                            break;
                        }
                        // forced improvement keeps strict gains only
                        _ => current = before,
                    }
                }
                if !improved && self.elite.fitness > current.objectives.f1 {
                    let e = run.evaluate(&elite)?;
                    current = Member {
                        genotype: elite,
                        objectives: e.objectives,
                    };
                }
            }
            pop.members[i] = current;
        }
        Ok(self.added)
    }

    fn retire(&self, pops: &mut [Population]) {
        for i in 0..pops.len() {
            if pops[i].retired {
                continue;
            }
            let overtaken = pops[i + 1..]
                .iter()
                .any(|p| !p.retired && p.generations >= 1 && p.mean_f1() > pops[i].mean_f1());
            if pops[i].converged() || overtaken {
                pops[i].retired = true;
            }
        }
    }

    fn observe_member(&mut self, m: &Member) {
        self.elite.offer(&m.genotype, m.objectives.f1);
    }
}

/// MO-GOMEA: per-cluster linkage trees and gene-pool optimal mixing with
/// archive-aware acceptance, stepped by the IMS.
pub fn mo_gomea<E: Evaluator + ?Sized>(run: &mut Run<'_, E>, rng: &mut RunRng, params: &Hyperparameters) -> Step {
    Ims::new(
        MultiObjective {
            clusters: params.clusters.max(1),
        },
        params,
    )
    .run(run, rng)
}

/// Single-objective GOMEA maximizing `f1` with forced improvement towards
/// the best solution found so far.
pub fn gomea<E: Evaluator + ?Sized>(run: &mut Run<'_, E>, rng: &mut RunRng, params: &Hyperparameters) -> Step {
    let elite = Elite {
        genotype: run.space().trivial_or_fallback(),
        fitness: f64::NEG_INFINITY,
    };
    Ims::new(SingleObjective { elite, added: 0 }, params).run(run, rng)
}
