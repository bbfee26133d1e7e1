//! Evolutionary algorithms: NSGA-II, MO-GOMEA, a generational GA and GOMEA.

pub mod cluster;
pub mod ga;
pub mod gomea;
pub mod linkage;
pub mod nsga2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pareto::ObjectiveVector;
use crate::space::{Genotype, SearchSpace};

pub use cluster::{cluster_population, ClusterAssignment};
pub use linkage::LinkageTree;
pub use nsga2::{crowding_distance, non_dominated_sort};

/// Tunable settings of the evolutionary algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    /// NSGA-II population size.
    pub nsga2_population: usize,
    /// GA population size.
    pub ga_population: usize,
    /// NSGA-II crossover probability.
    pub crossover_probability: f64,
    /// Per-variable mutation probability; `None` means `1 / length`.
    pub mutation_rate: Option<f64>,
    /// Disables GA mutation entirely.
    pub ga_mutation: bool,
    /// Number of objective-space clusters in MO-GOMEA.
    pub clusters: usize,
    /// Size of the first IMS population.
    pub ims_base: usize,
    /// Generations of a population per generation of the next larger one.
    pub ims_interleave: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            nsga2_population: 100,
            ga_population: 100,
            crossover_probability: 1.0,
            mutation_rate: None,
            ga_mutation: true,
            clusters: 5,
            ims_base: 8,
            ims_interleave: 4,
        }
    }
}

impl Hyperparameters {
    pub fn mutation_rate_for(&self, length: usize) -> f64 {
        self.mutation_rate.unwrap_or(1.0 / length as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub genotype: Genotype,
    pub objectives: ObjectiveVector,
}

/// Flips each variable with probability `rate` to a different symbol drawn
/// uniformly from the remaining ones.
pub fn mutate<R: Rng + ?Sized>(space: &SearchSpace, g: &mut Genotype, rate: f64, rng: &mut R) {
    for pos in 0..g.len() {
        if rng.gen::<f64>() < rate {
            let a = space.alphabet_size(pos) as u8;
            let shift = rng.gen_range(1..a);
            g.0[pos] = (g.0[pos] + shift) % a;
        }
    }
}

/// Exchanges the segment between two distinct cut points.
pub fn two_point_crossover<R: Rng + ?Sized>(a: &Genotype, b: &Genotype, rng: &mut R) -> (Genotype, Genotype) {
    let n = a.len();
    let (mut c1, mut c2) = (a.clone(), b.clone());
    if n < 2 {
        return (c1, c2);
    }
    // cut points in 0..=n, distinct
    let x = rng.gen_range(0..=n);
    let mut y = rng.gen_range(0..n);
    if y >= x {
        y += 1;
    }
    let (lo, hi) = (x.min(y), x.max(y));
    c1.0[lo..hi].copy_from_slice(&b.0[lo..hi]);
    c2.0[lo..hi].copy_from_slice(&a.0[lo..hi]);
    (c1, c2)
}

/// Each gene comes from either parent with probability 1/2; the second child
/// takes the complementary choices.
pub fn uniform_crossover<R: Rng + ?Sized>(a: &Genotype, b: &Genotype, rng: &mut R) -> (Genotype, Genotype) {
    let (mut c1, mut c2) = (a.clone(), b.clone());
    for pos in 0..a.len() {
        if rng.gen::<bool>() {
            c1.0[pos] = b.0[pos];
            c2.0[pos] = a.0[pos];
        }
    }
    (c1, c2)
}

/// Initial population: the trivial net plus uniformly random genotypes.
pub(crate) fn initial_genotypes<R: Rng + ?Sized>(space: &SearchSpace, size: usize, rng: &mut R) -> Vec<Genotype> {
    let mut out = Vec::with_capacity(size);
    out.push(space.trivial_or_fallback());
    while out.len() < size {
        out.push(space.random_genotype(rng));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn mutation_always_changes_flipped_symbols() {
        let space = SearchSpace::macronas();
        let mut rng = seeded(2);
        let original = Genotype(vec![1; 14]);
        let mut flips = 0usize;
        let trials = 20_000;
        for _ in 0..trials {
            let mut g = original.clone();
            mutate(&space, &mut g, 1.0 / 14.0, &mut rng);
            flips += g.0.iter().zip(&original.0).filter(|(a, b)| a != b).count();
            assert!(g.0.iter().all(|&s| s < 3));
        }
        let mean = flips as f64 / trials as f64;
        assert!((mean - 1.0).abs() < 0.03, "mean flips {mean}");

        let mut g = original.clone();
        mutate(&space, &mut g, 1.0, &mut rng);
        assert!(g.0.iter().all(|&s| s != 1));
    }

    #[test]
    fn crossovers_preserve_genes() {
        let mut rng = seeded(4);
        let a = Genotype(vec![0; 10]);
        let b = Genotype(vec![1; 10]);
        for _ in 0..200 {
            let (c1, c2) = two_point_crossover(&a, &b, &mut rng);
            for i in 0..10 {
                assert_ne!(c1.0[i], c2.0[i]);
            }
            // child 1 takes one contiguous block from b
            let ones: Vec<usize> = (0..10).filter(|&i| c1.0[i] == 1).collect();
            if let (Some(&f), Some(&l)) = (ones.first(), ones.last()) {
                assert_eq!(l - f + 1, ones.len());
            }
            let (u1, u2) = uniform_crossover(&a, &b, &mut rng);
            for i in 0..10 {
                assert_ne!(u1.0[i], u2.0[i]);
            }
        }
        let same = Genotype(vec![2, 0, 1, 1]);
        let (u1, u2) = uniform_crossover(&same, &same, &mut rng);
        assert_eq!(u1, same);
        assert_eq!(u2, same);
    }
}
