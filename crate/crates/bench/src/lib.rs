//! Fixtures shared by the criterion benches.

use lsnas::rng::seeded;
use lsnas::{generate_synthetic, BenchmarkTable, Genotype, ObjectiveVector, SearchSpace};
use rand::Rng;

/// Synthetic table over the 14-variable space.
pub fn macronas_table() -> BenchmarkTable {
    generate_synthetic(&SearchSpace::macronas(), 1, 0.3).expect("space is enumerable")
}

pub fn random_genotypes(space: &SearchSpace, n: usize, seed: u64) -> Vec<Genotype> {
    let mut rng = seeded(seed);
    (0..n).map(|_| space.random_genotype(&mut rng)).collect()
}

/// Uniform points in the unit square.
pub fn random_points(n: usize, seed: u64) -> Vec<ObjectiveVector> {
    let mut rng = seeded(seed);
    (0..n).map(|_| ObjectiveVector::new(rng.gen(), rng.gen())).collect()
}

/// `n` mutually nondominated points on a concave curve.
pub fn front(n: usize) -> Vec<ObjectiveVector> {
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            ObjectiveVector::new(t, (1.0 - t * t).sqrt())
        })
        .collect()
}
