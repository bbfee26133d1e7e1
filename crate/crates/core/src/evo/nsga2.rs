use rand::Rng;

use super::{initial_genotypes, mutate, two_point_crossover, Hyperparameters, Member};
use crate::benchmark::Evaluator;
use crate::pareto::{dominates, ObjectiveVector};
use crate::rng::RunRng;
use crate::run::{Run, Step};

/// Partitions indices of `points` into successive nondominated fronts.
pub fn non_dominated_sort(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominated_by[i].push(j);
                domination_count[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominated_by[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front, in front order.
pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for objective in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a].get(objective).total_cmp(&front[b].get(objective)));
        let lo = front[order[0]].get(objective);
        let hi = front[order[n - 1]].get(objective);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let gap = front[order[w + 1]].get(objective) - front[order[w - 1]].get(objective);
            distance[order[w]] += gap / range;
        }
    }
    distance
}

/// Rank (0 = first front) and crowding distance of every point.
pub(crate) fn rank_and_crowding(points: &[ObjectiveVector]) -> (Vec<usize>, Vec<f64>, Vec<Vec<usize>>) {
    let fronts = non_dominated_sort(points);
    let mut rank = vec![0; points.len()];
    let mut crowd = vec![0.0; points.len()];
    for (r, front) in fronts.iter().enumerate() {
        let objs: Vec<_> = front.iter().map(|&i| points[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&objs)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd, fronts)
}

/// Keeps `size` of `points` by rank, breaking the boundary front by
/// descending crowding distance. Returns the survivor indices.
pub(crate) fn environmental_selection(points: &[ObjectiveVector], size: usize) -> Vec<usize> {
    let mut survivors = Vec::with_capacity(size);
    for front in non_dominated_sort(points) {
        if survivors.len() + front.len() <= size {
            survivors.extend_from_slice(&front);
            continue;
        }
        let objs: Vec<_> = front.iter().map(|&i| points[i]).collect();
        let crowd = crowding_distance(&objs);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]));
        for &o in order.iter().take(size - survivors.len()) {
            survivors.push(front[o]);
        }
        break;
    }
    survivors
}

fn tournament<R: Rng + ?Sized>(rank: &[usize], crowd: &[f64], rng: &mut R) -> usize {
    let a = rng.gen_range(0..rank.len());
    let b = rng.gen_range(0..rank.len());
    let better = |x: usize, y: usize| rank[x] < rank[y] || (rank[x] == rank[y] && crowd[x] > crowd[y]);
    if better(a, b) {
        a
    } else if better(b, a) {
        b
    } else if rng.gen::<bool>() {
        a
    } else {
        b
    }
}

pub fn nsga2<E: Evaluator + ?Sized>(run: &mut Run<'_, E>, rng: &mut RunRng, params: &Hyperparameters) -> Step {
    let space = run.space();
    let size = params.nsga2_population.max(2);
    let rate = params.mutation_rate_for(space.len());

    let mut population = Vec::with_capacity(size);
    for g in initial_genotypes(space, size, rng) {
        let e = run.evaluate(&g)?;
        population.push(Member {
            genotype: g,
            objectives: e.objectives,
        });
    }

    loop {
        run.mark("generation");
        let objs: Vec<_> = population.iter().map(|m| m.objectives).collect();
        let (rank, crowd, _) = rank_and_crowding(&objs);
        let mut offspring: Vec<Member> = Vec::with_capacity(size);
        while offspring.len() < size {
            let p1 = &population[tournament(&rank, &crowd, rng)].genotype;
            let p2 = &population[tournament(&rank, &crowd, rng)].genotype;
            let (mut c1, mut c2) = if rng.gen::<f64>() < params.crossover_probability {
                two_point_crossover(p1, p2, rng)
            } else {
                (p1.clone(), p2.clone())
            };
            mutate(space, &mut c1, rate, rng);
            mutate(space, &mut c2, rate, rng);
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
        population.extend(offspring);
        let objs: Vec<_> = population.iter().map(|m| m.objectives).collect();
        let keep = environmental_selection(&objs, size);
        let mut taken: Vec<Option<Member>> = population.into_iter().map(Some).collect();
        population = keep.iter().map(|&i| taken[i].take().expect("unique index")).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn ov(a: f64, b: f64) -> ObjectiveVector {
        ObjectiveVector::new(a, b)
    }

    /// Peels maxima one layer at a time.
    fn brute_fronts(points: &[ObjectiveVector]) -> Vec<Vec<usize>> {
        let mut left: Vec<usize> = (0..points.len()).collect();
        let mut out = Vec::new();
        while !left.is_empty() {
            let front: Vec<usize> = left
                .iter()
                .copied()
                .filter(|&i| !left.iter().any(|&j| dominates(&points[j], &points[i])))
                .collect();
            left.retain(|i| !front.contains(i));
            out.push(front);
        }
        out
    }

    #[test]
    fn sort_examples() {
        let chain = [ov(0.1, 0.1), ov(0.2, 0.2), ov(0.3, 0.3)];
        assert_eq!(non_dominated_sort(&chain), vec![vec![2], vec![1], vec![0]]);
        let flat = [ov(0.1, 0.9), ov(0.5, 0.5), ov(0.9, 0.1)];
        assert_eq!(non_dominated_sort(&flat), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn sort_matches_layer_peeling() {
        let mut rng = seeded(10);
        for _ in 0..20 {
            let pts: Vec<_> = (0..50)
                .map(|_| ov((rng.gen_range(0..10) as f64) / 10.0, rng.gen::<f64>()))
                .collect();
            let mut ours = non_dominated_sort(&pts);
            for f in &mut ours {
                f.sort_unstable();
            }
            assert_eq!(ours, brute_fronts(&pts));
        }
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(crowding_distance(&[ov(0.2, 0.3)]), vec![f64::INFINITY]);
        assert_eq!(crowding_distance(&[ov(0.2, 0.3), ov(0.1, 0.4)]), vec![f64::INFINITY; 2]);
        let d = crowding_distance(&[ov(0.0, 1.0), ov(0.5, 0.5), ov(1.0, 0.0)]);
        assert_eq!(d[1], 2.0);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        let same = crowding_distance(&[ov(0.5, 0.5); 4]);
        assert!(same.iter().all(|d| !d.is_nan()));
    }

    #[test]
    fn selection_respects_rank_then_crowding() {
        let mut rng = seeded(21);
        for _ in 0..20 {
            let pts: Vec<_> = (0..200)
                .map(|_| ov((rng.gen_range(0..20) as f64) / 20.0, (rng.gen_range(0..20) as f64) / 20.0))
                .collect();
            let keep = environmental_selection(&pts, 100);
            assert_eq!(keep.len(), 100);
            let (rank, _, _) = rank_and_crowding(&pts);
            let worst_kept = keep.iter().map(|&i| rank[i]).max().unwrap();
            for i in 0..pts.len() {
                if keep.contains(&i) {
                    continue;
                }
                assert!(rank[i] >= worst_kept);
                if rank[i] == worst_kept {
                    let boundary_front: Vec<usize> = (0..pts.len()).filter(|&j| rank[j] == worst_kept).collect();
                    let objs: Vec<_> = boundary_front.iter().map(|&j| pts[j]).collect();
                    let local = crowding_distance(&objs);
                    let pos = |x: usize| boundary_front.iter().position(|&j| j == x).unwrap();
                    for &k in keep.iter().filter(|&&k| rank[k] == worst_kept) {
                        assert!(local[pos(k)] >= local[pos(i)]);
                    }
                }
            }
        }
    }
}
