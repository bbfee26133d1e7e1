//! Equal-size leader-based clustering in objective space.

use crate::pareto::ObjectiveVector;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Effective number of clusters.
    pub k: usize,
    /// Mean objective vector of each cluster (its leader when empty).
    pub centroids: Vec<ObjectiveVector>,
    /// Cluster index of every member.
    pub assignment: Vec<usize>,
    /// Extreme cluster for f1 and for f2.
    pub extreme: [usize; 2],
}

impl ClusterAssignment {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == cluster).collect()
    }

    /// The objective `cluster` is extreme for, if any. A cluster flagged for
    /// both (only possible when k = 1) reports f1.
    pub fn extreme_objective(&self, cluster: usize) -> Option<usize> {
        self.extreme.iter().position(|&c| c == cluster)
    }
}

/// Partitions `points` into `k` clusters of at most `ceil(n / k)` members.
///
/// Objectives are rescaled to the population's range. Leaders are picked by
/// farthest-point traversal starting from the best-f1 member, then members
/// are assigned greedily in order of increasing distance to a leader. When
/// `n < 2k` the number of clusters drops to 3 (two extremes and a middle).
pub fn cluster_population(points: &[ObjectiveVector], k: usize) -> ClusterAssignment {
    let n = points.len();
    let mut k = k.max(1);
    if n < 2 * k {
        k = k.min(3);
    }
    k = k.min(n.max(1));

    let range = |o: usize| {
        let lo = points.iter().map(|p| p.get(o)).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.get(o)).fold(f64::NEG_INFINITY, f64::max);
        (lo, if hi > lo { hi - lo } else { 1.0 })
    };
    let (r1, r2) = (range(0), range(1));
    let scaled: Vec<(f64, f64)> = points.iter().map(|p| ((p.f1 - r1.0) / r1.1, (p.f2 - r2.0) / r2.1)).collect();
    let dist = |a: usize, b: usize| {
        let (dx, dy) = (scaled[a].0 - scaled[b].0, scaled[a].1 - scaled[b].1);
        (dx * dx + dy * dy).sqrt()
    };

    let mut leaders: Vec<usize> = Vec::with_capacity(k);
    if n > 0 {
        let first = (0..n).fold(0, |best, i| if points[i].f1 > points[best].f1 { i } else { best });
        leaders.push(first);
        let mut nearest: Vec<f64> = (0..n).map(|i| dist(i, first)).collect();
        while leaders.len() < k {
            let next = (0..n).fold(0, |best, i| if nearest[i] > nearest[best] { i } else { best });
            leaders.push(next);
            for i in 0..n {
                nearest[i] = nearest[i].min(dist(i, next));
            }
        }
    }

    let capacity = n.div_ceil(k.max(1));
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * k);
    for i in 0..n {
        for (c, &l) in leaders.iter().enumerate() {
            pairs.push((dist(i, l), i, c));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assignment = vec![usize::MAX; n];
    let mut load = vec![0usize; k];
    for (_, i, c) in pairs {
        if assignment[i] == usize::MAX && load[c] < capacity {
            assignment[i] = c;
            load[c] += 1;
        }
    }

    let centroids: Vec<ObjectiveVector> = (0..k)
        .map(|c| {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
            if members.is_empty() {
                return leaders.get(c).map_or(ObjectiveVector::new(0.0, 0.0), |&l| points[l]);
            }
            let m = members.len() as f64;
            ObjectiveVector::new(
                members.iter().map(|&i| points[i].f1).sum::<f64>() / m,
                members.iter().map(|&i| points[i].f2).sum::<f64>() / m,
            )
        })
        .collect();

    let occupied: Vec<usize> = (0..k).filter(|&c| load[c] > 0).collect();
    let best_by = |o: usize, skip: Option<usize>| {
        occupied
            .iter()
            .copied()
            .filter(|&c| Some(c) != skip)
            .fold(None, |best: Option<usize>, c| match best {
                Some(b) if centroids[b].get(o) >= centroids[c].get(o) => Some(b),
                _ => Some(c),
            })
    };
    let e1 = best_by(0, None).unwrap_or(0);
    let e2 = best_by(1, Some(e1)).unwrap_or(e1);

    ClusterAssignment {
        k,
        centroids,
        assignment,
        extreme: [e1, e2],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn ov(a: f64, b: f64) -> ObjectiveVector {
        ObjectiveVector::new(a, b)
    }

    #[test]
    fn balanced_and_complete() {
        let mut rng = seeded(3);
        for n in [1usize, 2, 5, 8, 9, 16, 37, 100] {
            let pts: Vec<_> = (0..n).map(|_| ov(rng.gen(), rng.gen())).collect();
            let c = cluster_population(&pts, 5);
            assert!(c.assignment.iter().all(|&a| a < c.k));
            let cap = n.div_ceil(c.k);
            for cl in 0..c.k {
                assert!(c.members(cl).len() <= cap);
            }
            assert!(c.extreme.iter().all(|&e| e < c.k));
            if c.k >= 2 {
                assert_ne!(c.extreme[0], c.extreme[1]);
            }
        }
    }

    #[test]
    fn small_populations_use_three_clusters() {
        let pts: Vec<_> = (0..8).map(|i| ov(i as f64 / 7.0, 1.0 - i as f64 / 7.0)).collect();
        let c = cluster_population(&pts, 5);
        assert_eq!(c.k, 3);
        // the best-f1 end and the best-f2 end are the extremes
        assert_eq!(c.assignment[7], c.extreme[0]);
        assert_eq!(c.assignment[0], c.extreme[1]);
        assert_eq!(cluster_population(&pts[..2], 5).k, 2);
        assert_eq!(cluster_population(&pts, 4).k, 4);
    }

    #[test]
    fn separated_groups_are_recovered() {
        let mut pts = Vec::new();
        for &(x, y) in &[(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)] {
            for i in 0..4 {
                pts.push(ov(x + i as f64 * 1e-3, y - i as f64 * 1e-3));
            }
        }
        let c = cluster_population(&pts, 3);
        for g in 0..3 {
            let first = c.assignment[g * 4];
            assert!((0..4).all(|i| c.assignment[g * 4 + i] == first));
        }
        assert_eq!(c.extreme, [c.assignment[8], c.assignment[0]]);
    }

    #[test]
    fn identical_points_do_not_panic() {
        let c = cluster_population(&[ov(0.3, 0.3); 12], 5);
        assert_eq!(c.assignment.len(), 12);
        assert!(c.assignment.iter().all(|&a| a < c.k));
    }
}
