//! Linkage tree learning: mutual information between variables, merged
//! bottom-up with average (UPGMA) linkage.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::space::Genotype;

#[derive(Debug, Clone, PartialEq)]
pub struct LinkageTree {
    /// Family of subsets: the singletons first, then every internal node in
    /// merge order. The root is excluded.
    pub subsets: Vec<Vec<usize>>,
    /// Pairwise mutual information between variables.
    pub similarity: Vec<Vec<f64>>,
}

impl LinkageTree {
    /// Learns the tree from `members`. `alphabet_sizes` bounds the symbol
    /// values; a single member yields zero similarity everywhere.
    pub fn learn(members: &[&Genotype], alphabet_sizes: &[usize]) -> Self {
        let n = alphabet_sizes.len();
        let similarity = mutual_information(members, alphabet_sizes);
        let mut subsets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        if n < 2 {
            return Self { subsets, similarity };
        }

        let mut clusters: Vec<Vec<usize>> = subsets.clone();
        let mut sim = similarity.clone();
        while clusters.len() > 2 {
            let (mut best, mut bi, mut bj) = (f64::NEG_INFINITY, 0, 1);
            for i in 0..clusters.len() {
                for j in (i + 1)..clusters.len() {
                    if sim[i][j] > best {
                        best = sim[i][j];
                        bi = i;
                        bj = j;
                    }
                }
            }
            let (wi, wj) = (clusters[bi].len() as f64, clusters[bj].len() as f64);
            let merged_row: Vec<f64> = (0..clusters.len())
                .map(|k| (wi * sim[bi][k] + wj * sim[bj][k]) / (wi + wj))
                .collect();
            let mut merged = clusters[bi].clone();
            merged.extend_from_slice(&clusters[bj]);
            merged.sort_unstable();
            subsets.push(merged.clone());

            // bi < bj: replace bi with the merge, drop bj
            clusters[bi] = merged;
            for k in 0..clusters.len() {
                sim[bi][k] = merged_row[k];
                sim[k][bi] = merged_row[k];
            }
            clusters.remove(bj);
            sim.remove(bj);
            for row in &mut sim {
                row.remove(bj);
            }
        }
        // the final merge of the last two clusters is the root
        Self { subsets, similarity }
    }

    /// Subsets in a fresh random order.
    pub fn shuffled<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<&[usize]> {
        let mut out: Vec<&[usize]> = self.subsets.iter().map(Vec::as_slice).collect();
        out.shuffle(rng);
        out
    }
}

/// Mutual information (natural log) from empirical symbol frequencies.
pub fn mutual_information(members: &[&Genotype], alphabet_sizes: &[usize]) -> Vec<Vec<f64>> {
    let n = alphabet_sizes.len();
    let m = members.len() as f64;
    let mut mi = vec![vec![0.0; n]; n];
    if members.is_empty() {
        return mi;
    }
    let entropy = |counts: &[usize]| -> f64 {
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / m;
                -p * p.ln()
            })
            .sum()
    };
    let marginal: Vec<f64> = (0..n)
        .map(|i| {
            let mut counts = vec![0usize; alphabet_sizes[i]];
            for g in members {
                counts[g.0[i] as usize] += 1;
            }
            entropy(&counts)
        })
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let aj = alphabet_sizes[j];
            let mut counts = vec![0usize; alphabet_sizes[i] * aj];
            for g in members {
                counts[g.0[i] as usize * aj + g.0[j] as usize] += 1;
            }
            // clamp rounding noise below zero
            let v = (marginal[i] + marginal[j] - entropy(&counts)).max(0.0);
            mi[i][j] = v;
            mi[j][i] = v;
        }
    }
    mi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(v: &[u8]) -> Genotype {
        Genotype(v.to_vec())
    }

    #[test]
    fn identical_columns_merge_first() {
        // columns 0 and 2 are identical; column 1 is independent of both
        let pop = [g(&[0, 0, 0]), g(&[0, 1, 0]), g(&[1, 0, 1]), g(&[1, 1, 1])];
        let refs: Vec<&Genotype> = pop.iter().collect();
        let t = LinkageTree::learn(&refs, &[2, 2, 2]);
        let ln2 = std::f64::consts::LN_2;
        assert!((t.similarity[0][2] - ln2).abs() < 1e-12);
        assert!(t.similarity[0][1].abs() < 1e-12);
        assert!(t.similarity[1][2].abs() < 1e-12);
        assert_eq!(t.subsets, vec![vec![0], vec![1], vec![2], vec![0, 2]]);
    }

    #[test]
    fn constant_column_has_zero_information() {
        let pop = [g(&[0, 2, 1]), g(&[1, 2, 0]), g(&[2, 2, 1]), g(&[0, 2, 2])];
        let refs: Vec<&Genotype> = pop.iter().collect();
        let mi = mutual_information(&refs, &[3, 3, 3]);
        assert!(mi[1].iter().all(|&v| v == 0.0));
        assert!(mi[0][2] > 0.0);
    }

    #[test]
    fn tree_has_two_l_minus_two_subsets() {
        use crate::rng::seeded;
        use crate::space::SearchSpace;
        let space = SearchSpace::macronas_large();
        let mut rng = seeded(1);
        let pop: Vec<Genotype> = (0..40).map(|_| space.random_genotype(&mut rng)).collect();
        let refs: Vec<&Genotype> = pop.iter().collect();
        let t = LinkageTree::learn(&refs, space.alphabet_sizes());
        assert_eq!(t.subsets.len(), 2 * 17 - 2);
        assert!(t.subsets.iter().all(|s| s.len() < 17));
        for i in 0..17 {
            assert!(t.subsets.contains(&vec![i]));
        }
        // every internal node is the union of two earlier disjoint subsets
        for (k, s) in t.subsets.iter().enumerate().skip(17) {
            let earlier = &t.subsets[..k];
            let split = earlier.iter().any(|a| {
                earlier.iter().any(|b| {
                    let mut u = a.clone();
                    u.extend_from_slice(b);
                    u.sort_unstable();
                    a.iter().all(|x| !b.contains(x)) && u == *s
                })
            });
            assert!(split, "subset {s:?} is not a union of two children");
        }
        let few = LinkageTree::learn(&refs[..5], &[5; 17]);
        assert_eq!(few.subsets.len(), 32);
    }

    #[test]
    fn three_variables_give_four_subsets() {
        let pop = [g(&[0, 1, 2]), g(&[1, 1, 0]), g(&[2, 0, 1])];
        let refs: Vec<&Genotype> = pop.iter().collect();
        assert_eq!(LinkageTree::learn(&refs, &[3, 3, 3]).subsets.len(), 4);
        let single = LinkageTree::learn(&refs[..1], &[3, 3, 3]);
        assert_eq!(single.subsets.len(), 4);
    }
}
