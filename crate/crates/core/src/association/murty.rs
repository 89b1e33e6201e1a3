use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

use super::{rank_order, solve_constrained, CostMatrix, GlobalHypothesis, Reduction};

struct Node {
    hypothesis: GlobalHypothesis,
    forced: Vec<(usize, usize)>,
    forbidden: Vec<(usize, usize)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Reversed so the max-heap pops the cheapest node.
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(&other.hypothesis, &self.hypothesis)
    }
}

/// The `k` cheapest global hypotheses in nondecreasing cost order (fewer if
/// fewer feasible hypotheses exist).
pub fn murty_kbest(c: &CostMatrix, k: usize) -> Result<Vec<GlobalHypothesis>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let red = Reduction::new(c);
    let n = c.n_tracks();
    let p = c.n_measurements();
    let mut heap = BinaryHeap::new();
    if let Some(h) = solve_constrained(c, &red, &[], &[]) {
        heap.push(Node {
            hypothesis: h,
            forced: Vec::new(),
            forbidden: Vec::new(),
        });
    }
    let mut out = Vec::with_capacity(k);
    while let Some(node) = heap.pop() {
        let columns: Vec<usize> = node
            .hypothesis
            .measurements
            .iter()
            .enumerate()
            .map(|(row, &o)| red.column(n, p, row, o))
            .collect();
        let free: Vec<usize> = (0..p)
            .filter(|r| !node.forced.iter().any(|&(fr, _)| fr == *r))
            .collect();
        out.push(node.hypothesis);
        if out.len() == k {
            break;
        }
        // Partition the remaining solution space of this node: child `i`
        // keeps the first `i` free rows as in the solution and excludes the
        // solution's column for row `i`.
        let mut forced = node.forced;
        for &row in &free {
            let mut forbidden = node.forbidden.clone();
            forbidden.push((row, columns[row]));
            if let Some(h) = solve_constrained(c, &red, &forced, &forbidden) {
                heap.push(Node {
                    hypothesis: h,
                    forced: forced.clone(),
                    forbidden,
                });
            }
            forced.push((row, columns[row]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::{enumerate_hypotheses, hungarian_solve};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: usize, p: usize, clutter: bool) -> CostMatrix {
        let entry = |rng: &mut ChaCha8Rng| {
            if rng.random_bool(0.15) {
                f64::INFINITY
            } else {
                rng.random_range(0.0..10.0)
            }
        };
        let det = (0..p).map(|_| (0..n).map(|_| entry(rng)).collect()).collect();
        let miss = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let new = (0..p).map(|_| rng.random_range(0.0..10.0)).collect();
        let cl = clutter.then(|| (0..p).map(|_| rng.random_range(0.0..10.0)).collect());
        CostMatrix::new(det, miss, new, cl).unwrap()
    }

    #[test]
    fn k1_is_hungarian() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let c = random(&mut rng, 3, 4, false);
            let m = murty_kbest(&c, 1).unwrap();
            assert_eq!(m, vec![hungarian_solve(&c).unwrap()]);
        }
    }

    #[test]
    fn two_by_two_both_permutations() {
        let inf = f64::INFINITY;
        let c = CostMatrix::new(
            vec![vec![1.0, 2.0], vec![3.0, 0.0]],
            vec![inf, inf],
            vec![inf, inf],
            None,
        )
        .unwrap();
        let m = murty_kbest(&c, 2).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].cost, 1.0);
        assert_eq!(m[1].cost, 5.0);
        assert_eq!(murty_kbest(&c, 5).unwrap().len(), 2);
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for trial in 0..60 {
            let clutter = trial % 2 == 0;
            let c = random(&mut rng, 3, 3, clutter);
            let all = enumerate_hypotheses(&c).unwrap();
            let m = murty_kbest(&c, 10).unwrap();
            assert_eq!(m.len(), all.len().min(10));
            for (a, b) in m.iter().zip(&all) {
                assert_eq!(a.cost, b.cost);
            }
            for w in m.windows(2) {
                assert!(w[0].cost <= w[1].cost);
            }
            let mut keys: Vec<_> = m.iter().map(|h| h.key()).collect();
            keys.sort();
            keys.dedup();
            assert_eq!(keys.len(), m.len());
        }
    }

    #[test]
    fn zero_k_rejected() {
        let c = CostMatrix::new(vec![], vec![], vec![], None).unwrap();
        assert!(murty_kbest(&c, 0).is_err());
        assert_eq!(murty_kbest(&c, 3).unwrap().len(), 1);
    }
}
