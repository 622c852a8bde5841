use super::AffinityMatrix;

/// Assignment of items to clusters; labels are numbered in order of first
/// appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
}

impl Partition {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut remap = Vec::new();
        let labels = labels
            .iter()
            .map(|&l| match remap.iter().position(|&x| x == l) {
                Some(i) => i,
                None => {
                    remap.push(l);
                    remap.len() - 1
                }
            })
            .collect();
        Partition { labels }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            labels: (0..n).collect(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let count = self.labels.iter().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); count];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Sum of `a_ij` over co-clustered pairs.
    pub fn objective(&self, a: &AffinityMatrix) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.labels.len() {
            for j in i + 1..self.labels.len() {
                if self.labels[i] == self.labels[j] {
                    sum += a.get(i, j);
                }
            }
        }
        sum
    }

    /// Transitivity of the induced pair indicators and no forbidden pair
    /// inside a cluster.
    pub fn is_consistent(&self, a: &AffinityMatrix) -> bool {
        let n = self.labels.len();
        let y = |i: usize, j: usize| (self.labels[i] == self.labels[j]) as u8;
        for i in 0..n {
            for j in 0..n {
                if i != j && y(i, j) == 1 && !a.allowed(i, j) {
                    return false;
                }
                for k in 0..n {
                    if i != j && j != k && i != k && y(i, j) + y(j, k) > 1 + y(i, k) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Partition maximizing the summed affinity of co-clustered pairs subject to
/// cycle consistency; forbidden (non-finite) pairs never share a cluster.
///
/// Exact branch and bound up to `max_exact` items, greedy agglomeration
/// beyond. `a` must be square and symmetric over its finite entries.
pub fn partition_cycle_consistent(a: &AffinityMatrix, max_exact: usize) -> Partition {
    assert_eq!(a.rows(), a.cols(), "pairwise scores must be square");
    let n = a.rows();
    let greedy = greedy_agglomerative(a);
    let result = if n <= max_exact {
        BranchAndBound::new(a, greedy).solve()
    } else {
        greedy
    };
    debug_assert!(result.is_consistent(a));
    result
}

/// Repeatedly merges the two clusters with the largest positive total
/// cross affinity, never across a forbidden pair.
fn greedy_agglomerative(a: &AffinityMatrix) -> Partition {
    let n = a.rows();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut alive = vec![true; n];
    // Cluster-to-cluster total affinity; NEG_INFINITY absorbs forbidden pairs.
    let mut between = AffinityMatrix::from_fn(n, n, |i, j| {
        let v = a.get(i, j);
        if i == j || v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    });
    loop {
        let mut best = (0.0, usize::MAX, usize::MAX);
        for p in (0..n).filter(|&p| alive[p]) {
            for q in (p + 1..n).filter(|&q| alive[q]) {
                let v = between.get(p, q);
                if v > best.0 {
                    best = (v, p, q);
                }
            }
        }
        let (_, p, q) = best;
        if p == usize::MAX {
            break;
        }
        alive[q] = false;
        for l in labels.iter_mut() {
            if *l == q {
                *l = p;
            }
        }
        for r in (0..n).filter(|&r| alive[r] && r != p) {
            let merged = between.get(p, r) + between.get(q, r);
            between.set(p, r, merged);
            between.set(r, p, merged);
        }
    }
    Partition::from_labels(&labels)
}

struct BranchAndBound<'a> {
    a: &'a AffinityMatrix,
    /// `remaining[k]`: optimistic value of every pair decided at or after item `k`.
    remaining: Vec<f64>,
    labels: Vec<usize>,
    members: Vec<Vec<usize>>,
    best_value: f64,
    best: Vec<usize>,
}

impl<'a> BranchAndBound<'a> {
    fn new(a: &'a AffinityMatrix, incumbent: Partition) -> Self {
        let n = a.rows();
        let mut remaining = vec![0.0; n + 1];
        for k in (0..n).rev() {
            let gain: f64 = (0..k).map(|j| a.get(k, j)).filter(|v| *v > 0.0).sum();
            remaining[k] = remaining[k + 1] + gain;
        }
        BranchAndBound {
            a,
            remaining,
            labels: vec![0; n],
            members: Vec::with_capacity(n),
            best_value: incumbent.objective(a),
            best: incumbent.labels,
        }
    }

    fn solve(mut self) -> Partition {
        self.place(0, 0.0);
        Partition::from_labels(&self.best)
    }

    fn place(&mut self, k: usize, value: f64) {
        let n = self.labels.len();
        if k == n {
            if value > self.best_value {
                self.best_value = value;
                self.best.copy_from_slice(&self.labels);
            }
            return;
        }
        if value + self.remaining[k] <= self.best_value {
            return;
        }
        let mut options: Vec<(f64, usize)> = self
            .members
            .iter()
            .enumerate()
            .filter_map(|(c, m)| {
                let mut gain = 0.0;
                for &j in m {
                    let v = self.a.get(k, j);
                    if !v.is_finite() {
                        return None;
                    }
                    gain += v;
                }
                Some((gain, c))
            })
            .collect();
        let fresh = self.members.len();
        options.push((0.0, fresh));
        options.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

        for (gain, c) in options {
            if c == fresh {
                self.members.push(vec![k]);
            } else {
                self.members[c].push(k);
            }
            self.labels[k] = c;
            self.place(k + 1, value + gain);
            if c == fresh {
                self.members.pop();
            } else {
                self.members[c].pop();
            }
        }
    }
}
