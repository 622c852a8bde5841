use super::AffinityMatrix;

/// Maximum-weight assignment of `min(rows, cols)` pairs.
///
/// Shortest augmenting path with potentials, O(n²m). Forbidden entries carry
/// a penalty larger than any finite spread, so the solver first minimizes
/// how many forbidden pairs it must use and then maximizes weight; those
/// pairs are dropped from the result. Scanning is in index order with strict
/// comparisons, which makes the output deterministic.
pub fn hungarian_max(a: &AffinityMatrix) -> Vec<(usize, usize)> {
    let (rows, cols) = (a.rows(), a.cols());
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let transpose = rows > cols;
    let (n, m) = if transpose { (cols, rows) } else { (rows, cols) };
    let entry = |i: usize, j: usize| if transpose { a.get(j, i) } else { a.get(i, j) };

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in 0..m {
            let v = entry(i, j);
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if lo > hi {
        return Vec::new();
    }
    let penalty = (hi - lo + 1.0) * (n as f64 + 1.0);
    // Minimization cost, shifted to be non-negative.
    let cost = |i: usize, j: usize| {
        let v = entry(i, j);
        if v.is_finite() {
            hi - v
        } else {
            penalty + (hi - lo)
        }
    };

    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut min_v = vec![0.0; m + 1];
    let mut used = vec![false; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        min_v.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < min_v[j] {
                        min_v[j] = cur;
                        way[j] = j0;
                    }
                    if min_v[j] < delta {
                        delta = min_v[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| owner[j] != 0)
        .map(|j| {
            let (i, j) = (owner[j] - 1, j - 1);
            if transpose {
                (j, i)
            } else {
                (i, j)
            }
        })
        .filter(|&(r, c)| a.allowed(r, c))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Assignment pairs split by the acceptance threshold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matches {
    pub accepted: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

/// Keeps pairs scoring at least `threshold`; every other row and column is
/// reported unmatched.
pub fn filter_matches(pairs: &[(usize, usize)], a: &AffinityMatrix, threshold: f64) -> Matches {
    let mut row_taken = vec![false; a.rows()];
    let mut col_taken = vec![false; a.cols()];
    let mut accepted = Vec::with_capacity(pairs.len());
    for &(r, c) in pairs {
        if a.get(r, c) >= threshold {
            row_taken[r] = true;
            col_taken[c] = true;
            accepted.push((r, c));
        }
    }
    Matches {
        accepted,
        unmatched_rows: (0..a.rows()).filter(|&r| !row_taken[r]).collect(),
        unmatched_cols: (0..a.cols()).filter(|&c| !col_taken[c]).collect(),
    }
}
