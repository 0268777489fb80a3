//! Optimal pairing of eigenvalue multisets. Cross-checks between independent
//! spectral computations need a stable "how far apart are these two N-point
//! sets" number; we use min-total-distance assignment and report the largest
//! matched gap. Greedy nearest-pair suffices for tiny sets; Hungarian
//! assignment handles the rest at O(N³).

use num_complex::Complex64;

const GREEDY_CUTOFF: usize = 8;

/// Result of matching two equal-length multisets.
#[derive(Debug, Clone)]
pub struct MultisetPairing {
    /// assignment[i] = index into `ys` matched with xs[i].
    pub assignment: Vec<usize>,
    /// Largest |x − y| over matched pairs.
    pub max_distance: f64,
    /// Sum of |x − y| over matched pairs.
    pub total_distance: f64,
}

/// Pair two equal-length complex multisets, minimizing total distance.
/// Panics if the lengths differ (caller bug, not data).
pub fn pair_multisets(xs: &[Complex64], ys: &[Complex64]) -> MultisetPairing {
    assert_eq!(xs.len(), ys.len(), "multiset size mismatch");
    let n = xs.len();
    if n == 0 {
        return MultisetPairing { assignment: vec![], max_distance: 0.0, total_distance: 0.0 };
    }
    let assignment = if n <= GREEDY_CUTOFF {
        greedy_assignment(xs, ys)
    } else {
        hungarian_assignment(xs, ys)
    };
    let mut max_distance = 0.0f64;
    let mut total_distance = 0.0f64;
    for (i, &j) in assignment.iter().enumerate() {
        let d = (xs[i] - ys[j]).norm();
        max_distance = max_distance.max(d);
        total_distance += d;
    }
    MultisetPairing { assignment, max_distance, total_distance }
}

/// Convenience: just the bottleneck distance of the optimal pairing.
pub fn pairing_max_distance(xs: &[Complex64], ys: &[Complex64]) -> f64 {
    pair_multisets(xs, ys).max_distance
}

fn greedy_assignment(xs: &[Complex64], ys: &[Complex64]) -> Vec<usize> {
    let n = xs.len();
    let mut assignment = vec![usize::MAX; n];
    let mut x_used = vec![false; n];
    let mut y_used = vec![false; n];
    for _ in 0..n {
        let mut best = f64::INFINITY;
        let mut pick = (0usize, 0usize);
        for i in 0..n {
            if x_used[i] {
                continue;
            }
            for j in 0..n {
                if y_used[j] {
                    continue;
                }
                let d = (xs[i] - ys[j]).norm();
                if d < best {
                    best = d;
                    pick = (i, j);
                }
            }
        }
        assignment[pick.0] = pick.1;
        x_used[pick.0] = true;
        y_used[pick.1] = true;
    }
    assignment
}

/// Kuhn–Munkres with potentials; O(n³).
fn hungarian_assignment(xs: &[Complex64], ys: &[Complex64]) -> Vec<usize> {
    let n = xs.len();
    let cost = |i: usize, j: usize| (xs[i] - ys[j]).norm();
    // 1-based arrays; p[j] is the row matched to column j, p[0] scratch.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![usize::MAX; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identical_sets_pair_at_zero() {
        let xs = vec![c(1.0, 1.0), c(-2.0, 0.5), c(0.0, -3.0)];
        let p = pair_multisets(&xs, &xs);
        assert_eq!(p.max_distance, 0.0);
    }

    #[test]
    fn permuted_sets_pair_at_zero() {
        let xs = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let ys = vec![c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        let p = pair_multisets(&xs, &ys);
        assert!(p.max_distance < 1e-15);
        assert_eq!(p.assignment, vec![1, 2, 0]);
    }

    #[test]
    fn greedy_trap_handled_by_hungarian() {
        // Classic greedy failure: points on a line where the locally nearest
        // match forces a far pairing later. With n > 8 the Hungarian path
        // must find the better global assignment.
        let n = 10;
        let xs: Vec<Complex64> = (0..n).map(|k| c(k as f64, 0.0)).collect();
        // ys shifted by 0.6: optimal assignment is the identity (max gap 0.6),
        // any crossing assignment is worse.
        let ys: Vec<Complex64> = (0..n).map(|k| c(k as f64 + 0.6, 0.0)).collect();
        let p = pair_multisets(&xs, &ys);
        assert!((p.max_distance - 0.6).abs() < 1e-12);
        assert!((p.total_distance - 0.6 * n as f64).abs() < 1e-12);
    }

    #[test]
    fn bottleneck_reflects_single_outlier() {
        let xs = vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let mut ys = xs.clone();
        ys[2] = c(2.0, 1e-3);
        let p = pair_multisets(&xs, &ys);
        assert!((p.max_distance - 1e-3).abs() < 1e-15);
    }
}
