//! Minimum-cost one-to-one assignment (Hungarian algorithm with potentials,
//! O(n^3)) used for the speaker mapping in the permutation-constrained
//! metric.

use ndarray::Array2;

const NONE: usize = usize::MAX;

/// Solves the square assignment problem, returning the column matched to
/// each row.
pub(crate) fn min_cost_assignment(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "assignment needs a square matrix");
    if n == 0 {
        return Vec::new();
    }

    // Column n is the virtual start of every augmenting path.
    let mut u = vec![0.0f64; n];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![NONE; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 0..n {
        matched_row[n] = row;
        let mut j0 = n;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = NONE;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0, j)] - u[i0] - v[j];
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
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == NONE {
                break;
            }
        }
        while j0 != n {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }

    let mut row_to_col = vec![NONE; n];
    for j in 0..n {
        if matched_row[j] != NONE {
            row_to_col[matched_row[j]] = j;
        }
    }
    row_to_col
}

#[cfg(test)]
pub(crate) fn assignment_cost(cost: &Array2<f64>, row_to_col: &[usize]) -> f64 {
    row_to_col
        .iter()
        .enumerate()
        .map(|(r, &c)| cost[(r, c)])
        .sum()
}
