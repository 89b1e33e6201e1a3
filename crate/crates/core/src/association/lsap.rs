//! Rectangular linear sum assignment (Hungarian / Kuhn-Munkres with
//! potentials, O(rows² · cols)).

/// Assigns every row of `cost` to a distinct column, minimising the summed
/// cost. `f64::INFINITY` marks a forbidden pairing.
///
/// Returns the column chosen for each row, or `None` when there are more rows
/// than columns or every complete assignment needs a forbidden pairing.
pub fn linear_sum_assignment(cost: &[Vec<f64>], cols: usize) -> Option<Vec<usize>> {
    let rows = cost.len();
    if rows == 0 {
        return Some(Vec::new());
    }
    if rows > cols {
        return None;
    }
    debug_assert!(cost.iter().all(|r| r.len() == cols));
    debug_assert!(cost.iter().flatten().all(|v| !v.is_nan() && *v != f64::NEG_INFINITY));

    // Forbidden entries become a finite sentinel large enough that any
    // assignment using one costs more than every assignment that does not.
    let max_abs = cost
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let sentinel = (max_abs + 1.0) * 2.0 * (rows as f64 + 1.0);
    let a = |i: usize, j: usize| {
        let v = cost[i][j];
        if v.is_finite() {
            v
        } else {
            sentinel
        }
    };

    // 1-based indexing; column 0 and row 0 are virtual.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
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

    let mut assignment = vec![0usize; rows];
    for j in 1..=cols {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    if assignment
        .iter()
        .enumerate()
        .any(|(i, &j)| !cost[i][j].is_finite())
    {
        return None;
    }
    Some(assignment)
}
