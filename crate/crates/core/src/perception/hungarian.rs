//! Minimum-cost assignment (Kuhn-Munkres with row/column potentials).

use super::PerceptionError;

/// Cost used to pad rectangular matrices to square.
pub const PAD_COST: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `columns[row]` is the column assigned to `row`.
    pub columns: Vec<usize>,
    pub cost: f64,
}

fn check_square(cost: &[Vec<f64>]) -> Result<usize, PerceptionError> {
    let n = cost.len();
    for (i, row) in cost.iter().enumerate() {
        if row.len() != n {
            return Err(PerceptionError::NotSquare { rows: n, row: i, cols: row.len() });
        }
        if let Some(j) = row.iter().position(|c| !c.is_finite()) {
            return Err(PerceptionError::NonFiniteCost { row: i, col: j });
        }
    }
    Ok(n)
}

/// Optimal total cost of the square matrix restricted to `rows` x `cols`.
fn solve(cost: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> (f64, Vec<usize>) {
    let n = rows.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let a = |i: usize, j: usize| cost[rows[i - 1]][cols[j - 1]];
    // 1-based potentials; column 0 is a virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = a(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
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
    let mut columns = vec![0; n];
    for j in 1..=n {
        columns[p[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost[rows[i]][cols[columns[i]]]).sum();
    (total, columns)
}

fn tolerance(c: f64) -> f64 {
    1e-9 * c.abs().max(1.0)
}

/// Globally minimal assignment of a square cost matrix. Among optimal
/// assignments the lexicographically smallest column sequence is returned.
pub fn hungarian_match(cost: &[Vec<f64>]) -> Result<Assignment, PerceptionError> {
    let n = check_square(cost)?;
    let all: Vec<usize> = (0..n).collect();
    let (best, _) = solve(cost, &all, &all);

    // Fix rows one at a time to the smallest column that still admits an
    // optimal completion.
    let mut columns = Vec::with_capacity(n);
    let mut free: Vec<usize> = all.clone();
    let mut fixed = 0.0;
    for row in 0..n {
        let rest_rows: Vec<usize> = (row + 1..n).collect();
        let mut chosen = None;
        for (k, &col) in free.iter().enumerate() {
            let rest_cols: Vec<usize> = free.iter().copied().filter(|&c| c != col).collect();
            let (sub, _) = solve(cost, &rest_rows, &rest_cols);
            if fixed + cost[row][col] + sub <= best + tolerance(best) {
                chosen = Some(k);
                break;
            }
        }
        let k = chosen.expect("some column always admits an optimal completion");
        let col = free.remove(k);
        fixed += cost[row][col];
        columns.push(col);
    }
    let cost = (0..n).map(|i| cost[i][columns[i]]).sum();
    Ok(Assignment { columns, cost })
}

/// Rectangular assignment: pads to square with [`PAD_COST`] and reports, for
/// each row, the matched column (or `None` when matched to padding).
pub fn match_rectangular(cost: &[Vec<f64>], cols: usize) -> Result<Vec<Option<usize>>, PerceptionError> {
    let rows = cost.len();
    let n = rows.max(cols);
    let mut square = vec![vec![PAD_COST; n]; n];
    for (i, row) in cost.iter().enumerate() {
        if row.len() != cols {
            return Err(PerceptionError::NotSquare { rows, row: i, cols: row.len() });
        }
        square[i][..cols].copy_from_slice(row);
    }
    let a = hungarian_match(&square)?;
    Ok((0..rows).map(|i| Some(a.columns[i]).filter(|&j| j < cols)).collect())
}
