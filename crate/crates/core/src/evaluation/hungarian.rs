use crate::error::{invalid, Result};

/// Minimum-cost assignment of every row of an `n x m` cost matrix with
/// `n <= m` to a distinct column (Kuhn–Munkres with row/column potentials,
/// `O(n² m)`). Returns the column assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let m = cost.first().map_or(0, Vec::len);
    assert!(n <= m, "need at least as many columns as rows");
    const INF: i64 = i64::MAX / 4;
    // 1-based arrays; column 0 is a virtual start node.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0; n];
    for j in 1..=m {
        if row_of[j] != 0 {
            col_of_row[row_of[j] - 1] = j - 1;
        }
    }
    col_of_row
}

/// Matching of rows to columns maximizing the matched counts. When the
/// matrix is not square the larger side keeps some entries unmatched
/// (rows left out map to `None`), which is equivalent to zero padding.
pub fn max_count_matching(counts: &[Vec<u64>]) -> Result<Vec<Option<usize>>> {
    let rows = counts.len();
    let cols = counts.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(invalid("empty count matrix"));
    }
    if counts.iter().any(|r| r.len() != cols) {
        return Err(invalid("count matrix rows differ in length"));
    }
    let top = counts.iter().flatten().copied().max().unwrap_or(0) as i64;
    if rows <= cols {
        let cost: Vec<Vec<i64>> = counts
            .iter()
            .map(|r| r.iter().map(|&c| top - c as i64).collect())
            .collect();
        Ok(min_cost_assignment(&cost).into_iter().map(Some).collect())
    } else {
        let cost: Vec<Vec<i64>> = (0..cols)
            .map(|j| counts.iter().map(|r| top - r[j] as i64).collect())
            .collect();
        let mut out = vec![None; rows];
        for (j, i) in min_cost_assignment(&cost).into_iter().enumerate() {
            out[i] = Some(j);
        }
        Ok(out)
    }
}
