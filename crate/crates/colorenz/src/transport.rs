//! Empirical center-outward distribution and quantile functions.
//!
//! The empirical center-outward distribution function maps each observation
//! to the gridpoint assigned to it by the exact optimal matching (squared
//! Euclidean cost). The dual potentials of that matching define a max-affine
//! quantile potential and, through its Moreau envelope, an extension of the
//! distribution function to the whole of `R^d`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::ReferenceGrid;
use crate::lap;

/// n observations in d dimensions.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    values: Vec<Vec<f64>>,
    names: Option<Vec<String>>,
}

impl SampleMatrix {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_names(values, None)
    }

    pub fn with_names(values: Vec<Vec<f64>>, names: Option<Vec<String>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::SizeMismatch(format!(
                "need at least 2 observations, got {}",
                values.len()
            )));
        }
        let d = values[0].len();
        if d == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != d {
                return Err(Error::SizeMismatch(format!(
                    "row {i} has {} columns, expected {d}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        if let Some(ref n) = names {
            if n.len() != d {
                return Err(Error::SizeMismatch(format!(
                    "{} column names for {d} columns",
                    n.len()
                )));
            }
        }
        Ok(SampleMatrix { values, names })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Componentwise sample mean.
    pub fn mean(&self) -> Vec<f64> {
        let d = self.dim();
        let n = self.len() as f64;
        let mut m = vec![0.0; d];
        for row in &self.values {
            for (acc, v) in m.iter_mut().zip(row) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}

/// How to extend the empirical distribution function beyond the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionMode {
    /// Argmax of the max-affine conjugate potential; fast default.
    Subgradient,
    /// Gradient of the Moreau envelope; smooth between cells.
    Moreau,
}

/// Solved optimal matching between a sample and a reference grid, with dual
/// potentials and the regularization scale epsilon.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub grid: ReferenceGrid,
    pub sample: SampleMatrix,
    /// sample index i -> grid index sigma(i)
    pub assignment: Vec<usize>,
    /// grid index j -> sample index sigma^{-1}(j)
    pub inverse: Vec<usize>,
    /// total squared Euclidean matching cost
    pub cost: f64,
    /// grid-side conjugate duals psi*_j, normalized so that psi_hat(0) = 0
    pub grid_duals: Vec<f64>,
    /// data-side duals psi_i = x_i . G_{sigma(i)} - psi*_{sigma(i)}
    pub data_duals: Vec<f64>,
    pub epsilon: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Solve the exact optimal matching between `sample` and `grid`.
///
/// Dimension 1 uses the monotone fast path (sorted data matched to sorted
/// gridpoints, duals integrated along the line); higher dimensions run the
/// dense O(n^3) shortest-augmenting-path solver.
pub fn solve_assignment(sample: SampleMatrix, grid: ReferenceGrid) -> Result<TransportPlan> {
    let n = sample.len();
    if n != grid.len() {
        return Err(Error::SizeMismatch(format!(
            "sample has {n} rows but grid has {} points",
            grid.len()
        )));
    }
    if sample.dim() != grid.shape.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.shape.dim,
            got: sample.dim(),
        });
    }

    let (assignment, mut grid_duals, cost) = if sample.dim() == 1 {
        solve_monotone_1d(&sample, &grid)
    } else {
        solve_lap(&sample, &grid)
    };

    let mut inverse = vec![0usize; n];
    for (i, &j) in assignment.iter().enumerate() {
        inverse[j] = i;
    }

    // Data-side duals, then shift so that psi_hat(0) = max_j(-psi_j) = 0.
    let mut data_duals: Vec<f64> = (0..n)
        .map(|i| dot(sample.row(i), grid.point(assignment[i])) - grid_duals[assignment[i]])
        .collect();
    let shift = data_duals.iter().cloned().fold(f64::INFINITY, f64::min);
    for g in grid_duals.iter_mut() {
        *g += shift;
    }
    for d in data_duals.iter_mut() {
        *d -= shift;
    }

    // epsilon = half the smallest optimality gap over observations;
    // gridpoints with the same coordinates define the same affine piece and
    // do not count as competitors (origin copies).
    let mut epsilon = f64::INFINITY;
    for i in 0..n {
        let xi = sample.row(i);
        let own_point = grid.point(assignment[i]);
        let own = dot(xi, own_point) - grid_duals[assignment[i]];
        let mut best_other = f64::NEG_INFINITY;
        for j in 0..n {
            if j == assignment[i] || grid.point(j) == own_point {
                continue;
            }
            let val = dot(xi, grid.point(j)) - grid_duals[j];
            if val > best_other {
                best_other = val;
            }
        }
        if best_other > f64::NEG_INFINITY {
            epsilon = epsilon.min(0.5 * (own - best_other));
        }
    }
    let epsilon = if epsilon.is_finite() { epsilon.max(0.0) } else { 0.0 };

    Ok(TransportPlan {
        grid,
        sample,
        assignment,
        inverse,
        cost,
        grid_duals,
        data_duals,
        epsilon,
    })
}

/// Monotone rearrangement in dimension 1 with explicit duals.
///
/// Along the sorted grid, psi*_{(k+1)} - psi*_{(k)} is chosen midway inside
/// the feasibility interval [x_(k) dg, x_(k+1) dg]; local feasibility between
/// consecutive gridpoints implies global feasibility on the line.
fn solve_monotone_1d(sample: &SampleMatrix, grid: &ReferenceGrid) -> (Vec<usize>, Vec<f64>, f64) {
    let n = sample.len();
    let mut sample_order: Vec<usize> = (0..n).collect();
    sample_order.sort_by(|&a, &b| sample.row(a)[0].partial_cmp(&sample.row(b)[0]).unwrap());
    let mut grid_order: Vec<usize> = (0..n).collect();
    grid_order.sort_by(|&a, &b| grid.point(a)[0].partial_cmp(&grid.point(b)[0]).unwrap());

    let mut assignment = vec![0usize; n];
    let mut cost = 0.0;
    for k in 0..n {
        let i = sample_order[k];
        let j = grid_order[k];
        assignment[i] = j;
        let diff = sample.row(i)[0] - grid.point(j)[0];
        cost += diff * diff;
    }

    let mut duals_sorted = vec![0.0f64; n];
    for k in 1..n {
        let dg = grid.point(grid_order[k])[0] - grid.point(grid_order[k - 1])[0];
        let mid = 0.5 * (sample.row(sample_order[k - 1])[0] + sample.row(sample_order[k])[0]);
        duals_sorted[k] = duals_sorted[k - 1] + dg * mid;
    }
    let mut grid_duals = vec![0.0f64; n];
    for k in 0..n {
        grid_duals[grid_order[k]] = duals_sorted[k];
    }
    (assignment, grid_duals, cost)
}

fn solve_lap(sample: &SampleMatrix, grid: &ReferenceGrid) -> (Vec<usize>, Vec<f64>, f64) {
    let n = sample.len();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| sq_dist(sample.row(i), grid.point(j))).collect())
        .collect();
    let sol = lap::solve(&cost);
    let grid_duals = interior_grid_duals(sample, grid, &sol.row_to_col);
    (sol.row_to_col, grid_duals, sol.cost)
}

/// Conjugate duals strictly inside the dual polytope of the matching.
///
/// Solver duals sit at a vertex, where roughly n-1 non-matched pieces of the
/// max-affine potential are tight; that makes epsilon vanish even when the
/// assignment is the unique optimum. Feasibility of conjugate duals is the
/// system of difference constraints
///   psi*_j - psi*_k >= w(k -> j),   w(k -> j) = x_{sigma^-1(k)} . (G_j - G_k),
/// whose cycles all have nonpositive weight by cyclical monotonicity; the
/// largest margin delta that can be added to every constraint equals minus
/// the maximum cycle mean of w (Karp's algorithm). Longest-path potentials
/// computed with half that margin keep every non-matched piece strictly
/// below the matched one. Gridpoints with identical coordinates (origin
/// copies) describe the same affine piece and are collapsed into one node.
fn interior_grid_duals(
    sample: &SampleMatrix,
    grid: &ReferenceGrid,
    assignment: &[usize],
) -> Vec<f64> {
    let n = sample.len();
    // collapse coordinate-identical gridpoints
    let mut group_of = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for j in 0..n {
        let hit = reps
            .iter()
            .position(|&r| grid.point(r) == grid.point(j));
        group_of[j] = match hit {
            Some(g) => g,
            None => {
                reps.push(j);
                reps.len() - 1
            }
        };
    }
    let m = reps.len();

    // w[k][j]: tightest constraint from any observation matched into group k
    let mut w = vec![vec![f64::NEG_INFINITY; m]; m];
    for i in 0..n {
        let k = group_of[assignment[i]];
        let gk = grid.point(reps[k]);
        let xi = sample.row(i);
        for (j, wk) in w[k].iter_mut().enumerate() {
            if j == k {
                continue;
            }
            let gj = grid.point(reps[j]);
            let val = dot(xi, gj) - dot(xi, gk);
            if val > *wk {
                *wk = val;
            }
        }
    }

    // Karp: maximum cycle mean of w over the complete digraph on groups
    let delta = if m > 1 {
        let mut d = vec![vec![f64::NEG_INFINITY; m]; m + 1];
        d[0][0] = 0.0;
        for k in 1..=m {
            for v in 0..m {
                let mut best = f64::NEG_INFINITY;
                for u in 0..m {
                    if u != v && d[k - 1][u] > f64::NEG_INFINITY {
                        let cand = d[k - 1][u] + w[u][v];
                        if cand > best {
                            best = cand;
                        }
                    }
                }
                d[k][v] = best;
            }
        }
        let mut lambda = f64::NEG_INFINITY;
        for v in 0..m {
            if d[m][v] == f64::NEG_INFINITY {
                continue;
            }
            let mut worst = f64::INFINITY;
            for k in 0..m {
                if d[k][v] > f64::NEG_INFINITY {
                    worst = worst.min((d[m][v] - d[k][v]) / (m - k) as f64);
                }
            }
            lambda = lambda.max(worst);
        }
        (-lambda / 2.0).max(0.0)
    } else {
        0.0
    };

    // longest paths with the margin folded into every edge; cycles are
    // strictly negative, so this reaches a fixpoint in at most m passes
    let mut pot = vec![0.0f64; m];
    for _ in 0..m {
        let mut changed = false;
        for u in 0..m {
            for v in 0..m {
                if u == v {
                    continue;
                }
                let cand = pot[u] + w[u][v] + delta;
                if cand > pot[v] {
                    pot[v] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).map(|j| pot[group_of[j]]).collect()
}

impl TransportPlan {
    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    /// Empirical center-outward rank of observation `i`: the matched gridpoint.
    pub fn center_outward_rank(&self, i: usize) -> Result<&[f64]> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.len(),
            });
        }
        Ok(self.grid.point(self.assignment[i]))
    }

    /// Norm of the rank of observation `i` (its quantile order), exact as a
    /// grid radius.
    pub fn rank_norm(&self, i: usize) -> f64 {
        self.grid.norm_of(self.assignment[i])
    }

    /// Radius rank (0 = origin, k at radius k/(n_radii+1)) of observation `i`.
    pub fn rank_radius_index(&self, i: usize) -> usize {
        self.grid.radius_rank[self.assignment[i]]
    }

    /// Empirical center-outward quantile: the observation matched to
    /// gridpoint `j`.
    pub fn empirical_quantile(&self, j: usize) -> Result<&[f64]> {
        if j >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: self.len(),
            });
        }
        Ok(self.sample.row(self.inverse[j]))
    }

    /// Max-affine quantile potential psi_hat(u) = max_j (x_j.u - psi_j),
    /// normalized so that psi_hat(0) = 0.
    pub fn quantile_potential(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.grid.shape.dim {
            return Err(Error::DimensionMismatch {
                expected: self.grid.shape.dim,
                got: u.len(),
            });
        }
        let norm = dot(u, u).sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "potential argument has norm {norm} > 1"
            )));
        }
        Ok((0..self.len())
            .map(|j| dot(self.sample.row(j), u) - self.data_duals[j])
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Grid index selected by the subgradient extension at `query`:
    /// argmax_j (query.G_j - psi*_j), ties broken by smallest index.
    pub fn extend_to_grid_index(&self, query: &[f64]) -> Result<usize> {
        if query.len() != self.grid.shape.dim {
            return Err(Error::DimensionMismatch {
                expected: self.grid.shape.dim,
                got: query.len(),
            });
        }
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for j in 0..self.len() {
            let val = dot(query, self.grid.point(j)) - self.grid_duals[j];
            if val > best_val {
                best_val = val;
                best = j;
            }
        }
        Ok(best)
    }

    /// Extended empirical distribution function at `query`.
    ///
    /// Both modes return exactly the matched gridpoint at sample points.
    pub fn extend_distribution(&self, query: &[f64], mode: ExtensionMode) -> Result<Vec<f64>> {
        match mode {
            ExtensionMode::Subgradient => {
                let j = self.extend_to_grid_index(query)?;
                Ok(self.grid.point(j).to_vec())
            }
            ExtensionMode::Moreau => self.moreau_gradient(query),
        }
    }

    /// Gradient of the Moreau envelope of the conjugate potential at `query`,
    /// computed from the exact prox of the max-affine function by active-set
    /// iteration over its pieces. The result is the convex combination
    /// `sum lambda_j G_j` of the active gridpoints.
    fn moreau_gradient(&self, query: &[f64]) -> Result<Vec<f64>> {
        if query.len() != self.grid.shape.dim {
            return Err(Error::DimensionMismatch {
                expected: self.grid.shape.dim,
                got: query.len(),
            });
        }
        if self.epsilon <= 0.0 {
            return Err(Error::DegenerateEpsilon);
        }
        let eps = self.epsilon;
        let n = self.len();
        let d = self.grid.shape.dim;

        let mut active: Vec<usize> = vec![self.extend_to_grid_index(query)?];
        let mut lambda: Vec<f64> = vec![1.0];
        let max_iter = 2 * n + 8;
        for _ in 0..max_iter {
            let Some((lam, t)) = self.solve_prox_kkt(&active, query, eps) else {
                break;
            };
            // drop the most negative weight, if any
            let (worst_idx, worst) = lam
                .iter()
                .enumerate()
                .fold((0usize, f64::INFINITY), |acc, (k, &v)| {
                    if v < acc.1 {
                        (k, v)
                    } else {
                        acc
                    }
                });
            if worst < -1e-12 && active.len() > 1 {
                active.remove(worst_idx);
                continue;
            }
            lambda = lam;
            // prox point y = query - eps * sum lambda G
            let mut y = query.to_vec();
            for (k, &j) in active.iter().enumerate() {
                for (yc, gc) in y.iter_mut().zip(self.grid.point(j)) {
                    *yc -= eps * lambda[k] * gc;
                }
            }
            // most violated piece at y
            let mut jmax = 0usize;
            let mut vmax = f64::NEG_INFINITY;
            for j in 0..n {
                let val = dot(&y, self.grid.point(j)) - self.grid_duals[j];
                if val > vmax {
                    vmax = val;
                    jmax = j;
                }
            }
            let tol = 1e-10 * (1.0 + t.abs());
            if vmax <= t + tol || active.contains(&jmax) {
                break;
            }
            // duplicate gridpoints (origin copies) would make the KKT system
            // singular; a duplicate cannot improve the prox, skip it
            let dup = active
                .iter()
                .any(|&a| sq_dist(self.grid.point(a), self.grid.point(jmax)) < 1e-24);
            if dup {
                break;
            }
            active.push(jmax);
        }

        let mut grad = vec![0.0; d];
        if active.len() == 1 {
            // exact gridpoint, bit-for-bit
            return Ok(self.grid.point(active[0]).to_vec());
        }
        for (k, &j) in active.iter().enumerate() {
            let w = lambda[k].max(0.0);
            for (gc, pc) in grad.iter_mut().zip(self.grid.point(j)) {
                *gc += w * pc;
            }
        }
        Ok(grad)
    }

    /// KKT system for the prox restricted to equality of the active pieces:
    /// eps * G_a . (sum_k lambda_k G_k) + t = query.G_a - psi*_a for active a,
    /// sum lambda = 1. Returns None if singular.
    fn solve_prox_kkt(&self, active: &[usize], query: &[f64], eps: f64) -> Option<(Vec<f64>, f64)> {
        let m = active.len();
        let mut mat = vec![vec![0.0f64; m + 1]; m + 1];
        let mut rhs = vec![0.0f64; m + 1];
        for (a, &ja) in active.iter().enumerate() {
            for (k, &jk) in active.iter().enumerate() {
                mat[a][k] = eps * dot(self.grid.point(ja), self.grid.point(jk));
            }
            mat[a][m] = 1.0;
            rhs[a] = dot(query, self.grid.point(ja)) - self.grid_duals[ja];
        }
        for k in 0..m {
            mat[m][k] = 1.0;
        }
        let x = solve_dense(&mut mat, &mut rhs, 1.0)?;
        let t = x[m];
        Some((x[..m].to_vec(), t))
    }

    /// CSV export: sample index, sample coords, grid index, grid coords,
    /// rank norm, data dual.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.grid.shape.dim;
        let mut header = vec!["index".to_string()];
        for j in 0..d {
            header.push(format!("x_{j}"));
        }
        header.push("grid_index".to_string());
        for j in 0..d {
            header.push(format!("grid_{j}"));
        }
        header.push("rank_norm".to_string());
        header.push("data_dual".to_string());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![i.to_string()];
            for c in self.sample.row(i) {
                rec.push(c.to_string());
            }
            rec.push(self.assignment[i].to_string());
            for c in self.grid.point(self.assignment[i]) {
                rec.push(c.to_string());
            }
            rec.push(self.rank_norm(i).to_string());
            rec.push(self.data_duals[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Gaussian elimination with partial pivoting; `rhs` is overwritten.
fn solve_dense(mat: &mut [Vec<f64>], rhs: &mut [f64], _scale: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    let max_entry = mat
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if mat[r][col].abs() > mat[piv][col].abs() {
                piv = r;
            }
        }
        if mat[piv][col].abs() < 1e-13 * max_entry {
            return None;
        }
        mat.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = mat[r][col] / mat[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                mat[r][c] -= f * mat[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for c in col + 1..n {
            acc -= mat[col][c] * x[c];
        }
        x[col] = acc / mat[col][col];
    }
    Some(x)
}
