//! Center-outward Lorenz and Kakwani step curves.
//!
//! All empirical curves are right-continuous and piecewise constant with
//! breakpoints at the grid radii k/(n_radii+1); rank norms land exactly on
//! those radii, so evaluation at breakpoints is exact.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::transport::{ExtensionMode, SampleMatrix, TransportPlan};

/// Right-continuous piecewise-constant vector-valued function on [0,1].
///
/// `values[k]` applies on [k/(n_radii+1), (k+1)/(n_radii+1)); the last value
/// applies up to and including 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurve {
    pub n_radii: usize,
    pub dim: usize,
    pub values: Vec<Vec<f64>>,
}

impl StepCurve {
    pub fn new(n_radii: usize, dim: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != n_radii + 1 {
            return Err(Error::SizeMismatch(format!(
                "step curve needs {} values, got {}",
                n_radii + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.iter().map(|v| v.len()).find(|&l| l != dim).unwrap_or(0),
            });
        }
        Ok(StepCurve {
            n_radii,
            dim,
            values,
        })
    }

    /// Breakpoint radii 0, 1/(n_radii+1), ..., n_radii/(n_radii+1).
    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.n_radii)
            .map(|k| k as f64 / (self.n_radii as f64 + 1.0))
            .collect()
    }

    /// Value at an arbitrary `u` in [0,1] (right-continuous lookup).
    pub fn eval(&self, u: f64) -> Result<&[f64]> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidArgument(format!("u = {u} outside [0,1]")));
        }
        let k = ((u * (self.n_radii as f64 + 1.0)).floor() as usize).min(self.n_radii);
        Ok(&self.values[k])
    }

    /// CSV export: breakpoint u, display u * (n_radii+1)/n_radii, value
    /// components. Display rescaling is a separate column, never substituted
    /// into computations.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["u".to_string(), "u_display".to_string()];
        for j in 0..self.dim {
            header.push(format!("value_{j}"));
        }
        w.write_record(&header)?;
        let scale = (self.n_radii as f64 + 1.0) / self.n_radii as f64;
        for (k, v) in self.values.iter().enumerate() {
            let u = k as f64 / (self.n_radii as f64 + 1.0);
            let mut rec = vec![u.to_string(), (u * scale).to_string()];
            for c in v {
                rec.push(c.to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parse a curve back from its CSV export; exact round-trip.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let dim = r.headers()?.len().saturating_sub(2);
        if dim == 0 {
            return Err(Error::Data("curve CSV needs at least one value column".into()));
        }
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row: Vec<f64> = rec
                .iter()
                .skip(2)
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Data(format!("bad float {s:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            values.push(row);
        }
        if values.is_empty() {
            return Err(Error::Data("empty curve CSV".into()));
        }
        StepCurve::new(values.len() - 1, dim, values)
    }
}

/// Sum observation vectors per radius rank, cumulate, and divide by `n`: the
/// common kernel of the Lorenz and Kakwani estimators.
fn build_cumulative(
    n_radii: usize,
    n: usize,
    dim: usize,
    items: &[(usize, &[f64])],
) -> StepCurve {
    let mut buckets = vec![vec![0.0f64; dim]; n_radii + 1];
    for &(rank, row) in items {
        for (acc, v) in buckets[rank].iter_mut().zip(row) {
            *acc += v;
        }
    }
    let mut values = Vec::with_capacity(n_radii + 1);
    let mut running = vec![0.0f64; dim];
    for bucket in &buckets {
        for (acc, v) in running.iter_mut().zip(bucket) {
            *acc += v;
        }
        values.push(running.iter().map(|v| v / n as f64).collect());
    }
    StepCurve {
        n_radii,
        dim,
        values,
    }
}

/// Absolute center-outward Lorenz curve of the transported sample:
/// value at u is (1/n) sum X_i over rank norm <= u.
pub fn lorenz_curve(plan: &TransportPlan) -> StepCurve {
    let n = plan.len();
    let dim = plan.sample.dim();
    let items: Vec<(usize, &[f64])> = (0..n)
        .map(|i| (plan.rank_radius_index(i), plan.sample.row(i)))
        .collect();
    build_cumulative(plan.grid.shape.n_radii, n, dim, &items)
}

/// Absolute center-outward Kakwani curve: value at u is
/// (1/n) sum Y_i over the event that the paired X_i has rank norm <= u.
pub fn kakwani_curve(plan: &TransportPlan, sample_y: &SampleMatrix) -> Result<StepCurve> {
    if sample_y.len() != plan.len() {
        return Err(Error::SizeMismatch(format!(
            "Y has {} rows, X has {}",
            sample_y.len(),
            plan.len()
        )));
    }
    let n = plan.len();
    let items: Vec<(usize, &[f64])> = (0..n)
        .map(|i| (plan.rank_radius_index(i), sample_y.row(i)))
        .collect();
    Ok(build_cumulative(
        plan.grid.shape.n_radii,
        n,
        sample_y.dim(),
        &items,
    ))
}

/// Absolute center-outward Lorenz curve of Y with respect to X, using the
/// extended distribution function of the X-plan. Y need not be paired with X
/// but must live in the same space.
pub fn lorenz_yx_curve(
    plan: &TransportPlan,
    sample_y: &SampleMatrix,
    mode: ExtensionMode,
) -> Result<StepCurve> {
    if sample_y.dim() != plan.sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: plan.sample.dim(),
            got: sample_y.dim(),
        });
    }
    let n_radii = plan.grid.shape.n_radii;
    let n_y = sample_y.len();
    let mut items: Vec<(usize, &[f64])> = Vec::with_capacity(n_y);
    for i in 0..n_y {
        let rank = match mode {
            ExtensionMode::Subgradient => {
                let j = plan.extend_to_grid_index(sample_y.row(i))?;
                plan.grid.radius_rank[j]
            }
            ExtensionMode::Moreau => {
                let f = plan.extend_distribution(sample_y.row(i), mode)?;
                let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
                // smallest breakpoint radius covering the norm
                let mut k = (norm * (n_radii as f64 + 1.0)).ceil() as usize;
                if k > 0 && (k - 1) as f64 / (n_radii as f64 + 1.0) + 1e-12 >= norm {
                    k -= 1;
                }
                k.min(n_radii)
            }
        };
        items.push((rank, sample_y.row(i)));
    }
    Ok(build_cumulative(n_radii, n_y, sample_y.dim(), &items))
}

/// Conditional rescaling: value at radius u multiplied by
/// n / (n_origin + n_dirs * floor(u (n_radii+1))). With no origin copies the
/// k = 0 factor is undefined; that entry is set to the k = 1 value and is
/// display-only.
pub fn conditionalize(curve: &StepCurve, shape: &GridShape) -> Result<StepCurve> {
    if curve.n_radii != shape.n_radii {
        return Err(Error::SizeMismatch(format!(
            "curve has {} radii, shape has {}",
            curve.n_radii, shape.n_radii
        )));
    }
    let n = shape.total() as f64;
    let mut values = Vec::with_capacity(curve.values.len());
    for (k, v) in curve.values.iter().enumerate() {
        let count = shape.n_origin + shape.n_dirs * k;
        if count == 0 {
            values.push(Vec::new()); // patched below
        } else {
            values.push(v.iter().map(|x| x * n / count as f64).collect());
        }
    }
    if values[0].is_empty() {
        values[0] = if values.len() > 1 {
            values[1].clone()
        } else {
            vec![0.0; curve.dim]
        };
    }
    StepCurve::new(curve.n_radii, curve.dim, values)
}

/// Componentwise division by `totals` (normally the curve value at u = 1).
pub fn relativize(curve: &StepCurve, totals: &[f64]) -> Result<StepCurve> {
    if totals.len() != curve.dim {
        return Err(Error::DimensionMismatch {
            expected: curve.dim,
            got: totals.len(),
        });
    }
    if totals.iter().any(|&t| t <= 0.0) {
        return Err(Error::NonpositiveMean);
    }
    let values = curve
        .values
        .iter()
        .map(|v| v.iter().zip(totals).map(|(x, t)| x / t).collect())
        .collect();
    StepCurve::new(curve.n_radii, curve.dim, values)
}
