//! Lorenz potential functions: radial averages of the normalized transport
//! potential over the grid contours.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::transport::{ExtensionMode, TransportPlan};

/// Scalar curve sampled at the grid radii plus the boundary point u = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialCurve {
    pub n_radii: usize,
    /// 0, 1/(n_radii+1), ..., n_radii/(n_radii+1), 1.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl PotentialCurve {
    fn from_values(n_radii: usize, values: Vec<f64>) -> Self {
        let denom = n_radii as f64 + 1.0;
        let mut radii: Vec<f64> = (0..=n_radii).map(|k| k as f64 / denom).collect();
        radii.push(1.0);
        debug_assert_eq!(radii.len(), values.len());
        PotentialCurve {
            n_radii,
            radii,
            values,
        }
    }

    /// Divide by the value at u = 1 (which must be positive).
    pub fn relativize(&self) -> Result<PotentialCurve> {
        let total = *self.values.last().unwrap();
        if total <= 0.0 {
            return Err(Error::NonpositiveMean);
        }
        Ok(PotentialCurve {
            n_radii: self.n_radii,
            radii: self.radii.clone(),
            values: self.values.iter().map(|v| v / total).collect(),
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "value"])?;
        for (u, v) in self.radii.iter().zip(&self.values) {
            w.write_record([u.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Lorenz potential of the transported sample: the average of the normalized
/// dual potential over each grid contour. The value at 0 is pinned to 0 by
/// the dual normalization; the value at 1 averages the potential extension
/// over the unit directions.
pub fn lorenz_potential_curve(plan: &TransportPlan) -> Result<PotentialCurve> {
    let shape = &plan.grid.shape;
    let n_dirs = shape.n_dirs as f64;
    let mut sums = vec![0.0f64; shape.n_radii + 1];
    for j in 0..plan.grid.len() {
        let k = plan.grid.radius_rank[j];
        if k > 0 {
            // psi_hat(G_j) equals the normalized grid dual by complementary
            // slackness
            sums[k] += plan.grid_duals[j];
        }
    }
    let mut values: Vec<f64> = sums.iter().map(|s| s / n_dirs).collect();
    values[0] = 0.0;
    let boundary: f64 = plan
        .grid
        .directions
        .iter()
        .map(|dir| plan.quantile_potential(dir))
        .sum::<Result<f64>>()?
        / n_dirs;
    values.push(boundary);
    Ok(PotentialCurve::from_values(shape.n_radii, values))
}

/// Lorenz potential of Y with respect to X: the Y-potential composed with the
/// extended X-distribution, evaluated along the X-grid contours. At u = 1 the
/// Y-potential is evaluated directly on the unit directions, since the
/// composed map fixes the sphere.
pub fn lorenz_potential_yx_curve(
    plan_x: &TransportPlan,
    plan_y: &TransportPlan,
    mode: ExtensionMode,
) -> Result<PotentialCurve> {
    if plan_x.sample.dim() != plan_y.sample.dim() {
        return Err(Error::DimensionMismatch {
            expected: plan_x.sample.dim(),
            got: plan_y.sample.dim(),
        });
    }
    let shape = &plan_x.grid.shape;
    let n_dirs = shape.n_dirs as f64;
    let mut values = vec![0.0f64; shape.n_radii + 1];
    for j in 0..plan_x.grid.len() {
        let k = plan_x.grid.radius_rank[j];
        if k == 0 {
            continue;
        }
        let q = plan_x.empirical_quantile(j)?;
        let f = plan_y.extend_distribution(q, mode)?;
        values[k] += plan_y.quantile_potential(&f)?;
    }
    for v in values.iter_mut() {
        *v /= n_dirs;
    }
    values[0] = 0.0;
    // at u = 1 the composed map fixes the sphere, so evaluate the Y-potential
    // on the unit directions themselves (this also makes Y = X collapse
    // exactly onto the plain potential curve)
    let mut boundary = 0.0;
    for dir in &plan_x.grid.directions {
        boundary += plan_y.quantile_potential(dir)?;
    }
    values.push(boundary / n_dirs);
    Ok(PotentialCurve::from_values(shape.n_radii, values))
}
