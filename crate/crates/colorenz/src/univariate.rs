//! Classical single-output Lorenz and Gini machinery.
//!
//! These are user-facing in their own right and double as the dimension-1
//! oracle for the center-outward pipeline.

use crate::error::{Error, Result};

/// Sorted univariate sample with its mean.
#[derive(Debug, Clone)]
pub struct SortedSample {
    values: Vec<f64>,
    mean: f64,
}

/// Gini computation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GiniMethod {
    /// Twice the area between the diagonal and the piecewise-linear empirical
    /// Lorenz curve, corrected by n/(n-1) to match the U-statistic form.
    Area,
    /// Mean absolute pairwise difference over twice the mean.
    UStat,
}

impl SortedSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SizeMismatch("empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(SortedSample { values, mean })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lower median x_(ceil(n/2)).
    pub fn median(&self) -> f64 {
        self.values[(self.values.len() - 1) / 2]
    }

    fn check_relative(&self) -> Result<()> {
        if self.mean <= 0.0 {
            return Err(Error::NonpositiveMean);
        }
        if self.values[0] < 0.0 {
            return Err(Error::InvalidArgument(
                "relative Lorenz quantities require nonnegative values".into(),
            ));
        }
        Ok(())
    }
}

/// Empirical (relative) Lorenz function at `u`, piecewise linear between the
/// vertices k/n.
pub fn classical_lorenz(s: &SortedSample, u: f64) -> Result<f64> {
    s.check_relative()?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!("u = {u} outside [0,1]")));
    }
    let n = s.len();
    let total = s.mean * n as f64;
    let t = u * n as f64;
    let k = (t.floor() as usize).min(n);
    let mut acc: f64 = s.values[..k].iter().sum();
    if k < n {
        acc += (t - k as f64) * s.values[k];
    }
    Ok(acc / total)
}

/// Empirical Gini coefficient.
///
/// The U-statistic form is the ground truth; the area form is computed on the
/// piecewise-linear curve and multiplied by n/(n-1) to agree with it.
pub fn classical_gini(s: &SortedSample, method: GiniMethod) -> Result<f64> {
    s.check_relative()?;
    let n = s.len();
    if n < 2 {
        return Ok(0.0);
    }
    match method {
        GiniMethod::UStat => {
            // sorted values: sum_{i<j} (x_j - x_i) = sum_i (2i - n + 1) x_(i)
            let mut acc = 0.0;
            for (i, &x) in s.values.iter().enumerate() {
                acc += (2.0 * i as f64 - n as f64 + 1.0) * x;
            }
            Ok(acc / (n as f64 * (n - 1) as f64 * s.mean))
        }
        GiniMethod::Area => {
            // exact trapezoid area under the polyline, then 1 - 2A, then the
            // small-sample convention factor
            let total = s.mean * n as f64;
            let mut area = 0.0;
            let mut cum = 0.0;
            for &x in &s.values {
                let prev = cum / total;
                cum += x;
                let next = cum / total;
                area += 0.5 * (prev + next) / n as f64;
            }
            Ok((1.0 - 2.0 * area) * n as f64 / (n - 1) as f64)
        }
    }
}

/// Pietra index: sup_u (u - L(u)), attained at a vertex of the polyline.
pub fn pietra_index(s: &SortedSample) -> Result<f64> {
    s.check_relative()?;
    let n = s.len();
    let total = s.mean * n as f64;
    let mut cum = 0.0;
    let mut best: f64 = 0.0;
    for (k, &x) in s.values.iter().enumerate() {
        cum += x;
        best = best.max((k + 1) as f64 / n as f64 - cum / total);
    }
    Ok(best)
}

/// Amato-Kakwani index: rescaled polyline length of the empirical Lorenz
/// curve. The empirical polyline version extends the paper-level definition,
/// which is stated for absolutely continuous distributions.
pub fn amato_kakwani_index(s: &SortedSample) -> Result<f64> {
    s.check_relative()?;
    let n = s.len();
    let total = s.mean * n as f64;
    let du = 1.0 / n as f64;
    let len: f64 = s
        .values
        .iter()
        .map(|&x| (du * du + (x / total) * (x / total)).sqrt())
        .sum();
    let sqrt2 = std::f64::consts::SQRT_2;
    Ok((len - sqrt2) / (2.0 - sqrt2))
}

/// Relative Kakwani (concentration) curve of y with respect to x at `u`:
/// the share of the y-total held by the floor(u*n) smallest-x observations.
/// Ties in x are broken by input order.
pub fn classical_kakwani_curve(pairs: &[(f64, f64)], u: f64) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::SizeMismatch("empty sample".into()));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!("u = {u} outside [0,1]")));
    }
    let n = pairs.len();
    let y_total: f64 = pairs.iter().map(|p| p.1).sum();
    if y_total <= 0.0 {
        return Err(Error::NonpositiveMean);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pairs[a].0.partial_cmp(&pairs[b].0).unwrap());
    let k = ((u * n as f64).floor() as usize).min(n);
    let acc: f64 = order[..k].iter().map(|&i| pairs[i].1).sum();
    Ok(acc / y_total)
}

/// Share of the total held by observations with values in
/// [a * median, b * median], lower-median convention.
pub fn income_share(s: &SortedSample, a: f64, b: f64) -> Result<f64> {
    s.check_relative()?;
    if a < 0.0 || b <= a {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= a < b, got a = {a}, b = {b}"
        )));
    }
    let med = s.median();
    let lo = a * med;
    let hi = b * med;
    let total = s.mean * s.len() as f64;
    let acc: f64 = s
        .values
        .iter()
        .filter(|&&x| x >= lo && x <= hi)
        .sum();
    Ok(acc / total)
}
