//! Scalar concentration indices: Gini/Pietra G-indices of relative curves,
//! potential indices, and the Koshevoy-Mosler center-outward Gini.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::curves::StepCurve;
use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::potentials::PotentialCurve;
use crate::transport::SampleMatrix;

/// All scalar indices the pipeline can emit, plus run metadata. Optional
/// fields stay `None` when the corresponding input (Y sample, potential) was
/// not provided or a relative curve was unavailable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexReport {
    pub gini_g: Option<f64>,
    pub pietra_g: Option<f64>,
    pub gini_k: Option<f64>,
    pub pietra_k: Option<f64>,
    pub potential_gini: Option<f64>,
    pub potential_pietra: Option<f64>,
    pub km_gini: Option<f64>,
    pub km_delta: f64,
    pub km_kappa: f64,
    pub km_sigma2: Option<f64>,
    pub metadata: ReportMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    pub shape: GridShape,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
}

impl IndexReport {
    /// Coefficient table: one row with the four curve-index columns.
    /// Unpopulated entries are left empty.
    pub fn write_table<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["G_X", "P_X", "GK_YX", "PK_YX"])?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            fmt(self.gini_g),
            fmt(self.pietra_g),
            fmt(self.gini_k),
            fmt(self.pietra_k),
        ])?;
        w.flush()?;
        Ok(())
    }
}

fn check_relative(curve: &StepCurve) -> Result<()> {
    let last = curve.values.last().unwrap();
    if last.iter().any(|&v| (v - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "curve is not relative: endpoint {last:?}"
        )));
    }
    Ok(())
}

/// Exact integral of ||u*1 - v|| over [lo, hi] for a constant vector v.
///
/// With s = sum(v) and q = sum(v^2) the integrand is
/// sqrt(d) * sqrt((u - m)^2 + a^2), m = s/d, a^2 = q/d - m^2; the
/// antiderivative of sqrt(t^2 + a^2) is (t sqrt(t^2+a^2) + a^2 asinh(t/a))/2.
fn seg_int(v: &[f64], lo: f64, hi: f64) -> f64 {
    let d = v.len() as f64;
    let s: f64 = v.iter().sum();
    let q: f64 = v.iter().map(|x| x * x).sum();
    let m = s / d;
    let a2 = (q / d - m * m).max(0.0);
    let anti = |t: f64| -> f64 {
        if a2 == 0.0 {
            0.5 * t * t.abs()
        } else {
            let r = (t * t + a2).sqrt();
            0.5 * (t * r + a2 * (t / a2.sqrt()).asinh())
        }
    };
    d.sqrt() * (anti(hi - m) - anti(lo - m))
}

/// Gini G-index of a relative curve: (2/sqrt(d)) * integral of the distance
/// between the curve and the diagonal, computed exactly interval by interval.
pub fn g_index(relative_curve: &StepCurve) -> Result<f64> {
    check_relative(relative_curve)?;
    let denom = relative_curve.n_radii as f64 + 1.0;
    let mut total = 0.0;
    for (k, v) in relative_curve.values.iter().enumerate() {
        let lo = k as f64 / denom;
        let hi = if k == relative_curve.n_radii {
            1.0
        } else {
            (k + 1) as f64 / denom
        };
        total += seg_int(v, lo, hi);
    }
    Ok(2.0 / (relative_curve.dim as f64).sqrt() * total)
}

/// Pietra G-index: (1/sqrt(d)) * sup over u of the same distance. The
/// integrand is convex in u on each interval, so the sup is attained at an
/// interval endpoint (the right endpoints as limits from the left).
pub fn pietra_g_index(relative_curve: &StepCurve) -> Result<f64> {
    check_relative(relative_curve)?;
    let denom = relative_curve.n_radii as f64 + 1.0;
    let dist = |u: f64, v: &[f64]| -> f64 {
        v.iter().map(|x| (u - x) * (u - x)).sum::<f64>().sqrt()
    };
    let mut sup: f64 = 0.0;
    for (k, v) in relative_curve.values.iter().enumerate() {
        let lo = k as f64 / denom;
        let hi = if k == relative_curve.n_radii {
            1.0
        } else {
            (k + 1) as f64 / denom
        };
        sup = sup.max(dist(lo, v)).max(dist(hi, v));
    }
    Ok(sup / (relative_curve.dim as f64).sqrt())
}

/// Gini potential index: 2 * integral of (u - rel(u)), with rel the
/// relativized step potential, integrated exactly.
pub fn potential_gini(pc: &PotentialCurve) -> Result<f64> {
    let rel = pc.relativize()?;
    let denom = rel.n_radii as f64 + 1.0;
    let step_sum: f64 = rel.values[..=rel.n_radii].iter().sum::<f64>() / denom;
    Ok(2.0 * (0.5 - step_sum))
}

/// Pietra potential index: sup of (u - rel(u)); on each step interval the
/// difference increases in u, so the sup sits at a right endpoint.
pub fn potential_pietra(pc: &PotentialCurve) -> Result<f64> {
    let rel = pc.relativize()?;
    let denom = rel.n_radii as f64 + 1.0;
    let mut sup: f64 = 0.0;
    for (k, v) in rel.values[..=rel.n_radii].iter().enumerate() {
        sup = sup.max((k + 1) as f64 / denom - v);
    }
    Ok(sup)
}

/// Koshevoy-Mosler Gini components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmGini {
    /// mean pairwise distance, 2/(n(n-1)) * sum_{i<j} ||X_i - X_j||
    pub delta: f64,
    /// mean norm
    pub kappa: f64,
    /// delta / (2 kappa)
    pub index: f64,
    /// plug-in asymptotic variance of sqrt(n) * delta_hat: 4 * Var(h1)
    pub sigma2: f64,
}

/// (delta, kappa) alone; defined even when kappa = 0 and the index is not.
pub fn km_delta_only(sample: &SampleMatrix) -> (f64, f64) {
    let (h1, kappa) = km_components(sample);
    (h1.iter().sum::<f64>() / sample.len() as f64, kappa)
}

fn km_components(sample: &SampleMatrix) -> (Vec<f64>, f64) {
    let n = sample.len();
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut h1 = vec![0.0f64; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = sample
                .row(i)
                .iter()
                .zip(sample.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            h1[i] += dij;
            h1[j] += dij;
        }
    }
    for v in h1.iter_mut() {
        *v /= (n - 1) as f64;
    }
    let kappa = (0..n).map(|i| norm(sample.row(i))).sum::<f64>() / n as f64;
    (h1, kappa)
}

pub fn km_gini(sample: &SampleMatrix) -> Result<KmGini> {
    let n = sample.len();
    let (h1, kappa) = km_components(sample);
    let delta = h1.iter().sum::<f64>() / n as f64;
    if kappa <= 0.0 {
        return Err(Error::NonpositiveMean);
    }
    let var_h1 = h1.iter().map(|v| (v - delta) * (v - delta)).sum::<f64>() / (n - 1) as f64;
    Ok(KmGini {
        delta,
        kappa,
        index: delta / (2.0 * kappa),
        sigma2: 4.0 * var_h1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::univariate::{classical_gini, GiniMethod, SortedSample};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn diagonal_curve(n_radii: usize, dim: usize) -> StepCurve {
        // empirical-shaped diagonal: v_k = r_k for k < n_radii, endpoint 1
        let denom = n_radii as f64 + 1.0;
        let mut values: Vec<Vec<f64>> = (0..n_radii)
            .map(|k| vec![k as f64 / denom; dim])
            .collect();
        values.push(vec![1.0; dim]);
        StepCurve::new(n_radii, dim, values).unwrap()
    }

    fn maximal_curve(n_radii: usize, dim: usize) -> StepCurve {
        let mut values = vec![vec![0.0; dim]; n_radii];
        values.push(vec![1.0; dim]);
        StepCurve::new(n_radii, dim, values).unwrap()
    }

    #[test]
    fn g_index_of_diagonal_step_is_grid_resolution() {
        // every interval contributes sqrt(d) * delta^2 / 2 except the two at
        // the top, which straddle the jump to 1; the total works out near
        // 1/(n_radii+1) and vanishes as the grid refines
        for dim in [1usize, 2, 3] {
            let g64 = g_index(&diagonal_curve(64, dim)).unwrap();
            assert!(g64 > 0.0 && g64 <= 0.02, "g = {g64}");
            let g256 = g_index(&diagonal_curve(256, dim)).unwrap();
            assert!(g256 < g64 / 3.0);
        }
    }

    #[test]
    fn g_index_of_maximal_curve_is_one() {
        for dim in [1usize, 2, 5] {
            // 0 until the last interval: integral of u over [0,1] up to the
            // final sliver; at large n_radii this approaches 1 from below
            let g = g_index(&maximal_curve(400, dim)).unwrap();
            assert!(g > 0.99 && g <= 1.0 + 1e-12, "g = {g}");
        }
    }

    #[test]
    fn g_index_rejects_non_relative() {
        let c = StepCurve::new(1, 1, vec![vec![0.2], vec![0.9]]).unwrap();
        assert!(g_index(&c).is_err());
        assert!(pietra_g_index(&c).is_err());
    }

    #[test]
    fn g_index_matches_quadrature() {
        // midpoint rule oracle on a skewed 2d relative curve
        let values = vec![
            vec![0.05, 0.10],
            vec![0.20, 0.15],
            vec![0.45, 0.50],
            vec![1.0, 1.0],
        ];
        let curve = StepCurve::new(3, 2, values).unwrap();
        let exact = g_index(&curve).unwrap();
        let m = 200_000usize;
        let mut acc = 0.0;
        for i in 0..m {
            let u = (i as f64 + 0.5) / m as f64;
            let v = curve.eval(u).unwrap();
            let d2: f64 = v.iter().map(|x| (u - x) * (u - x)).sum();
            acc += d2.sqrt();
        }
        let quad = 2.0 / (2f64).sqrt() * acc / m as f64;
        assert_abs_diff_eq!(exact, quad, epsilon = 1e-6);
    }

    #[test]
    fn pietra_examples() {
        assert_abs_diff_eq!(
            pietra_g_index(&maximal_curve(400, 3)).unwrap(),
            1.0,
            epsilon = 1e-2
        );
        let p = pietra_g_index(&diagonal_curve(64, 2)).unwrap();
        assert!(p <= 0.02, "p = {p}");
        // d=1 two-point curve 1/3 then 1: sup |u - v| over the two intervals
        let c = StepCurve::new(1, 1, vec![vec![1.0 / 3.0], vec![1.0]]).unwrap();
        assert_abs_diff_eq!(pietra_g_index(&c).unwrap(), 0.5, epsilon = 1e-14);
    }

    fn potential_from(values: Vec<f64>) -> PotentialCurve {
        let n_radii = values.len() - 2;
        let denom = n_radii as f64 + 1.0;
        let mut radii: Vec<f64> = (0..=n_radii).map(|k| k as f64 / denom).collect();
        radii.push(1.0);
        PotentialCurve {
            n_radii,
            radii,
            values,
        }
    }

    #[test]
    fn potential_indices_on_diagonal_and_maximal() {
        let n_radii = 64usize;
        let denom = n_radii as f64 + 1.0;
        let mut diag: Vec<f64> = (0..=n_radii).map(|k| k as f64 / denom).collect();
        diag.push(1.0);
        let pc = potential_from(diag);
        let pg = potential_gini(&pc).unwrap();
        assert_abs_diff_eq!(pg, 1.0 / denom, epsilon = 1e-12);
        let pp = potential_pietra(&pc).unwrap();
        assert_abs_diff_eq!(pp, 1.0 / denom, epsilon = 1e-12);

        let mut maximal = vec![0.0; n_radii + 1];
        maximal.push(3.7);
        let pc = potential_from(maximal);
        assert_abs_diff_eq!(potential_gini(&pc).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(potential_pietra(&pc).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn potential_rejects_nonpositive_total() {
        let pc = potential_from(vec![0.0, 0.0, 0.0]);
        assert!(potential_gini(&pc).is_err());
    }

    #[test]
    fn km_examples() {
        let equal = SampleMatrix::new(vec![vec![5.0]; 3]).unwrap();
        let km = km_gini(&equal).unwrap();
        assert_eq!(km.delta, 0.0);
        assert_eq!(km.index, 0.0);

        let two = SampleMatrix::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let km = km_gini(&two).unwrap();
        assert_abs_diff_eq!(km.delta, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(km.kappa, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(km.index, 1.0, epsilon = 1e-15);

        let zero = SampleMatrix::new(vec![vec![0.0]; 3]).unwrap();
        assert!(km_gini(&zero).is_err());
    }

    #[test]
    fn km_delta_matches_brute_force() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(17);
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let sample = SampleMatrix::new(rows.clone()).unwrap();
        let km = km_gini(&sample).unwrap();
        let n = rows.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += rows[i]
                        .iter()
                        .zip(&rows[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                }
            }
        }
        assert_abs_diff_eq!(km.delta, acc / (n * (n - 1)) as f64, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn km_equals_classical_gini_d1(values in proptest::collection::vec(0.01f64..100.0, 2..40)) {
            let sample = SampleMatrix::new(values.iter().map(|&v| vec![v]).collect()).unwrap();
            let km = km_gini(&sample).unwrap();
            let sorted = SortedSample::new(values).unwrap();
            let classical = classical_gini(&sorted, GiniMethod::UStat).unwrap();
            prop_assert!((km.index - classical).abs() <= 1e-12 * classical.abs().max(1.0));
        }

        #[test]
        fn g_index_invariant_under_component_permutation(
            raw in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 3), 2..8)
        ) {
            let n_radii = raw.len() - 1;
            let mut values = raw;
            // force monotone relative shape with endpoint 1
            for row in values.iter_mut() {
                row.sort_by(|a, b| a.partial_cmp(b).unwrap());
            }
            *values.last_mut().unwrap() = vec![1.0; 3];
            let curve = StepCurve::new(n_radii, 3, values.clone()).unwrap();
            let permuted: Vec<Vec<f64>> = values.iter()
                .map(|v| vec![v[2], v[0], v[1]])
                .collect();
            let curve_p = StepCurve::new(n_radii, 3, permuted).unwrap();
            let (a, b) = (g_index(&curve).unwrap(), g_index(&curve_p).unwrap());
            prop_assert!((a - b).abs() <= 1e-12);
            let (pa, pb) = (pietra_g_index(&curve).unwrap(), pietra_g_index(&curve_p).unwrap());
            prop_assert!((pa - pb).abs() <= 1e-12);
        }

        #[test]
        fn g_index_invariant_under_diagonal_reflection(
            raw in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 2), 2..8)
        ) {
            let n_radii = raw.len() - 1;
            let mut values = raw;
            *values.last_mut().unwrap() = vec![1.0; 2];
            let denom = n_radii as f64 + 1.0;
            // reflecting u -> lo + hi - u maps each interval to itself and
            // carries ||u1 - v|| to ||u'1 - v'|| with v' = (lo+hi)1 - v, so
            // the per-interval integrals must agree
            for (k, v) in values.iter().enumerate() {
                let lo = k as f64 / denom;
                let hi = if k == n_radii { 1.0 } else { (k + 1) as f64 / denom };
                let reflected: Vec<f64> = v.iter().map(|x| (lo + hi) - x).collect();
                let a = super::seg_int(v, lo, hi);
                let b = super::seg_int(&reflected, lo, hi);
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }
}
