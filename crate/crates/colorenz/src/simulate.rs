//! Seeded synthetic-data generators and closed-form oracles.
//!
//! All generators are deterministic given `(kind, params, seed, n)`; the RNG
//! is a portable counter-based stream cipher so samples are bit-identical
//! across platforms. One-dimensional families draw by inverse CDF.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::transport::SampleMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    UniformInterval { a: f64, b: f64 },
    Exponential { rate: f64 },
    Pareto { scale: f64, shape: f64 },
    UniformBall { center: Vec<f64>, radius: f64 },
    SphericalGaussian { mean: Vec<f64>, sigma: f64 },
    /// Three-component 2-d normal mixture with means on a parabola; a purely
    /// illustrative stand-in for curved, non-elliptical data.
    BananaMixture,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl Generator {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        Generator { kind, seed }
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            GeneratorKind::UniformInterval { a, b } => {
                if !(a < b) {
                    return Err(Error::InvalidArgument(format!(
                        "uniform interval needs a < b, got [{a}, {b}]"
                    )));
                }
            }
            GeneratorKind::Exponential { rate } => {
                if *rate <= 0.0 {
                    return Err(Error::InvalidArgument("exponential rate must be > 0".into()));
                }
            }
            GeneratorKind::Pareto { scale, shape } => {
                if *scale <= 0.0 {
                    return Err(Error::InvalidArgument("Pareto scale must be > 0".into()));
                }
                if *shape <= 1.0 {
                    return Err(Error::InvalidArgument(
                        "Pareto shape must be > 1 for a finite mean".into(),
                    ));
                }
            }
            GeneratorKind::UniformBall { center, radius } => {
                if center.is_empty() {
                    return Err(Error::InvalidArgument("ball center must be nonempty".into()));
                }
                if *radius <= 0.0 {
                    return Err(Error::InvalidArgument("ball radius must be > 0".into()));
                }
            }
            GeneratorKind::SphericalGaussian { mean, sigma } => {
                if mean.is_empty() {
                    return Err(Error::InvalidArgument("mean must be nonempty".into()));
                }
                if *sigma <= 0.0 {
                    return Err(Error::InvalidArgument("sigma must be > 0".into()));
                }
            }
            GeneratorKind::BananaMixture => {}
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            GeneratorKind::UniformInterval { .. }
            | GeneratorKind::Exponential { .. }
            | GeneratorKind::Pareto { .. } => 1,
            GeneratorKind::UniformBall { center, .. } => center.len(),
            GeneratorKind::SphericalGaussian { mean, .. } => mean.len(),
            GeneratorKind::BananaMixture => 2,
        }
    }

    pub fn draw(&self, n: usize) -> Result<SampleMatrix> {
        self.validate()?;
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need n >= 2 observations, got {n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| self.draw_one(&mut rng)).collect();
        SampleMatrix::new(rows)
    }

    fn draw_one(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match &self.kind {
            GeneratorKind::UniformInterval { a, b } => {
                vec![a + (b - a) * rng.gen::<f64>()]
            }
            GeneratorKind::Exponential { rate } => {
                let u: f64 = rng.gen();
                vec![-(1.0 - u).ln() / rate]
            }
            GeneratorKind::Pareto { scale, shape } => {
                let u: f64 = rng.gen();
                vec![scale * (1.0 - u).powf(-1.0 / shape)]
            }
            GeneratorKind::UniformBall { center, radius } => {
                let d = center.len();
                let dir = random_unit(rng, d);
                let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
                center.iter().zip(&dir).map(|(c, s)| c + r * s).collect()
            }
            GeneratorKind::SphericalGaussian { mean, sigma } => mean
                .iter()
                .map(|m| m + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
            GeneratorKind::BananaMixture => {
                let means = [[-1.6, 0.8], [0.0, -0.8], [1.6, 0.8]];
                let sigma = 0.5;
                let comp = rng.gen_range(0..3usize);
                vec![
                    means[comp][0] + sigma * rng.sample::<f64, _>(StandardNormal),
                    means[comp][1] + sigma * rng.sample::<f64, _>(StandardNormal),
                ]
            }
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn supported_1d(kind: &GeneratorKind) -> Result<Supported> {
    match kind {
        GeneratorKind::UniformInterval { a, b } if *a == 0.0 && *b == 1.0 => {
            Ok(Supported::Uniform01)
        }
        GeneratorKind::Exponential { rate } if *rate == 2.0 => Ok(Supported::Exponential2),
        GeneratorKind::Pareto { scale, shape } if *scale == 0.25 && *shape == 2.0 => {
            Ok(Supported::ParetoQuarter2)
        }
        other => Err(Error::InvalidArgument(format!(
            "no closed form available for {other:?}"
        ))),
    }
}

enum Supported {
    Uniform01,
    Exponential2,
    ParetoQuarter2,
}

/// Closed-form relative center-outward Lorenz value for the three supported
/// families (all with mean 1/2).
pub fn closed_form_lorenz_pm(kind: &GeneratorKind, u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!("u = {u} outside [0,1)")));
    }
    let v = match supported_1d(kind)? {
        Supported::Uniform01 => u,
        Supported::Exponential2 => {
            let ln4 = 4.0f64.ln();
            (u * (2.0 + ln4) + (1.0 - u) * (1.0 - u).ln() - (1.0 + u) * (1.0 + u).ln()) / 2.0
        }
        Supported::ParetoQuarter2 => {
            std::f64::consts::SQRT_2 * ((1.0 + u).sqrt() - (1.0 - u).sqrt()) / 2.0
        }
    };
    Ok(v)
}

/// Closed-form classical (relative) Lorenz value for the supported families.
pub fn closed_form_classical_lorenz(kind: &GeneratorKind, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!("u = {u} outside [0,1]")));
    }
    let v = match supported_1d(kind)? {
        Supported::Uniform01 => u * u,
        Supported::Exponential2 => {
            if u == 1.0 {
                1.0
            } else {
                u + (1.0 - u) * (1.0 - u).ln()
            }
        }
        Supported::ParetoQuarter2 => 1.0 - (1.0 - u).sqrt(),
    };
    Ok(v)
}

/// Closed-form relative Lorenz potential value for the supported families.
pub fn closed_form_relative_potential(kind: &GeneratorKind, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!("u = {u} outside [0,1]")));
    }
    let v = match supported_1d(kind)? {
        Supported::Uniform01 => u * u,
        Supported::Exponential2 => {
            let ln2 = std::f64::consts::LN_2;
            let term = |t: f64| {
                if t <= 0.0 {
                    0.0
                } else {
                    t * (t / 2.0).ln()
                }
            };
            (term(1.0 - u) / 4.0 + term(1.0 + u) / 4.0 + ln2 / 2.0) * 2.0 / ln2
        }
        Supported::ParetoQuarter2 => {
            let s2 = std::f64::consts::SQRT_2;
            (-((1.0 + u).sqrt() + (1.0 - u).sqrt()) / (2.0 * s2) + 1.0 / s2) / (1.0 / s2 - 0.5)
        }
    };
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform01() -> GeneratorKind {
        GeneratorKind::UniformInterval { a: 0.0, b: 1.0 }
    }
    fn exp2() -> GeneratorKind {
        GeneratorKind::Exponential { rate: 2.0 }
    }
    fn pareto_q2() -> GeneratorKind {
        GeneratorKind::Pareto {
            scale: 0.25,
            shape: 2.0,
        }
    }

    fn sample_mean(kind: GeneratorKind, n: usize, seed: u64) -> f64 {
        let g = Generator::new(kind, seed);
        let m = g.draw(n).unwrap().mean();
        m[0]
    }

    #[test]
    fn generator_means_are_one_half() {
        assert_abs_diff_eq!(sample_mean(uniform01(), 4000, 17), 0.5, epsilon = 0.02);
        assert_abs_diff_eq!(sample_mean(exp2(), 4000, 17), 0.5, epsilon = 0.02);
        assert_abs_diff_eq!(sample_mean(pareto_q2(), 4000, 17), 0.5, epsilon = 0.05);
    }

    #[test]
    fn generators_are_deterministic() {
        let a = Generator::new(exp2(), 99).draw(64).unwrap();
        let b = Generator::new(exp2(), 99).draw(64).unwrap();
        assert_eq!(a.rows(), b.rows());
        let c = Generator::new(exp2(), 100).draw(64).unwrap();
        assert_ne!(a.rows(), c.rows());
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(Generator::new(
            GeneratorKind::Pareto {
                scale: 0.25,
                shape: 1.0
            },
            0
        )
        .draw(10)
        .is_err());
        assert!(Generator::new(
            GeneratorKind::UniformInterval { a: 1.0, b: 0.0 },
            0
        )
        .draw(10)
        .is_err());
    }

    #[test]
    fn closed_form_edge_values() {
        assert_abs_diff_eq!(closed_form_lorenz_pm(&uniform01(), 0.5).unwrap(), 0.5);
        for kind in [uniform01(), exp2(), pareto_q2()] {
            assert_abs_diff_eq!(
                closed_form_lorenz_pm(&kind, 0.0).unwrap(),
                0.0,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                closed_form_classical_lorenz(&kind, 1.0).unwrap(),
                1.0,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                closed_form_relative_potential(&kind, 1.0).unwrap(),
                1.0,
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(
            closed_form_classical_lorenz(&uniform01(), 0.5).unwrap(),
            0.25
        );
        assert_abs_diff_eq!(
            closed_form_classical_lorenz(&pareto_q2(), 0.75).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(closed_form_lorenz_pm(
            &GeneratorKind::Exponential { rate: 1.0 },
            0.5
        )
        .is_err());
    }

    // Quantile functions of the three supported families.
    fn quantile(kind: &GeneratorKind, t: f64) -> f64 {
        match supported_1d(kind).unwrap() {
            Supported::Uniform01 => t,
            Supported::Exponential2 => -(1.0 - t).ln() / 2.0,
            Supported::ParetoQuarter2 => 0.25 / (1.0 - t).sqrt(),
        }
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, steps: usize) -> f64 {
        let h = (b - a) / steps as f64;
        let mut acc = f(a) + f(b);
        for i in 1..steps {
            let x = a + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn center_outward_closed_forms_match_quadrature() {
        // L_pm(u) = (1/mu) * int_{(1-u)/2}^{(1+u)/2} Q(t) dt, mu = 1/2
        for kind in [uniform01(), exp2(), pareto_q2()] {
            for k in 1..=9 {
                let u = k as f64 / 10.0;
                let lo = (1.0 - u) / 2.0;
                let hi = (1.0 + u) / 2.0;
                let num = simpson(|t| quantile(&kind, t), lo, hi, 20000);
                assert_abs_diff_eq!(
                    closed_form_lorenz_pm(&kind, u).unwrap(),
                    num / 0.5,
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn classical_closed_forms_match_quadrature() {
        // L(u) = (1/mu) * int_0^u Q(t) dt
        for kind in [uniform01(), exp2(), pareto_q2()] {
            for k in 1..=9 {
                let u = k as f64 / 10.0;
                let num = simpson(|t| quantile(&kind, t), 0.0, u, 20000);
                assert_abs_diff_eq!(
                    closed_form_classical_lorenz(&kind, u).unwrap(),
                    num / 0.5,
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn relative_potential_closed_forms_match_quadrature() {
        // Lambda(u) = (psi(u) + psi(-u))/2 with psi(v) = int_0^v Q_pm(s) ds and
        // Q_pm(s) = Q((1+s)/2). The quantile blows up at the upper endpoint,
        // so the quadrature check compares ratios away from u = 1 instead of
        // normalizing by Lambda(1).
        for kind in [uniform01(), exp2(), pareto_q2()] {
            let psi = |v: f64| simpson(|s| quantile(&kind, (1.0 + s) / 2.0), 0.0, v, 20000);
            let lambda = |u: f64| 0.5 * (psi(u) + psi(-u));
            let anchor_num = lambda(0.9);
            let anchor_cf = closed_form_relative_potential(&kind, 0.9).unwrap();
            for k in 1..=8 {
                let u = k as f64 / 10.0;
                assert_abs_diff_eq!(
                    closed_form_relative_potential(&kind, u).unwrap() / anchor_cf,
                    lambda(u) / anchor_num,
                    epsilon = 1e-7
                );
            }
        }
    }

    #[test]
    fn ball_and_gaussian_shapes() {
        let g = Generator::new(
            GeneratorKind::UniformBall {
                center: vec![0.5, 0.5],
                radius: 0.4,
            },
            3,
        );
        let s = g.draw(500).unwrap();
        assert_eq!(s.dim(), 2);
        for row in s.rows() {
            let d2 = (row[0] - 0.5).powi(2) + (row[1] - 0.5).powi(2);
            assert!(d2 <= 0.16 + 1e-12);
        }
        let g = Generator::new(
            GeneratorKind::SphericalGaussian {
                mean: vec![1.0, -1.0, 0.0],
                sigma: 0.5,
            },
            4,
        );
        let s = g.draw(4000).unwrap();
        let m = s.mean();
        assert_abs_diff_eq!(m[0], 1.0, epsilon = 0.05);
        assert_abs_diff_eq!(m[1], -1.0, epsilon = 0.05);
        assert_abs_diff_eq!(m[2], 0.0, epsilon = 0.05);
    }
}
