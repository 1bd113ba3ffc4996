//! Quadrature rules for the Euclidean unit sphere S^{m-1}.
//!
//! All rules integrate against the uniform probability measure: weights are
//! positive and sum to 1. Deterministic schemes are spectrally accurate for
//! smooth integrands; the Monte Carlo scheme carries its seed and reports
//! standard errors.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::random_direction;

/// Gauss-Legendre nodes and weights on [-1, 1]; weights sum to 2.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-flavored initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature scheme selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Equispaced angles with trapezoid weights; m = 2 only.
    Angular(usize),
    /// Normalized Gaussian directions; works in any dimension.
    MonteCarlo(usize, u64),
    /// Tensorized rule in spherical coordinates; m = 3 or 4.
    Product(usize),
}

impl Scheme {
    pub fn tag(&self) -> String {
        match self {
            Scheme::Angular(n) => format!("angular({})", n),
            Scheme::MonteCarlo(n, seed) => format!("montecarlo({}, seed={})", n, seed),
            Scheme::Product(n) => format!("product({})", n),
        }
    }
}

/// Nodes and probability weights on S^{m-1}.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub m: usize,
    pub nodes: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    pub scheme: String,
    pub seed: Option<u64>,
    pub randomized: bool,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted sum of a scalar integrand.
    pub fn integrate(&self, f: impl Fn(&DVector<f64>) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(u, w)| w * f(u)).sum()
    }

    /// Weighted sum plus a standard error when the rule is randomized.
    pub fn integrate_with_err(&self, f: impl Fn(&DVector<f64>) -> f64) -> (f64, Option<f64>) {
        if !self.randomized {
            return (self.integrate(f), None);
        }
        let n = self.len() as f64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for u in &self.nodes {
            let v = f(u);
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n;
        let var = (sumsq - n * mean * mean).max(0.0) / (n - 1.0);
        (mean, Some((var / n).sqrt()))
    }

    /// Weighted sum of a matrix integrand.
    pub fn integrate_matrix(
        &self,
        rows: usize,
        cols: usize,
        f: impl Fn(&DVector<f64>) -> DMatrix<f64>,
    ) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(rows, cols);
        for (u, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(u) * *w;
        }
        acc
    }
}

/// Build a quadrature rule on S^{m-1}.
pub fn sphere_rule(m: usize, scheme: Scheme) -> Result<SphereRule> {
    if m < 2 {
        return Err(Error::InvalidInput("sphere dimension needs m >= 2".into()));
    }
    match scheme {
        Scheme::Angular(n) => {
            if m != 2 {
                return Err(Error::RuleMismatch(format!(
                    "angular rule is specific to m = 2, got m = {}",
                    m
                )));
            }
            if n < 4 {
                return Err(Error::InvalidInput("angular rule needs at least 4 nodes".into()));
            }
            let mut nodes = Vec::with_capacity(n);
            for i in 0..n {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                nodes.push(DVector::from_vec(vec![phi.cos(), phi.sin()]));
            }
            Ok(SphereRule {
                m,
                nodes,
                weights: vec![1.0 / n as f64; n],
                scheme: scheme.tag(),
                seed: None,
                randomized: false,
            })
        }
        Scheme::MonteCarlo(n, seed) => {
            if n < 2 {
                return Err(Error::InvalidInput("Monte Carlo rule needs at least 2 nodes".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let nodes = (0..n).map(|_| random_direction(m, &mut rng)).collect();
            Ok(SphereRule {
                m,
                nodes,
                weights: vec![1.0 / n as f64; n],
                scheme: scheme.tag(),
                seed: Some(seed),
                randomized: true,
            })
        }
        Scheme::Product(n) => {
            if n < 3 {
                return Err(Error::InvalidInput("product rule needs n >= 3".into()));
            }
            match m {
                3 => Ok(build_product_s2(n, scheme.tag())),
                4 => Ok(build_product_s3(n, scheme.tag())),
                _ => Err(Error::RuleMismatch(format!(
                    "product rule covers m = 3, 4; got m = {} (use montecarlo)",
                    m
                ))),
            }
        }
    }
}

fn build_product_s2(n: usize, tag: String) -> SphereRule {
    // Gauss-Legendre in t = cos(theta), trapezoid in phi.
    let gl = gauss_legendre(n);
    let n_phi = 2 * n;
    let mut nodes = Vec::with_capacity(n * n_phi);
    let mut weights = Vec::with_capacity(n * n_phi);
    for &(t, wt) in &gl {
        let s = (1.0 - t * t).max(0.0).sqrt();
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            nodes.push(DVector::from_vec(vec![s * phi.cos(), s * phi.sin(), t]));
            weights.push(wt / 2.0 / n_phi as f64);
        }
    }
    normalize_weights(&mut weights);
    SphereRule { m: 3, nodes, weights, scheme: tag, seed: None, randomized: false }
}

fn build_product_s3(n: usize, tag: String) -> SphereRule {
    // Midpoint rule in theta1 against the sin^2 density (spectral after even
    // periodic extension), Gauss-Legendre in t2 = cos(theta2), trapezoid in phi.
    let gl = gauss_legendre(n);
    let n_phi = 2 * n;
    let pi = std::f64::consts::PI;
    let mut nodes = Vec::with_capacity(n * n * n_phi);
    let mut weights = Vec::with_capacity(n * n * n_phi);
    for a in 0..n {
        let theta1 = (a as f64 + 0.5) * pi / n as f64;
        let (s1, c1) = theta1.sin_cos();
        // sin^2 density has mass pi/2 on [0, pi].
        let w1 = s1 * s1 * (pi / n as f64) / (pi / 2.0);
        for &(t2, wt2) in &gl {
            let s2 = (1.0 - t2 * t2).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = 2.0 * pi * j as f64 / n_phi as f64;
                nodes.push(DVector::from_vec(vec![
                    c1,
                    s1 * t2,
                    s1 * s2 * phi.cos(),
                    s1 * s2 * phi.sin(),
                ]));
                weights.push(w1 * (wt2 / 2.0) / n_phi as f64);
            }
        }
    }
    normalize_weights(&mut weights);
    SphereRule { m: 4, nodes, weights, scheme: tag, seed: None, randomized: false }
}

fn normalize_weights(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-10, "rule normalization drifted: {}", total);
    for w in weights.iter_mut() {
        *w /= total;
    }
}

/// Modest deterministic rule used for construction-time guards and checks.
pub fn check_grid(m: usize) -> SphereRule {
    match m {
        2 => sphere_rule(2, Scheme::Angular(256)).unwrap(),
        3 => sphere_rule(3, Scheme::Product(24)).unwrap(),
        4 => sphere_rule(4, Scheme::Product(12)).unwrap(),
        _ => sphere_rule(m, Scheme::MonteCarlo(4096, 0xC0FFEE)).unwrap(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [3usize, 5, 8, 16] {
            let rule = gauss_legendre(n);
            let total: f64 = rule.iter().map(|&(_, w)| w).sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-13);
            for k in (0..2 * n).step_by(2) {
                let num: f64 = rule.iter().map(|&(x, w)| w * x.powi(k as i32)).sum();
                assert_relative_eq!(num, 2.0 / (k as f64 + 1.0), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn angular_rule_second_moment() {
        let rule = sphere_rule(2, Scheme::Angular(4096)).unwrap();
        let v = rule.integrate(|u| u[0] * u[0]);
        assert_relative_eq!(v, 0.5, epsilon = 1e-14);
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn angular_rule_rejects_higher_dim() {
        assert!(matches!(sphere_rule(3, Scheme::Angular(64)), Err(Error::RuleMismatch(_))));
    }

    #[test]
    fn product_s2_second_moment() {
        let rule = sphere_rule(3, Scheme::Product(64)).unwrap();
        let second = rule.integrate_matrix(3, 3, |u| u * u.transpose());
        assert_relative_eq!(second, DMatrix::identity(3, 3) / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn product_s3_fourth_moments() {
        let rule = sphere_rule(4, Scheme::Product(16)).unwrap();
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        // Fourth moments on S^3: u1^4 -> 3/24, u1^2 u2^2 -> 1/24.
        let m1111 = rule.integrate(|u| u[0].powi(4));
        let m1122 = rule.integrate(|u| u[0] * u[0] * u[1] * u[1]);
        let m3344 = rule.integrate(|u| u[2] * u[2] * u[3] * u[3]);
        assert_relative_eq!(m1111, 1.0 / 8.0, epsilon = 1e-12);
        assert_relative_eq!(m1122, 1.0 / 24.0, epsilon = 1e-12);
        assert_relative_eq!(m3344, 1.0 / 24.0, epsilon = 1e-12);
        // Odd moments vanish.
        assert_relative_eq!(rule.integrate(|u| u[0] * u[1]), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn montecarlo_high_dim_fourth_moment() {
        let rule = sphere_rule(6, Scheme::MonteCarlo(1_000_000, 7)).unwrap();
        let (v, se) = rule.integrate_with_err(|u| u[0] * u[0] * u[1] * u[1]);
        let se = se.unwrap();
        let exact = 1.0 / 48.0;
        assert!((v - exact).abs() <= 3.0 * se, "moment {} vs {} (se {})", v, exact, se);
        assert!(se < 1e-3);
    }

    #[test]
    fn montecarlo_is_reproducible() {
        let a = sphere_rule(3, Scheme::MonteCarlo(100, 42)).unwrap();
        let b = sphere_rule(3, Scheme::MonteCarlo(100, 42)).unwrap();
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            assert_eq!(x, y);
        }
    }
}
