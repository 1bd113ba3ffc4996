//! Spherical-harmonic structure of the anisotropy of perturbed balls.
//!
//! For support functions h = 1 + eps g the hypersurface-measure anisotropy
//! has a first variation L(g) = lim (T(eps) - I)/eps that only sees the
//! degree-0 and degree-2 harmonic components of g:
//!   L(g) = -m * integral g(u) (u u^T - I/m) d omega(u),
//! so all harmonics of degree >= 4 are annihilated. The alpha-cone family
//! replaces the factor -m by (alpha - 1) m / ... in the paired form below;
//! what is implemented and tested is the mean-coefficient derivative
//!   d/d eps avg <B w, w*> |_0 = (alpha - 1) * integral g <Bu, u> d omega
//! for traceless symmetric B, which vanishes identically at alpha = 1.

use nalgebra::DMatrix;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::isotropy::{isotropy_report, trace_average};
use crate::measures::{BoundaryScheme, MeasureSpec};
use crate::quadrature::{sphere_rule, Scheme, SphereRule};
use crate::smooth::SmoothSupportBody;
use crate::sphere_fn::{spherical_grad, SphereFunction};

/// Polynomial extrapolation of matrix-valued data to x = 0 (Neville).
pub fn extrapolate_matrices(xs: &[f64], ys: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::InvalidInput("extrapolation needs matching nonempty data".into()));
    }
    let n = xs.len();
    let mut tab: Vec<DMatrix<f64>> = ys.to_vec();
    for j in 1..n {
        for i in 0..n - j {
            let denom = xs[i + j] - xs[i];
            if denom.abs() < 1e-300 {
                return Err(Error::InvalidInput("extrapolation nodes must be distinct".into()));
            }
            tab[i] = (&tab[i + 1] * (-xs[i]) - &tab[i] * (-xs[i + j])) / denom;
        }
    }
    Ok(tab[0].clone())
}

pub fn extrapolate_scalars(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let mats: Vec<DMatrix<f64>> =
        ys.iter().map(|&v| DMatrix::from_element(1, 1, v)).collect();
    extrapolate_matrices(xs, &mats).map(|m| m[(0, 0)])
}

#[derive(Debug, Clone)]
pub struct HarmonicProjection {
    /// Degree-0 component: the mean of g.
    pub mean: f64,
    /// Traceless symmetric S with degree-2 component u^T S u.
    pub s_hat: DMatrix<f64>,
    /// L^2 norm of what is left after removing degrees 0 and 2.
    pub residual: f64,
}

/// Projects g onto spherical harmonics of degree 0 and 2 by moment
/// integration: S = (m(m+2)/2) * avg g (u u^T - I/m).
pub fn project_degree2(g: &SphereFunction, rule: &SphereRule) -> Result<HarmonicProjection> {
    let m = g.m();
    if rule.m != m {
        return Err(Error::RuleMismatch("rule dimension does not match g".into()));
    }
    let mean = rule.integrate(|u| g.eval(u));
    let moment = rule.integrate_matrix(m, m, |u| {
        let mut h = u * u.transpose() * g.eval(u);
        let gv = g.eval(u) / m as f64;
        for i in 0..m {
            h[(i, i)] -= gv;
        }
        h
    });
    let s_hat = moment * (m as f64 * (m as f64 + 2.0) / 2.0);
    let l2 = rule.integrate(|u| g.eval(u).powi(2));
    let deg2_norm2 = 2.0 * s_hat.norm_squared() / (m as f64 * (m as f64 + 2.0));
    let residual2 = (l2 - mean * mean - deg2_norm2).max(0.0);
    Ok(HarmonicProjection { mean, s_hat, residual: residual2.sqrt() })
}

/// Closed form of the first variation: L(g) = -(2/(m+2)) S_hat, i.e.
/// -m * avg g (u u^T - I/m).
pub fn first_variation_closed_form(g: &SphereFunction, rule: &SphereRule) -> Result<DMatrix<f64>> {
    let proj = project_degree2(g, rule)?;
    let m = g.m() as f64;
    Ok(proj.s_hat * (-2.0 / (m + 2.0)))
}

/// Numeric first variation: assemble T(eps) for the body h = 1 + eps g at
/// each ladder value and extrapolate (T(eps) - I)/eps to eps = 0.
pub fn numeric_first_variation(
    g: &SphereFunction,
    measure: &MeasureSpec,
    eps_ladder: &[f64],
    scheme: &Scheme,
) -> Result<DMatrix<f64>> {
    let mut slopes = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        if eps == 0.0 {
            return Err(Error::InvalidInput("ladder values must be nonzero".into()));
        }
        let body = Body::Smooth(SmoothSupportBody::new(eps, g.clone())?);
        let report = isotropy_report(&body, measure, &BoundaryScheme::Sphere(scheme.clone()))?;
        slopes.push(report.anisotropy / eps);
    }
    extrapolate_matrices(eps_ladder, &slopes)
}

#[derive(Debug, Clone)]
pub struct AlphaDerivativeReport {
    pub alpha: f64,
    /// Extrapolated d/d eps of avg <B w, w*> under eta_alpha at eps = 0.
    pub numeric: f64,
    /// (alpha - 1) * avg g <Bu, u> on the sphere.
    pub predicted: f64,
    pub gap: f64,
}

/// Derivative of the mean trace coefficient in the perturbation size, for
/// the alpha-cone measure on h = 1 + eps g.
pub fn alpha_cone_derivative(
    g: &SphereFunction,
    b_mat: &DMatrix<f64>,
    alpha: f64,
    eps_ladder: &[f64],
    scheme: &Scheme,
) -> Result<AlphaDerivativeReport> {
    let m = g.m();
    if b_mat.nrows() != m || b_mat.ncols() != m {
        return Err(Error::InvalidInput("matrix dimension does not match g".into()));
    }
    let measure = MeasureSpec::alpha_cone(alpha)?;
    let boundary = BoundaryScheme::Sphere(scheme.clone());
    let ball = Body::Smooth(SmoothSupportBody::new(0.0, g.clone())?);
    let base = trace_average(b_mat, 1, &ball, &measure, &boundary)?.mean_coefficient;
    let mut slopes = Vec::with_capacity(eps_ladder.len());
    for &eps in eps_ladder {
        let body = Body::Smooth(SmoothSupportBody::new(eps, g.clone())?);
        let mean = trace_average(b_mat, 1, &body, &measure, &boundary)?.mean_coefficient;
        slopes.push((mean - base) / eps);
    }
    let numeric = extrapolate_scalars(eps_ladder, &slopes)?;
    let rule = sphere_rule(m, scheme.clone())?;
    let moment = rule.integrate(|u| g.eval(u) * (b_mat * u).dot(u));
    let predicted = (alpha - 1.0) * moment;
    Ok(AlphaDerivativeReport { alpha, numeric, predicted, gap: (numeric - predicted).abs() })
}

#[derive(Debug, Clone)]
pub struct DifferentialIdentityReport {
    /// avg <B grad_S g, u>.
    pub divergence_lhs: f64,
    /// m * avg g <Bu, u>; equal for mean-zero g.
    pub divergence_rhs: f64,
    pub divergence_gap: f64,
    /// Max over sample nodes of the eigenvalue identity
    /// lap_S g = -l(l+m-2) g for registered harmonics.
    pub laplacian_gap: Option<f64>,
    /// |avg(J h^alpha) - 1| / eps^2: the normalization constant of the
    /// perturbed measure has no first-order term for mean-zero g.
    pub mass_curvature: f64,
}

pub fn differential_identities_check(
    g: &SphereFunction,
    b_mat: &DMatrix<f64>,
    measure: &MeasureSpec,
    scheme: &Scheme,
) -> Result<DifferentialIdentityReport> {
    let m = g.m();
    if b_mat.nrows() != m || b_mat.ncols() != m {
        return Err(Error::InvalidInput("matrix dimension does not match g".into()));
    }
    let rule = sphere_rule(m, scheme.clone())?;
    let lhs = rule.integrate(|u| (b_mat * spherical_grad(&g.form, u)).dot(u));
    let rhs = m as f64 * rule.integrate(|u| g.eval(u) * (b_mat * u).dot(u));
    let laplacian_gap = g.harmonic_degree.map(|ell| {
        let eig = -(ell as f64) * (ell as f64 + m as f64 - 2.0);
        rule.nodes
            .iter()
            .step_by((rule.len() / 64).max(1))
            .map(|u| (crate::sphere_fn::spherical_laplacian(&g.form, u) - eig * g.eval(u)).abs())
            .fold(0.0_f64, f64::max)
    });
    let eps = 1e-3;
    let body = SmoothSupportBody::new(eps, g.clone())?;
    let alpha = measure.alpha();
    let mut mass = 0.0;
    for (u, &w) in rule.nodes.iter().zip(&rule.weights) {
        mass += w * body.surface_element(u)? * body.h(u).powf(alpha);
    }
    Ok(DifferentialIdentityReport {
        divergence_lhs: lhs,
        divergence_rhs: rhs,
        divergence_gap: (lhs - rhs).abs(),
        laplacian_gap,
        mass_curvature: (mass - 1.0).abs() / (eps * eps),
    })
}

/// Deviations of the rule's second and fourth moments from the uniform
/// sphere values E[u_i u_j] = delta_ij / m and
/// E[u_i u_j u_k u_l] = (delta_ij delta_kl + delta_ik delta_jl
/// + delta_il delta_jk) / (m (m+2)).
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub m: usize,
    pub max_second_dev: f64,
    pub max_fourth_dev: f64,
    /// For randomized rules: max over moments of |deviation| / stderr.
    pub max_sigma_ratio: Option<f64>,
    pub nodes: usize,
}

pub fn moment_check(m: usize, scheme: &Scheme) -> Result<MomentReport> {
    let rule = sphere_rule(m, scheme.clone())?;
    let mf = m as f64;
    let mut max2 = 0.0_f64;
    let mut max4 = 0.0_f64;
    let mut max_ratio = 0.0_f64;
    let mut track = |dev: f64, err: Option<f64>, fourth: bool| {
        if fourth {
            max4 = max4.max(dev);
        } else {
            max2 = max2.max(dev);
        }
        if let Some(e) = err {
            max_ratio = max_ratio.max(dev / e.max(1e-12));
        }
    };
    for i in 0..m {
        for j in i..m {
            let want = if i == j { 1.0 / mf } else { 0.0 };
            let (got, err) = rule.integrate_with_err(|u| u[i] * u[j]);
            track((got - want).abs(), err, false);
        }
    }
    let pair = 1.0 / (mf * (mf + 2.0));
    for i in 0..m {
        for j in i..m {
            for k in j..m {
                for l in k..m {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let want = (d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k)) * pair;
                    let (got, err) =
                        rule.integrate_with_err(|u| u[i] * u[j] * u[k] * u[l]);
                    track((got - want).abs(), err, true);
                }
            }
        }
    }
    Ok(MomentReport {
        m,
        max_second_dev: max2,
        max_fourth_dev: max4,
        max_sigma_ratio: if rule.randomized { Some(max_ratio) } else { None },
        nodes: rule.len(),
    })
}
