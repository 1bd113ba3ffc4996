//! Smooth convex bodies given by a perturbed support function h = 1 + eps*g.
//!
//! The boundary is parametrized by the outer normal direction:
//! x(u) = h(u) u + grad_S h(u), with norming functional x*(u) = u / h(u) and
//! surface element det(hess_S h + h I) relative to the sphere. Strict
//! convexity (that determinant's matrix being positive definite) is checked
//! at construction on a deterministic grid and again at every evaluation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::check_grid;
use crate::sphere_fn::{spherical_grad, spherical_hess, tangent_projector, SphereFunction};

#[derive(Debug, Clone)]
pub struct SmoothSupportBody {
    pub m: usize,
    pub eps: f64,
    pub g: SphereFunction,
    pub name: String,
}

impl SmoothSupportBody {
    /// Perturbed ball with support function 1 + eps*g; fails when the
    /// perturbation is large enough to threaten positivity or strict
    /// convexity.
    pub fn new(eps: f64, g: SphereFunction) -> Result<SmoothSupportBody> {
        let m = g.m();
        if m < 2 {
            return Err(Error::InvalidInput("body dimension needs m >= 2".into()));
        }
        if !g.form.is_even_by_degree() {
            return Err(Error::AsymmetricInput);
        }
        let body = SmoothSupportBody { m, eps, g: g.clone(), name: format!("smooth[1+{}*{}]", eps, g.name) };
        let grid = check_grid(m);
        let mut max_g: f64 = 0.0;
        let mut min_eig = f64::INFINITY;
        for u in &grid.nodes {
            max_g = max_g.max(body.g.eval(u).abs());
            let s = body.curvature_matrix(u);
            let eigs = s.symmetric_eigen().eigenvalues;
            min_eig = min_eig.min(eigs.min());
        }
        if eps.abs() * max_g >= 0.5 {
            return Err(Error::InvalidBody(format!(
                "|eps| * max|g| = {:.3} >= 0.5: support function too far from 1",
                eps.abs() * max_g
            )));
        }
        if min_eig <= 1e-8 {
            return Err(Error::StrictnessViolation(format!(
                "curvature operator loses positivity (min eigenvalue {:.3e})",
                min_eig
            )));
        }
        Ok(body)
    }

    /// The Euclidean ball as the unperturbed case.
    pub fn ball(m: usize) -> SmoothSupportBody {
        let s = DMatrix::zeros(m, m);
        let g = SphereFunction::quadratic(&s).expect("zero form is valid");
        SmoothSupportBody { m, eps: 0.0, g, name: "ball".into() }
    }

    pub fn h(&self, u: &DVector<f64>) -> f64 {
        1.0 + self.eps * self.g.eval(u)
    }

    /// Spherical gradient of h at a unit vector.
    pub fn grad_s_h(&self, u: &DVector<f64>) -> DVector<f64> {
        spherical_grad(&self.g.form, u) * self.eps
    }

    /// Boundary point with outer normal u (Gauss parametrization).
    pub fn boundary_point(&self, u: &DVector<f64>) -> DVector<f64> {
        u * self.h(u) + self.grad_s_h(u)
    }

    /// Ambient m x m matrix whose determinant is the surface element: the
    /// tangential curvature block hess_S h + h I, padded with a unit
    /// eigenvalue along u.
    fn curvature_matrix(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let p = tangent_projector(u);
        let mut s = spherical_hess(&self.g.form, u) * self.eps;
        s += &p * self.h(u);
        s += u * u.transpose();
        s
    }

    /// Jacobian of the Gauss parametrization relative to the sphere:
    /// det(hess_S h + h I). In m = 2 this is h(phi) + h''(phi).
    pub fn surface_element(&self, u: &DVector<f64>) -> Result<f64> {
        let det = self.curvature_matrix(u).lu().determinant();
        if det <= 0.0 {
            return Err(Error::StrictnessViolation(format!(
                "surface element {:.3e} not positive",
                det
            )));
        }
        Ok(det)
    }

    /// Minkowski gauge by maximizing <x, u> / h(u) over the sphere
    /// (the support function of the polar body).
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        self.gauge_with_normal(x).0
    }

    /// Gauge together with the maximizing direction, which is the outer
    /// unit normal at the radial projection of x to the boundary.
    pub fn gauge_with_normal(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let xn = x.norm();
        if xn < 1e-300 {
            return (0.0, DVector::zeros(self.m));
        }
        let mut best_u = x / xn;
        let mut best_f = self.ratio(x, &best_u);
        // Coarse deterministic sweep guards against a bad start.
        for u in &check_grid(self.m).nodes {
            let f = self.ratio(x, u);
            if f > best_f {
                best_f = f;
                best_u = u.clone();
            }
        }
        // Tangent-space Newton ascent.
        let mut u = best_u;
        for _ in 0..60 {
            let (f, gr, hess) = self.ratio_derivatives(x, &u);
            let gnorm = gr.norm();
            if gnorm <= 1e-14 * f.abs().max(xn) {
                break;
            }
            // Solve on the tangent space; the rank-one term keeps the system
            // invertible without moving the tangential solution.
            let lhs = &hess - &u * u.transpose();
            let step = match lhs.clone().lu().solve(&(-&gr)) {
                Some(s) => s,
                None => gr.clone() * (0.1 / gnorm.max(1.0)),
            };
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = (&u + &step * scale).normalize();
                if self.ratio(x, &cand) >= f {
                    u = cand;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (self.ratio(x, &u), u)
    }

    fn ratio(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        x.dot(u) / self.h(u)
    }

    fn ratio_derivatives(&self, x: &DVector<f64>, u: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let h = self.h(u);
        let xu = x.dot(u);
        let gh = self.g.form.grad(u) * self.eps;
        let hh = self.g.form.hess(u) * self.eps;
        let f = xu / h;
        let grad = x / h - &gh * (xu / (h * h));
        let hess_amb = -(x * gh.transpose() + &gh * x.transpose()) / (h * h)
            + (&gh * gh.transpose()) * (2.0 * xu / (h * h * h))
            - hh * (xu / (h * h));
        let p = tangent_projector(u);
        let gr = &p * grad.clone();
        let hess = &p * hess_amb * &p - &p * u.dot(&grad);
        (f, gr, hess)
    }

    /// Support function of the body, extended 1-homogeneously.
    pub fn support(&self, y: &DVector<f64>) -> f64 {
        let n = y.norm();
        if n < 1e-300 {
            return 0.0;
        }
        n * self.h(&(y / n))
    }
}
