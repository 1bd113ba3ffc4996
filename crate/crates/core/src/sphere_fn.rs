//! Registered smooth functions on S^{m-1} with exact ambient and spherical
//! derivatives.
//!
//! Functions are stored as polynomials in the ambient coordinates, so
//! gradients and Hessians are exact. Spherical (covariant) derivatives come
//! from the projection formulas
//!   grad_S g = P_u grad g,
//!   hess_S g = P_u (hess g) P_u - <grad g, u> P_u,
//! which do not depend on the choice of ambient extension.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Polynomial in ambient coordinates: sum of coeff * x^exps terms.
#[derive(Debug, Clone)]
pub struct PolyForm {
    pub m: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl PolyForm {
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.terms
            .iter()
            .map(|(c, exps)| c * exps.iter().enumerate().map(|(i, &e)| x[i].powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(self.m);
        for (c, exps) in &self.terms {
            for i in 0..self.m {
                if exps[i] == 0 {
                    continue;
                }
                let mut v = c * exps[i] as f64;
                for (j, &e) in exps.iter().enumerate() {
                    let p = if j == i { e - 1 } else { e };
                    v *= x[j].powi(p as i32);
                }
                g[i] += v;
            }
        }
        g
    }

    pub fn hess(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.m, self.m);
        for (c, exps) in &self.terms {
            for i in 0..self.m {
                for j in 0..self.m {
                    let fi = exps[i];
                    let fj = if j == i { fi.saturating_sub(1) } else { exps[j] };
                    if fi == 0 || fj == 0 {
                        continue;
                    }
                    let mut v = c * fi as f64 * fj as f64;
                    for (l, &e) in exps.iter().enumerate() {
                        let mut p = e;
                        if l == i {
                            p -= 1;
                        }
                        if l == j {
                            p -= 1;
                        }
                        v *= x[l].powi(p as i32);
                    }
                    h[(i, j)] += v;
                }
            }
        }
        h
    }

    /// Every term has even total degree, hence the function is even.
    pub fn is_even_by_degree(&self) -> bool {
        self.terms.iter().all(|(_, exps)| exps.iter().sum::<u32>() % 2 == 0)
    }
}

/// A named even function on the sphere with exact derivative evaluators.
#[derive(Debug, Clone)]
pub struct SphereFunction {
    pub name: String,
    pub form: PolyForm,
    /// Spherical-harmonic degree when the restriction is a pure harmonic.
    pub harmonic_degree: Option<u32>,
}

impl SphereFunction {
    pub fn m(&self) -> usize {
        self.form.m
    }

    pub fn eval(&self, u: &DVector<f64>) -> f64 {
        self.form.eval(u)
    }

    /// g(u) = u^T S u for symmetric traceless S.
    pub fn quadratic(s: &DMatrix<f64>) -> Result<SphereFunction> {
        let m = s.nrows();
        if s.ncols() != m {
            return Err(Error::InvalidInput("quadratic form matrix must be square".into()));
        }
        if (s - s.transpose()).norm() > 1e-12 * s.norm().max(1.0) {
            return Err(Error::InvalidInput("quadratic form matrix must be symmetric".into()));
        }
        if s.trace().abs() > 1e-10 * s.norm().max(1.0) {
            return Err(Error::InvalidInput("registered quadratic requires a traceless matrix".into()));
        }
        let mut terms = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if s[(i, j)] != 0.0 {
                    let mut exps = vec![0u32; m];
                    exps[i] += 1;
                    exps[j] += 1;
                    terms.push((s[(i, j)], exps));
                }
            }
        }
        Ok(SphereFunction {
            name: "quadratic".into(),
            form: PolyForm { m, terms },
            harmonic_degree: Some(2),
        })
    }

    /// g(phi) = cos(ell * phi) on the circle, as Re((x + iy)^ell); even ell only.
    pub fn cos_harmonic(ell: u32) -> Result<SphereFunction> {
        if ell == 0 || ell % 2 != 0 {
            return Err(Error::InvalidInput("cos harmonic registered for even ell >= 2".into()));
        }
        let mut terms = Vec::new();
        let mut binom = 1u64;
        for j in 0..=ell {
            if j % 2 == 0 {
                let sign = if j % 4 == 0 { 1.0 } else { -1.0 };
                terms.push((sign * binom as f64, vec![ell - j, j]));
            }
            binom = binom * (ell - j) as u64 / (j + 1) as u64;
        }
        Ok(SphereFunction {
            name: format!("cos{}phi", ell),
            form: PolyForm { m: 2, terms },
            harmonic_degree: Some(ell),
        })
    }

    /// Degree-4 zonal harmonic on S^2: (35 z^4 - 30 z^2 r^2 + 3 r^4) / 8.
    pub fn zonal_quartic_m3() -> SphereFunction {
        let mut terms = Vec::new();
        terms.push((35.0 / 8.0, vec![0, 0, 4]));
        // -30/8 z^2 (x^2 + y^2 + z^2)
        for exps in [vec![2, 0, 2], vec![0, 2, 2], vec![0, 0, 4]] {
            terms.push((-30.0 / 8.0, exps));
        }
        // 3/8 (x^2 + y^2 + z^2)^2
        let r4 = [
            (1.0, vec![4, 0, 0]),
            (1.0, vec![0, 4, 0]),
            (1.0, vec![0, 0, 4]),
            (2.0, vec![2, 2, 0]),
            (2.0, vec![2, 0, 2]),
            (2.0, vec![0, 2, 2]),
        ];
        for (c, exps) in r4 {
            terms.push((3.0 / 8.0 * c, exps));
        }
        SphereFunction {
            name: "zonal4".into(),
            form: PolyForm { m: 3, terms },
            harmonic_degree: Some(4),
        }
    }
}

/// Tangential projector P_u = I - u u^T.
pub fn tangent_projector(u: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::identity(u.len(), u.len()) - u * u.transpose()
}

/// Spherical gradient of the polynomial's restriction at a unit vector.
pub fn spherical_grad(form: &PolyForm, u: &DVector<f64>) -> DVector<f64> {
    let g = form.grad(u);
    &g - u * u.dot(&g)
}

/// Spherical Hessian of the polynomial's restriction at a unit vector.
pub fn spherical_hess(form: &PolyForm, u: &DVector<f64>) -> DMatrix<f64> {
    let p = tangent_projector(u);
    let radial = u.dot(&form.grad(u));
    &p * form.hess(u) * &p - radial * &p
}

/// Laplace-Beltrami value at a unit vector (trace of the spherical Hessian).
pub fn spherical_laplacian(form: &PolyForm, u: &DVector<f64>) -> f64 {
    spherical_hess(form, u).trace()
}

/// Finite-difference Laplace-Beltrami of an arbitrary sphere function,
/// computed as the ambient Laplacian of the degree-0 homogeneous extension.
pub fn fd_spherical_laplacian(f: &dyn Fn(&DVector<f64>) -> f64, u: &DVector<f64>, h: f64) -> f64 {
    let m = u.len();
    let hom = |x: &DVector<f64>| f(&(x / x.norm()));
    let center = hom(u);
    let mut acc = 0.0;
    for i in 0..m {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[i] += h;
        dn[i] -= h;
        acc += hom(&up) - 2.0 * center + hom(&dn);
    }
    acc / (h * h)
}
