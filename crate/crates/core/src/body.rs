//! Unified view of the supported unit-ball classes and the data attached
//! to a boundary point: the point, the Euclidean outer normal, and the
//! norming functional x* with <x, x*> = 1 and dual norm 1.

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lp::LpBody;
use crate::polytope::PolytopeBody;
use crate::smooth::SmoothSupportBody;

const BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub enum Body {
    Polytope(PolytopeBody),
    Smooth(SmoothSupportBody),
    Lp(LpBody),
}

#[derive(Debug, Clone)]
pub struct BoundarySample {
    pub x: DVector<f64>,
    /// Euclidean outer unit normal.
    pub n_e: DVector<f64>,
    /// Norming functional: n_e / <n_e, x>.
    pub x_star: DVector<f64>,
    /// False where the norming functional is not unique (polyhedral
    /// ridges and corners); the returned value is then a canonical choice.
    pub valid: bool,
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::Polytope(b) => b.dim,
            Body::Smooth(b) => b.m,
            Body::Lp(b) => b.m,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Body::Polytope(b) => b.name.clone(),
            Body::Smooth(b) => b.name.clone(),
            Body::Lp(b) => b.name(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Body::Polytope(b) => b.symmetric,
            Body::Smooth(_) | Body::Lp(_) => true,
        }
    }

    /// Minkowski gauge of the body (the norm when the body is symmetric).
    pub fn norm_eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            Body::Polytope(b) => crate::polytope::polytope_gauge(b, x),
            Body::Smooth(b) => b.gauge(x),
            Body::Lp(b) => b.gauge(x),
        }
    }

    /// Dual norm of a functional: the support function of the body.
    pub fn dual_norm(&self, f: &DVector<f64>) -> f64 {
        match self {
            Body::Polytope(b) => crate::polytope::polytope_support(b, f),
            Body::Smooth(b) => b.support(f),
            Body::Lp(b) => b.dual_norm(f),
        }
    }

    /// Exact volume where a closed form is available.
    pub fn volume_exact(&self) -> Option<f64> {
        match self {
            Body::Polytope(b) => Some(b.volume),
            Body::Smooth(_) => None,
            Body::Lp(b) => b.volume(),
        }
    }

    /// Boundary data at a point with norm_eval(x) = 1.
    pub fn boundary_sample(&self, x: &DVector<f64>) -> Result<BoundarySample> {
        let g = self.norm_eval(x);
        if (g - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::InvalidInput(format!(
                "point has gauge {:.6e}, not on the boundary",
                g
            )));
        }
        match self {
            Body::Polytope(b) => {
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                let mut second = f64::NEG_INFINITY;
                for (j, facet) in b.facets.iter().enumerate() {
                    let v = facet.normal.dot(x) / facet.h;
                    if v > best_v {
                        second = best_v;
                        best_v = v;
                        best = j;
                    } else if v > second {
                        second = v;
                    }
                }
                let facet = &b.facets[best];
                let x_star = &facet.normal / facet.h;
                Ok(BoundarySample {
                    x: x.clone(),
                    n_e: facet.normal.clone(),
                    x_star,
                    valid: best_v - second > BOUNDARY_TOL,
                })
            }
            Body::Smooth(b) => {
                let (_, u) = b.gauge_with_normal(x);
                let x_star = &u / b.h(&u);
                Ok(BoundarySample { x: x.clone(), n_e: u, x_star, valid: true })
            }
            Body::Lp(b) => {
                let (x_star, valid) = b.norming(x);
                let ns = x_star.norm();
                if ns < 1e-300 {
                    return Err(Error::InvalidInput("norming functional vanished".into()));
                }
                Ok(BoundarySample { x: x.clone(), n_e: &x_star / ns, x_star, valid })
            }
        }
    }

    /// Radial projection of a nonzero point to the boundary.
    pub fn project_boundary(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self.norm_eval(x);
        if g < 1e-300 {
            return Err(Error::InvalidInput("cannot project the origin".into()));
        }
        Ok(x / g)
    }

    /// A boundary point drawn from the cone measure (normalized volume of
    /// the radial hull): uniform in the body, projected radially.
    pub fn sample_cone_point(&self, rng: &mut impl Rng) -> Result<DVector<f64>> {
        match self {
            Body::Lp(b) => Ok(sample_lp_cone(b, rng)),
            Body::Polytope(p) => {
                // Rejection from the vertex bounding box.
                let m = p.dim;
                let mut lo = vec![f64::INFINITY; m];
                let mut hi = vec![f64::NEG_INFINITY; m];
                for v in &p.vertices {
                    for i in 0..m {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                for _ in 0..200_000 {
                    let x = DVector::from_fn(m, |i, _| rng.random_range(lo[i]..hi[i]));
                    let g = crate::polytope::polytope_gauge(p, &x);
                    if g <= 1.0 && g > 1e-12 {
                        return Ok(x / g);
                    }
                }
                Err(Error::InvalidBody("rejection sampling starved".into()))
            }
            Body::Smooth(b) => {
                // Direction density for the cone law is proportional to
                // r(v)^m; accept a uniform direction with that ratio.
                let m = b.m;
                for _ in 0..200_000 {
                    let v = crate::exterior::random_direction(m, rng);
                    let r = 1.0 / b.gauge(&v);
                    // r <= sup h <= 1.5 by the construction guard.
                    let ratio = (r / 1.5).powi(m as i32);
                    if rng.random_range(0.0..1.0) < ratio {
                        return Ok(v * r);
                    }
                }
                Err(Error::InvalidBody("rejection sampling starved".into()))
            }
        }
    }
}

/// Cone-measure sampling on the l_p sphere: normalize i.i.d. coordinates
/// with density proportional to exp(-|t|^p); for p = infinity, a uniform
/// point on a uniformly chosen facet.
fn sample_lp_cone(b: &LpBody, rng: &mut impl Rng) -> DVector<f64> {
    use crate::lp::Exponent;
    match b.p {
        Exponent::Infinity => {
            let axis = rng.random_range(0..b.m);
            let sign = if rng.random_range(0.0..1.0) < 0.5 { 1.0 } else { -1.0 };
            DVector::from_fn(b.m, |i, _| {
                if i == axis {
                    sign
                } else {
                    rng.random_range(-1.0..1.0)
                }
            })
        }
        Exponent::Finite(p) => {
            let gamma = rand_distr::Gamma::new(1.0 / p, 1.0).expect("valid shape");
            let mut x = DVector::from_fn(b.m, |_, _| {
                let y: f64 = rng.sample(gamma);
                let sign = if rng.random_range(0.0..1.0) < 0.5 { 1.0 } else { -1.0 };
                sign * y.powf(1.0 / p)
            });
            let g = b.gauge(&x);
            if g < 1e-300 {
                x[0] = 1.0;
                return x;
            }
            x / g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Exponent;
    use crate::polytope::cube;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bodies() -> Vec<Body> {
        let s = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, 0.1, -0.3, 0.0, 0.0, 0.0, -0.2]);
        vec![
            Body::Polytope(cube(3, 1.0)),
            Body::Polytope(crate::polytope::cross_polytope(3)),
            Body::Smooth(
                SmoothSupportBody::new(0.2, crate::sphere_fn::SphereFunction::quadratic(&s).unwrap())
                    .unwrap(),
            ),
            Body::Lp(LpBody::new(3, Exponent::Finite(3.0)).unwrap()),
            Body::Lp(LpBody::new(3, Exponent::Infinity).unwrap()),
            Body::Lp(LpBody::new(3, Exponent::Finite(1.0)).unwrap()),
        ]
    }

    #[test]
    fn norm_is_even_for_symmetric_bodies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for body in bodies() {
            assert!(body.is_symmetric());
            for _ in 0..30 {
                let x = crate::exterior::random_direction(body.dim(), &mut rng) * 1.3;
                assert_relative_eq!(body.norm_eval(&x), body.norm_eval(&(-&x)), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn boundary_sample_invariants() {
        // <x, x*> = 1, dual_norm(x*) = 1, n_e unit, x* parallel to n_e.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for body in bodies() {
            for _ in 0..200 {
                let x = body.sample_cone_point(&mut rng).unwrap();
                assert_relative_eq!(body.norm_eval(&x), 1.0, epsilon = 1e-9);
                let s = body.boundary_sample(&x).unwrap();
                assert!(s.valid, "cone samples land on smooth points a.s. for {}", body.name());
                assert_relative_eq!(s.x.dot(&s.x_star), 1.0, epsilon = 1e-9);
                assert_relative_eq!(body.dual_norm(&s.x_star), 1.0, epsilon = 1e-9);
                assert_relative_eq!(s.n_e.norm(), 1.0, epsilon = 1e-12);
                let scale = s.n_e.dot(&s.x);
                assert!(scale > 0.0);
                assert_relative_eq!((&s.n_e / scale - &s.x_star).norm(), 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn rejects_points_off_boundary() {
        let body = Body::Polytope(cube(2, 1.0));
        let x = DVector::from_vec(vec![0.3, 0.3]);
        assert!(body.boundary_sample(&x).is_err());
    }

    #[test]
    fn flags_nonsmooth_points() {
        let body = Body::Polytope(cube(2, 1.0));
        let corner = DVector::from_vec(vec![1.0, 1.0]);
        let s = body.boundary_sample(&corner).unwrap();
        assert!(!s.valid);
        let body = Body::Lp(LpBody::new(2, Exponent::Infinity).unwrap());
        let s = body.boundary_sample(&DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!(!s.valid);
    }

    #[test]
    fn cube_cone_sampling_is_uniform_on_facets() {
        // Each facet of the cube carries cone mass 1/(2m).
        let body = Body::Polytope(cube(3, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 6000;
        let mut counts = [0usize; 6];
        for _ in 0..n {
            let x = body.sample_cone_point(&mut rng).unwrap();
            let s = body.boundary_sample(&x).unwrap();
            let axis = (0..3).max_by(|&a, &b| s.n_e[a].abs().partial_cmp(&s.n_e[b].abs()).unwrap()).unwrap();
            let idx = 2 * axis + if s.n_e[axis] > 0.0 { 0 } else { 1 };
            counts[idx] += 1;
        }
        for c in counts {
            let p = c as f64 / n as f64;
            assert!((p - 1.0 / 6.0).abs() < 0.03, "facet frequency {}", p);
        }
    }

    #[test]
    fn lp_cone_sampling_second_moment() {
        // On the l_2 sphere the cone measure is rotation invariant:
        // E[x x^T] = I/m.
        let body = Body::Lp(LpBody::new(3, Exponent::Finite(2.0)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 40_000;
        let mut acc = DMatrix::zeros(3, 3);
        for _ in 0..n {
            let x = body.sample_cone_point(&mut rng).unwrap();
            acc += &x * x.transpose();
        }
        acc /= n as f64;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((acc[(i, j)] - want).abs() < 0.01);
            }
        }
    }
}
