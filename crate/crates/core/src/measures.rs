//! Boundary measures on unit spheres of norms and quadrature against them.
//!
//! The one-parameter family d eta_alpha proportional to <n_e, x>^alpha d sigma
//! interpolates the hypersurface measure (alpha = 0) and the cone measure
//! (alpha = 1); every measure here is normalized to a probability measure.
//! All integrands for a fixed (body, measure, rule) triple are evaluated on
//! one shared node set so that algebraic identities between integrals hold
//! to rounding, not to quadrature error.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::body::{Body, BoundarySample};
use crate::error::{Error, Result};
use crate::lp::euclidean_ball_volume;
use crate::polytope::PolytopeBody;
use crate::quadrature::{sphere_rule, Scheme};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureKind {
    Hypersurface,
    Cone,
    AlphaCone(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
}

impl MeasureSpec {
    pub fn hypersurface() -> MeasureSpec {
        MeasureSpec { kind: MeasureKind::Hypersurface }
    }

    pub fn cone() -> MeasureSpec {
        MeasureSpec { kind: MeasureKind::Cone }
    }

    pub fn alpha_cone(alpha: f64) -> Result<MeasureSpec> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidInput(format!("alpha = {} outside [0, inf)", alpha)));
        }
        Ok(MeasureSpec { kind: MeasureKind::AlphaCone(alpha) })
    }

    /// Exponent of <n_e, x> in the density relative to d sigma.
    pub fn alpha(&self) -> f64 {
        match self.kind {
            MeasureKind::Hypersurface => 0.0,
            MeasureKind::Cone => 1.0,
            MeasureKind::AlphaCone(a) => a,
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            MeasureKind::Hypersurface => "hypersurface".into(),
            MeasureKind::Cone => "cone".into(),
            MeasureKind::AlphaCone(a) => format!("alpha-cone({})", a),
        }
    }
}

/// How boundary integrals are discretized.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryScheme {
    /// Facet decomposition, exact for integrands affine on each facet.
    /// Polytopes only.
    Exact,
    /// A sphere rule: in the outer-normal parameter for smooth bodies,
    /// or Monte Carlo cone-proposal sampling for l_p balls and polytopes.
    Sphere(Scheme),
}

#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub body_name: String,
    pub measure: MeasureSpec,
    pub samples: Vec<BoundarySample>,
    /// Probability weights (sum 1) against the target measure.
    pub weights: Vec<f64>,
    /// Unnormalized mass of <n_e, x>^alpha d sigma when the rule knows it
    /// (exactly for polytope facets, to quadrature accuracy otherwise).
    pub raw_mass: Option<f64>,
    pub scheme: String,
    pub randomized: bool,
    pub seed: Option<u64>,
}

impl BoundaryQuadrature {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// eta-average of f, with a standard error for randomized rules.
    pub fn average(&self, mut f: impl FnMut(&BoundarySample) -> f64) -> (f64, Option<f64>) {
        let mut acc = 0.0;
        let vals: Vec<f64> = self.samples.iter().map(|s| f(s)).collect();
        for (w, v) in self.weights.iter().zip(&vals) {
            acc += w * v;
        }
        let stderr = if self.randomized {
            let mut s2 = 0.0;
            for (w, v) in self.weights.iter().zip(&vals) {
                let z = w * (v - acc);
                s2 += z * z;
            }
            Some(s2.sqrt())
        } else {
            None
        };
        (acc, stderr)
    }
}

/// Shared node set for (body, measure, scheme).
pub fn boundary_quadrature(
    body: &Body,
    measure: &MeasureSpec,
    scheme: &BoundaryScheme,
) -> Result<BoundaryQuadrature> {
    let alpha = measure.alpha();
    match (body, scheme) {
        (Body::Polytope(p), BoundaryScheme::Exact) => polytope_quadrature(p, measure),
        (Body::Smooth(b), BoundaryScheme::Sphere(sch)) => {
            let rule = sphere_rule(b.m, sch.clone())?;
            let mut samples = Vec::with_capacity(rule.len());
            let mut raw = Vec::with_capacity(rule.len());
            for (u, &w) in rule.nodes.iter().zip(&rule.weights) {
                let x = b.boundary_point(u);
                let h = b.h(u);
                let j = b.surface_element(u)?;
                samples.push(BoundarySample {
                    x,
                    n_e: u.clone(),
                    x_star: u / h,
                    valid: true,
                });
                raw.push(w * j * h.powf(alpha));
            }
            let mass_rel: f64 = raw.iter().sum();
            if mass_rel <= 0.0 {
                return Err(Error::ZeroNormalization);
            }
            let area = b.m as f64 * euclidean_ball_volume(b.m);
            Ok(BoundaryQuadrature {
                body_name: body.name(),
                measure: *measure,
                samples,
                weights: raw.iter().map(|v| v / mass_rel).collect(),
                raw_mass: Some(area * mass_rel),
                scheme: format!("normal-{}", rule.scheme),
                randomized: rule.randomized,
                seed: rule.seed,
            })
        }
        (Body::Lp(_), BoundaryScheme::Sphere(Scheme::MonteCarlo(n, seed)))
        | (Body::Polytope(_), BoundaryScheme::Sphere(Scheme::MonteCarlo(n, seed))) => {
            let (n, seed) = (*n, *seed);
            if n < 2 {
                return Err(Error::InvalidInput("Monte Carlo needs at least 2 samples".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut samples = Vec::with_capacity(n);
            let mut raw = Vec::with_capacity(n);
            while samples.len() < n {
                let x = body.sample_cone_point(&mut rng)?;
                let s = body.boundary_sample(&x)?;
                if !s.valid {
                    continue;
                }
                // Cone proposal vs target density <n, x>^alpha d sigma.
                let v = s.n_e.dot(&s.x).powf(alpha - 1.0);
                raw.push(v);
                samples.push(s);
            }
            let total: f64 = raw.iter().sum();
            if total <= 0.0 {
                return Err(Error::ZeroNormalization);
            }
            let raw_mass = body
                .volume_exact()
                .map(|vol| body.dim() as f64 * vol * total / n as f64);
            Ok(BoundaryQuadrature {
                body_name: body.name(),
                measure: *measure,
                samples,
                weights: raw.iter().map(|v| v / total).collect(),
                raw_mass,
                scheme: format!("cone-mc-{}", n),
                randomized: true,
                seed: Some(seed),
            })
        }
        (Body::Polytope(_), BoundaryScheme::Sphere(_)) => Err(Error::RuleMismatch(
            "polytopes take the exact facet rule or Monte Carlo".into(),
        )),
        (Body::Lp(_), _) => Err(Error::RuleMismatch("l_p boundaries are sampled by Monte Carlo".into())),
        (Body::Smooth(_), BoundaryScheme::Exact) => {
            Err(Error::RuleMismatch("the facet rule needs a polytope".into()))
        }
    }
}

fn polytope_quadrature(p: &PolytopeBody, measure: &MeasureSpec) -> Result<BoundaryQuadrature> {
    let alpha = measure.alpha();
    let mut samples = Vec::with_capacity(p.facets.len());
    let mut raw = Vec::with_capacity(p.facets.len());
    for facet in &p.facets {
        samples.push(BoundarySample {
            x: facet.centroid.clone(),
            n_e: facet.normal.clone(),
            x_star: &facet.normal / facet.h,
            valid: true,
        });
        raw.push(facet.area * facet.h.powf(alpha));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroNormalization);
    }
    Ok(BoundaryQuadrature {
        body_name: p.name.clone(),
        measure: *measure,
        samples,
        weights: raw.iter().map(|v| v / total).collect(),
        raw_mass: Some(total),
        scheme: "facet-exact".into(),
        randomized: false,
        seed: None,
    })
}

/// eta-average of an integrand that is affine on every facet, evaluated
/// exactly through facet centroids. Non-affine integrands are refused after
/// a midpoint test on facet vertices.
pub fn polytope_facet_integrate(
    p: &PolytopeBody,
    measure: &MeasureSpec,
    f: &mut dyn FnMut(&DVector<f64>, &BoundarySample) -> f64,
) -> Result<f64> {
    let quad = polytope_quadrature(p, measure)?;
    for (facet, sample) in p.facets.iter().zip(&quad.samples) {
        let k = facet.vertices.len();
        for step in 0..k.min(3) {
            let a = &facet.vertices[step];
            let b = &facet.vertices[(step + 1) % k];
            let mid = (a + b) / 2.0;
            let lhs = f(&mid, sample);
            let rhs = (f(a, sample) + f(b, sample)) / 2.0;
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            if (lhs - rhs).abs() > 1e-9 * scale {
                return Err(Error::NonlinearIntegrand);
            }
        }
    }
    let mut acc = 0.0;
    for (w, sample) in quad.weights.iter().zip(&quad.samples) {
        acc += w * f(&sample.x, sample);
    }
    Ok(acc)
}

#[derive(Debug, Clone)]
pub struct GaussGreenReport {
    /// m * eta_0-average of <Bx, n_e> / <x, n_e>; equals tr B exactly.
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
    pub stderr: Option<f64>,
    /// Absolute form (integral <Bx, n_e> d sigma, vol * tr B) when the
    /// surface mass and volume are available.
    pub absolute: Option<(f64, f64)>,
}

/// Divergence-theorem check: integral of <Bx, n_e> over the boundary equals
/// vol(K) tr B. Stated volume-free as m * avg(<Bx,n>/<x,n>) = tr B under the
/// hypersurface measure, with the absolute form attached when exact volume
/// data exists.
pub fn gauss_green_check(
    body: &Body,
    b_mat: &nalgebra::DMatrix<f64>,
    scheme: &BoundaryScheme,
) -> Result<GaussGreenReport> {
    let m = body.dim();
    if b_mat.nrows() != m || b_mat.ncols() != m {
        return Err(Error::InvalidInput("matrix dimension does not match the body".into()));
    }
    let quad = boundary_quadrature(body, &MeasureSpec::hypersurface(), scheme)?;
    let nums: Vec<f64> = quad.samples.iter().map(|s| (b_mat * &s.x).dot(&s.n_e)).collect();
    let dens: Vec<f64> = quad.samples.iter().map(|s| s.x.dot(&s.n_e)).collect();
    let num: f64 = quad.weights.iter().zip(&nums).map(|(w, v)| w * v).sum();
    let den: f64 = quad.weights.iter().zip(&dens).map(|(w, v)| w * v).sum();
    if den.abs() < 1e-300 {
        return Err(Error::ZeroNormalization);
    }
    let ratio = num / den;
    let stderr = if quad.randomized {
        // Delta method for the ratio of two averages on shared nodes.
        let mut s2 = 0.0;
        for ((w, n), d) in quad.weights.iter().zip(&nums).zip(&dens) {
            let z = w * (n - ratio * d);
            s2 += z * z;
        }
        Some(s2.sqrt() / den.abs())
    } else {
        None
    };
    let lhs = m as f64 * ratio;
    let rhs = b_mat.trace();
    let rel = (lhs - rhs).abs() / rhs.abs().max(1.0);
    let absolute = match (quad.raw_mass, body.volume_exact()) {
        (Some(mass), Some(vol)) => {
            let (avg, _) = quad.average(|s| (b_mat * &s.x).dot(&s.n_e));
            Some((mass * avg, vol * rhs))
        }
        _ => None,
    };
    Ok(GaussGreenReport { lhs, rhs, rel_error: rel, stderr: stderr.map(|e| m as f64 * e), absolute })
}
