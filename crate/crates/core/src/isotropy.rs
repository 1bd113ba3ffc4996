//! The isotropy operator of a boundary measure and trace averaging.
//!
//! For a norm on an n-dimensional space with unit sphere carrying a
//! probability measure eta, the isotropy operator is
//!   T_eta = n * integral of w (x*)^T d eta(w).
//! The trace-average formula n * avg <A w, w*> = tr A holds for every A
//! exactly when T_eta = I_n; in general the estimator equals tr(A T_eta),
//! so its bias is the pairing of A with the anisotropy T_eta - I. Both
//! quantities are accumulated over one shared node set, which makes that
//! duality an identity of the computed numbers, not an approximation.

use nalgebra::DMatrix;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::exterior::compound_matrix;
use crate::measures::{boundary_quadrature, BoundaryQuadrature, BoundaryScheme, MeasureSpec};
use crate::polytope::PolytopeBody;

#[derive(Debug, Clone)]
pub struct IsotropyReport {
    /// T_eta = n * avg(w (x*)^T).
    pub t: DMatrix<f64>,
    /// T_eta - I.
    pub anisotropy: DMatrix<f64>,
    /// Largest absolute entry of the anisotropy.
    pub max_defect: f64,
    /// Hilbert-Schmidt norm of the anisotropy.
    pub hs_defect: f64,
    /// ||T - T^T||_HS; T_eta need not be symmetric.
    pub asymmetry: f64,
    /// tr T - n; vanishes for every eta since <w, w*> = 1.
    pub trace_defect: f64,
    pub body: String,
    pub measure: String,
    pub scheme: String,
    pub nodes: usize,
    pub randomized: bool,
    pub seed: Option<u64>,
}

/// T_eta accumulated from an existing node set.
pub fn isotropy_operator(quad: &BoundaryQuadrature, n: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(n, n);
    for (w, s) in quad.weights.iter().zip(&quad.samples) {
        t += (&s.x * s.x_star.transpose()) * *w;
    }
    t * n as f64
}

pub fn isotropy_report(
    body: &Body,
    measure: &MeasureSpec,
    scheme: &BoundaryScheme,
) -> Result<IsotropyReport> {
    let quad = boundary_quadrature(body, measure, scheme)?;
    Ok(report_from_quadrature(&quad, body.dim()))
}

pub fn report_from_quadrature(quad: &BoundaryQuadrature, n: usize) -> IsotropyReport {
    let t = isotropy_operator(quad, n);
    let anisotropy = &t - DMatrix::<f64>::identity(n, n);
    let max_defect = anisotropy.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let hs_defect = anisotropy.norm();
    let asymmetry = (&t - t.transpose()).norm();
    let trace_defect = t.trace() - n as f64;
    IsotropyReport {
        t,
        anisotropy,
        max_defect,
        hs_defect,
        asymmetry,
        trace_defect,
        body: quad.body_name.clone(),
        measure: quad.measure.describe(),
        scheme: quad.scheme.clone(),
        nodes: quad.len(),
        randomized: quad.randomized,
        seed: quad.seed,
    }
}

#[derive(Debug, Clone)]
pub struct TraceAverageResult {
    pub k: usize,
    /// Dimension of the wedge space the body lives in: C(N, k).
    pub space_dim: usize,
    /// n_k * avg <(wedge_k A) w, w*>; equals tr(wedge_k A * T).
    pub estimate: f64,
    /// avg <(wedge_k A) w, w*> = estimate / n_k.
    pub mean_coefficient: f64,
    /// lambda_k(A), the sum of principal k x k minors.
    pub exact: f64,
    /// estimate - exact.
    pub discrepancy: f64,
    /// tr(wedge_k A * (T - I)) on the same nodes.
    pub predicted: f64,
    /// |discrepancy - predicted|; zero up to rounding by construction.
    pub duality_gap: f64,
    pub stderr: Option<f64>,
    pub t: DMatrix<f64>,
    pub nodes: usize,
    pub scheme: String,
    pub measure: String,
    pub randomized: bool,
    pub seed: Option<u64>,
}

/// Averages <(wedge_k A) w, w*> over the unit sphere of the given body,
/// which must live in the wedge space of dimension C(N, k).
pub fn trace_average(
    a: &DMatrix<f64>,
    k: usize,
    body: &Body,
    measure: &MeasureSpec,
    scheme: &BoundaryScheme,
) -> Result<TraceAverageResult> {
    let compound = compound_matrix(a, k)?;
    let n_k = compound.dim();
    if body.dim() != n_k {
        return Err(Error::InvalidInput(format!(
            "body dimension {} does not match the wedge dimension C({},{}) = {}",
            body.dim(),
            a.nrows(),
            k,
            n_k
        )));
    }
    let quad = boundary_quadrature(body, measure, scheme)?;
    let result = trace_average_on_nodes(&compound.entries, k, n_k, &quad);
    Ok(result)
}

/// Core accumulation on a fixed node set (shared with the T assembly).
pub fn trace_average_on_nodes(
    m: &DMatrix<f64>,
    k: usize,
    n_k: usize,
    quad: &BoundaryQuadrature,
) -> TraceAverageResult {
    let t = isotropy_operator(quad, n_k);
    let (mean, stderr) = quad.average(|s| (m * &s.x).dot(&s.x_star));
    let estimate = n_k as f64 * mean;
    let exact = m.trace();
    let discrepancy = estimate - exact;
    let predicted = (m * &t).trace() - exact;
    TraceAverageResult {
        k,
        space_dim: n_k,
        estimate,
        mean_coefficient: mean,
        exact,
        discrepancy,
        predicted,
        duality_gap: (discrepancy - predicted).abs(),
        stderr: stderr.map(|e| n_k as f64 * e),
        t,
        nodes: quad.len(),
        scheme: quad.scheme.clone(),
        measure: quad.measure.describe(),
        randomized: quad.randomized,
        seed: quad.seed,
    }
}

/// Exact polytope trace formula: tr A = (1/vol) sum_j area_j <A c_j, n_j>,
/// the cone-measure trace average evaluated through facet centroids.
pub fn discrete_trace(a: &DMatrix<f64>, p: &PolytopeBody) -> Result<f64> {
    let m = p.dim;
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::InvalidInput("matrix dimension does not match the polytope".into()));
    }
    let mut acc = 0.0;
    for facet in &p.facets {
        acc += facet.area * (a * &facet.centroid).dot(&facet.normal);
    }
    Ok(acc / p.volume)
}
