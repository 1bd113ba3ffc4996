//! Polytope bodies from halfspace descriptions, with exact facet data.
//!
//! Vertices are enumerated by brute force over m-subsets of the bounding
//! hyperplanes (desk scale: m <= 6, a few dozen facets). Facet areas and
//! centroids are exact up to rounding: each facet is parametrized in an
//! orthonormal basis of its hyperplane and measured recursively by pyramid
//! decomposition from an interior point.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// One facet of a polytope with its exact geometric data.
#[derive(Debug, Clone)]
pub struct Facet {
    /// Euclidean unit outer normal.
    pub normal: DVector<f64>,
    /// Support value <normal, x> = h on the facet; positive (origin interior).
    pub h: f64,
    pub vertices: Vec<DVector<f64>>,
    /// Euclidean (m-1)-measure.
    pub area: f64,
    pub centroid: DVector<f64>,
    /// Orthonormal basis of the facet hyperplane (m x (m-1)); the facet is
    /// origin + basis * z for z in the local polytope.
    pub basis: DMatrix<f64>,
    pub origin: DVector<f64>,
    /// Local halfspace description of the facet, unit rows.
    pub local_constraints: Vec<(DVector<f64>, f64)>,
    pub local_vertices: Vec<DVector<f64>>,
}

impl Facet {
    /// Ambient point from local coordinates.
    pub fn embed(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.origin + &self.basis * z
    }

    /// Signed distance from a local point to the nearest facet edge
    /// (positive inside).
    pub fn local_margin(&self, z: &DVector<f64>) -> f64 {
        self.local_constraints
            .iter()
            .map(|(a, b)| b - a.dot(z))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Convex polytope with the origin in its interior.
#[derive(Debug, Clone)]
pub struct PolytopeBody {
    pub dim: usize,
    pub facets: Vec<Facet>,
    pub volume: f64,
    pub vertices: Vec<DVector<f64>>,
    /// True when the facet description is invariant under negation.
    pub symmetric: bool,
    pub name: String,
}

const FEAS_TOL: f64 = 1e-9;
const FACE_TOL: f64 = 1e-8;

/// Origin-symmetric polytope from halfspaces <n, x> <= h.
pub fn polytope_from_halfspaces(halfspaces: &[(DVector<f64>, f64)], name: &str) -> Result<PolytopeBody> {
    build_polytope(halfspaces, true, name)
}

/// General convex polytope (origin interior required, symmetry not enforced).
pub fn polytope_from_halfspaces_general(
    halfspaces: &[(DVector<f64>, f64)],
    name: &str,
) -> Result<PolytopeBody> {
    build_polytope(halfspaces, false, name)
}

fn build_polytope(halfspaces: &[(DVector<f64>, f64)], require_symmetric: bool, name: &str) -> Result<PolytopeBody> {
    if halfspaces.is_empty() {
        return Err(Error::InvalidInput("no halfspaces given".into()));
    }
    let m = halfspaces[0].0.len();
    if m < 2 || m > 6 {
        return Err(Error::InvalidInput(format!("polytope dimension {} outside supported 2..=6", m)));
    }

    // Normalize to unit normals; origin must be strictly interior.
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for (n, h) in halfspaces {
        if n.len() != m {
            return Err(Error::InvalidInput("inconsistent halfspace dimensions".into()));
        }
        let norm = n.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidInput("zero normal vector".into()));
        }
        let unit = n / norm;
        let offset = h / norm;
        if offset < 1e-9 {
            return Err(Error::DegenerateBody(
                "support value not positive: origin is not interior".into(),
            ));
        }
        // Drop exact repeats, keep the tighter of parallel constraints.
        if let Some(existing) = rows.iter_mut().find(|(u, _)| (u - &unit).norm() < 1e-9) {
            existing.1 = existing.1.min(offset);
        } else {
            rows.push((unit, offset));
        }
    }

    if require_symmetric {
        for (n, h) in &rows {
            let neg = -n;
            let found = rows.iter().any(|(u, g)| (u - &neg).norm() < 1e-9 && (g - h).abs() < 1e-9);
            if !found {
                return Err(Error::AsymmetricInput);
            }
        }
    }

    unbounded_probe(m, &rows)?;

    let vertices = enumerate_vertices(m, &rows)?;
    if vertices.len() < m + 1 {
        return Err(Error::DegenerateBody(format!("only {} vertices found", vertices.len())));
    }

    // Facet extraction.
    let mut facets = Vec::new();
    for (j, (n, h)) in rows.iter().enumerate() {
        let on_facet: Vec<DVector<f64>> = vertices
            .iter()
            .filter(|v| (n.dot(v) - h).abs() < FACE_TOL)
            .cloned()
            .collect();
        if on_facet.len() < m {
            continue; // redundant halfspace
        }
        let basis = orthonormal_complement(n);
        let origin = n * *h;
        let local_vertices: Vec<DVector<f64>> =
            on_facet.iter().map(|v| basis.transpose() * (v - &origin)).collect();
        let mut local_constraints = Vec::new();
        for (i, (ni, hi)) in rows.iter().enumerate() {
            if i == j {
                continue;
            }
            let a = basis.transpose() * ni;
            let norm = a.norm();
            if norm < 1e-10 {
                continue; // parallel to this facet
            }
            let b = (hi - ni.dot(&origin)) / norm;
            push_constraint(&mut local_constraints, a / norm, b);
        }
        let (area, local_centroid) = hpoly_measure_centroid(m - 1, &local_constraints, &local_vertices)?;
        if area < 1e-12 {
            continue; // lower-dimensional face, not a facet
        }
        let centroid = &origin + &basis * &local_centroid;
        facets.push(Facet {
            normal: n.clone(),
            h: *h,
            vertices: on_facet,
            area,
            centroid,
            basis,
            origin,
            local_constraints,
            local_vertices,
        });
    }

    if facets.len() < m + 1 {
        return Err(Error::DegenerateBody(format!("only {} facets survive", facets.len())));
    }

    // Closedness: the area-weighted normals of a bounded polytope sum to zero.
    let total_area: f64 = facets.iter().map(|f| f.area).sum();
    let mut closure = DVector::zeros(m);
    for f in &facets {
        closure += &f.normal * f.area;
    }
    if closure.norm() > 1e-8 * total_area {
        return Err(Error::UnboundedBody);
    }

    let volume = facets.iter().map(|f| f.h * f.area).sum::<f64>() / m as f64;
    if volume < 1e-12 {
        return Err(Error::DegenerateBody("vanishing volume".into()));
    }

    let symmetric = is_vertex_set_symmetric(&vertices);

    Ok(PolytopeBody { dim: m, facets, volume, vertices, symmetric, name: name.to_string() })
}

fn unbounded_probe(m: usize, rows: &[(DVector<f64>, f64)]) -> Result<()> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0B0E);
    let mut dirs: Vec<DVector<f64>> = Vec::new();
    for i in 0..m {
        let mut e = DVector::zeros(m);
        e[i] = 1.0;
        dirs.push(e.clone());
        dirs.push(-e);
    }
    for _ in 0..512 {
        dirs.push(crate::exterior::random_direction(m, &mut rng));
    }
    for d in &dirs {
        if rows.iter().all(|(n, _)| n.dot(d) <= 1e-9) {
            return Err(Error::UnboundedBody);
        }
    }
    Ok(())
}

fn enumerate_vertices(m: usize, rows: &[(DVector<f64>, f64)]) -> Result<Vec<DVector<f64>>> {
    let k = rows.len();
    if k < m {
        return Err(Error::UnboundedBody);
    }
    let mut vertices: Vec<DVector<f64>> = Vec::new();
    let mut subset = vec![0usize; m];
    enumerate_subsets(k, m, 0, 0, &mut subset, &mut |idx| {
        let a = DMatrix::from_fn(m, m, |r, c| rows[idx[r]].0[c]);
        let b = DVector::from_fn(m, |r, _| rows[idx[r]].1);
        let lu = a.lu();
        if lu.determinant().abs() < 1e-10 {
            return;
        }
        if let Some(x) = lu.solve(&b) {
            if rows.iter().all(|(n, h)| n.dot(&x) <= h + FEAS_TOL)
                && !vertices.iter().any(|v| (v - &x).norm() < 1e-8)
            {
                vertices.push(x);
            }
        }
    });
    Ok(vertices)
}

fn enumerate_subsets(
    n: usize,
    k: usize,
    start: usize,
    depth: usize,
    buf: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        f(buf);
        return;
    }
    for i in start..n {
        buf[depth] = i;
        enumerate_subsets(n, k, i + 1, depth + 1, buf, f);
    }
}

/// Distinct ambient facets can restrict to the same hyperplane of a face;
/// keep one copy (the tighter offset) so pyramid decompositions count each
/// face exactly once.
fn push_constraint(list: &mut Vec<(DVector<f64>, f64)>, a: DVector<f64>, b: f64) {
    if let Some(existing) = list.iter_mut().find(|(u, _)| (u - &a).norm() < 1e-9) {
        existing.1 = existing.1.min(b);
    } else {
        list.push((a, b));
    }
}

/// Orthonormal basis of the hyperplane orthogonal to a unit vector.
fn orthonormal_complement(n: &DVector<f64>) -> DMatrix<f64> {
    let m = n.len();
    let mut basis: Vec<DVector<f64>> = vec![n.clone()];
    for i in 0..m {
        if basis.len() == m {
            break;
        }
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        for b in &basis {
            let d = b.dot(&v);
            v -= b * d;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    debug_assert_eq!(basis.len(), m);
    DMatrix::from_fn(m, m - 1, |r, c| basis[c + 1][r])
}

/// Measure and centroid of a bounded H-polytope in dimension d, given its
/// vertex list. Pyramid decomposition from the vertex mean; recursion bottoms
/// out at intervals.
fn hpoly_measure_centroid(
    d: usize,
    constraints: &[(DVector<f64>, f64)],
    vertices: &[DVector<f64>],
) -> Result<(f64, DVector<f64>)> {
    if vertices.is_empty() {
        return Err(Error::DegenerateBody("empty face".into()));
    }
    if d == 1 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in vertices {
            lo = lo.min(v[0]);
            hi = hi.max(v[0]);
        }
        return Ok((hi - lo, DVector::from_vec(vec![(hi + lo) / 2.0])));
    }

    let mut q = DVector::zeros(d);
    for v in vertices {
        q += v;
    }
    q /= vertices.len() as f64;

    let mut volume = 0.0;
    let mut centroid_acc = DVector::zeros(d);
    for (j, (a, b)) in constraints.iter().enumerate() {
        let on_face: Vec<&DVector<f64>> =
            vertices.iter().filter(|v| (a.dot(v) - b).abs() < FACE_TOL).collect();
        if on_face.len() < d {
            continue;
        }
        let basis = orthonormal_complement(a);
        let origin = a * *b;
        let local_vertices: Vec<DVector<f64>> =
            on_face.iter().map(|v| basis.transpose() * (*v - &origin)).collect();
        let mut sub_constraints = Vec::new();
        for (i, (ai, bi)) in constraints.iter().enumerate() {
            if i == j {
                continue;
            }
            let g = basis.transpose() * ai;
            let norm = g.norm();
            if norm < 1e-10 {
                continue;
            }
            push_constraint(&mut sub_constraints, g / norm, (bi - ai.dot(&origin)) / norm);
        }
        let (face_measure, face_centroid_local) =
            hpoly_measure_centroid(d - 1, &sub_constraints, &local_vertices)?;
        if face_measure < 1e-14 {
            continue;
        }
        let face_centroid = &origin + &basis * &face_centroid_local;
        let height = b - a.dot(&q);
        if height <= 0.0 {
            continue;
        }
        let pyramid_vol = face_measure * height / d as f64;
        let df = d as f64;
        let pyramid_centroid = &q + (&face_centroid - &q) * (df / (df + 1.0));
        volume += pyramid_vol;
        centroid_acc += pyramid_centroid * pyramid_vol;
    }
    if volume < 1e-14 {
        return Ok((0.0, q));
    }
    Ok((volume, centroid_acc / volume))
}

fn is_vertex_set_symmetric(vertices: &[DVector<f64>]) -> bool {
    vertices
        .iter()
        .all(|v| vertices.iter().any(|w| (w + v).norm() < 1e-8))
}

/// Minkowski gauge: max_j <n_j, x> / h_j.
pub fn polytope_gauge(body: &PolytopeBody, x: &DVector<f64>) -> f64 {
    body.facets
        .iter()
        .map(|f| f.normal.dot(x) / f.h)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Support function of the polytope at f: max over vertices of <f, v>.
/// For symmetric bodies this is the dual norm.
pub fn polytope_support(body: &PolytopeBody, f: &DVector<f64>) -> f64 {
    body.vertices
        .iter()
        .map(|v| f.dot(v))
        .fold(f64::NEG_INFINITY, f64::max)
}

// Named constructions used across the test corpus.

/// Cube [-r, r]^m.
pub fn cube(m: usize, r: f64) -> PolytopeBody {
    let mut hs = Vec::new();
    for i in 0..m {
        let mut n = DVector::zeros(m);
        n[i] = 1.0;
        hs.push((n.clone(), r));
        hs.push((-n, r));
    }
    polytope_from_halfspaces(&hs, &format!("cube{}", m)).expect("cube is a valid body")
}

/// Cross-polytope { sum |x_i| <= 1 }.
pub fn cross_polytope(m: usize) -> PolytopeBody {
    let mut hs = Vec::new();
    for mask in 0..(1u32 << m) {
        let n = DVector::from_fn(m, |i, _| if mask >> i & 1 == 1 { -1.0 } else { 1.0 });
        hs.push((n, 1.0));
    }
    polytope_from_halfspaces(&hs, &format!("cross{}", m)).expect("cross-polytope is a valid body")
}

/// The hexagon with vertices (1,1), (0,1), (-1,0), (-1,-1), (0,-1), (1,0):
/// unit ball of max(|x|, |y|, |y - x|).
pub fn hexagon() -> PolytopeBody {
    let rt = std::f64::consts::SQRT_2;
    let hs = vec![
        (DVector::from_vec(vec![0.0, 1.0]), 1.0),
        (DVector::from_vec(vec![-1.0, 1.0]) / rt, 1.0 / rt),
        (DVector::from_vec(vec![-1.0, 0.0]), 1.0),
        (DVector::from_vec(vec![0.0, -1.0]), 1.0),
        (DVector::from_vec(vec![1.0, -1.0]) / rt, 1.0 / rt),
        (DVector::from_vec(vec![1.0, 0.0]), 1.0),
    ];
    polytope_from_halfspaces(&hs, "hexagon").expect("hexagon is a valid body")
}

/// Random origin-symmetric polytope: a cube intersected with random slabs.
pub fn random_symmetric_polytope(m: usize, slabs: usize, rng: &mut impl Rng) -> PolytopeBody {
    loop {
        let mut hs = Vec::new();
        for i in 0..m {
            let mut n = DVector::zeros(m);
            n[i] = 1.0;
            hs.push((n.clone(), 1.0));
            hs.push((-n, 1.0));
        }
        for _ in 0..slabs {
            let n = crate::exterior::random_direction(m, rng);
            let h = rng.random_range(0.6..0.95);
            hs.push((n.clone(), h));
            hs.push((-n, h));
        }
        if let Ok(body) = polytope_from_halfspaces(&hs, "random-symmetric") {
            return body;
        }
    }
}

/// Random polytope with no symmetry: a skewed box cut by unpaired halfspaces.
pub fn random_asymmetric_polytope(m: usize, extra: usize, rng: &mut impl Rng) -> PolytopeBody {
    loop {
        let mut hs = Vec::new();
        for i in 0..m {
            let mut n = DVector::zeros(m);
            n[i] = 1.0;
            hs.push((n.clone(), rng.random_range(0.9..1.6)));
            hs.push((-n, rng.random_range(0.9..1.6)));
        }
        for _ in 0..extra {
            let n = crate::exterior::random_direction(m, rng);
            hs.push((n, rng.random_range(0.7..1.2)));
        }
        if let Ok(body) = polytope_from_halfspaces_general(&hs, "random-asymmetric") {
            if !body.symmetric {
                return body;
            }
        }
    }
}
