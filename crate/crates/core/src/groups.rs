//! Finite orthogonal symmetry groups, their induced actions on exterior
//! powers, and the 2-design property.
//!
//! A finite group G of orthogonal maps on a space W is an orthogonal
//! 2-design when averaging conjugation over G projects every operator to
//! its isotropic part: (1/|G|) sum Q^T B Q = (tr B / dim W) I. Orbit
//! measures of 2-designs have isotropy operator I whenever the norming
//! functional assignment is equivariant, which makes discrete spheres exact
//! trace averagers.

use nalgebra::{DMatrix, DVector};

use crate::body::Body;
use crate::combinat::binomial;
use crate::error::{Error, Result};
use crate::exterior::compound_matrix;
use crate::isotropy::{isotropy_operator, IsotropyReport};

const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GroupSpec {
    pub name: String,
    /// Orthogonal matrices, identity first.
    pub elements: Vec<DMatrix<f64>>,
}

impl GroupSpec {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }
}

fn rotation2(theta: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

/// Planar rotations by multiples of 2 pi / order.
pub fn cyclic_group(order: usize) -> Result<GroupSpec> {
    if order == 0 {
        return Err(Error::InvalidInput("cyclic group needs order >= 1".into()));
    }
    let elements = (0..order)
        .map(|j| rotation2(2.0 * std::f64::consts::PI * j as f64 / order as f64))
        .collect();
    Ok(GroupSpec { name: format!("C{}", order), elements })
}

/// Symmetries of the regular m-gon: m rotations and m reflections.
pub fn dihedral_group(m: usize) -> Result<GroupSpec> {
    if m == 0 {
        return Err(Error::InvalidInput("dihedral group needs m >= 1".into()));
    }
    let mut elements = Vec::with_capacity(2 * m);
    let flip = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    for j in 0..m {
        let r = rotation2(2.0 * std::f64::consts::PI * j as f64 / m as f64);
        elements.push(r.clone());
        elements.push(r * &flip);
    }
    Ok(GroupSpec { name: format!("D{}", m), elements })
}

/// Signed permutation matrices on R^n: order n! 2^n.
pub fn hyperoctahedral(n: usize) -> Result<GroupSpec> {
    if n == 0 || n > 7 {
        return Err(Error::InvalidInput("hyperoctahedral group supported for 1 <= n <= 7".into()));
    }
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    permutations(&mut idx, 0, &mut perms);
    let mut elements = Vec::with_capacity(perms.len() << n);
    for perm in &perms {
        for signs in 0..(1u32 << n) {
            let mut q = DMatrix::zeros(n, n);
            for (col, &row) in perm.iter().enumerate() {
                q[(row, col)] = if signs >> col & 1 == 1 { -1.0 } else { 1.0 };
            }
            elements.push(q);
        }
    }
    // Identity first.
    let id = DMatrix::<f64>::identity(n, n);
    if let Some(pos) = elements.iter().position(|q| (q - &id).amax() < 1e-12) {
        elements.swap(0, pos);
    }
    Ok(GroupSpec { name: format!("B{}", n), elements })
}

fn permutations(idx: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == idx.len() {
        out.push(idx.clone());
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permutations(idx, k + 1, out);
        idx.swap(k, i);
    }
}

/// Closure of a generating set under multiplication, with re-orthonormalized
/// products and tolerance-based deduplication.
pub fn group_closure(generators: &[DMatrix<f64>], bound: usize) -> Result<Vec<DMatrix<f64>>> {
    if generators.is_empty() {
        return Err(Error::InvalidInput("closure needs at least one generator".into()));
    }
    let n = generators[0].nrows();
    for g in generators {
        if (g.transpose() * g - DMatrix::<f64>::identity(n, n)).amax() > 1e-9 {
            return Err(Error::InvalidInput("generators must be orthogonal".into()));
        }
    }
    let mut elements: Vec<DMatrix<f64>> = vec![DMatrix::identity(n, n)];
    let mut frontier: Vec<usize> = vec![0];
    while let Some(i) = frontier.pop() {
        let base = elements[i].clone();
        for g in generators {
            let prod = reorthonormalize(g * &base);
            if !elements.iter().any(|e| (e - &prod).amax() < DEDUP_TOL) {
                elements.push(prod);
                frontier.push(elements.len() - 1);
                if elements.len() > bound {
                    return Err(Error::GroupTooLarge(bound));
                }
            }
        }
    }
    Ok(elements)
}

/// Snap a near-orthogonal matrix back to the orthogonal group by one
/// Newton step of the polar decomposition.
fn reorthonormalize(q: DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let correction = DMatrix::<f64>::identity(n, n) * 1.5 - (&q.transpose() * &q) * 0.5;
    q * correction
}

fn rodrigues(axis: &DVector<f64>, theta: f64) -> DMatrix<f64> {
    let a = axis / axis.norm();
    let k = DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -a[2], a[1], a[2], 0.0, -a[0], -a[1], a[0], 0.0],
    );
    DMatrix::<f64>::identity(3, 3) + &k * theta.sin() + (&k * &k) * (1.0 - theta.cos())
}

fn coordinate_cycle() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
}

/// Rotation group of the tetrahedron, order 12.
pub fn tetrahedral_group() -> GroupSpec {
    let gens = vec![
        coordinate_cycle(),
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0]),
    ];
    let elements = group_closure(&gens, 1000).expect("closure of tetrahedral generators");
    assert_eq!(elements.len(), 12);
    GroupSpec { name: "tetrahedral".into(), elements }
}

/// Rotation group of the cube/octahedron, order 24.
pub fn octahedral_group() -> GroupSpec {
    let gens = vec![
        DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]),
    ];
    let elements = group_closure(&gens, 1000).expect("closure of octahedral generators");
    assert_eq!(elements.len(), 24);
    GroupSpec { name: "octahedral".into(), elements }
}

/// Rotation group of the icosahedron, order 60: a coordinate 3-cycle and a
/// 5-fold rotation about the vertex axis (0, 1, phi), phi the golden ratio.
pub fn icosahedral_group() -> GroupSpec {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let axis = DVector::from_vec(vec![0.0, 1.0, phi]);
    let gens = vec![coordinate_cycle(), rodrigues(&axis, 2.0 * std::f64::consts::PI / 5.0)];
    let elements = group_closure(&gens, 1000).expect("closure of icosahedral generators");
    assert_eq!(elements.len(), 60);
    GroupSpec { name: "icosahedral".into(), elements }
}

/// The action of a group on the k-th exterior power via compound matrices.
#[derive(Debug, Clone)]
pub struct InducedAction {
    pub name: String,
    pub k: usize,
    pub source_dim: usize,
    pub dim: usize,
    pub matrices: Vec<DMatrix<f64>>,
}

pub fn induced_action(group: &GroupSpec, k: usize) -> Result<InducedAction> {
    let n = group.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("induced action needs 1 <= k <= {}", n)));
    }
    let dim = binomial(n, k) as usize;
    let matrices = group
        .elements
        .iter()
        .map(|q| compound_matrix(q, k).map(|c| c.entries))
        .collect::<Result<Vec<_>>>()?;
    Ok(InducedAction { name: format!("{}^({})", group.name, k), k, source_dim: n, dim, matrices })
}

impl InducedAction {
    /// Conjugation average (1/|G|) sum Q^T B Q.
    pub fn conjugation_average(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.dim, self.dim);
        for q in &self.matrices {
            acc += q.transpose() * b * q;
        }
        acc / self.matrices.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct DesignReport {
    pub group: String,
    pub k: usize,
    pub dim: usize,
    pub order: usize,
    pub is_design: bool,
    /// Max HS distance of the conjugation average from the isotropic
    /// projection, over the full End basis and the random trials.
    pub max_defect: f64,
    pub basis_checked: usize,
    pub trials: usize,
}

pub const DESIGN_TOL: f64 = 1e-10;

/// Tests the 2-design property over every elementary matrix E_ab (through
/// the averaged Kronecker square, one pass over the group) and over random
/// unit-HS-norm operators.
pub fn check_2design(action: &InducedAction, trials: usize, seed: u64) -> DesignReport {
    let d = action.dim;
    let mut kron_avg = DMatrix::<f64>::zeros(d * d, d * d);
    for q in &action.matrices {
        kron_avg += q.kronecker(q);
    }
    kron_avg /= action.matrices.len() as f64;
    // avg (Q^T E_ab Q)[i][j] = avg Q_ai Q_bj = kron_avg[(a d + b), (i d + j)];
    // the design target is delta_ab delta_ij / d.
    let mut max_defect = 0.0_f64;
    for a in 0..d {
        for b in 0..d {
            let target = if a == b { 1.0 / d as f64 } else { 0.0 };
            let mut s2 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let avg = kron_avg[(a * d + b, i * d + j)];
                    let dev = avg - if i == j { target } else { 0.0 };
                    s2 += dev * dev;
                }
            }
            max_defect = max_defect.max(s2.sqrt());
        }
    }
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut b = crate::exterior::random_matrix(d, &mut rng);
        b /= b.norm();
        let avg = action.conjugation_average(&b);
        let target = DMatrix::<f64>::identity(d, d) * (b.trace() / d as f64);
        max_defect = max_defect.max((avg - target).norm());
    }
    DesignReport {
        group: action.name.clone(),
        k: action.k,
        dim: d,
        order: action.matrices.len(),
        is_design: max_defect < DESIGN_TOL,
        max_defect,
        basis_checked: d * d,
        trials,
    }
}

/// Isotropy operator of the uniform measure on the orbit of w0 under the
/// action, with norming functionals taken from the body. Errors when the
/// body is not invariant under the action or the norming assignment fails
/// to be equivariant on the orbit.
pub fn orbit_measure_t(
    action: &InducedAction,
    w0: &DVector<f64>,
    body: &Body,
) -> Result<IsotropyReport> {
    let d = action.dim;
    if body.dim() != d || w0.len() != d {
        return Err(Error::InvalidInput("orbit data does not match the action dimension".into()));
    }
    let g = body.norm_eval(w0);
    if g < 1e-12 {
        return Err(Error::InvalidInput("orbit base point is zero".into()));
    }
    let base = w0 / g;
    // Invariance of the norm under the action, checked on the orbit itself.
    for q in &action.matrices {
        let moved = q * &base;
        let gm = body.norm_eval(&moved);
        if (gm - 1.0).abs() > 1e-10 {
            return Err(Error::InvariantViolation(format!(
                "body is not invariant under the action: |Q w| = {:.12}",
                gm
            )));
        }
    }
    // Distinct orbit points.
    let mut orbit: Vec<DVector<f64>> = Vec::new();
    for q in &action.matrices {
        let moved = q * &base;
        if !orbit.iter().any(|p| (p - &moved).amax() < 1e-9) {
            orbit.push(moved);
        }
    }
    // Norming functionals and their equivariance: x*(Q w) = Q x*(w) for
    // orthogonal Q; a violation means the canonical choice at non-smooth
    // points breaks the orbit symmetry and the measure is rejected.
    let mut samples = Vec::with_capacity(orbit.len());
    for w in &orbit {
        samples.push(body.boundary_sample(w)?);
    }
    for (w, s) in orbit.iter().zip(&samples) {
        for q in action.matrices.iter().step_by((action.matrices.len() / 16).max(1)) {
            let moved = q * w;
            let moved_star = body.boundary_sample(&moved)?.x_star;
            if (&moved_star - q * &s.x_star).amax() > 1e-9 {
                return Err(Error::InvariantViolation(
                    "norming functional is not equivariant on the orbit".into(),
                ));
            }
        }
    }
    let weights = vec![1.0 / orbit.len() as f64; orbit.len()];
    let quad = crate::measures::BoundaryQuadrature {
        body_name: body.name(),
        measure: crate::measures::MeasureSpec::cone(),
        samples,
        weights,
        raw_mass: None,
        scheme: format!("orbit-{}", orbit.len()),
        randomized: false,
        seed: None,
    };
    let t = isotropy_operator(&quad, d);
    let anisotropy = &t - DMatrix::<f64>::identity(d, d);
    Ok(IsotropyReport {
        max_defect: anisotropy.iter().fold(0.0_f64, |a, v| a.max(v.abs())),
        hs_defect: anisotropy.norm(),
        asymmetry: (&t - t.transpose()).norm(),
        trace_defect: t.trace() - d as f64,
        t,
        anisotropy,
        body: body.name(),
        measure: format!("orbit({})", action.name),
        scheme: "orbit-exact".into(),
        nodes: orbit.len(),
        randomized: false,
        seed: None,
    })
}

/// Hodge transport on R^3: conjugating the induced wedge-2 action by the
/// star isometry recovers det(Q) Q.
pub fn hodge_transport_defect(group: &GroupSpec) -> Result<f64> {
    if group.dim() != 3 {
        return Err(Error::InvalidInput("Hodge transport lives on R^3".into()));
    }
    let h = crate::exterior::hodge_star_3d_matrix();
    let h_inv = h.clone().try_inverse().expect("star is invertible");
    let action = induced_action(group, 2)?;
    let mut worst = 0.0_f64;
    for (q, l2) in group.elements.iter().zip(&action.matrices) {
        let det = q.clone().lu().determinant();
        let transported = &h * l2 * &h_inv;
        worst = worst.max((transported - q * det).amax());
    }
    Ok(worst)
}
