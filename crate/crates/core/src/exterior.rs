//! Compound matrices, higher traces, and the characteristic polynomial.
//!
//! The k-th compound of A is the C(N,k) x C(N,k) matrix of all k x k minors
//! of A, indexed by k-subsets of rows and columns in lexicographic order.
//! Its trace is the k-th higher trace: the sum of the principal k x k minors,
//! equal to the k-th elementary symmetric polynomial of the eigenvalues.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::combinat::subsets_lex;
use crate::error::{Error, Result};

/// Dense matrix of the k-th exterior power of an N x N matrix.
#[derive(Debug, Clone)]
pub struct CompoundMatrix {
    pub n: usize,
    pub k: usize,
    /// C(n,k) x C(n,k) entries; entry (I, J) is det A[I, J] with I, J the
    /// lexicographically ranked k-subsets.
    pub entries: DMatrix<f64>,
}

impl CompoundMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

fn minor_det(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    match k {
        1 => a[(rows[0], cols[0])],
        2 => {
            a[(rows[0], cols[0])] * a[(rows[1], cols[1])]
                - a[(rows[0], cols[1])] * a[(rows[1], cols[0])]
        }
        3 => {
            let m = |i: usize, j: usize| a[(rows[i], cols[j])];
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        }
        _ => {
            // LU with partial pivoting; k <= 6 at desk scale.
            let sub = DMatrix::from_fn(k, k, |i, j| a[(rows[i], cols[j])]);
            sub.lu().determinant()
        }
    }
}

/// The k-th compound matrix of a square matrix A.
pub fn compound_matrix(a: &DMatrix<f64>, k: usize) -> Result<CompoundMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!("k = {} out of range [1, {}]", k, n)));
    }
    let subsets = subsets_lex(n, k);
    let nk = subsets.len();
    let mut entries = DMatrix::zeros(nk, nk);
    for (i, rows) in subsets.iter().enumerate() {
        for (j, cols) in subsets.iter().enumerate() {
            entries[(i, j)] = minor_det(a, rows, cols);
        }
    }
    Ok(CompoundMatrix { n, k, entries })
}

/// Sum of all principal k x k minors of A: the k-th higher trace.
pub fn lambda_k_minors(a: &DMatrix<f64>, k: usize) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!("k = {} out of range [1, {}]", k, n)));
    }
    Ok(subsets_lex(n, k)
        .iter()
        .map(|s| minor_det(a, s, s))
        .sum())
}

/// The full vector of characteristic-polynomial coefficients lambda_0..lambda_N,
/// so that det(I - tA) = sum_k (-1)^k lambda_k t^k.
#[derive(Debug, Clone, PartialEq)]
pub struct HigherTraceVector {
    pub values: Vec<f64>,
}

impl HigherTraceVector {
    /// Evaluate det(I - tA) from the stored coefficients.
    pub fn char_poly_at(&self, t: f64) -> f64 {
        // Horner on sum (-1)^k lambda_k t^k.
        let mut acc = 0.0;
        for &lk in self.values.iter().rev() {
            acc = lk - t * acc;
        }
        acc
    }
}

/// All higher traces at once by the Faddeev-LeVerrier recurrence.
///
/// Avoids eigenvalue computation (and hence complex arithmetic); accuracy
/// degrades for badly conditioned A, which is acceptable at desk scale with
/// entries O(1).
pub fn char_poly_coeffs(a: &DMatrix<f64>) -> Result<HigherTraceVector> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let mut values = Vec::with_capacity(n + 1);
    values.push(1.0);
    let mut m = a.clone();
    for k in 1..=n {
        let c = m.trace() / k as f64;
        values.push(c);
        if k < n {
            // Newton's identities in matrix form: M <- A (cI - M).
            m = -m;
            for i in 0..n {
                m[(i, i)] += c;
            }
            m = a * m;
        }
    }
    Ok(HigherTraceVector { values })
}

/// Orthogonal identification of 2-vectors in R^3 with vectors, sending the
/// lexicographic wedge basis (e0^e1, e0^e2, e1^e2) to (e2, -e1, e0).
pub fn hodge_star_3d(w: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(w[2], -w[1], w[0])
}

/// The Hodge identification as a 3 x 3 matrix acting on lex wedge coordinates.
pub fn hodge_star_3d_matrix() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0])
}

/// Hilbert-Schmidt (Frobenius) inner product tr(X^T Y).
pub fn hs_inner(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// Hilbert-Schmidt norm.
pub fn hs_norm(x: &DMatrix<f64>) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// tr(B M): the pairing under which the trace-average estimator equals the
/// isotropy operator contraction, for M built from w (x) w* columns.
pub fn trace_pairing(b: &DMatrix<f64>, m: &DMatrix<f64>) -> f64 {
    (b * m).trace()
}

/// Random matrix with i.i.d. entries uniform in [-1, 1].
pub fn random_matrix(n: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
}

/// Random unit vector (uniform on the Euclidean sphere).
pub fn random_direction(m: usize, rng: &mut impl rand::Rng) -> DVector<f64> {
    use rand_distr::StandardNormal;
    loop {
        let v = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}
