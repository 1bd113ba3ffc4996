//! Grassmannian averaging: Haar frames, compressions, and the randomized
//! estimator for higher traces.
//!
//! A uniformly random k-plane E in R^N is represented by an orthonormal
//! frame V (N x k). The determinant of the compression V^T A V is the
//! wedge-coefficient of A at the plane, and C(N,k) times its mean over
//! Haar-random planes recovers lambda_k(A).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::combinat::{binomial, subsets_lex};
use crate::error::{Error, Result};

/// Orthonormal k-frame in R^n representing a point of the Grassmannian.
#[derive(Debug, Clone)]
pub struct FrameSample {
    pub n: usize,
    pub k: usize,
    /// n x k matrix with orthonormal columns.
    pub frame: DMatrix<f64>,
}

/// Haar-distributed random frame: QR of a Gaussian matrix.
///
/// The triangular factor is sign-fixed to a positive diagonal; without the
/// fix the distribution of Q is not Haar.
pub fn haar_frame(n: usize, k: usize, rng: &mut impl Rng) -> FrameSample {
    assert!(k >= 1 && k <= n, "frame size k = {} out of range [1, {}]", k, n);
    let g = DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    FrameSample { n, k, frame: q }
}

/// Plucker coordinates of the frame's plane in the lexicographic wedge basis:
/// component I is the k x k minor of the frame with rows I.
pub fn wedge_coords(frame: &FrameSample) -> nalgebra::DVector<f64> {
    let subsets = subsets_lex(frame.n, frame.k);
    let mut w = nalgebra::DVector::zeros(subsets.len());
    for (idx, rows) in subsets.iter().enumerate() {
        let sub = DMatrix::from_fn(frame.k, frame.k, |i, j| frame.frame[(rows[i], j)]);
        w[idx] = sub.lu().determinant();
    }
    w
}

/// det(V^T A V): the diagonal wedge coefficient of A at the plane of V.
pub fn compression_det(a: &DMatrix<f64>, frame: &FrameSample) -> Result<f64> {
    if a.nrows() != frame.n || a.ncols() != frame.n {
        return Err(Error::InvalidInput(format!(
            "matrix is {}x{}, frame lives in R^{}",
            a.nrows(),
            a.ncols(),
            frame.n
        )));
    }
    let compressed = frame.frame.transpose() * a * &frame.frame;
    Ok(compressed.lu().determinant())
}

/// Monte Carlo estimate of lambda_k with its standard error.
#[derive(Debug, Clone)]
pub struct EberleinEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// lambda_k(A) as C(N,k) times the mean compression determinant over
/// Haar-random k-planes.
pub fn eberlein_lambda(a: &DMatrix<f64>, k: usize, n_samples: usize, seed: u64) -> Result<EberleinEstimate> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!("k = {} out of range [1, {}]", k, n)));
    }
    if n_samples < 2 {
        return Err(Error::InvalidInput("need at least 2 samples for a standard error".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = binomial(n, k) as f64;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n_samples {
        let frame = haar_frame(n, k, &mut rng);
        let d = compression_det(a, &frame)?;
        sum += d;
        sumsq += d * d;
    }
    let ns = n_samples as f64;
    let mean = sum / ns;
    let var = (sumsq - ns * mean * mean).max(0.0) / (ns - 1.0);
    Ok(EberleinEstimate {
        estimate: scale * mean,
        stderr: scale * (var / ns).sqrt(),
        samples: n_samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{compound_matrix, lambda_k_minors, random_matrix};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn frames_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &(n, k) in &[(3usize, 1usize), (4, 2), (5, 3), (5, 5)] {
            let f = haar_frame(n, k, &mut rng);
            let gram = f.frame.transpose() * &f.frame;
            assert_relative_eq!(gram, DMatrix::identity(k, k), epsilon = 1e-12);
        }
    }

    #[test]
    fn full_frame_is_orthogonal_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = haar_frame(4, 4, &mut rng);
        let gram = &f.frame * f.frame.transpose();
        assert_relative_eq!(gram, DMatrix::identity(4, 4), epsilon = 1e-12);
    }

    #[test]
    fn line_second_moment_is_isotropic() {
        // Mean of v v^T over Haar lines in R^3 is I/3.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n_samples = 100_000;
        let mut acc = DMatrix::zeros(3, 3);
        for _ in 0..n_samples {
            let f = haar_frame(3, 1, &mut rng);
            let v = f.frame.column(0);
            acc += v * v.transpose();
        }
        acc /= n_samples as f64;
        // Entries of v v^T have variance O(1); 3 sigma at 1e5 samples.
        let tol = 3.0 * (1.0f64 / n_samples as f64).sqrt();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((acc[(i, j)] - expect).abs() <= tol, "({}, {}): {}", i, j, acc[(i, j)]);
            }
        }
    }

    #[test]
    fn rotation_invariance_of_first_coordinate() {
        // <Qv, e1> and <v, e1> must have matching second moments.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = haar_frame(4, 4, &mut rng).frame;
        let n_samples = 50_000;
        let (mut m_plain, mut m_rotated) = (0.0, 0.0);
        for _ in 0..n_samples {
            let v = haar_frame(4, 1, &mut rng).frame;
            let qv = &q * &v;
            m_plain += v[(0, 0)] * v[(0, 0)];
            m_rotated += qv[(0, 0)] * qv[(0, 0)];
        }
        m_plain /= n_samples as f64;
        m_rotated /= n_samples as f64;
        let tol = 3.0 * (2.0f64 / n_samples as f64).sqrt();
        assert!((m_plain - 0.25).abs() <= tol, "plain moment {}", m_plain);
        assert!((m_rotated - 0.25).abs() <= tol, "rotated moment {}", m_rotated);
    }

    #[test]
    fn wedge_coords_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = haar_frame(5, 2, &mut rng);
        assert_relative_eq!(wedge_coords(&f).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn compression_known_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = haar_frame(4, 2, &mut rng);
        assert_relative_eq!(compression_det(&DMatrix::identity(4, 4), &f).unwrap(), 1.0, epsilon = 1e-12);

        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let coord_frame = FrameSample {
            n: 3,
            k: 2,
            frame: DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
        };
        assert_relative_eq!(compression_det(&a, &coord_frame).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn compression_matches_wedge_form() {
        // det(V^T A V) = <(Lambda^k A) w_E, w_E> by Cauchy-Binet.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_matrix(5, &mut rng);
            let f = haar_frame(5, 3, &mut rng);
            let w = wedge_coords(&f);
            let compound = compound_matrix(&a, 3).unwrap().entries;
            let quad = (w.transpose() * compound * &w)[(0, 0)];
            let comp = compression_det(&a, &f).unwrap();
            assert!((quad - comp).abs() <= 1e-10, "{} vs {}", quad, comp);
        }
    }

    #[test]
    fn compression_invariant_under_frame_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_matrix(5, &mut rng);
        let f = haar_frame(5, 2, &mut rng);
        // Rotation and a reflection inside the plane.
        let theta: f64 = 0.83;
        let rot = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let refl = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        for w in [rot, refl] {
            let g = FrameSample { n: 5, k: 2, frame: &f.frame * &w };
            assert_relative_eq!(
                compression_det(&a, &g).unwrap(),
                compression_det(&a, &f).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn eberlein_identity_matrix_is_exact() {
        let est = eberlein_lambda(&DMatrix::identity(5, 5), 2, 100, 9).unwrap();
        assert_relative_eq!(est.estimate, 10.0, epsilon = 1e-12);
        assert!(est.stderr <= 1e-12);
    }

    #[test]
    fn eberlein_small_case_within_error_bars() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let est = eberlein_lambda(&a, 1, 100_000, 11).unwrap();
        assert!(
            (est.estimate - 3.0).abs() <= 3.0 * est.stderr,
            "estimate {} stderr {}",
            est.estimate,
            est.stderr
        );
    }

    #[test]
    fn eberlein_unbiased_pooled_z() {
        // 50 (matrix, seed) pairs; mean z-score should be near 0.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut z_sum = 0.0;
        let pairs = 50;
        for trial in 0..pairs {
            let a = random_matrix(4, &mut rng);
            let exact = lambda_k_minors(&a, 2).unwrap();
            let est = eberlein_lambda(&a, 2, 20_000, 100 + trial).unwrap();
            z_sum += (est.estimate - exact) / est.stderr;
        }
        let z_mean = z_sum / pairs as f64;
        assert!(z_mean.abs() < 0.5, "pooled z mean {}", z_mean);
    }
}
