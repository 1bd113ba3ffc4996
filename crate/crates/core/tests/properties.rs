//! Property-based checks of the algebraic invariants.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trace_forms_core::combinat::{binomial, subset_rank, subset_unrank, subsets_lex};
use trace_forms_core::exterior::{
    char_poly_coeffs, compound_matrix, hodge_star_3d, lambda_k_minors, HigherTraceVector,
};
use trace_forms_core::grassmann::{compression_det, haar_frame, wedge_coords};
use trace_forms_core::lp::{Exponent, LpBody};
use trace_forms_core::polytope::{cube, polytope_gauge};

fn dmatrix(n: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, data)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compound_is_multiplicative(
        a in prop::collection::vec(-1.0f64..1.0, 16),
        b in prop::collection::vec(-1.0f64..1.0, 16),
        k in 1usize..=3,
    ) {
        let (a, b) = (dmatrix(4, &a), dmatrix(4, &b));
        let left = compound_matrix(&(&a * &b), k).unwrap().entries;
        let right = &compound_matrix(&a, k).unwrap().entries * &compound_matrix(&b, k).unwrap().entries;
        prop_assert!((left - right).amax() < 1e-9);
    }

    #[test]
    fn char_poly_matches_minor_sums(a in prop::collection::vec(-1.0f64..1.0, 16)) {
        let a = dmatrix(4, &a);
        let coeffs = char_poly_coeffs(&a).unwrap();
        prop_assert!((coeffs.values[0] - 1.0).abs() < 1e-15);
        for k in 1..=4usize {
            let minors = lambda_k_minors(&a, k).unwrap();
            prop_assert!((coeffs.values[k] - minors).abs() < 1e-9,
                "k={} {} vs {}", k, coeffs.values[k], minors);
        }
    }

    #[test]
    fn char_poly_evaluates_characteristic_determinant(
        a in prop::collection::vec(-1.0f64..1.0, 9),
        t in -0.9f64..0.9,
    ) {
        let a = dmatrix(3, &a);
        let coeffs: HigherTraceVector = char_poly_coeffs(&a).unwrap();
        let lhs = (DMatrix::<f64>::identity(3, 3) - &a * t).lu().determinant();
        prop_assert!((coeffs.char_poly_at(t) - lhs).abs() < 1e-9);
    }

    #[test]
    fn subset_rank_unrank_roundtrip(n in 1usize..=12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let k = rng.random_range(1..=n);
        let total = binomial(n, k) as usize;
        let r = rng.random_range(0..total);
        let subset = subset_unrank(r, n, k).unwrap();
        prop_assert_eq!(subset.rank, r);
        prop_assert_eq!(subset_rank(&subset.elements, n).unwrap(), r);
        let all = subsets_lex(n, k);
        prop_assert_eq!(&all[r], &subset.elements);
    }

    #[test]
    fn hodge_star_is_isometric(w in prop::collection::vec(-5.0f64..5.0, 3)) {
        let w = nalgebra::Vector3::new(w[0], w[1], w[2]);
        let star = hodge_star_3d(&w);
        prop_assert!((star.norm() - w.norm()).abs() < 1e-12);
    }

    #[test]
    fn lp_gauge_homogeneous_and_even(
        x in prop::collection::vec(-2.0f64..2.0, 4),
        c in 0.1f64..3.0,
        p in 1.0f64..6.0,
    ) {
        let x = DVector::from_vec(x);
        for body in [LpBody::new(4, Exponent::Finite(p)).unwrap(), LpBody::new(4, Exponent::Infinity).unwrap()] {
            let g = body.gauge(&x);
            prop_assert!((body.gauge(&(-&x)) - g).abs() < 1e-12);
            prop_assert!((body.gauge(&(&x * c)) - c * g).abs() < 1e-9 * (1.0 + g));
        }
    }

    #[test]
    fn lp_norming_attains_and_is_dual_unit(
        x in prop::collection::vec(-2.0f64..2.0, 3).prop_filter("nonzero", |v| v.iter().any(|t| t.abs() > 0.1)),
        p in 1.1f64..8.0,
    ) {
        let body = LpBody::new(3, Exponent::Finite(p)).unwrap();
        let x = DVector::from_vec(x);
        let b = &x / body.gauge(&x);
        let (star, valid) = body.norming(&b);
        prop_assert!(valid);
        prop_assert!((b.dot(&star) - 1.0).abs() < 1e-9);
        prop_assert!((body.dual_norm(&star) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cube_gauge_is_sup_norm(x in prop::collection::vec(-3.0f64..3.0, 3)) {
        let x = DVector::from_vec(x);
        let p = cube(3, 1.0);
        let sup = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!((polytope_gauge(&p, &x) - sup).abs() < 1e-12);
    }

    #[test]
    fn compression_det_is_wedge_coefficient(
        a in prop::collection::vec(-1.0f64..1.0, 16),
        seed in any::<u64>(),
        k in 1usize..=3,
    ) {
        // det(V^T A V) = <(wedge_k A) w_V, w_V> for orthonormal frames V.
        let a = dmatrix(4, &a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = haar_frame(4, k, &mut rng);
        let direct = compression_det(&a, &frame).unwrap();
        let w = wedge_coords(&frame);
        let m = compound_matrix(&a, k).unwrap().entries;
        let paired = (&m * &w).dot(&w);
        prop_assert!((direct - paired).abs() < 1e-9);
    }
}
