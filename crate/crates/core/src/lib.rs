//! Numerical library for higher traces of operators via boundary averages.
//!
//! lambda_k(A), the k-th coefficient of the characteristic polynomial, equals
//! the trace of the k-th compound matrix. This crate computes it three ways:
//! exactly (minor sums, Faddeev-LeVerrier), as a Grassmannian average of
//! compression determinants, and as a boundary average of wedge coefficients
//! over the unit sphere of a normed exterior power. The boundary route is
//! governed by the isotropy operator T of the chosen measure: the average
//! reproduces the trace for every operator exactly when T is the identity.
//! The crate provides the bodies (polytopes, smooth support-function bodies,
//! l_p balls), the measures (hypersurface, cone, alpha-cone), finite-group
//! orbit averages and 2-design checks, and the perturbation machinery that
//! quantifies how anisotropy feeds into trace-average error.

pub mod body;
pub mod combinat;
pub mod error;
pub mod exterior;
pub mod grassmann;
pub mod groups;
pub mod harmonics;
pub mod isotropy;
pub mod lp;
pub mod measures;
pub mod polytope;
pub mod quadrature;
pub mod smooth;
pub mod sphere_fn;

pub use error::{Error, Result};
