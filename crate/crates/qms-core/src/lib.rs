//! Numerical toolkit for finite-dimensional quantum Markov maps and semigroups.
//!
//! The library computes complete-positivity-order return times, entropy
//! contraction coefficients and modified log-Sobolev lower bounds for
//! Lindbladian generators on matrix algebras, together with a zoo of concrete
//! models (depolarizing, cyclic random walks, noncommutative birth–death
//! chains, SU(2) transference generators) and supporting machinery: dense
//! Hermitian linear algebra, entropic functionals, the BKM metric, weighted
//! p-norms and matrix-concentration Monte Carlo checks.

pub mod channels;
pub mod concentration;
pub mod entropy;
pub mod error;
pub mod matcore;
pub mod sampling;
pub mod semigroups;
pub mod tol;
pub mod zoo;

pub use error::QmsError;
pub use tol::Tolerances;
