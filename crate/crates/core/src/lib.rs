//! Exact-arithmetic special functions on crystallographic root systems.
//!
//! The engine computes the non-symmetric trigonometric eigenpolynomials of
//! the Cherednik operators, the rational Dunkl intertwining operator and the
//! kernel it generates, and the discrete probability measures that connect
//! the two: the normalized eigenpolynomial coefficients form a measure on a
//! scaled weight lattice supported inside the convex hull of a Weyl orbit,
//! and rescaling drives those measures to the representing measure of the
//! Dunkl kernel.  Everything symbolic is carried out over arbitrary-precision
//! rationals; floating point appears only at evaluation boundaries.
//!
//! Modules:
//!
//! * [`rootsys`] — root systems, Weyl groups, weight orders, downsets,
//!   spectral vectors, orbit-hull membership;
//! * [`algebra`] — sparse exponential sums (trigonometric polynomials) and
//!   sparse multivariate polynomials with exact division by root hyperplanes;
//! * [`cherednik`] — Cherednik operators, the triangular eigen-solve, the
//!   normalized coefficient measures, symmetrization;
//! * [`dunkl`] — rational Dunkl operators, the degree-by-degree intertwiner,
//!   the truncated kernel and its Weyl-symmetrized Bessel variant;
//! * [`limits`] — scaled coefficient measures, their moments, and
//!   convergence tables against the kernel;
//! * [`rankone`] — rank-one closed forms (terminating Gauss series,
//!   Gegenbauer-type polynomials, one-variable Bessel limits) used as
//!   oracles for the general machinery.

pub mod algebra;
pub mod cherednik;
pub mod dunkl;
pub mod error;
pub mod jsonform;
pub mod limits;
pub mod linalg;
pub mod rankone;
pub mod rat;
pub mod rootsys;

pub use error::{EngineError, Result};
pub use rat::Q;
pub use rootsys::{Family, Multiplicity, Point, RootSystem, SpectralVector, Weight};
