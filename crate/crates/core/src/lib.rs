//! A laboratory for quadratically constrained basis pursuit (QCBP) under
//! unknown measurement error.
//!
//! The crate is layered bottom-up:
//!
//! * [`numerics`] — dense complex linear algebra and reproducible random streams.
//! * [`bos`] — bounded orthonormal systems (Fourier, Chebyshev, tensor Chebyshev on a
//!   hyperbolic cross) and the random sampling matrices built from them.
//! * [`metrics`] — cross-coherence, distortion, singular-value deviation, restricted
//!   isometry constants, the polylogarithmic factor and the robustness coefficient.
//! * [`solver`] — a primal-dual QCBP/BP solver with a certified duality gap,
//!   cross-validation of the noise level and the least-squares reference residual.
//! * [`experiments`] — deterministic runners for the recovery, coherence and
//!   singular-value studies, producing CSV/JSON record tables.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iteration otherwise. Results are
//! identical either way.

// Index loops mirror the matrix formulas; `!(x > t)` deliberately rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bos;
pub mod experiments;
pub mod metrics;
pub mod numerics;
pub mod par;
pub mod solver;

pub use num_complex::Complex64;
