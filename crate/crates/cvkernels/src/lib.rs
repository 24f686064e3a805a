//! Quantum kernel functions for continuous-variable states.
//!
//! A data point `x` is encoded in a bosonic state by displacing a fixed base
//! state in phase space. The kernel between two points is the normalized
//! state overlap
//!
//! ```text
//! K(x, x') = tr[rho(x) rho(x')] / sqrt(tr rho(x)^2) sqrt(tr rho(x')^2)
//! ```
//!
//! so `K(x, x) = 1` for every base state, pure or mixed. For coherent,
//! squeezed, thermal, and single-photon base states (each with optional
//! photon loss) the crate provides closed-form kernels, a numeric oracle
//! that recomputes every kernel from first principles in the Fock basis and
//! by phase-space quadrature, a nonclassicality witness against the
//! coherent-state bound, and kernel ridge regression with a norm-based
//! generalization bound.
//!
//! The crate fixes `hbar = 1`. Vacuum quadrature variance is `1/2`, the
//! amplitude of a mode is `alpha = (q + i p) / sqrt(2)`, and a data point
//! `(x1, x2)` displaces the mode by `alpha = x1 + i x2`, which shifts the
//! mean of `(q, p)` by `(sqrt(2) x1, sqrt(2) x2)`. With this convention the
//! coherent-state kernel is exactly `exp(-|x - x'|^2)`.

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod learning;
pub mod oracle;
pub mod states;

pub use error::{Error, Result};
