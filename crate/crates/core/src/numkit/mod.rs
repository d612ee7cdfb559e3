//! Numerical kernel: complex 3×3 algebra, complex log-gamma, adaptive and
//! log-singular quadrature, an embedded Runge–Kutta integrator and small
//! grid utilities.
//!
//! Everything here is pure and reentrant.

pub mod gamma;
pub mod interp;
pub mod matrix;
pub mod ode;
pub mod quad;

pub use gamma::{gamma_polar, ln_gamma};
pub use matrix::Complex3x3;
pub use quad::{adaptive_quad, adaptive_quad_with, log_singular_quad, log_singular_quad_with, QuadOptions, QuadResult};
