//! Numerical inverse-scattering lab for the "good" Boussinesq equation
//! u_tt + (4/3)(u²)_xx + (1/3)u_xxxx = 0: direct scattering, the long-time
//! asymptotic formula on rays x = ζt, and a pseudo-spectral reference solver.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod asymptotics;
pub mod error;
pub mod numkit;
pub mod pderef;
pub mod lax;
pub mod model;
pub mod profiles;
pub mod scatter;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Profile = profiles::Profile<f64>;
pub type Scatterer = scatter::Scatterer<f64>;
pub type ScatterConfig = scatter::ScatterConfig<f64>;
pub type SpectralLine = scatter::SpectralLine<f64>;
pub type AssumptionReport = scatter::AssumptionReport<f64>;
pub type AsymConfig = asymptotics::AsymConfig<f64>;
pub type AsymptoticParams = asymptotics::AsymptoticParams<f64>;
pub type CrossCoefficients = model::CrossCoefficients<f64>;
pub type WaveField = pderef::WaveField<f64>;
pub type SolverConfig = pderef::SolverConfig<f64>;
pub type PdeRun = pderef::PdeRun<f64>;
