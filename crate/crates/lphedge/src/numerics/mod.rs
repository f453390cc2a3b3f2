//! Shared numerical kernels: normal distribution functions, adaptive
//! Gauss–Kronrod quadrature, an embedded Runge–Kutta integrator for complex
//! states, and Brent root bracketing.

pub mod normal;
pub mod ode;
pub mod quad;
pub mod roots;

pub use normal::{norm_cdf, norm_pdf};
pub use ode::{integrate_rk45, OdeTolerance};
pub use quad::{integrate, integrate_vec, QuadTolerance};
pub use roots::brent;
