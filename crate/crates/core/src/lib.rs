//! Polynomial approximation on the unit sphere `S^{d-1}` and the unit ball `B^d`.
//!
//! The crate is layered bottom-up:
//!
//! - [`poly`]: dense multivariate polynomials and exact angular/differential operators;
//! - [`ortho`]: Gegenbauer polynomials, the smooth cutoff and Gauss-Jacobi rules;
//! - [`sphere`]: rotations, quadrature, norms and rotation differences on the sphere;
//! - [`sphere_approx`]: zonal kernels, near-best operators, moduli, K-functionals and norms;
//! - [`ball`]: weighted quadrature, the trivial extension and φ-scaled differences on the ball;
//! - [`ball_approx`]: ball kernels, weighted near-best operators, moduli and norms.

pub mod ball;
pub mod ball_approx;
pub mod error;
pub mod func;
pub mod ortho;
pub mod poly;
pub mod sphere;
pub mod spectral;
pub mod sphere_approx;

pub use error::{Error, Result};
pub use func::{Domain, FnHandle};
pub use poly::{LinearMap, MultiPoly};
