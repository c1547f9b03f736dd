//! Numerical laboratory for concavity properties of solutions to
//! quasilinear Dirichlet problems of modified nonlinear Schrödinger type,
//!
//! ```text
//! -div(a(u)∇u) + a'(u)/2 |∇u|² = f(u)  in Ω,   u > 0 in Ω,   u = 0 on ∂Ω,
//! ```
//!
//! on convex planar domains.

pub mod concavity;
pub mod conditions;
pub mod error;
mod ext_float;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod plateau;
pub mod quadrature;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
