//! Numerical laboratory for conformal geometry of surfaces in S^n.
//!
//! Surfaces are sampled on rectangular parameter grids, lifted to the light
//! cone of Minkowski space, and analysed through their conformal invariants.

pub mod calculus;
pub mod chart;
pub mod diagnostics;
pub mod error;
pub mod frame;
pub mod gallery;
pub mod invariants;
pub mod lorentz;

pub use error::{Result, WlabError};
