//! Numerical laboratory for measurement schemes that decohere exactly at
//! finite coupling.
//!
//! A finite-dimensional system couples to a probe through its position and
//! the probe couples to a pointer through its momentum. When probe and pointer
//! start in momentum-limited states, tracing out the probe removes the system
//! coherences exactly once the coupling crosses a finite threshold, and the
//! pointer states become exactly orthogonal beyond a second one. The crate
//! builds those objects numerically and cross-checks them against a
//! brute-force reduced-state computation.

pub mod bandlimited;
pub mod error;
pub mod linalg;
pub mod paley_wiener;
pub mod quadrature;
pub mod quantum_core;
pub mod special;
pub mod tripartite;
pub mod vonneumann;

pub use error::{Error, Result};
