//! Numerics for scalar conservation laws `u_t + f(u)_x = 0` with a
//! concave-convex flux.
//!
//! The crate is `no_std` and only needs `alloc`. It covers point
//! evaluation of the flux/entropy algebra, the critical curves of the
//! flux, shock admissibility, the weighted dissipation functionals of the
//! a-contraction method, a front tracking solver with its weight field and
//! a Godunov reference solver used to check all of the above.

#![no_std]
#![deny(unused_crate_dependencies)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod admissibility;
pub mod curves;
pub mod dissipation;
pub mod error;
pub mod front;
pub mod laws;
pub mod profile;
pub mod quadrature;
pub mod reference;
pub mod roots;
pub mod sampling;

pub use error::{Error, Result};
pub use laws::{EntropyModel, FluxModel, KruzhkovEntropy, Models};
pub use profile::Profile;

