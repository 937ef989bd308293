//! Numerical toolkit for resonances of rank-one channel models.
//!
//! A channel model is a discrete level of energy `omega_v` coupled to a
//! continuum through a spectral density `J(sigma) >= 0`. Everything else is
//! computed from that pair:
//!
//! - [`resolvent`]: boundary values `h(sigma +/- i0) = W(sigma) +/- i pi J(sigma)`
//!   of the resolvent denominator, its analytic continuation through the cut,
//!   and the second-sheet resonance pole `mu` with `Im mu < 0`.
//! - [`smatrix`]: the scalar S-matrix `s = h_- / h_+`, its rank-one operator
//!   form on the auxiliary space, the Blaschke/phase factorization and the
//!   inner-function property checks.
//! - [`states`]: the outer function `g` with `|g|^2 = J`, the resonant state
//!   in the outgoing representations, wave-operator kernels and the particle
//!   content of the resonance.
//! - [`evolve`]: the exact survival amplitude by spectral quadrature, the
//!   semigroup decay law `a0 * exp(-i mu tau)` and their comparison.
//!
//! [`quad`] holds the shared integration kernels (adaptive Gauss-Kronrod,
//! Cauchy principal values, grid Hilbert transforms, Poisson extensions) and
//! [`model`] the model construction (masses, form factors, center-of-momentum
//! reduction, density families).

pub mod error;
pub mod evolve;
pub mod model;
pub mod quad;
pub mod rational;
pub mod resolvent;
pub mod smatrix;
pub mod states;

pub use error::{Error, Result};
pub use model::{ChannelModel, FormFactor, FourMomentum, MassParams};
pub use resolvent::{Resolvent, Resonance};
