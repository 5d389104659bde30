//! Integration of sigmoidal proxy networks in closed form.
//!
//! A one-hidden-layer network `f(x) = w2 . sigmoid(W1 x + b1) + b2` is fitted
//! to samples of an integrand on a box; its integral over any axis-aligned
//! sub-box, its marginals and its line integrals are then exact sums of
//! polylogarithms of the weights.

pub mod error;
pub mod estimators;
pub mod integrands;
pub mod model;
pub mod polylog;
pub mod proxy;
pub mod qnet;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use proxy::{DomainMap, Hyperrect, ProxyNet, WeightFile};
