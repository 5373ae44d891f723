//! Numerical white-noise calculus built on S- and T-transforms.
//!
//! Hida distributions are handled exclusively through their transforms, which are
//! ordinary functionals on test functions. The crate implements the closed forms for
//! Donsker's delta and its complex scalings, finite products and shifted series of deltas,
//! Brownian local time, and the Feynman integrand of a particle on a circle, together with
//! independent quadrature and Monte Carlo oracles that cross-check them.

pub mod circle;
pub mod donsker;
pub mod error;
pub mod function_space;
pub mod local_time;
pub mod mc;
pub mod products;
pub mod quadrature;
pub mod rng;
pub mod series;
pub mod ufunctional;

pub use error::{Error, ErrorClass, Result};
pub use function_space::{inner_product, norm, FunctionElement, NormSign, NormSpec, Sector};
pub use num_complex::Complex64;
pub use ufunctional::{ConvergenceReport, GrowthCertificate, TransformKind, UFunctional};
