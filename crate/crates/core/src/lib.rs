//! Ratios-conjecture prediction for the one-level density of zeros of even
//! quadratic twists of an elliptic curve L-function, together with the tools
//! needed to generate and compare against actual zero data.

pub mod arith;
pub mod curve;
pub mod density;
pub mod discriminant;
pub mod empirics;
pub mod error;
pub mod identities;
pub mod lfun;
pub mod newform;
pub mod ratios;
pub mod roots;
pub mod special;
pub mod symsquare;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
