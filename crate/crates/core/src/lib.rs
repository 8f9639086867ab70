//! Option pricing under generalized tempered stable (GTS) Lévy processes.
//!
//! The crate covers the process itself ([`gts`]), Fourier inversion of its
//! characteristic function ([`transform`]), a composite Newton-Cotes rule
//! ([`quadrature`]), European call pricing ([`pricing`]), maximum-likelihood
//! fitting ([`calibration`]) and price-series loading ([`market_data`]).

pub mod calibration;
pub mod error;
pub mod gts;
pub mod market_data;
pub mod pricing;
pub mod quadrature;
pub mod special;
pub mod transform;

pub use error::{GtsError, Result};
pub use gts::{solve_esscher, EsscherSolution, Exponent, GtsParams, Unit};
