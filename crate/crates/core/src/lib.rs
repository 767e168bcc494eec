//! Tail quasi-linear means and the tail conditional entropic risk measure.
//!
//! The crate computes VaR, CTE, tail variance, tail quasi-linear means
//! `U^{-1}(E[U(X) | X >= VaR_alpha(X)])` and their exponential-utility case
//! on scenario samples and on symmetric/elliptical models, and applies them to
//! capital allocation, stop-loss reinsurance and minimal-risk portfolios.

pub mod allocation;
pub mod cli;
pub mod error;
pub mod numeric;
pub mod portfolio;
pub mod reinsurance;
pub mod risk;
pub mod sample;
pub mod symmetric;
pub mod utility;

pub use error::{Result, RiskError};
pub use sample::{SampleSet, TailSlice};
pub use symmetric::{Generator, SymmetricModel, TiltedTail};
pub use utility::{Curvature, ExtendedReal, UtilityFunction};
