//! Numerical building blocks shared by the measures.

pub mod optimize;
pub mod quadrature;
pub mod roots;
pub mod special;

pub use optimize::{nelder_mead, Minimum, NelderMeadOptions};
pub use quadrature::{integrate, integrate_real_line, integrate_upper, Integral, QuadratureOptions};
pub use roots::{bisect, brent};
