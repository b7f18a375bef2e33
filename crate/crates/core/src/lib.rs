//! Certified two-sided bounds for the Bergman kernel, the Bergman metric and
//! the Szegő kernel near a boundary point of a decoupled model domain
//! `{Re z_n > sum_j f_j(|z^j|)}`, together with a Monte-Carlo oracle and a
//! command-line driver that sweeps an approach path.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod profiles;
pub mod quadrature;

pub use error::{Error, Result};
