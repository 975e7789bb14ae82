pub mod delta_pt;
pub mod error;
pub mod field_analysis;
pub mod homogeneous;
pub mod lg_core;
pub mod model;
pub mod numerics;
pub mod oracles;
pub mod xfield_pt;

pub use error::{Error, Result};
pub use lg_core::{PacketParams, SpacetimePoint};
pub use num_complex::Complex64;
pub use numerics::{Estimate, QuadError, QuadratureConfig};
