pub mod cli;
pub mod conformal_blocks;
pub mod connection;
pub mod error;
pub mod fredholm_det;
pub mod gk;
pub mod lambda_limit;
pub mod laurent;
mod linalg;
pub mod params;
pub mod partitions;
pub mod pv_ode;
pub mod ring;
pub mod scalar;
pub mod special_fn;

pub mod tau_expansions;

pub use error::{PvError, Result};
