pub mod arith;
pub mod birkhoff;
pub mod error;
pub mod families;
pub mod intersect;
pub mod matcore;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
