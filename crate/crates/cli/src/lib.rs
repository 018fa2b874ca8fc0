//! Experiment harness for Clifford torus intersections: Monte Carlo tables,
//! the volume estimate, figure data, and the file formats they use.

pub mod experiments;
pub mod figures;
pub mod io;
