//! Exact symbolic calculus for Lie algebroids.

pub mod algebroid;
pub mod cli;
pub mod cohomology;
pub mod conventions;
pub mod exterior;
pub mod field;
pub mod lie_algebra;
pub mod linalg;
pub mod matrix;
pub mod modular;
pub mod morphism;
pub mod random;
pub mod twisted;
