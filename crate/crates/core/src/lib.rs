pub mod error;
pub mod exact;
pub mod star;

pub use error::{Error, Result};
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod laplace;
pub mod linalg;
pub mod projector;
pub mod toeplitz;
