//! Method-of-lines solvers for semilinear parabolic problems on the unit
//! hypercube, integrated in time with AMF-W splitting methods.

pub mod amfw;
pub mod banded;
pub mod boundary;
pub mod catalog;
pub mod convergence;
pub mod error;
pub mod grid;
pub mod norms;
pub mod problem;
pub mod space;
pub mod stability;

pub use error::{AmfwError, Result};
