//! Dunkl kernels for the dihedral root systems `I_n`.
//!
//! The crate evaluates `E(x, w.y)` for every element `w` of the dihedral group
//! with a certified truncation bound, implements the barrier functions that
//! yield sharp two-sided estimates of the kernel, and checks those estimates
//! numerically. The heat kernel is built on top of the same evaluator.

pub mod error;
pub mod expsum;
pub mod heat;
pub mod kernel;
pub mod barrier;
pub mod cli;
pub mod quadrature;
pub mod quantities;
pub mod report;
pub mod root_system;
pub mod sampling;
pub mod verify;

pub use error::{DunklError, Result};
pub use kernel::{KernelEvaluator, KernelValues, OdeOptions, SeriesOptions};
pub use root_system::{point, GroupElement, Multiplicity, Point, RootSystem};
