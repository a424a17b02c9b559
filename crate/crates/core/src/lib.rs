//! Low-rank tensor completion with minimax-concave penalties on the t-SVD
//! spectra of all mode-k1k2 unfoldings.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: dense N-way tensors, unfolding/folding, DFT along mode 3,
//!   sampling-mask projections.
//! * [`tsvd`]: t-product, t-SVD, tubal rank and the tensor nuclear norm.
//! * [`penalty`]: the MCP, its variational form, the weighted tensor
//!   Γ-norm and the proximal operators.
//! * [`solver`]: ADMM solvers for the NMCP, EMCP and BEMCP models.
//! * [`metrics`]: PSNR, SSIM, ERGAS and relative error.
//! * [`synthetic`]: seeded generators for test data.

pub mod error;
pub mod metrics;
pub mod penalty;
pub mod solver;
pub mod synthetic;
pub mod tensor;
pub mod tsvd;

pub use error::{Error, Result};
pub use solver::{solve, ConvergenceTrace, Method, Solver, SolverConfig};
pub use tensor::{ComplexTensor, DenseTensor, IndexSet, ModePair};
