//! Random Fourier feature classification where the random projection
//! directions are read off the first row of randomly sampled Ry/CNOT circuits.
//!
//! The pipeline is split into small modules:
//!
//! * [`qsim`] — real-amplitude statevector simulator for the Ry/CNOT gate set.
//! * [`ansatz`] — the random circuit family and the [`ansatz::FeatureBasis`] built from it.
//! * [`featmap`] — cos/sin feature map, classical Gaussian basis, kernel estimates.
//! * [`linclf`] — squared-hinge linear classifier.
//! * [`dataio`] — MNIST IDX loading, chi-squared selection, train/test split.
//! * [`experiment`] — end-to-end runs, grid search, kernel convergence checks, data fetch.

pub mod ansatz;
pub mod dataio;
pub mod error;
pub mod experiment;
pub mod featmap;
pub mod linclf;
pub mod par;
pub mod qsim;
pub mod rng;

pub use error::{Error, Result};
pub use par::Execution;
