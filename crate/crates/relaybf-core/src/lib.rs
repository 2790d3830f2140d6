//! Relay beamforming optimization for multiuser amplify-and-forward two-way
//! relaying.
//!
//! The crate computes relay beamforming matrices under max-min SINR, power
//! minimization, weighted sum-rate, MSE, and SER criteria. The core pieces:
//!
//! - [`linalg`]: dense complex matrix kernel (Hermitian eigendecomposition,
//!   Cholesky, Kronecker products, vectorization).
//! - [`model`]: system instances, channel generation, and the lifted
//!   quadratic forms tying beamformer space to the SDP variable space.
//! - [`sdp`]: a dense primal-dual interior-point solver for Hermitian
//!   semidefinite programs, plus rank-one extraction and Gaussian
//!   randomized rounding.
//! - [`fractional`]: the Dinkelbach-type max-min SINR solver, single-SDP
//!   power minimization, and the two bisection equivalences between them.
//! - [`monotonic`]: polyblock outer approximation over the SINR region for
//!   monotone utilities (weighted sum-rate, MSE, SER, custom).
//! - [`collab`]: collaborative relaying with a diagonal gain vector and
//!   per-relay power constraints.
//! - [`mimo`]: alternating optimization of user precoders, relay matrix,
//!   and receive combiners for multi-antenna users.
//! - [`baselines`]: simple comparison beamformers for benchmarking.

pub mod baselines;
pub mod collab;
pub mod error;
pub mod fractional;
pub mod linalg;
pub mod mimo;
pub mod model;
pub mod monotonic;
pub mod sdp;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianMatrix};
pub use model::{QuadraticForms, SystemInstance};
