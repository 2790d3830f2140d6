//! Dense complex linear algebra kernel: matrices, Hermitian
//! eigendecomposition, Cholesky, Kronecker products, vectorization.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; operations are pure functions.

mod eig;
mod hermitian;
mod matrix;

pub use hermitian::{CholeskyFactor, HermitianMatrix};
pub use matrix::{
    dot_conj, dot_t, hadamard, kron, kron_vec, norm2, norm2_sqr, scale_vec, CVector, ComplexMatrix,
};
