//! Dense complex linear algebra: matrices, Hermitian spectra, Schatten norms
//! and majorization.

pub mod eig;
pub mod io;
pub mod majorization;
pub mod matrix;
pub mod norms;

pub use eig::{hermitian_eig, psd_power, Spectrum};
pub use io::MatrixRecord;
pub use majorization::{is_doubly_stochastic, majorizes, schur_horn_ds, sinkhorn};
pub use matrix::{pauli, ComplexMatrix, C64};
pub use norms::{abs_matrix, holder_conjugate, schatten_norm, schatten_norm_normalized, singular_values};
