//! Polynomial dictionary learning and sparse coding for signals with
//! time delays, with an acoustic impulse-response denoising pipeline.
//!
//! A polynomial matrix stores one FIR filter per entry ([`PolyMatrix`]).
//! Dictionaries over such matrices can be learned with polynomial MOD
//! ([`dictlearn::pmod_train`]) or the stacked K-SVD baseline
//! ([`dictlearn::ksvd_stacked_train`]), and signals coded against them
//! with stacked OMP or polynomial OMP ([`sparsecode`]). The [`pipeline`]
//! module segments raw signals into polynomial matrices, injects
//! SNR-calibrated noise, and drives the full seeded denoising experiment.

pub mod dictlearn;
pub mod error;
pub mod lstsq;
pub mod pipeline;
pub mod polymat;
pub mod sparsecode;

pub use error::{Error, Result};
pub use polymat::{PolyMatrix, StackedMatrix};
pub use sparsecode::{CodeConfig, Coder, SparseCode, SparseCodeMatrix, SupportSet};
