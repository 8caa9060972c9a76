//! Dressed bound states of a quantum emitter in a microring resonator with a
//! chiral (unidirectional) backscattering path.
//!
//! The crate covers the single-excitation amplitude dynamics, emission
//! spectra, a truncated-Fock Lindblad solver, two-emitter entanglement and a
//! weak-drive perturbative treatment of photon blockade.

// `!(x > tol)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod blockade_analytic;
pub mod entanglement;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod single_excitation;
pub mod spectra;

pub type C64 = num_complex::Complex64;
