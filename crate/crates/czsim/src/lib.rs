//! Pulse-level simulator of two flux-tunable transmon qubits coupled through a
//! tunable coupler.
//!
//! The crate models the three-mode device Hamiltonian
//!
//! ```text
//! H/ħ = Σᵢ ωᵢ aᵢ†aᵢ + (αᵢ/2) aᵢ†aᵢ†aᵢaᵢ + Σ_{i<j} g_ij (aᵢ†aⱼ + aᵢaⱼ†)
//! ```
//!
//! on a truncated Fock space (tensor order `Q1 ⊗ C ⊗ Q2`), drives it with
//! flux-pulse schedules, and layers the full virtual-calibration stack on top:
//! coupler spectroscopy, iSWAP chevrons and Fourier coupling extraction,
//! Ramsey conditional-phase measurement, leakage maps, Nelder–Mead CZ tune-up
//! (adiabatic half-cosine and diabatic square pulses), and two-qubit
//! Clifford randomized/interleaved/purity benchmarking with Lindblad
//! decoherence.
//!
//! Entry points:
//! - [`device`] — device parameters, Hamiltonian construction, flux curves.
//! - [`pulse`] — pulse segments, schedules, sampling, line-distortion model.
//! - [`evolve`] — unitary propagators, Lindblad evolution, computational-block
//!   projection and gate metrics.
//! - [`experiments`] — the calibration experiments, returning plot-ready data.
//! - [`bench`] — Clifford group, RB/PB sequencing, decay fits, error rates.
//! - [`tuneup`] — Nelder–Mead optimizer and the CZ calibration loops.
//! - [`config`]/[`cli`] — file-driven reproducible batch runs.
//!
//! Interface units are GHz/MHz, ns/µs and volts; internally everything is
//! angular frequency in rad/ns and time in ns.

pub mod bench;
pub mod cli;
pub mod config;
pub mod device;
pub mod error;
pub mod evolve;
pub mod experiments;
pub(crate) mod linalg;
pub mod pulse;
pub mod report;
pub mod tuneup;
pub mod units;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix over the truncated product space.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector over the truncated product space.
pub type CVec = nalgebra::DVector<C64>;
