//! Spectral-domain simulation of precursor-speed interferometry.
//!
//! A finite-rise-time square pulse is split between an EIT crystal and an
//! undoped reference crystal, the two arms are recombined on the |±⟩
//! polarization ports, the dark port is passed through a wideband absorber
//! and a bandwidth-limited detector, and the recorded power is converted
//! into a bound on the wavefront speed difference between the arms.
//!
//! Pipeline: [`pulse`] → [`media`] transfer functions →
//! [`interferometer`] → [`detector`], driven by [`scenario`].

pub mod config;
pub mod detector;
pub mod error;
pub mod interferometer;
pub mod media;
pub mod pulse;
pub mod scenario;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
