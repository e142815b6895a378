//! Spectral simulation of the defocusing cubic Schrödinger equation on the
//! flat torus and the round sphere, with numerical checks of the estimates
//! used in low-regularity global well-posedness arguments.

pub mod config;
pub mod error;
pub mod experiments;
pub mod imethod;
pub mod legendre;
pub mod locality;
pub mod record;
pub mod selftest;
pub mod solver;
pub mod spectra;
pub mod strichartz;
pub mod tensorizer;
pub mod transform;

pub use error::{Error, Result};
