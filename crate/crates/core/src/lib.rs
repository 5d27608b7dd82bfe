//! Tomograms of continuous-variable, hybrid and spin quantum states.
//!
//! States live in truncated Fock (and qubit) tensor-product spaces. From them we
//! render optical and spin tomograms, evolve them under the model Hamiltonians and
//! closed-form damping channels, and read squeezing measures and entanglement
//! indicators directly off the tomograms. Density-matrix reference measures are
//! provided alongside so every tomographic number has something to be checked against.

pub mod chronocyclic;
pub mod decoherence;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod indicators;
pub mod io;
pub mod special;
pub mod squeezing;
pub mod timeseries;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, ModeSpace, PureState};

pub use num_complex::Complex64 as C64;
