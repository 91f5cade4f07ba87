//! One- and two-photon scattering off a two-level emitter side-coupled to a
//! coupled-resonator array with cosine dispersion.
//!
//! The crate is layered bottom-up: [`band_model`] and [`greens`] describe the
//! single-excitation physics, [`band_integrals`] evaluates the principal-value
//! band integrals of the two-photon problem, [`smatrix`] assembles scattering
//! amplitudes, [`bound3`] and [`realspace`] build three-body bound states and
//! coordinate-space wavefunctions, and [`lattice_oracle`] diagonalizes the
//! finite-chain Hamiltonian as an independent check.

pub mod band_integrals;
pub mod band_model;
pub mod bound3;
pub mod error;
pub mod greens;
pub mod lattice_oracle;
pub mod quad;
pub mod realspace;
pub mod roots;
pub mod smatrix;

pub use band_model::{
    band_edges, dispersion, momenta_at_energy, BandEnergy, EnergyClass, ModelParams,
};
pub use error::{Error, Result};
pub use greens::{
    greens_fn, self_energy, solve_single_bound_states, BoundState1, ComplexEnergy, Model,
};

/// Version of this crate, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
