//! Effective low-energy Hamiltonians for one-dimensional quantum systems.
//!
//! The Euclidean transition matrix `M_ij(T) = <e_i| e^{-HT/ħ} |e_j>` is
//! estimated in a basis of normalized box functions, either by Monte Carlo
//! over free-particle paths ([`sampler`]) or from analytically known kernels
//! ([`oracle`]). Diagonalizing it ([`spectra`]) yields energies and wave
//! functions of an effective Hamiltonian, from which [`thermo`] computes the
//! partition function, average energy and specific heat.

pub mod config;
pub mod error;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod potentials;
pub mod quadrature;
pub mod report;
pub mod reproduce;
pub mod sampler;
pub mod spectra;
pub mod thermo;

pub use error::{Error, Result};
pub use model::{
    EffectiveHamiltonian, Lattice, MatrixSource, PhysicalParams, Potential, SamplerConfig,
    SamplerMethod, SquareMatrix, ThermoCurve, ThermoRow, TransitionMatrix,
};
