//! Finite-volume Anderson Hamiltonians `H = -Δ + λV` on cubes of `Z^d`, their
//! spectra over disorder ensembles, and the spectral statistics of the
//! localized regime: unfolded level spacings, localization-center spacings,
//! local Poisson counts, Wegner and Minami ratios, counting large deviations,
//! and sub-cube approximation of eigenvalues.
//!
//! A typical pipeline builds a [`experiments::Model`], estimates its IDS,
//! picks an energy window of fixed expected count and pools a statistic over
//! realizations. [`experiments::run`] does all of that from a TOML file.

pub mod disorder;
pub mod eigensolve;
pub mod error;
pub mod hamiltonian;
pub mod lattice;
pub mod ids;
pub mod localization;
pub mod statistics;
pub mod two_scale;
pub mod experiments;
