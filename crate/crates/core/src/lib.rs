//! Diffraction of orbital-angular-momentum modes on opaque circular obstacles
//! and the resulting entanglement loss of OAM-entangled photon pairs.
//!
//! Fields are sampled on a [`TransverseGrid`](fields::TransverseGrid). Input modes
//! come from [`modes`], are screened by an [`obstacle`], and propagated with the
//! angular-spectrum [`propagator`]. [`analysis`] projects diffracted fields onto
//! mode bases and computes their mutual overlap `b`, from which [`entanglement`]
//! derives the concurrence. [`experiments`] runs displacement sweeps, [`verify`]
//! holds the invariant suite, and [`config`] and [`output`] serve the CLI.

pub mod analysis;
pub mod config;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod modes;
pub mod obstacle;
pub mod output;
pub mod propagator;
pub mod special;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
