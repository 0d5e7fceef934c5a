//! Photon emission statistics of inverted atomic ensembles coupled to a
//! one-dimensional waveguide.
//!
//! Solvers, from smallest to largest systems:
//! - [`exact_me`]: full density matrix, N ≤ 8, chiral or symmetric.
//! - [`sym_moments`]: exact symmetric moment hierarchy, Dicke-basis populations and
//!   the three-variable MF2 system.
//! - [`chiral_continuum`]: continuum MF2 equations on an optical-depth grid.
//! - [`analytic`]: thermodynamic-limit closed forms and series.

pub mod analytic;
pub mod chiral_continuum;
pub mod coeffs;
pub mod config;
pub mod error;
pub mod exact_me;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod special;
pub mod sym_moments;
pub mod verify;

pub use config::{Configuration, InitialState, ObservableTrace, SystemConfig, TimeGrid};
pub use error::{Error, Result};
