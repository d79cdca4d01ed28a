//! Surface-dependent self-energy of a nonrelativistic electron between two
//! identical parallel plates.
//!
//! The shift is computed numerically from the residue at zero frequency of the
//! cavity's scattering Green tensor, for any permittivity model, and checked
//! against the closed forms available for perfect conductors and for the
//! midpoint of dispersive plates. [`experiment`] turns shifts into forces and
//! the field modulation of a half-cyclotron measurement.
//!
//! All public quantities are S.I.; frequencies are angular (rad/s).

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity_green;
pub mod closedform;
pub mod dielectric;
pub mod error;
pub mod experiment;
mod poly;
pub mod quantities;
pub mod selfenergy;

pub use dielectric::DielectricModel;
pub use error::{Error, Result};
pub use quantities::{CavityConfig, ElectronState, ShiftResult};
pub use selfenergy::ShiftSettings;
