//! Spectral action of a two-sheeted FLRW geometry: symbol calculus, the
//! resulting bimetric equations of motion, their integration, and the
//! linearized perturbation theory.

pub mod action;
pub mod eom;
pub mod error;
pub mod integrator;
pub mod params;
pub mod perturbation;
pub mod profile;
pub mod verify;
pub mod symbol;

pub use error::{Error, Result};
pub use params::{validate_params, CosmoParams, ParamSpec, RawConstants};
pub use profile::{jet_eval, Jet2, PhiField, Profile, SheetGeometry};
