//! Optomechanical cooling of a mechanical mode through its dominant damping
//! channel.
//!
//! Mode `a` is the one we want cold. It couples with rate `λ` to a lossy
//! mode `b`, whose damping is boosted optically by a red-detuned cavity `c`.
//! The crate offers:
//!
//! * [`model`]: the parameter types and the linear Langevin system, in
//!   rotating-wave (3-mode) and full (6-component) form;
//! * [`analytics`]: closed-form rotating-wave results (damping, occupation,
//!   optimum, force noise);
//! * [`spectral`]: the exact frequency-domain solver, position spectra,
//!   integrated occupations and line fits;
//! * [`sweep`]: cooperativity and detuning sweeps, optimum search;
//! * [`design`]: beam-resonator formulas mapping geometry onto the model;
//! * [`cli`]: configuration files and table/summary output.
//!
//! Frequencies and rates are angular throughout.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod cli;
pub mod design;
pub mod error;
pub mod model;
pub mod presets;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{
    build_full_system, build_rwa_system, build_system, build_system_with_baths, CavityDrive,
    DriftModel, Fidelity, MechanicalMode, ModeName, SystemSpec, ThermalBathSpec,
};
pub use spectral::{FrequencyGrid, GridConfig, SpectrumResult};
