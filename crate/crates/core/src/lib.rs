//! Shot-noise-limited modeling of free-space optical displacement detection.
//!
//! The crate models a probe field scattering off a target (membrane mode or
//! dipolar particle), propagates the scattered light to a detection surface,
//! and evaluates how much of the encoded position information a given
//! detector geometry extracts:
//!
//! * [`quadrature`] — deterministic composite integration on Cartesian and
//!   solid-angle grids, with a resolution-doubling convergence loop.
//! * [`fields`] — Gaussian probes, membrane mode shapes, phase-imprinted
//!   reflection, Fraunhofer far fields, phase-contrast images.
//! * [`detection`] — detector weight functions and the detection budget
//!   (sensitivity, shot noise, imprecision, efficiency, back action),
//!   differential-efficiency profiles and exclusion estimates.
//! * [`membrane`] — end-to-end membrane scenarios: analytic closed forms,
//!   blocked-detector optimization, interferometer benchmark, wire scans.
//! * [`dipole`] — Rayleigh-regime particle tracking on the collection
//!   sphere: vector far fields, split-detector budgets, information
//!   radiation pattern, block optimization.
//! * [`phase_contrast`] — photodiode-array and threshold-mask detection of
//!   phase-contrast images.
//! * [`fisher`] — quantum-Fisher-information cross-checks and the
//!   Cramér–Rao bound.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN along
// with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod dipole;
pub mod error;
pub mod fields;
pub mod fisher;
pub mod membrane;
pub mod phase_contrast;
pub mod quadrature;

pub use detection::{DetectionBudget, DdeProfile, ScanResult, WeightFunction};
pub use error::{Error, Result};
pub use fields::{FieldPair, MembraneConfig, OpticalParams, Plane, RealField, ScalarFieldGrid, HBAR};
pub use quadrature::{CartesianGrid2D, SolidAngleGrid};
