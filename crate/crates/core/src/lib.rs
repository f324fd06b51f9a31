//! Simulation of a single-qubit engine fueled by projective measurement.
//!
//! The crate runs the four-stroke cycle numerically (thermal state, driven
//! unitary, measurement, driven unitary, thermalization), evaluates the
//! closed-form energetics in terms of transition probabilities, and scans the
//! measurement-basis angles for extrema of extracted work, efficiency and
//! measurement entropy change.
//!
//! Internally energies are in units of ħω and times are phases ωt; see
//! [`units`] for the conversion from peV and microseconds.

pub mod algebra;
mod compensated;
pub mod cycle;
pub mod error;
pub mod measurement;
pub mod propagator;
pub mod sweep;
pub mod units;

pub use algebra::{DensityMatrix, Ket2, Matrix2C};
pub use cycle::{run_cycle, CycleEngine, CycleRecord, EngineParams, Tolerances, TransitionProbs};
pub use error::{Error, Result};
pub use measurement::{basis_kets, measure, MeasurementBasis};
pub use sweep::{grid_sweep, locate_extrema, GridSpec, Objective, SweepTable};
