//! Spectral Galerkin laboratory for two coupled double-wall Timoshenko beam
//! systems with Fourier heat conduction and fractional damping.
//!
//! Both systems evolve a nine-field state
//! `U = (deflection and rotation of each tube, their rates, temperature)`
//! on the interval `(0, l)` with Dirichlet boundary conditions. The two
//! variants differ only in how the heat equation couples back to the first
//! tube's rotation rate: [`SystemVariant::System01`] uses a zero-order
//! coupling, [`SystemVariant::System02`] a second-order (strong) one.
//!
//! All fields are represented in the orthonormal Dirichlet sine basis, in
//! which the stiffness operator and all of its fractional powers are exactly
//! diagonal; the only dense coupling is the antisymmetric first-derivative
//! matrix. The crate builds the dense truncated generator and the
//! positive-definite energy Gram matrix, and on top of those provides
//!
//! * semigroup trajectories (exact eigendecomposition propagation with an
//!   implicit-midpoint fallback), energy/dissipation tracking and decay-rate
//!   fits ([`dynamics`]),
//! * resolvent solves and energy-metric operator norms along the imaginary
//!   axis, frequency sweeps, scaling-exponent fits and inequality audits
//!   ([`resolvent`]),
//! * a configuration-file driven experiment runner with machine-readable
//!   CSV/manifest output ([`config`], [`runner`]).
//!
//! The `examples/` directory contains one runnable example per capability;
//! the `semibeam` binary exposes the same experiments as subcommands.

pub mod assembly;
pub mod config;
pub mod csvio;
pub mod dynamics;
pub mod error;
pub mod params;
pub mod resolvent;
pub mod runner;
pub mod spectral;
pub mod state;

pub use assembly::{assemble_generator, assemble_gram, dissipation_rate, stationary_solve};
pub use assembly::{EnergyGram, GeneratorMatrix};
pub use dynamics::{energy, fit_decay_rate, propagate_exact, spectral_abscissa};
pub use dynamics::{step_implicit_midpoint, DecayFit, Propagator, TrajectoryRecord};
pub use error::{Error, Result};
pub use params::{ModelParameters, SystemVariant};
pub use resolvent::{
    fit_exponent, gevrey_target, lemma_audit, resolvent_norm, resolvent_solve, sweep,
    validity_limit, AuditOptions, AuditReport, ExponentFit, ResolventSample, SweepOptions,
    SweepPoint,
};
pub use spectral::{
    derivative_matrix, eigenvalue, fractional_power_diag, interpolation_ratio, SpectralField,
};
pub use state::{Block, StateVector};
