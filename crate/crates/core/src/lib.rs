//! Numerics for resonance decay and single-ion quantum-jump statistics.
//!
//! The crate has four computational layers plus I/O plumbing:
//!
//! - [`resonance`] — Breit-Wigner amplitudes, Gamow energy densities, pole
//!   pairings against rational test functions, and survival probabilities on
//!   full-line and half-line energy supports. The pairing integrals exhibit
//!   the exact exponential decay law for forward times and its breakdown for
//!   backward times.
//! - [`hardy`] — Paley-Wiener support profiles of sampled energy wave
//!   functions, Hardy-class classification and projection, a spectral Hilbert
//!   transform, and the semigroup evolution guard.
//! - [`jump`] — a seeded continuous-time simulator of single-ion shelving
//!   trajectories producing binned fluorescence traces and ground-truth jump
//!   records.
//! - [`analysis`] — dark-period detection, dwell-time ensembles, counting
//!   functions, survival curves, lifetime fits, and the counting-ratio /
//!   Born-probability and lifetime-width comparisons.
//!
//! [`config`], [`csvio`], and [`run`] wire the layers into reproducible
//! command-line runs with bit-exact CSV artifacts.
//!
//! All numerical operations are pure functions of their inputs and are safe
//! to call concurrently. Randomness enters only through explicit seeds.

pub mod analysis;
pub mod config;
pub mod csvio;
pub mod grid;
pub mod hardy;
pub mod jump;
pub mod quad;
pub mod rational;
pub mod resonance;
pub mod run;

pub use analysis::{
    born_survival, compare_counting_to_born, counting_function, detect_dark_periods,
    fit_lifetime, lifetime_width_report, survival_curve, AnalysisError, ComparisonReport,
    DarkPeriod, DwellEnsemble, FitResult, LifetimeWidthReport, SurvivalCurve,
};
pub use grid::{EnergyGrid, GridError, SampledWaveFunction};
pub use hardy::{
    fourier_support_profile, hardy_classify, hardy_project, hilbert_transform,
    semigroup_multiplier, Classification, EvolvedState, Guard, HardyClass, HardyError,
    SupportProfile,
};
pub use jump::{
    run_ensemble, simulate_trajectory, FluorescenceTrace, JumpRecord, LevelScheme, SimError,
    StopCriterion, TrajectoryConfig,
};
pub use quad::{Integral, QuadratureConfig};
pub use rational::{RationalTerm, RationalTestFunction};
pub use resonance::{
    bw_amplitude, cauchy_pairing, eigenvalue_defect, evolved_pairing, gamow_density,
    lorentzian_norm, survival_probability, Domain, Duration, EigenvalueDefect, ResonanceError,
    ResonancePole,
};

/// Reduced Planck constant in eV·s, for runs that mix energy widths in eV
/// with laboratory times in seconds. The default unit convention everywhere
/// is `hbar = 1`.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;
