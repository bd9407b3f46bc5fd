//! Simulation of spontaneous-decay quantum jumps in three-level systems.
//!
//! The crate is layered bottom-up:
//!
//! * [`state`] and [`channel`]: density matrices, Kraus sets for the cascade,
//!   Λ and V decay configurations, and their closed-form evolutions.
//! * [`timecourse`]: decay rates to jump probabilities, and evolution sweeps.
//! * [`optics`]: path-encoded detection: image-plane beam profiles,
//!   two-beam interference fringes, Poisson detector frames and the
//!   frame-sequence realization of a channel.
//! * [`estimate`]: recovery of populations and coherence moduli from
//!   detector profiles by damped least squares.

pub mod channel;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod optics;
pub mod state;
pub mod timecourse;

pub use channel::{apply_channel, build_kraus, closed_form_evolve, DecayType, JumpProbabilities, KrausSet};
pub use error::{Error, Result};
pub use state::{
    project_subspace, pure_density, visibility, ComplexMatrix, DensityMatrix, InitialState, SubspaceState,
};
pub use timecourse::{probs_at_progress, probs_at_time, run_sweep, DecayRates, Samples, SweepRecord, SweepSpec, PAIRS};
