//! Single-quantum interferometry on finite-dimensional Hilbert spaces.
//!
//! States are unit vectors over labelled path bases, detector events are
//! effects (hermitian operators with spectrum in `[0, 1]`) and probabilities
//! are expectation values. On top of that the crate builds interferometer
//! arrangements, complete detector outcome families, a Monte Carlo event
//! sampler and a verifier for the fact that a positive effect vanishing on
//! two states vanishes on all their superpositions, which is why a single
//! quantum never fires detectors in both arms.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod detection;
pub mod effect;
pub mod error;
pub mod hilbert;
pub mod interferometer;
pub mod random;
pub mod rng;
pub mod sampling;
pub mod scenarios;
pub mod tolerance;

pub use detection::{
    build_joint_povm, coincidence_probability, coincidence_probability_mixed, serial_correlation, superposition_scan,
    verify_reduction_theorem, DetectorSpec, JointOutcome, OutcomePovm, SerialDistribution, TheoremReport,
};
pub use effect::{
    expectation, expectation_mixed, kernel_member, validate_effect, DensityOperator, Effect, EffectDiagnostics,
    KernelCheck,
};
pub use error::{Error, Result};
pub use hilbert::{superpose, Basis, Operator, StateVector, C64};
pub use interferometer::{
    beam_splitter_unitary, fringe_scan, propagate, run_arrangement, Arrangement, Layout, OpticalElement,
    PropagationResult,
};
pub use sampling::{sample_events, EventCounts};
pub use scenarios::{list_scenarios, run_scenario, ScenarioParams, ScenarioReport};

pub use tolerance::Tolerances;
