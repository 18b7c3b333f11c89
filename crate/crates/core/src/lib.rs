// SPDX-License-Identifier: Apache-2.0

//! Dissipative dynamics of unstable particles in a truncated Fock space.
//!
//! Three independent routes compute the same evolution:
//!
//! * [`channel`]: exact Kraus operators applied to density matrices,
//! * [`heisenberg`]: the dual map acting on observables, with closed forms,
//! * [`master`]: Runge–Kutta integration of the master equation.
//!
//! [`flavour`] builds two-flavour mixing models. [`scenario`] parses
//! declarative run files and [`run`] executes them for the command-line
//! tool.

pub mod channel;
pub mod error;
pub mod flavour;
pub mod fock;
pub mod heisenberg;
pub mod linalg;
pub mod master;
pub mod run;
pub mod scenario;

pub use channel::{
    apply_channel, build_kraus, evolve_state, expectation, occupation_distribution, DecayMode,
    DecayModel, KrausOperator, KrausSet,
};
pub use error::{Error, Result};
pub use flavour::{build_flavour_observables, build_mixed_model, FlavourObservables, MixingParams};
pub use fock::{
    build_annihilator, build_creator, build_number, build_projector, build_total_number,
    coherent_state, number_mixture, number_state, poisson_mixture, DensityOperator, FockSpace,
    ModeSpec, OperatorMatrix, Statistics,
};
pub use heisenberg::{
    evolve_ladder, evolve_observable, mean_number_trajectory, mean_strangeness_trajectory,
    HeisenbergMap,
};
pub use master::{generator_apply, integrate, GeneratorAction};
pub use run::{compute, run_scenario, RunError, RunOptions};
pub use scenario::{parse_config, ConfigError, ScenarioConfig};
