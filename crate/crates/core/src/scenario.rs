// SPDX-License-Identifier: Apache-2.0

//! Declarative scenario files: JSON schema, parsing and validation.
//!
//! A scenario names the modes, an optional mixing rotation (with an
//! optional sweep over θ), the initial state, a uniform time grid, the
//! computation routes and the observables to record.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::flavour::MixingParams;
use crate::fock::{
    coherent_state, number_mixture, number_state, poisson_mixture, DensityOperator, FockSpace, ModeSpec,
    Statistics,
};
use crate::linalg::C64;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_DIMENSION: usize = 10_000;
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub modes: Vec<ModeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixing: Option<MixingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_sweep: Option<Vec<f64>>,
    pub initial_state: InitialState,
    pub time_grid: TimeGrid,
    pub routes: Vec<Route>,
    pub observables: Vec<Observable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_step: Option<f64>,
    pub output_path: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Number(Vec<usize>),
    Coherent { mode: usize, alpha: [f64; 2] },
    Poisson { mode: usize, nbar: f64 },
    Mixture(Vec<MixtureEntry>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureEntry {
    pub weight: f64,
    pub occupations: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl TimeGrid {
    /// Uniform points from `start` to `end` inclusive.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let span = self.end - self.start;
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.end
                } else {
                    self.start + span * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Kraus,
    Ode,
    Heisenberg,
}

impl Route {
    pub const ALL: [Route; 3] = [Route::Kraus, Route::Ode, Route::Heisenberg];

    pub fn name(self) -> &'static str {
        match self {
            Route::Kraus => "kraus",
            Route::Ode => "ode",
            Route::Heisenberg => "heisenberg",
        }
    }

    pub fn parse(name: &str) -> Option<Route> {
        Route::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    N,
    S,
    Qplus,
    Qminus,
    #[serde(rename = "occupations")]
    Occupations,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::N => "N",
            Observable::S => "S",
            Observable::Qplus => "Qplus",
            Observable::Qminus => "Qminus",
            Observable::Occupations => "occupations",
        }
    }

    pub fn needs_two_modes(self) -> bool {
        matches!(self, Observable::S | Observable::Qplus | Observable::Qminus)
    }
}

/// Configuration error with a stable machine-readable code and the JSON
/// path of the offending value.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{code} at {path}: {message}")]
pub struct ConfigError {
    pub code: &'static str,
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            path: path.into(),
            message: message.into(),
        }
    }
}

pub mod codes {
    pub const MALFORMED_JSON: &str = "CONFIG_MALFORMED_JSON";
    pub const SCHEMA: &str = "CONFIG_SCHEMA";
    pub const VERSION: &str = "CONFIG_SCHEMA_VERSION";
    pub const MODES_EMPTY: &str = "CONFIG_MODES_EMPTY";
    pub const WIDTH_NEGATIVE: &str = "CONFIG_WIDTH_NEGATIVE";
    pub const MASS_INVALID: &str = "CONFIG_MASS_INVALID";
    pub const DIMENSION: &str = "CONFIG_DIMENSION";
    pub const MIXING: &str = "CONFIG_MIXING";
    pub const TIME_GRID: &str = "CONFIG_TIME_GRID";
    pub const MIXTURE_WEIGHTS: &str = "CONFIG_MIXTURE_WEIGHTS";
    pub const INITIAL_STATE: &str = "CONFIG_INITIAL_STATE";
    pub const ROUTES: &str = "CONFIG_ROUTES";
    pub const OBSERVABLES: &str = "CONFIG_OBSERVABLES";
    pub const OBSERVABLE_MODES: &str = "CONFIG_OBSERVABLE_MODES";
    pub const ODE_STEP: &str = "CONFIG_ODE_STEP";
    pub const OUTPUT_PATH: &str = "CONFIG_OUTPUT_PATH";
}

/// Parses and validates a scenario document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let code = match inner.classify() {
            serde_json::error::Category::Data => codes::SCHEMA,
            _ => codes::MALFORMED_JSON,
        };
        ConfigError::new(code, path, inner.to_string())
    })?;
    validate(&config)?;
    Ok(config)
}

/// Canonical JSON form, angles reduced into [0, 2π).
pub fn to_json(config: &ScenarioConfig) -> String {
    let mut c = config.clone();
    if let Some(m) = c.mixing.as_mut() {
        if let Ok(r) = m.canonical() {
            *m = r;
        }
    }
    serde_json::to_string(&c).expect("scenario serialises")
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

/// Checks every invariant of the configuration, including building the
/// initial state.
pub fn validate(config: &ScenarioConfig) -> Result<(), ConfigError> {
    use codes::*;
    if config.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::new(
            VERSION,
            "schema_version",
            format!("expected {SCHEMA_VERSION}, got {}", config.schema_version),
        ));
    }
    if config.modes.is_empty() {
        return Err(ConfigError::new(MODES_EMPTY, "modes", "at least one mode is required"));
    }
    for (j, m) in config.modes.iter().enumerate() {
        if !finite(m.mass) {
            return Err(ConfigError::new(MASS_INVALID, format!("modes[{j}].mass"), "mass must be finite"));
        }
        if !finite(m.width) || m.width < 0.0 {
            return Err(ConfigError::new(
                WIDTH_NEGATIVE,
                format!("modes[{j}].width"),
                format!("width must be finite and nonnegative, got {}", m.width),
            ));
        }
    }
    let space = FockSpace::new(config.modes.clone())
        .map_err(|e| ConfigError::new(DIMENSION, "modes", e.to_string()))?;
    if space.dimension() > MAX_DIMENSION {
        return Err(ConfigError::new(
            DIMENSION,
            "modes",
            format!("space dimension {} exceeds {MAX_DIMENSION}", space.dimension()),
        ));
    }

    let mixed = config.mixing.is_some() || config.theta_sweep.is_some();
    if mixed {
        if config.modes.len() != 2 {
            return Err(ConfigError::new(MIXING, "mixing", "mixing requires exactly two modes"));
        }
        let (a, b) = (&space.modes()[0], &space.modes()[1]);
        if a.statistics != b.statistics || a.cutoff != b.cutoff {
            return Err(ConfigError::new(
                MIXING,
                "modes",
                "mixed modes need equal statistics and equal cutoffs",
            ));
        }
        if let Some(m) = &config.mixing {
            MixingParams::new(m.theta, m.phi, m.psi, m.chi)
                .map_err(|_| ConfigError::new(MIXING, "mixing", "angles must be finite"))?;
        }
        if let Some(sweep) = &config.theta_sweep {
            if sweep.is_empty() {
                return Err(ConfigError::new(MIXING, "theta_sweep", "sweep must not be empty"));
            }
            if let Some(i) = sweep.iter().position(|x| !finite(*x)) {
                return Err(ConfigError::new(MIXING, format!("theta_sweep[{i}]"), "angle must be finite"));
            }
        }
    }

    let g = config.time_grid;
    if !(finite(g.start) && finite(g.end) && g.start >= 0.0 && g.end >= g.start) {
        return Err(ConfigError::new(
            TIME_GRID,
            "time_grid",
            format!("need 0 <= start <= end, got start={} end={}", g.start, g.end),
        ));
    }
    if g.count == 0 {
        return Err(ConfigError::new(TIME_GRID, "time_grid.count", "count must be at least 1"));
    }
    if g.count > 1 && g.end == g.start {
        return Err(ConfigError::new(TIME_GRID, "time_grid", "repeated grid points need end > start"));
    }

    if config.routes.is_empty() {
        return Err(ConfigError::new(ROUTES, "routes", "at least one route is required"));
    }
    if config.observables.is_empty() {
        return Err(ConfigError::new(OBSERVABLES, "observables", "at least one observable is required"));
    }
    if let Some(i) = config
        .observables
        .iter()
        .position(|o| o.needs_two_modes() && config.modes.len() != 2)
    {
        return Err(ConfigError::new(
            OBSERVABLE_MODES,
            format!("observables[{i}]"),
            format!("{} requires exactly two modes", config.observables[i].name()),
        ));
    }
    if let Some(i) = config
        .observables
        .iter()
        .position(|o| o.needs_two_modes() && space.modes()[0].statistics == Statistics::Fermion)
    {
        return Err(ConfigError::new(
            OBSERVABLE_MODES,
            format!("observables[{i}]"),
            "flavour observables are defined for bosonic modes",
        ));
    }
    if let Some(h) = config.ode_step {
        if !(finite(h) && h > 0.0) {
            return Err(ConfigError::new(ODE_STEP, "ode_step", "step must be positive"));
        }
    }
    if config.output_path.is_empty() {
        return Err(ConfigError::new(OUTPUT_PATH, "output_path", "output path must not be empty"));
    }

    let rho = build_initial_state(&space, &config.initial_state)?;
    if mixed && space.modes()[0].statistics == Statistics::Boson && rho.support_total() > space.modes()[0].cutoff {
        return Err(ConfigError::new(
            INITIAL_STATE,
            "initial_state",
            "under mixing the total occupation must not exceed the common cutoff",
        ));
    }
    Ok(())
}

/// Builds the configured initial state on `space`.
pub fn build_initial_state(
    space: &Arc<FockSpace>,
    state: &InitialState,
) -> Result<DensityOperator, ConfigError> {
    use codes::*;
    let wrap = |path: &str, e: Error| ConfigError::new(INITIAL_STATE, path, e.to_string());
    match state {
        InitialState::Number(occ) => number_state(space, occ).map_err(|e| wrap("initial_state.number", e)),
        InitialState::Coherent { mode, alpha } => {
            if !(finite(alpha[0]) && finite(alpha[1])) {
                return Err(ConfigError::new(INITIAL_STATE, "initial_state.coherent.alpha", "alpha must be finite"));
            }
            coherent_state(space, *mode, C64::new(alpha[0], alpha[1]))
                .map_err(|e| wrap("initial_state.coherent", e))
        }
        InitialState::Poisson { mode, nbar } => {
            if !(finite(*nbar) && *nbar >= 0.0) {
                return Err(ConfigError::new(INITIAL_STATE, "initial_state.poisson.nbar", "nbar must be nonnegative"));
            }
            poisson_mixture(space, *mode, *nbar).map_err(|e| wrap("initial_state.poisson", e))
        }
        InitialState::Mixture(entries) => {
            if entries.is_empty() {
                return Err(ConfigError::new(MIXTURE_WEIGHTS, "initial_state.mixture", "mixture is empty"));
            }
            if let Some(i) = entries.iter().position(|e| !(finite(e.weight) && e.weight >= 0.0)) {
                return Err(ConfigError::new(
                    MIXTURE_WEIGHTS,
                    format!("initial_state.mixture[{i}].weight"),
                    "weights must be nonnegative",
                ));
            }
            let total: f64 = entries.iter().map(|e| e.weight).sum();
            if (total - 1.0).abs() > WEIGHT_TOLERANCE {
                return Err(ConfigError::new(
                    MIXTURE_WEIGHTS,
                    "initial_state.mixture",
                    format!("weights sum to {total}, expected 1"),
                ));
            }
            let parts: Vec<(f64, Vec<usize>)> = entries.iter().map(|e| (e.weight, e.occupations.clone())).collect();
            number_mixture(space, &parts).map_err(|e| wrap("initial_state.mixture", e))
        }
    }
}
