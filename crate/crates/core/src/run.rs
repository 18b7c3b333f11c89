// SPDX-License-Identifier: Apache-2.0

//! Scenario execution: evolve the initial state along every requested
//! route, then write one CSV per (route, observable) and a key=value
//! manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::channel::{evolve_state, expectation, DecayModel};
use crate::error::Error;
use crate::flavour::{build_flavour_observables, build_mixed_model, mean_width, MixingParams};
use crate::fock::{build_number, build_total_number, DensityOperator, FockSpace, OperatorMatrix};
use crate::heisenberg::{
    evolve_observable, evolve_quadratic, mean_number_trajectory, mean_strangeness_trajectory, HeisenbergMap,
};
use crate::linalg::{c, CMatrix, C64, I};
use crate::master::{default_step, integrate, GeneratorAction};
use crate::scenario::{build_initial_state, to_json, ConfigError, Observable, Route, ScenarioConfig};

/// Largest cross-route deviation accepted for a successful run.
pub const CROSS_ROUTE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub routes: Option<Vec<Route>>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("invariant {name} violated: {detail}")]
    Invariant { name: String, detail: String },
    #[error("i/o failure on {path}: {detail}")]
    Io { path: String, detail: String },
}

impl RunError {
    /// 1 for configuration errors, 2 for failures during evolution or output.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            _ => 2,
        }
    }
}

impl From<Error> for RunError {
    fn from(err: Error) -> Self {
        let name = match &err {
            Error::Invariant { name, .. } => name.to_string(),
            Error::CommutationCertificate { .. } => "commutation_certificate".into(),
            Error::SeriesTailExceeded { .. } | Error::TailWeightExceeded { .. } => "tail_bound".into(),
            _ => "evolution".into(),
        };
        RunError::Invariant {
            name,
            detail: err.to_string(),
        }
    }
}

/// One recorded time series: columns of one observable along one route.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub sweep: Option<usize>,
    pub route: Route,
    pub observable: Observable,
    pub columns: Vec<String>,
    /// `values[i][c]` is column `c` at grid point `i`.
    pub values: Vec<Vec<f64>>,
}

impl Series {
    pub fn file_name(&self) -> String {
        match self.sweep {
            Some(i) => format!("{}_{}_theta{i}.csv", self.route, self.observable.name()),
            None => format!("{}_{}.csv", self.route, self.observable.name()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Computation {
    pub times: Vec<f64>,
    /// Output time column: raw time, or raw time × Γ̄ under mixing.
    pub scaled_times: Vec<f64>,
    pub routes: Vec<Route>,
    pub series: Vec<Series>,
    /// Keyed by `<obs>[.theta<i>].<a>_vs_<b>`.
    pub deviations: BTreeMap<String, f64>,
}

impl Computation {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.values().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub max_cross_route_deviation: f64,
}

struct ObservableSet {
    observable: Observable,
    columns: Vec<String>,
    operators: Vec<OperatorMatrix>,
    weights: Vec<CMatrix>,
}

fn is_mixed(config: &ScenarioConfig) -> bool {
    config.mixing.is_some() || config.theta_sweep.is_some()
}

fn build_model(space: &Arc<FockSpace>, config: &ScenarioConfig, theta: Option<f64>) -> Result<DecayModel, RunError> {
    if !is_mixed(config) {
        return Ok(DecayModel::unmixed(space)?);
    }
    let base = config.mixing.unwrap_or(MixingParams {
        theta: 0.0,
        phi: 0.0,
        psi: 0.0,
        chi: 0.0,
    });
    let params = MixingParams::new(theta.unwrap_or(base.theta), base.phi, base.psi, base.chi)?;
    let m = space.modes();
    Ok(build_mixed_model(
        space,
        params,
        (m[0].mass, m[1].mass),
        (m[0].width, m[1].width),
    )?)
}

fn unit_weight(r: usize, k: usize, l: usize, value: C64) -> CMatrix {
    let mut w = CMatrix::zeros(r, r);
    w[(k, l)] = value;
    w
}

fn observable_set(space: &Arc<FockSpace>, observable: Observable, phi: f64) -> Result<ObservableSet, RunError> {
    let r = space.mode_count();
    let single = |op: OperatorMatrix, w: CMatrix| ObservableSet {
        observable,
        columns: vec![observable.name().to_string()],
        operators: vec![op],
        weights: vec![w],
    };
    let e = (I * phi).exp();
    Ok(match observable {
        Observable::N => single(build_total_number(space), CMatrix::identity(r, r)),
        Observable::S => {
            let f = build_flavour_observables(space, phi)?;
            single(f.strangeness, CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)])))
        }
        Observable::Qplus => {
            let f = build_flavour_observables(space, phi)?;
            single(f.q_plus, unit_weight(2, 0, 1, e) + unit_weight(2, 1, 0, e.conj()))
        }
        Observable::Qminus => {
            let f = build_flavour_observables(space, phi)?;
            single(f.q_minus, unit_weight(2, 0, 1, I * e) + unit_weight(2, 1, 0, -I * e.conj()))
        }
        Observable::Occupations => {
            let mut set = ObservableSet {
                observable,
                columns: Vec::with_capacity(r),
                operators: Vec::with_capacity(r),
                weights: Vec::with_capacity(r),
            };
            for k in 0..r {
                set.columns.push(format!("n{k}"));
                set.operators.push(build_number(space, k)?);
                set.weights.push(unit_weight(r, k, k, c(1.0)));
            }
            set
        }
    })
}

fn schroedinger_series(states: &[DensityOperator], set: &ObservableSet) -> Result<Vec<Vec<f64>>, RunError> {
    states
        .iter()
        .map(|rho| {
            set.operators
                .iter()
                .map(|op| expectation(rho, op).map_err(RunError::from))
                .collect()
        })
        .collect()
}

fn ode_states(model: &DecayModel, rho0: &DensityOperator, times: &[f64], hint: f64) -> Result<Vec<DensityOperator>, RunError> {
    let gen = GeneratorAction::new(model);
    let start = times[0];
    let rho_start = if start > 0.0 {
        let n = (start / hint).ceil().max(1.0);
        integrate(&gen, rho0, &[start], start / n)?.remove(0)
    } else {
        rho0.clone()
    };
    if times.len() == 1 {
        return Ok(vec![rho_start]);
    }
    let dt = (times[times.len() - 1] - start) / (times.len() - 1) as f64;
    let n_sub = (dt / hint).ceil().max(1.0);
    let rel: Vec<f64> = (0..times.len()).map(|i| i as f64 * dt).collect();
    Ok(integrate(&gen, &rho_start, &rel, dt / n_sub)?)
}

fn heisenberg_series(
    model: &DecayModel,
    rho0: &DensityOperator,
    times: &[f64],
    set: &ObservableSet,
) -> Result<Vec<Vec<f64>>, RunError> {
    let two = model.space().mode_count() == 2;
    let direct = match set.observable {
        Observable::N => Some(mean_number_trajectory(model, rho0, times)?),
        Observable::S if two => Some(mean_strangeness_trajectory(model, rho0, times)?),
        _ => None,
    };
    if let Some(v) = direct {
        return Ok(v.into_iter().map(|x| vec![x]).collect());
    }
    times
        .iter()
        .map(|&t| {
            let mut map: Option<HeisenbergMap<'_>> = None;
            set.operators
                .iter()
                .zip(&set.weights)
                .map(|(op, w)| {
                    let evolved = match evolve_quadratic(model, t, w) {
                        Ok(e) => e,
                        Err(Error::ClosedFormUnavailable(_)) => {
                            if map.is_none() {
                                map = Some(HeisenbergMap::new(model, t)?);
                            }
                            evolve_observable(map.as_ref().expect("map built"), op)?
                        }
                        Err(e) => return Err(e.into()),
                    };
                    Ok(expectation(rho0, &evolved)?)
                })
                .collect()
        })
        .collect()
}

fn record_deviations(series: &[Series], out: &mut BTreeMap<String, f64>) {
    for (i, a) in series.iter().enumerate() {
        for b in &series[i + 1..] {
            if a.sweep != b.sweep || a.observable != b.observable || a.route == b.route {
                continue;
            }
            let dev = a
                .values
                .iter()
                .zip(&b.values)
                .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
                .fold(0.0, f64::max);
            let sweep = a.sweep.map(|s| format!(".theta{s}")).unwrap_or_default();
            let (first, second) = if a.route < b.route { (a.route, b.route) } else { (b.route, a.route) };
            out.insert(format!("{}{sweep}.{first}_vs_{second}", a.observable.name()), dev);
        }
    }
}

/// Evaluates every (sweep point, route, observable) series without
/// touching the file system.
pub fn compute(config: &ScenarioConfig, routes: &[Route]) -> Result<Computation, RunError> {
    crate::scenario::validate(config)?;
    let space = FockSpace::new(config.modes.clone())?;
    let rho0 = build_initial_state(&space, &config.initial_state)?;
    let times = config.time_grid.points();
    let mut routes: Vec<Route> = routes.to_vec();
    routes.sort();
    routes.dedup();

    let sweep: Vec<(Option<usize>, Option<f64>)> = match &config.theta_sweep {
        Some(thetas) => thetas.iter().enumerate().map(|(i, t)| (Some(i), Some(*t))).collect(),
        None => vec![(None, None)],
    };
    let mut observables = config.observables.clone();
    observables.sort();
    observables.dedup();

    let mut series = Vec::new();
    let mut scale = 1.0;
    for (index, theta) in sweep {
        let model = build_model(&space, config, theta)?;
        if is_mixed(config) {
            let m = model.decay_modes();
            let g = mean_width((m[0].width, m[1].width));
            if g > 0.0 {
                scale = g;
            }
        }
        let phi = model.mixing().map(|p| p.phi).unwrap_or(0.0);
        let sets = observables
            .iter()
            .map(|&o| observable_set(&space, o, phi))
            .collect::<Result<Vec<_>, _>>()?;
        for &route in &routes {
            let states = match route {
                Route::Kraus => Some(evolve_state(&model, &rho0, &times)?),
                Route::Ode => {
                    let hint = config.ode_step.unwrap_or_else(|| default_step(&model));
                    Some(ode_states(&model, &rho0, &times, hint)?)
                }
                Route::Heisenberg => None,
            };
            for set in &sets {
                let values = match &states {
                    Some(states) => schroedinger_series(states, set)?,
                    None => heisenberg_series(&model, &rho0, &times, set)?,
                };
                series.push(Series {
                    sweep: index,
                    route,
                    observable: set.observable,
                    columns: set.columns.clone(),
                    values,
                });
            }
        }
    }
    let mut deviations = BTreeMap::new();
    record_deviations(&series, &mut deviations);
    let scaled_times = times.iter().map(|t| t * scale).collect();
    Ok(Computation {
        times,
        scaled_times,
        routes,
        series,
        deviations,
    })
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text: header `t,<columns>,route,t_raw`, one row per grid point.
pub fn render_csv(comp: &Computation, s: &Series) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "t,{},route,t_raw", s.columns.join(","));
    for (i, row) in s.values.iter().enumerate() {
        out.push_str(&fmt_num(comp.scaled_times[i]));
        for v in row {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        let _ = writeln!(out, ",{},{}", s.route, fmt_num(comp.times[i]));
    }
    out
}

/// Manifest body without the timestamp line.
pub fn render_manifest(config: &ScenarioConfig, comp: &Computation, seed: Option<u64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "schema_version={}", config.schema_version);
    let _ = writeln!(out, "library_version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "config={}", to_json(config));
    let names: Vec<&str> = comp.routes.iter().map(|r| r.name()).collect();
    let _ = writeln!(out, "routes={}", names.join(","));
    if let Some(seed) = seed {
        let _ = writeln!(out, "seed={seed}");
    }
    let files: Vec<String> = comp.series.iter().map(Series::file_name).collect();
    let _ = writeln!(out, "files={}", files.join(","));
    let _ = writeln!(out, "time_unit={}", if is_mixed(config) { "mean_lifetime" } else { "raw" });
    for (key, dev) in &comp.deviations {
        let _ = writeln!(out, "max_deviation.{key}={}", fmt_num(*dev));
    }
    let _ = writeln!(out, "max_cross_route_deviation={}", fmt_num(comp.max_deviation()));
    out
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|e| RunError::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

/// Runs a validated scenario and writes its outputs.
pub fn run_scenario(config: &ScenarioConfig, opts: &RunOptions) -> Result<RunReport, RunError> {
    let routes = opts.routes.clone().unwrap_or_else(|| config.routes.clone());
    let comp = compute(config, &routes)?;
    let dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_path));
    fs::create_dir_all(&dir).map_err(|e| RunError::Io {
        path: dir.display().to_string(),
        detail: e.to_string(),
    })?;
    let mut files = Vec::new();
    for s in &comp.series {
        let path = dir.join(s.file_name());
        write(&path, &render_csv(&comp, s))?;
        files.push(path);
    }
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = format!("{}timestamp={stamp}\n", render_manifest(config, &comp, opts.seed));
    let path = dir.join("manifest.txt");
    write(&path, &manifest)?;
    files.push(path);

    let max = comp.max_deviation();
    if max > CROSS_ROUTE_TOLERANCE {
        return Err(RunError::Invariant {
            name: "cross_route_agreement".into(),
            detail: format!("max deviation {max:e} exceeds {CROSS_ROUTE_TOLERANCE:e}"),
        });
    }
    Ok(RunReport {
        out_dir: dir,
        files,
        max_cross_route_deviation: max,
    })
}
