// SPDX-License-Identifier: Apache-2.0

//! Observable-side evolution Λ_t Ω = Σ_k E_k†(t) Ω E_k(t) and its closed
//! forms for ladder operators, projectors and the two-flavour observables.
//!
//! In the truncated basis ⟨n|Λ_tΩ|n'⟩ only involves E_k|n⟩, which vanishes
//! once k exceeds the total occupation of |n⟩. The series is therefore
//! finite on any reporting subspace of bounded occupation; a shorter series
//! is allowed when its binomial tail is below tolerance.

use std::sync::Arc;

use crate::channel::{build_kraus, check_times, decay_amplitude, survival_amplitude, DecayModel, KrausSet};
use crate::error::{Error, Result};
use crate::flavour::{build_flavour_observables, mass_difference, mean_width};
use crate::fock::{build_annihilator, build_number, DensityOperator, FockSpace, OperatorMatrix, Statistics};
use crate::linalg::{c, hermiticity_defect, max_abs, CMatrix, C64, I};

pub const SERIES_TAIL_TOLERANCE: f64 = 1e-10;

/// Below this Γt the projector closed form switches to the form without
/// the (e^{Γt} − 1)^{−n} prefactor.
pub const PROJECTOR_SMALL_TIME: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct HeisenbergMap<'a> {
    model: &'a DecayModel,
    time: f64,
    kraus: KrausSet,
    reporting: Vec<usize>,
    tail_probability: f64,
}

impl<'a> HeisenbergMap<'a> {
    /// Full-length series, exact on the model's exact subspace.
    pub fn new(model: &'a DecayModel, t: f64) -> Result<Self> {
        let reporting = model.exact_indices();
        let space = model.space();
        let k_series = reporting
            .iter()
            .map(|&i| space.total_occupation(i))
            .max()
            .unwrap_or(0);
        Ok(Self {
            kraus: build_kraus(model, t, k_series)?,
            model,
            time: t,
            reporting,
            tail_probability: 0.0,
        })
    }

    /// Series truncated after `k_series` decays, reported on exact states
    /// with total occupation ≤ `reporting_max_total`.
    pub fn with_series_cutoff(
        model: &'a DecayModel,
        t: f64,
        k_series: usize,
        reporting_max_total: usize,
    ) -> Result<Self> {
        let space = model.space();
        let reporting: Vec<usize> = model
            .exact_indices()
            .into_iter()
            .filter(|&i| space.total_occupation(i) <= reporting_max_total)
            .collect();
        let n = reporting
            .iter()
            .map(|&i| space.total_occupation(i))
            .max()
            .unwrap_or(0);
        let p = decay_amplitude(model.max_width(), t).powi(2);
        Ok(Self {
            kraus: build_kraus(model, t, k_series)?,
            model,
            time: t,
            reporting,
            tail_probability: binomial_upper_tail(n, p, k_series),
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn model(&self) -> &DecayModel {
        self.model
    }

    pub fn k_series(&self) -> usize {
        self.kraus.k_max()
    }

    pub fn kraus(&self) -> &KrausSet {
        &self.kraus
    }

    /// Basis indices on which the evolved matrix elements are reported.
    pub fn reporting(&self) -> &[usize] {
        &self.reporting
    }

    /// Upper bound on the probability of more than `k_series` decays from
    /// any reporting state.
    pub fn tail_probability(&self) -> f64 {
        self.tail_probability
    }
}

/// P(X > k) for X ~ Binomial(n, p).
fn binomial_upper_tail(n: usize, p: f64, k: usize) -> f64 {
    if k >= n {
        return 0.0;
    }
    (k + 1..=n)
        .map(|j| binomial(n, j) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32))
        .sum()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Σ_k E_k† X E_k for an arbitrary operator X.
pub fn apply_dual(map: &HeisenbergMap<'_>, op: &OperatorMatrix) -> Result<OperatorMatrix> {
    if op.space() != map.model.space() {
        return Err(Error::SpaceMismatch);
    }
    let bound = map.tail_probability * op.matrix().norm();
    if bound > SERIES_TAIL_TOLERANCE {
        return Err(Error::SeriesTailExceeded {
            bound,
            tolerance: SERIES_TAIL_TOLERANCE,
        });
    }
    let d = op.space().dimension();
    let mut out = CMatrix::zeros(d, d);
    for e in map.kraus.operators() {
        let m = e.matrix.matrix();
        out += m.adjoint() * op.matrix() * m;
    }
    Ok(op.with_matrix(out))
}

/// Λ_t Ω for a Hermitian observable.
pub fn evolve_observable(map: &HeisenbergMap<'_>, obs: &OperatorMatrix) -> Result<OperatorMatrix> {
    let h = hermiticity_defect(obs.matrix());
    if h > 1e-12 * (1.0 + max_abs(obs.matrix())) {
        return Err(Error::NonHermitian(h));
    }
    apply_dual(map, obs)
}

/// Λ_t Π̂_n for a single bosonic mode without mixing:
/// (e^{Γt} − 1)^{−n} Σ_{k≥n} C(k, n) (1 − e^{−Γt})^k Π̂_k.
pub fn projector_evolution(model: &DecayModel, n: usize, t: f64) -> Result<OperatorMatrix> {
    let space = model.space();
    if space.mode_count() != 1 || model.mixing().is_some() || space.modes()[0].is_fermion() {
        return Err(Error::ClosedFormUnavailable(
            "projector form needs one unmixed bosonic mode".into(),
        ));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let width = model.decay_modes()[0].width;
    let x = width * t;
    let p = decay_amplitude(width, t).powi(2);
    let cutoff = space.modes()[0].cutoff;
    let d = space.dimension();
    let mut m = CMatrix::zeros(d, d);
    for k in n..=cutoff {
        let coef = if x < PROJECTOR_SMALL_TIME {
            binomial(k, n) * survival_amplitude(width, t).powi(2 * n as i32) * p.powi((k - n) as i32)
        } else {
            binomial(k, n) * p.powi(k as i32) / x.exp_m1().powi(n as i32)
        };
        m[(k, k)] = c(coef);
    }
    OperatorMatrix::new(space.clone(), m)
}

fn require_closed_form(model: &DecayModel) -> Result<&CMatrix> {
    let v = model
        .mode_transform()
        .ok_or_else(|| Error::ClosedFormUnavailable("decay channels are not linear in the flavour modes".into()))?;
    let space = model.space();
    if space.mode_count() > 1 && space.modes().iter().any(|m| m.statistics == Statistics::Fermion) {
        return Err(Error::ClosedFormUnavailable(
            "ladder closed form needs bosonic modes".into(),
        ));
    }
    Ok(v)
}

/// Coefficients A with Λ_t â_k = Σ_l A_kl â_l.
fn ladder_coefficients(model: &DecayModel, v: &CMatrix, t: f64) -> CMatrix {
    let r = v.nrows();
    let phases: Vec<C64> = model
        .decay_modes()
        .iter()
        .map(|m| (-I * m.mass * t).exp() * survival_amplitude(m.width, t))
        .collect();
    CMatrix::from_fn(r, r, |k, l| {
        (0..r).map(|j| v[(j, k)] * v[(j, l)].conj() * phases[j]).sum()
    })
}

/// (Λ_t â_k, Λ_t â_k†) for every flavour mode k.
pub fn evolve_ladder(model: &DecayModel, t: f64) -> Result<Vec<(OperatorMatrix, OperatorMatrix)>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let v = require_closed_form(model)?;
    let space = model.space();
    let a: Vec<CMatrix> = (0..space.mode_count())
        .map(|k| build_annihilator(space, k).map(OperatorMatrix::into_matrix))
        .collect::<Result<_>>()?;
    let coef = ladder_coefficients(model, v, t);
    let d = space.dimension();
    (0..a.len())
        .map(|k| {
            let mut m = CMatrix::zeros(d, d);
            for (l, al) in a.iter().enumerate() {
                m += al * coef[(k, l)];
            }
            let down = OperatorMatrix::new(space.clone(), m)?;
            let up = down.dagger();
            Ok((down, up))
        })
        .collect()
}

/// Λ_t Σ_kl W_kl â_k†â_l = Σ_kl W_kl (Λ_t â_k)†(Λ_t â_l) for bosonic
/// models with linear decay channels.
pub fn evolve_quadratic(model: &DecayModel, t: f64, weights: &CMatrix) -> Result<OperatorMatrix> {
    let ladders = evolve_ladder(model, t)?;
    let r = ladders.len();
    if weights.nrows() != r || weights.ncols() != r {
        return Err(Error::DimensionMismatch {
            rows: weights.nrows(),
            cols: weights.ncols(),
            expected: r,
        });
    }
    let d = model.space().dimension();
    let mut out = CMatrix::zeros(d, d);
    for k in 0..r {
        for l in 0..r {
            if weights[(k, l)] != C64::new(0.0, 0.0) {
                out += ladders[k].1.matrix() * ladders[l].0.matrix() * weights[(k, l)];
            }
        }
    }
    OperatorMatrix::new(model.space().clone(), out)
}

type Pair = (f64, f64);

/// Parameters of a bosonic two-flavour model: (θ, φ, masses, widths).
fn two_flavour_parameters(model: &DecayModel) -> Result<(f64, f64, Pair, Pair)> {
    let space = model.space();
    if space.mode_count() != 2 {
        return Err(Error::NotTwoFlavours(space.mode_count()));
    }
    require_closed_form(model)?;
    let (theta, phi) = match model.mixing() {
        Some(p) => (p.theta, p.phi),
        None => (0.0, 0.0),
    };
    let m = model.decay_modes();
    Ok((theta, phi, (m[0].mass, m[1].mass), (m[0].width, m[1].width)))
}

struct TwoFlavourWeights {
    plus: f64,
    minus: f64,
    decay_mean: f64,
    cos: f64,
    sin: f64,
    phi: f64,
}

fn two_flavour_weights(model: &DecayModel, t: f64) -> Result<TwoFlavourWeights> {
    let (theta, phi, _, widths) = two_flavour_parameters(model)?;
    let e1 = survival_amplitude(widths.0, t).powi(2);
    let e2 = survival_amplitude(widths.1, t).powi(2);
    Ok(TwoFlavourWeights {
        plus: 0.5 * (e1 + e2),
        minus: 0.5 * (e1 - e2),
        decay_mean: survival_amplitude(mean_width(widths), t).powi(2),
        cos: theta.cos(),
        sin: theta.sin(),
        phi,
    })
}

/// Λ_t N̂ = ½(e^{−Γ₁t} + e^{−Γ₂t}) N̂ + ½(e^{−Γ₁t} − e^{−Γ₂t}) [Ŝ cos θ + Q̂₊ sin θ].
pub fn flavour_number_evolution(model: &DecayModel, t: f64) -> Result<OperatorMatrix> {
    let w = two_flavour_weights(model, t)?;
    let obs = build_flavour_observables(model.space(), w.phi)?;
    let m = obs.number.matrix() * c(w.plus)
        + (obs.strangeness.matrix() * c(w.cos) + obs.q_plus.matrix() * c(w.sin)) * c(w.minus);
    OperatorMatrix::new(model.space().clone(), m)
}

/// Λ_t Ŝ for the two-flavour model, with Γ̄ = (Γ₁ + Γ₂)/2 and
/// Δm = m₂ − m₁:
///
///   ½(e^{−Γ₁t} − e^{−Γ₂t}) N̂ cos θ + e^{−Γ̄t} sin(Δm t) Q̂₋ sin θ
///   + [½(e^{−Γ₁t} + e^{−Γ₂t}) cos²θ + e^{−Γ̄t} cos(Δm t) sin²θ] Ŝ
///   + [½(e^{−Γ₁t} + e^{−Γ₂t}) − e^{−Γ̄t} cos(Δm t)] Q̂₊ sin θ cos θ
pub fn flavour_strangeness_evolution(model: &DecayModel, t: f64) -> Result<OperatorMatrix> {
    let (_, _, masses, _) = two_flavour_parameters(model)?;
    let w = two_flavour_weights(model, t)?;
    let obs = build_flavour_observables(model.space(), w.phi)?;
    let dm = mass_difference(masses) * t;
    let osc_cos = w.decay_mean * dm.cos();
    let osc_sin = w.decay_mean * dm.sin();
    let m = obs.number.matrix() * c(w.minus * w.cos)
        + obs.q_minus.matrix() * c(osc_sin * w.sin)
        + obs.strangeness.matrix() * c(w.plus * w.cos * w.cos + osc_cos * w.sin * w.sin)
        + obs.q_plus.matrix() * c((w.plus - osc_cos) * w.sin * w.cos);
    OperatorMatrix::new(model.space().clone(), m)
}

fn check_state(model: &DecayModel, rho0: &DensityOperator) -> Result<()> {
    if rho0.space() != model.space() {
        return Err(Error::SpaceMismatch);
    }
    if !rho0.supported_within(model.exact_mask()) {
        return Err(Error::SupportOutsideExactSubspace);
    }
    Ok(())
}

fn trajectory(
    model: &DecayModel,
    rho0: &DensityOperator,
    times: &[f64],
    evolve: impl Fn(f64) -> Result<OperatorMatrix>,
) -> Result<Vec<f64>> {
    check_times(times)?;
    check_state(model, rho0)?;
    times
        .iter()
        .map(|&t| crate::channel::expectation(rho0, &evolve(t)?))
        .collect()
}

fn series_observable(model: &DecayModel, t: f64, obs: &OperatorMatrix) -> Result<OperatorMatrix> {
    evolve_observable(&HeisenbergMap::new(model, t)?, obs)
}

/// ⟨N(t)⟩ = tr[ρ₀ Λ_t N̂] with N̂ the total number operator. Closed forms
/// are used when available, the Kraus series otherwise.
pub fn mean_number_trajectory(model: &DecayModel, rho0: &DensityOperator, times: &[f64]) -> Result<Vec<f64>> {
    let space: &Arc<FockSpace> = model.space();
    let r = space.mode_count();
    let closed = require_closed_form(model).is_ok();
    trajectory(model, rho0, times, |t| {
        if closed && r == 2 {
            flavour_number_evolution(model, t)
        } else if closed {
            evolve_quadratic(model, t, &CMatrix::identity(r, r))
        } else {
            let mut n = CMatrix::zeros(space.dimension(), space.dimension());
            for j in 0..r {
                n += build_number(space, j)?.matrix();
            }
            series_observable(model, t, &OperatorMatrix::new(space.clone(), n)?)
        }
    })
}

/// ⟨S(t)⟩ = tr[ρ₀ Λ_t Ŝ] for a two-flavour model.
pub fn mean_strangeness_trajectory(
    model: &DecayModel,
    rho0: &DensityOperator,
    times: &[f64],
) -> Result<Vec<f64>> {
    let space = model.space();
    if space.mode_count() != 2 {
        return Err(Error::NotTwoFlavours(space.mode_count()));
    }
    let closed = require_closed_form(model).is_ok();
    trajectory(model, rho0, times, |t| {
        if closed {
            flavour_strangeness_evolution(model, t)
        } else {
            let s = build_flavour_observables(space, 0.0)?.strangeness;
            series_observable(model, t, &s)
        }
    })
}
