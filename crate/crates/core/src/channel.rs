// SPDX-License-Identifier: Apache-2.0

//! Decay models and their exact Kraus-representation evolution.
//!
//! A model carries the Hamiltonian Ĥ, one ladder operator ĉ_j per decay
//! channel with mass m_j and width Γ_j, the Lindblad operators
//! L̂_j = √Γ_j ĉ_j, K̂ = −½ Σ L̂_j†L̂_j and M̂ = Ĥ + iK̂. When
//! [M̂, ĉ_j] = −(m_j − iΓ_j/2) ĉ_j holds for every channel, the evolution at
//! time t has one Kraus operator per decay count vector (k_1, …, k_r):
//!
//!   E_k(t) = e^{−iM̂t} ∏_j (√(1 − e^{−Γ_j t}) ĉ_j)^{k_j} / √(k_j!)
//!
//! with k_j ∈ {0, 1} for fermionic channels.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flavour::MixingParams;
use crate::fock::{build_annihilator, build_number, DensityOperator, FockSpace, OperatorMatrix, Statistics};
use crate::linalg::{c, expm, hermitian_norm, hermiticity_defect, max_abs, restrict, CMatrix, C64, I};

/// Tolerance for [M̂, ĉ_j] + (m_j − iΓ_j/2) ĉ_j on the exact subspace.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-10;
/// Tolerance for Σ E_k†E_k = I on the exact subspace.
pub const COMPLETENESS_TOLERANCE: f64 = 1e-10;
/// Above this value of Γt, 1 − e^{−Γt} is taken as exactly 1.
pub const SATURATION_EXPONENT: f64 = 700.0;

/// One decay channel: ladder operator ĉ_j with its complex mass.
#[derive(Clone, Debug)]
pub struct DecayMode {
    pub ladder: OperatorMatrix,
    pub mass: f64,
    pub width: f64,
    pub statistics: Statistics,
}

#[derive(Clone, Debug)]
pub struct DecayModel {
    space: Arc<FockSpace>,
    hamiltonian: OperatorMatrix,
    modes: Vec<DecayMode>,
    lindblads: Vec<OperatorMatrix>,
    k_operator: OperatorMatrix,
    m_operator: OperatorMatrix,
    mixing: Option<MixingParams>,
    // r×r matrix V with ĉ_j = Σ_k conj(V_jk) â_k, when the channels are
    // linear combinations of the flavour annihilators.
    mode_transform: Option<CMatrix>,
    exact: Vec<bool>,
}

impl DecayModel {
    /// General constructor. `exact_max_total` bounds the total occupation
    /// of the subspace on which the truncated operators are exact; `None`
    /// means the whole space.
    pub fn new(
        space: Arc<FockSpace>,
        hamiltonian: OperatorMatrix,
        modes: Vec<DecayMode>,
        exact_max_total: Option<usize>,
    ) -> Result<Self> {
        if hamiltonian.space() != &space || modes.iter().any(|m| m.ladder.space() != &space) {
            return Err(Error::SpaceMismatch);
        }
        let h_defect = hamiltonian.hermiticity_defect();
        if h_defect > 1e-12 {
            return Err(Error::NonHermitian(h_defect));
        }
        for (j, m) in modes.iter().enumerate() {
            if !(m.width.is_finite() && m.width >= 0.0) || !m.mass.is_finite() {
                return Err(Error::InvalidMode {
                    mode: j,
                    reason: format!("mass {} / width {} not admissible", m.mass, m.width),
                });
            }
        }
        let d = space.dimension();
        let lindblads: Vec<OperatorMatrix> = modes
            .iter()
            .map(|m| m.ladder.with_matrix(m.ladder.matrix() * c(m.width.sqrt())))
            .collect();
        let mut k = CMatrix::zeros(d, d);
        for l in &lindblads {
            k -= l.matrix().adjoint() * l.matrix() * c(0.5);
        }
        let m_op = hamiltonian.matrix() + &k * I;
        let exact = match exact_max_total {
            Some(bound) => (0..d).map(|i| space.total_occupation(i) <= bound).collect(),
            None => vec![true; d],
        };
        let model = Self {
            k_operator: OperatorMatrix::new(space.clone(), k)?,
            m_operator: OperatorMatrix::new(space.clone(), m_op)?,
            space,
            hamiltonian,
            modes,
            lindblads,
            mixing: None,
            mode_transform: None,
            exact,
        };
        model.check_certificate()?;
        Ok(model)
    }

    /// Independent species: Ĥ = Σ m_j N̂_j, L̂_j = √Γ_j â_j.
    pub fn unmixed(space: &Arc<FockSpace>) -> Result<Self> {
        let d = space.dimension();
        let mut h = CMatrix::zeros(d, d);
        let mut modes = Vec::with_capacity(space.mode_count());
        for (j, spec) in space.modes().iter().enumerate() {
            h += build_number(space, j)?.matrix() * c(spec.mass);
            modes.push(DecayMode {
                ladder: build_annihilator(space, j)?,
                mass: spec.mass,
                width: spec.width,
                statistics: spec.statistics,
            });
        }
        let hamiltonian = OperatorMatrix::new(space.clone(), h)?;
        let r = space.mode_count();
        let mut model = Self::new(space.clone(), hamiltonian, modes, None)?;
        model.mode_transform = Some(CMatrix::identity(r, r));
        Ok(model)
    }

    pub(crate) fn set_mixing(&mut self, params: MixingParams, transform: CMatrix) {
        self.mixing = Some(params);
        self.mode_transform = Some(transform);
    }

    fn check_certificate(&self) -> Result<()> {
        let m = self.m_operator.matrix();
        let cols: Vec<usize> = self.exact_indices();
        for (j, mode) in self.modes.iter().enumerate() {
            let cj = mode.ladder.matrix();
            let mu = C64::new(mode.mass, -0.5 * mode.width);
            let defect_matrix = m * cj - cj * m + cj * mu;
            let mut defect: f64 = 0.0;
            for &col in &cols {
                for row in 0..defect_matrix.nrows() {
                    defect = defect.max(defect_matrix[(row, col)].norm());
                }
            }
            if defect > CERTIFICATE_TOLERANCE {
                return Err(Error::CommutationCertificate { mode: j, defect });
            }
        }
        Ok(())
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn decay_modes(&self) -> &[DecayMode] {
        &self.modes
    }

    pub fn lindblads(&self) -> &[OperatorMatrix] {
        &self.lindblads
    }

    pub fn k_operator(&self) -> &OperatorMatrix {
        &self.k_operator
    }

    pub fn m_operator(&self) -> &OperatorMatrix {
        &self.m_operator
    }

    pub fn mixing(&self) -> Option<&MixingParams> {
        self.mixing.as_ref()
    }

    pub fn mode_transform(&self) -> Option<&CMatrix> {
        self.mode_transform.as_ref()
    }

    /// Mask of basis states on which the truncated model is exact.
    pub fn exact_mask(&self) -> &[bool] {
        &self.exact
    }

    pub fn exact_indices(&self) -> Vec<usize> {
        (0..self.exact.len()).filter(|&i| self.exact[i]).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.modes.iter().map(|m| m.width).fold(0.0, f64::max)
    }

    pub fn min_width(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.width)
            .fold(f64::INFINITY, f64::min)
    }

    /// e^{−iM̂t}.
    pub fn propagator(&self, t: f64) -> CMatrix {
        expm(&(self.m_operator.matrix() * (-I * t)))
    }
}

/// √(1 − e^{−Γt}), saturated to 1 for very large Γt.
pub fn decay_amplitude(width: f64, t: f64) -> f64 {
    let x = width * t;
    if x > SATURATION_EXPONENT {
        1.0
    } else {
        (-(-x).exp_m1()).sqrt()
    }
}

/// e^{−Γt/2}, flushed to 0 for very large Γt.
pub fn survival_amplitude(width: f64, t: f64) -> f64 {
    let x = width * t;
    if x > SATURATION_EXPONENT {
        0.0
    } else {
        (-0.5 * x).exp()
    }
}

#[derive(Clone, Debug)]
pub struct KrausOperator {
    /// Number of quanta removed from each decay channel.
    pub partition: Vec<usize>,
    pub matrix: OperatorMatrix,
}

impl KrausOperator {
    pub fn order(&self) -> usize {
        self.partition.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct KrausSet {
    time: f64,
    k_max: usize,
    operators: Vec<KrausOperator>,
    completeness_defect: f64,
    exact: Vec<bool>,
}

impl KrausSet {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn operators(&self) -> &[KrausOperator] {
        &self.operators
    }

    /// Spectral norm of Σ E†E − I on the exact states with total
    /// occupation ≤ k_max.
    pub fn completeness_defect(&self) -> f64 {
        self.completeness_defect
    }

    /// Operators with the given total order Σ k_j.
    pub fn of_order(&self, k: usize) -> impl Iterator<Item = &KrausOperator> {
        self.operators.iter().filter(move |e| e.order() == k)
    }

    pub(crate) fn exact_mask(&self) -> &[bool] {
        &self.exact
    }
}

/// Decay count vectors (k_1, …, k_r) with k_j < radix_j and Σ k_j ≤ k_max,
/// ordered by total and then by a multi-radix counter (last channel
/// fastest).
fn partitions(radix: &[usize], k_max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if radix.contains(&0) {
        return out;
    }
    let mut counter = vec![0usize; radix.len()];
    loop {
        if counter.iter().sum::<usize>() <= k_max {
            out.push(counter.clone());
        }
        let mut j = radix.len();
        loop {
            if j == 0 {
                out.sort_by_key(|p| p.iter().sum::<usize>());
                return out;
            }
            j -= 1;
            counter[j] += 1;
            if counter[j] < radix[j] {
                break;
            }
            counter[j] = 0;
        }
    }
}

/// Kraus family at time `t` covering states with total occupation up to
/// `k_max`.
pub fn build_kraus(model: &DecayModel, t: f64, k_max: usize) -> Result<KrausSet> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let space = model.space();
    let d = space.dimension();
    let propagator = model.propagator(t);

    // Scaled powers (s_j ĉ_j)^k / √k!, stopping once they vanish.
    let mut powers: Vec<Vec<CMatrix>> = Vec::with_capacity(model.modes.len());
    let mut radix = Vec::with_capacity(model.modes.len());
    for mode in &model.modes {
        let s = decay_amplitude(mode.width, t);
        let cap = match mode.statistics {
            Statistics::Fermion => k_max.min(1),
            Statistics::Boson => k_max,
        };
        let mut list = vec![CMatrix::identity(d, d)];
        let mut raw = CMatrix::identity(d, d);
        let mut scale = 1.0;
        for k in 1..=cap {
            raw *= mode.ladder.matrix();
            if raw.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                break;
            }
            scale *= s / (k as f64).sqrt();
            list.push(&raw * c(scale));
        }
        radix.push(list.len());
        powers.push(list);
    }

    let mut operators = Vec::new();
    for partition in partitions(&radix, k_max) {
        let mut e = propagator.clone();
        for (j, &kj) in partition.iter().enumerate() {
            if kj > 0 {
                e *= &powers[j][kj];
            }
        }
        operators.push(KrausOperator {
            partition,
            matrix: OperatorMatrix::new(space.clone(), e)?,
        });
    }

    let mut sum = CMatrix::zeros(d, d);
    for e in &operators {
        let m = e.matrix.matrix();
        sum += m.adjoint() * m;
    }
    sum -= CMatrix::identity(d, d);
    let covered: Vec<usize> = model
        .exact_indices()
        .into_iter()
        .filter(|&i| space.total_occupation(i) <= k_max)
        .collect();
    let completeness_defect = hermitian_norm(&restrict(&sum, &covered));
    if completeness_defect > COMPLETENESS_TOLERANCE {
        return Err(Error::Invariant {
            name: "kraus_completeness",
            detail: format!("defect {completeness_defect:e} at t = {t}"),
        });
    }

    Ok(KrausSet {
        time: t,
        k_max,
        operators,
        completeness_defect,
        exact: model.exact.clone(),
    })
}

/// Σ_k E_k ρ E_k†.
pub fn apply_channel(kraus: &KrausSet, rho: &DensityOperator) -> Result<DensityOperator> {
    let space = rho.space();
    if let Some(first) = kraus.operators.first() {
        if first.matrix.space() != space {
            return Err(Error::SpaceMismatch);
        }
    }
    if !rho.supported_within(kraus.exact_mask()) {
        return Err(Error::SupportOutsideExactSubspace);
    }
    let support = rho.support_total();
    if support > kraus.k_max {
        return Err(Error::SupportExceedsKraus {
            support,
            k_max: kraus.k_max,
        });
    }
    let d = space.dimension();
    let mut out = CMatrix::zeros(d, d);
    for e in &kraus.operators {
        let m = e.matrix.matrix();
        out += m * rho.matrix() * m.adjoint();
    }
    DensityOperator::new(space.clone(), out).map_err(|err| match err {
        Error::Invariant { name, detail } => Error::Invariant {
            name,
            detail: format!("{detail} after channel at t = {}", kraus.time),
        },
        other => other,
    })
}

/// Evolves `rho0` to each time in `times`, building the Kraus family per
/// point with k_max equal to the state's occupation support.
pub fn evolve_state(
    model: &DecayModel,
    rho0: &DensityOperator,
    times: &[f64],
) -> Result<Vec<DensityOperator>> {
    check_times(times)?;
    if rho0.space() != model.space() {
        return Err(Error::SpaceMismatch);
    }
    let k_max = rho0.support_total();
    times
        .iter()
        .map(|&t| {
            let kraus = build_kraus(model, t, k_max)?;
            apply_channel(&kraus, rho0)
        })
        .collect()
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::UnsortedTimes);
    }
    Ok(())
}

/// tr(ρΩ) for a Hermitian observable.
pub fn expectation(rho: &DensityOperator, obs: &OperatorMatrix) -> Result<f64> {
    if rho.space() != obs.space() {
        return Err(Error::SpaceMismatch);
    }
    let scale = 1.0 + max_abs(obs.matrix());
    let h = hermiticity_defect(obs.matrix());
    if h > 1e-12 * scale {
        return Err(Error::NonHermitian(h));
    }
    let v = (rho.matrix() * obs.matrix()).trace();
    if v.im.abs() > 1e-12 * scale {
        return Err(Error::ImaginaryExpectation(v.im));
    }
    Ok(v.re)
}

/// Diagonal of ρ keyed by occupation tuple.
pub fn occupation_distribution(rho: &DensityOperator) -> BTreeMap<Vec<usize>, f64> {
    let space = rho.space();
    (0..space.dimension())
        .map(|i| (space.occupations(i), rho.matrix()[(i, i)].re))
        .collect()
}
