// SPDX-License-Identifier: Apache-2.0

//! Two-flavour mixing: propagation modes ĉ_1, ĉ_2 obtained from the
//! flavour modes â_1, â_2 by a unitary rotation, and the flavour
//! observables N̂, Ŝ, Q̂₊, Q̂₋.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::{DecayMode, DecayModel};
use crate::error::{Error, Result};
use crate::fock::{build_annihilator, build_number, FockSpace, OperatorMatrix};
use crate::linalg::{c, max_abs, CMatrix, I};

/// Angles of the mixing rotation; θ is the mixing angle, χ a global phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingParams {
    pub theta: f64,
    pub phi: f64,
    #[serde(default)]
    pub psi: f64,
    #[serde(default)]
    pub chi: f64,
}

impl MixingParams {
    /// Angles are reduced into [0, 2π).
    pub fn new(theta: f64, phi: f64, psi: f64, chi: f64) -> Result<Self> {
        let all = [theta, phi, psi, chi];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invariant {
                name: "mixing_angles_finite",
                detail: format!("{all:?}"),
            });
        }
        Ok(Self {
            theta: theta.rem_euclid(TAU),
            phi: phi.rem_euclid(TAU),
            psi: psi.rem_euclid(TAU),
            chi: chi.rem_euclid(TAU),
        })
    }

    pub fn canonical(&self) -> Result<Self> {
        Self::new(self.theta, self.phi, self.psi, self.chi)
    }

    /// 2×2 matrix V with ĉ_j† = Σ_k V_jk â_k†.
    pub fn mixing_matrix(&self) -> CMatrix {
        let (s, co) = (0.5 * self.theta).sin_cos();
        let ph = |x: f64| (I * x).exp();
        let g = ph(self.chi);
        let sum = 0.5 * (self.phi + self.psi);
        let diff = 0.5 * (self.phi - self.psi);
        CMatrix::from_row_slice(
            2,
            2,
            &[
                g * ph(sum) * co,
                g * ph(-diff) * s,
                -g * ph(diff) * s,
                g * ph(-sum) * co,
            ],
        )
    }
}

/// max |V†V − I| elementwise.
pub fn unitarity_defect(v: &CMatrix) -> f64 {
    let n = v.nrows();
    max_abs(&(v.adjoint() * v - CMatrix::identity(n, n)))
}

fn require_two_modes(space: &FockSpace) -> Result<()> {
    if space.mode_count() != 2 {
        return Err(Error::NotTwoFlavours(space.mode_count()));
    }
    Ok(())
}

/// Two-flavour model with Ĥ = Σ m_j ĉ_j†ĉ_j and L̂_j = √Γ_j ĉ_j.
///
/// The truncated operators are exact only on states whose total
/// occupation does not exceed the common cutoff; the model records that
/// subspace. Fermionic flavours are accepted but less exercised.
pub fn build_mixed_model(
    space: &Arc<FockSpace>,
    params: MixingParams,
    masses: (f64, f64),
    widths: (f64, f64),
) -> Result<DecayModel> {
    require_two_modes(space)?;
    let (m0, m1) = (&space.modes()[0], &space.modes()[1]);
    if m0.statistics != m1.statistics || m0.cutoff != m1.cutoff {
        return Err(Error::IncompatibleMixing);
    }
    let params = params.canonical()?;
    let v = params.mixing_matrix();
    let defect = unitarity_defect(&v);
    if defect > 1e-14 {
        return Err(Error::Invariant {
            name: "mixing_unitary",
            detail: format!("defect {defect:e}"),
        });
    }

    let a = [build_annihilator(space, 0)?, build_annihilator(space, 1)?];
    let mass = [masses.0, masses.1];
    let width = [widths.0, widths.1];
    let d = space.dimension();
    let mut h = CMatrix::zeros(d, d);
    let mut modes = Vec::with_capacity(2);
    for j in 0..2 {
        let cj = a[0].matrix() * v[(j, 0)].conj() + a[1].matrix() * v[(j, 1)].conj();
        h += cj.adjoint() * &cj * c(mass[j]);
        modes.push(DecayMode {
            ladder: OperatorMatrix::new(space.clone(), cj)?,
            mass: mass[j],
            width: width[j],
            statistics: m0.statistics,
        });
    }
    // Symmetrise rounding.
    let h = (&h + h.adjoint()) * c(0.5);
    let exact = if m0.is_fermion() { None } else { Some(m0.cutoff) };
    let mut model = DecayModel::new(space.clone(), OperatorMatrix::new(space.clone(), h)?, modes, exact)?;
    model.set_mixing(params, v);
    Ok(model)
}

#[derive(Clone, Debug)]
pub struct FlavourObservables {
    pub number: OperatorMatrix,
    pub strangeness: OperatorMatrix,
    pub q_plus: OperatorMatrix,
    pub q_minus: OperatorMatrix,
}

/// N̂ = â₁†â₁ + â₂†â₂, Ŝ = â₁†â₁ − â₂†â₂,
/// Q̂₊ = â₁†â₂e^{iφ} + â₂†â₁e^{−iφ}, Q̂₋ = i(â₁†â₂e^{iφ} − â₂†â₁e^{−iφ}).
pub fn build_flavour_observables(space: &Arc<FockSpace>, phi: f64) -> Result<FlavourObservables> {
    require_two_modes(space)?;
    let a1 = build_annihilator(space, 0)?.into_matrix();
    let a2 = build_annihilator(space, 1)?.into_matrix();
    let n1 = build_number(space, 0)?.into_matrix();
    let n2 = build_number(space, 1)?.into_matrix();
    let e = (I * phi).exp();
    let hop = a1.adjoint() * &a2 * e;
    let hop_back = a2.adjoint() * &a1 * e.conj();
    let op = |m: CMatrix| OperatorMatrix::new(space.clone(), m);
    Ok(FlavourObservables {
        number: op(&n1 + &n2)?,
        strangeness: op(&n1 - &n2)?,
        q_plus: op(&hop + &hop_back)?,
        q_minus: op((&hop - &hop_back) * I)?,
    })
}

/// Γ̄ = (Γ₁ + Γ₂)/2.
pub fn mean_width(widths: (f64, f64)) -> f64 {
    0.5 * (widths.0 + widths.1)
}

/// Δm = m₂ − m₁.
pub fn mass_difference(masses: (f64, f64)) -> f64 {
    masses.1 - masses.0
}
