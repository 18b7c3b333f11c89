// SPDX-License-Identifier: Apache-2.0

//! Direct numerical integration of the master equation
//!
//!   dρ/dt = −i[Ĥ, ρ] + {K̂, ρ} + Σ_j L̂_j ρ L̂_j†
//!
//! with fixed-step classical Runge–Kutta. This route never touches the
//! Kraus operators or the propagator and serves as a cross-check for them.

use crate::channel::{check_times, DecayModel};
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, DensityTolerances};
use crate::linalg::{CMatrix, C64, I};

/// Acceptance bounds for integrated states. Trace is not renormalised, and
/// eigenvalues below −1e-8 abort the run.
pub const ODE_TOLERANCES: DensityTolerances = DensityTolerances {
    hermiticity: 1e-10,
    trace: 1e-9,
    min_eigenvalue: -1e-8,
};

/// Default step: 1e-3 in units of the fastest decay time.
pub fn default_step(model: &DecayModel) -> f64 {
    let g = model.max_width();
    if g > 0.0 {
        1e-3 / g
    } else {
        1e-3
    }
}

/// Row-compressed copy of a constant operator; exact zeros are dropped.
#[derive(Clone, Debug)]
struct SparseRows {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    fn from_dense(a: &CMatrix) -> Self {
        let rows = (0..a.nrows())
            .map(|i| {
                (0..a.ncols())
                    .filter(|&j| a[(i, j)] != C64::new(0.0, 0.0))
                    .map(|j| (j, a[(i, j)]))
                    .collect()
            })
            .collect();
        Self { dim: a.nrows(), rows }
    }

    /// out += S·x
    fn mul_add(&self, x: &CMatrix, out: &mut CMatrix) {
        let d = self.dim;
        let (x, out) = (x.as_slice(), out.as_mut_slice());
        for col in 0..d {
            let xc = &x[col * d..(col + 1) * d];
            let oc = &mut out[col * d..(col + 1) * d];
            for (i, row) in self.rows.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for &(k, s) in row {
                    acc += s * xc[k];
                }
                oc[i] += acc;
            }
        }
    }

    /// out += x·S†
    fn mul_adjoint_add(&self, x: &CMatrix, out: &mut CMatrix) {
        let d = self.dim;
        let (x, out) = (x.as_slice(), out.as_mut_slice());
        for (j, row) in self.rows.iter().enumerate() {
            let oc = &mut out[j * d..(j + 1) * d];
            for &(k, s) in row {
                let s = s.conj();
                let xc = &x[k * d..(k + 1) * d];
                for (o, v) in oc.iter_mut().zip(xc) {
                    *o += v * s;
                }
            }
        }
    }
}

/// The generator ρ ↦ Aρ + ρA† + Σ_j L̂_j ρ L̂_j† with A = −iĤ + K̂.
#[derive(Clone, Debug)]
pub struct GeneratorAction<'a> {
    model: &'a DecayModel,
    drift: SparseRows,
    jumps: Vec<SparseRows>,
}

impl<'a> GeneratorAction<'a> {
    pub fn new(model: &'a DecayModel) -> Self {
        let h = model.hamiltonian().matrix();
        let k = model.k_operator().matrix();
        let drift = SparseRows::from_dense(&(h * (-I) + k));
        let jumps = model
            .lindblads()
            .iter()
            .map(|l| SparseRows::from_dense(l.matrix()))
            .collect();
        Self { model, drift, jumps }
    }

    pub fn model(&self) -> &DecayModel {
        self.model
    }

    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.nrows();
        let mut out = CMatrix::zeros(d, d);
        self.drift.mul_add(rho, &mut out);
        self.drift.mul_adjoint_add(rho, &mut out);
        let mut tmp = CMatrix::zeros(d, d);
        for l in &self.jumps {
            tmp.fill(C64::new(0.0, 0.0));
            l.mul_add(rho, &mut tmp);
            l.mul_adjoint_add(&tmp, &mut out);
        }
        out
    }
}

/// dρ/dt for the given density matrix.
pub fn generator_apply(gen: &GeneratorAction<'_>, rho: &CMatrix) -> Result<CMatrix> {
    let d = gen.model.space().dimension();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            rows: rho.nrows(),
            cols: rho.ncols(),
            expected: d,
        });
    }
    Ok(gen.rhs(rho))
}

fn rk4_step(gen: &GeneratorAction<'_>, rho: &CMatrix, h: f64) -> CMatrix {
    let half = h * 0.5;
    let k1 = gen.rhs(rho);
    let k2 = gen.rhs(&(rho + &k1 * crate::linalg::c(half)));
    let k3 = gen.rhs(&(rho + &k2 * crate::linalg::c(half)));
    let k4 = gen.rhs(&(rho + &k3 * crate::linalg::c(h)));
    rho + (k1 + (k2 + k3) * crate::linalg::c(2.0) + k4) * crate::linalg::c(h / 6.0)
}

/// Integrates from t = 0 and records the state at every grid time. Each
/// time must be an integer multiple of `step`.
pub fn integrate(
    gen: &GeneratorAction<'_>,
    rho0: &DensityOperator,
    times: &[f64],
    step: f64,
) -> Result<Vec<DensityOperator>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::NonPositiveStep(step));
    }
    check_times(times)?;
    if rho0.space() != gen.model.space() {
        return Err(Error::SpaceMismatch);
    }
    let mut state = rho0.matrix().clone();
    let mut done: u64 = 0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let ratio = t / step;
        let target = ratio.round();
        if (ratio - target).abs() > 1e-6 {
            return Err(Error::TimeNotOnGrid { time: t, step });
        }
        let target = target as u64;
        while done < target {
            state = rk4_step(gen, &state, step);
            done += 1;
        }
        let rho = DensityOperator::with_tolerances(rho0.space().clone(), state.clone(), ODE_TOLERANCES)
            .map_err(|err| match err {
                Error::Invariant { name, detail } => Error::Invariant {
                    name,
                    detail: format!("{detail} in integrated state at t = {t}"),
                },
                other => other,
            })?;
        out.push(rho);
    }
    Ok(out)
}


#[cfg(test)]
mod sparse_tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn sparse_products_match_dense() {
        let s = CMatrix::from_fn(4, 4, |i, j| if (i + j) % 3 == 0 { C64::new(i as f64, j as f64 - 1.0) } else { c(0.0) });
        let x = CMatrix::from_fn(4, 4, |i, j| C64::new((i * 4 + j) as f64, 1.0 / (1 + i + j) as f64));
        let sp = SparseRows::from_dense(&s);
        let mut a = CMatrix::zeros(4, 4);
        sp.mul_add(&x, &mut a);
        assert!(crate::linalg::max_abs(&(a - &s * &x)) < 1e-12);
        let mut b = CMatrix::zeros(4, 4);
        sp.mul_adjoint_add(&x, &mut b);
        assert!(crate::linalg::max_abs(&(b - &x * s.adjoint())) < 1e-12);
    }
}
