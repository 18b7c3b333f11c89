// SPDX-License-Identifier: Apache-2.0

//! Truncated occupation-number bases, ladder operators and standard
//! initial states.
//!
//! Basis states are ordered lexicographically with mode 0 varying slowest,
//! so the vacuum sits at flat index 0. Fermionic operators carry a
//! Jordan–Wigner string over the fermionic modes that precede them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, hermiticity_defect, CMatrix, C64};

pub const DEFAULT_BOSON_CUTOFF: usize = 8;

/// Truncated tail weight allowed when building coherent states and
/// Poisson mixtures.
pub const TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

/// One particle species: statistics, mass, decay width and occupation
/// cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub statistics: Statistics,
    pub mass: f64,
    pub width: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
}

fn default_cutoff() -> usize {
    DEFAULT_BOSON_CUTOFF
}

impl ModeSpec {
    pub fn boson(mass: f64, width: f64) -> Self {
        Self {
            statistics: Statistics::Boson,
            mass,
            width,
            cutoff: DEFAULT_BOSON_CUTOFF,
        }
    }

    pub fn fermion(mass: f64, width: f64) -> Self {
        Self {
            statistics: Statistics::Fermion,
            mass,
            width,
            cutoff: 1,
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn is_fermion(&self) -> bool {
        self.statistics == Statistics::Fermion
    }
}

/// Basis descriptor for a truncated multi-mode Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockSpace {
    modes: Vec<ModeSpec>,
    strides: Vec<usize>,
    dimension: usize,
}

impl FockSpace {
    /// Validates the modes and builds the index map. Fermionic cutoffs are
    /// forced to 1.
    pub fn new(modes: Vec<ModeSpec>) -> Result<Arc<Self>> {
        let mut modes = modes;
        for (j, m) in modes.iter_mut().enumerate() {
            if !m.mass.is_finite() {
                return Err(Error::InvalidMode {
                    mode: j,
                    reason: "mass must be finite".into(),
                });
            }
            if !(m.width.is_finite() && m.width >= 0.0) {
                return Err(Error::InvalidMode {
                    mode: j,
                    reason: format!("width must be finite and nonnegative, got {}", m.width),
                });
            }
            if m.is_fermion() {
                m.cutoff = 1;
            }
        }
        let mut strides = vec![1usize; modes.len()];
        let mut dimension = 1usize;
        for j in (0..modes.len()).rev() {
            strides[j] = dimension;
            dimension = dimension
                .checked_mul(modes[j].cutoff + 1)
                .ok_or_else(|| Error::InvalidMode {
                    mode: j,
                    reason: "space dimension overflows".into(),
                })?;
        }
        Ok(Arc::new(Self {
            modes,
            strides,
            dimension,
        }))
    }

    pub fn single_boson(mass: f64, width: f64, cutoff: usize) -> Result<Arc<Self>> {
        Self::new(vec![ModeSpec::boson(mass, width).with_cutoff(cutoff)])
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn check_mode(&self, mode: usize) -> Result<&ModeSpec> {
        self.modes.get(mode).ok_or(Error::ModeOutOfRange {
            mode,
            modes: self.modes.len(),
        })
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.modes.len() {
            return Err(Error::OccupationLength {
                got: occupations.len(),
                expected: self.modes.len(),
            });
        }
        let mut idx = 0;
        for (j, (&n, m)) in occupations.iter().zip(&self.modes).enumerate() {
            if n > m.cutoff {
                return Err(Error::OccupationExceedsCutoff {
                    mode: j,
                    occupation: n,
                    cutoff: m.cutoff,
                });
            }
            idx += n * self.strides[j];
        }
        Ok(idx)
    }

    /// Occupation of `mode` in basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % (self.modes[mode].cutoff + 1)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.modes.len())
            .map(|j| self.occupation(index, j))
            .collect()
    }

    pub fn total_occupation(&self, index: usize) -> usize {
        (0..self.modes.len()).map(|j| self.occupation(index, j)).sum()
    }

    /// Flat indices whose total occupation is at most `bound`.
    pub fn indices_with_total_at_most(&self, bound: usize) -> Vec<usize> {
        (0..self.dimension)
            .filter(|&i| self.total_occupation(i) <= bound)
            .collect()
    }

    pub fn max_total_occupation(&self) -> usize {
        self.modes.iter().map(|m| m.cutoff).sum()
    }

    fn jordan_wigner_sign(&self, index: usize, mode: usize) -> f64 {
        if !self.modes[mode].is_fermion() {
            return 1.0;
        }
        let parity: usize = (0..mode)
            .filter(|&j| self.modes[j].is_fermion())
            .map(|j| self.occupation(index, j))
            .sum();
        if parity.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }
}

/// Dense operator on a Fock space.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    space: Arc<FockSpace>,
    matrix: CMatrix,
}

impl OperatorMatrix {
    pub fn new(space: Arc<FockSpace>, matrix: CMatrix) -> Result<Self> {
        let d = space.dimension();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: d,
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: Arc<FockSpace>) -> Self {
        let d = space.dimension();
        Self {
            space,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn identity(space: Arc<FockSpace>) -> Self {
        let d = space.dimension();
        Self {
            space,
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub(crate) fn with_matrix(&self, matrix: CMatrix) -> Self {
        Self {
            space: self.space.clone(),
            matrix,
        }
    }
}

/// Tolerances used when validating a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityTolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl DensityTolerances {
    pub const STRICT: Self = Self {
        hermiticity: 1e-12,
        trace: 1e-12,
        min_eigenvalue: -1e-10,
    };
}

/// Hermitian, positive, unit-trace matrix on a Fock space.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    space: Arc<FockSpace>,
    matrix: CMatrix,
    discarded_tail: f64,
}

impl DensityOperator {
    pub fn new(space: Arc<FockSpace>, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(space, matrix, DensityTolerances::STRICT)
    }

    pub fn with_tolerances(
        space: Arc<FockSpace>,
        matrix: CMatrix,
        tol: DensityTolerances,
    ) -> Result<Self> {
        let op = OperatorMatrix::new(space, matrix)?;
        let h = op.hermiticity_defect();
        if h > tol.hermiticity {
            return Err(Error::Invariant {
                name: "density_hermitian",
                detail: format!("max |rho - rho^dagger| = {h:e}"),
            });
        }
        let tr = op.matrix.trace();
        if (tr - c(1.0)).norm() > tol.trace {
            return Err(Error::Invariant {
                name: "density_unit_trace",
                detail: format!("trace = {tr}"),
            });
        }
        let min = hermitian_eigenvalues(&op.matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < tol.min_eigenvalue {
            return Err(Error::Invariant {
                name: "density_positive",
                detail: format!("minimum eigenvalue {min:e}"),
            });
        }
        Ok(Self {
            space: op.space,
            matrix: op.matrix,
            discarded_tail: 0.0,
        })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Probability weight dropped by truncation when the state was built.
    pub fn discarded_tail(&self) -> f64 {
        self.discarded_tail
    }

    /// Largest total occupation carrying a nonzero matrix element.
    pub fn support_total(&self) -> usize {
        let d = self.space.dimension();
        let mut best = 0;
        for j in 0..d {
            for i in 0..d {
                if self.matrix[(i, j)] != C64::new(0.0, 0.0) {
                    best = best
                        .max(self.space.total_occupation(i))
                        .max(self.space.total_occupation(j));
                }
            }
        }
        best
    }

    /// Whether every nonzero entry has both indices in `allowed`.
    pub fn supported_within(&self, allowed: &[bool]) -> bool {
        let d = self.space.dimension();
        (0..d).all(|j| {
            (0..d).all(|i| self.matrix[(i, j)] == C64::new(0.0, 0.0) || (allowed[i] && allowed[j]))
        })
    }
}

fn pure_state(space: Arc<FockSpace>, amplitudes: &[C64], tail: f64) -> Result<DensityOperator> {
    let d = space.dimension();
    let psi = nalgebra::DVector::from_column_slice(amplitudes);
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    let psi = psi / c(norm2.sqrt());
    let mut rho = DensityOperator::new(space, &psi * psi.adjoint())?;
    debug_assert_eq!(rho.matrix.nrows(), d);
    rho.discarded_tail = tail;
    Ok(rho)
}

/// Annihilation operator for `mode` (0-based).
pub fn build_annihilator(space: &Arc<FockSpace>, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let d = space.dimension();
    let stride = space.strides[mode];
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let n = space.occupation(col, mode);
        if n > 0 {
            let sign = space.jordan_wigner_sign(col, mode);
            m[(col - stride, col)] = c(sign * (n as f64).sqrt());
        }
    }
    OperatorMatrix::new(space.clone(), m)
}

pub fn build_creator(space: &Arc<FockSpace>, mode: usize) -> Result<OperatorMatrix> {
    Ok(build_annihilator(space, mode)?.dagger())
}

/// Number operator for `mode`; diagonal with the mode occupation.
pub fn build_number(space: &Arc<FockSpace>, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let d = space.dimension();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c(space.occupation(i, mode) as f64);
    }
    OperatorMatrix::new(space.clone(), m)
}

/// Total number operator Σ_j N̂_j.
pub fn build_total_number(space: &Arc<FockSpace>) -> OperatorMatrix {
    let d = space.dimension();
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c(space.total_occupation(i) as f64);
    }
    OperatorMatrix {
        space: space.clone(),
        matrix: m,
    }
}

/// Projector |n⟩⟨n| onto a basis state.
pub fn build_projector(space: &Arc<FockSpace>, occupations: &[usize]) -> Result<OperatorMatrix> {
    let idx = space.index_of(occupations)?;
    let d = space.dimension();
    let mut m = CMatrix::zeros(d, d);
    m[(idx, idx)] = c(1.0);
    OperatorMatrix::new(space.clone(), m)
}

pub fn number_state(space: &Arc<FockSpace>, occupations: &[usize]) -> Result<DensityOperator> {
    let p = build_projector(space, occupations)?;
    DensityOperator::new(space.clone(), p.matrix)
}

/// Weighted mixture of number states. Weights must be nonnegative and sum
/// to one.
pub fn number_mixture(
    space: &Arc<FockSpace>,
    components: &[(f64, Vec<usize>)],
) -> Result<DensityOperator> {
    let d = space.dimension();
    let mut m = CMatrix::zeros(d, d);
    for (w, occ) in components {
        if w.is_nan() || *w < 0.0 {
            return Err(Error::Invariant {
                name: "mixture_weight_nonnegative",
                detail: format!("weight {w}"),
            });
        }
        let idx = space.index_of(occ)?;
        m[(idx, idx)] += c(*w);
    }
    DensityOperator::new(space.clone(), m)
}

fn require_boson(space: &FockSpace, mode: usize) -> Result<()> {
    if space.check_mode(mode)?.is_fermion() {
        return Err(Error::FermionicMode { mode });
    }
    Ok(())
}

/// Poisson weights e^{-n̄} n̄^k / k! for k = 0..=cutoff plus the weight of
/// everything above the cutoff.
fn poisson_weights(nbar: f64, cutoff: usize) -> (Vec<f64>, f64) {
    let mut weights = Vec::with_capacity(cutoff + 1);
    let mut w = (-nbar).exp();
    for k in 0..=cutoff {
        if k > 0 {
            w *= nbar / k as f64;
        }
        weights.push(w);
    }
    // Tail summed directly.
    let mut tail = 0.0;
    let mut k = cutoff + 1;
    loop {
        w *= nbar / k as f64;
        tail += w;
        if w <= tail * 1e-17 || w == 0.0 {
            break;
        }
        k += 1;
    }
    (weights, tail)
}

fn single_mode_index(space: &FockSpace, mode: usize, k: usize) -> usize {
    k * space.strides[mode]
}

/// Coherent state |α⟩ in `mode`, other modes in vacuum, renormalised on
/// the truncated space.
pub fn coherent_state(space: &Arc<FockSpace>, mode: usize, alpha: C64) -> Result<DensityOperator> {
    require_boson(space, mode)?;
    let cutoff = space.modes[mode].cutoff;
    let nbar = alpha.norm_sqr();
    let (_, tail) = poisson_weights(nbar, cutoff);
    if tail >= TAIL_TOLERANCE {
        return Err(Error::TailWeightExceeded {
            weight: tail,
            tolerance: TAIL_TOLERANCE,
        });
    }
    let mut amps = vec![C64::new(0.0, 0.0); space.dimension()];
    let mut amp = c((-0.5 * nbar).exp());
    for k in 0..=cutoff {
        if k > 0 {
            amp *= alpha / c((k as f64).sqrt());
        }
        amps[single_mode_index(space, mode, k)] = amp;
    }
    pure_state(space.clone(), &amps, tail)
}

/// Diagonal mixture of number states in `mode` with Poisson weights.
pub fn poisson_mixture(space: &Arc<FockSpace>, mode: usize, nbar: f64) -> Result<DensityOperator> {
    require_boson(space, mode)?;
    if !(nbar.is_finite() && nbar >= 0.0) {
        return Err(Error::Invariant {
            name: "poisson_mean_nonnegative",
            detail: format!("nbar = {nbar}"),
        });
    }
    let cutoff = space.modes[mode].cutoff;
    let (weights, tail) = poisson_weights(nbar, cutoff);
    if tail >= TAIL_TOLERANCE {
        return Err(Error::TailWeightExceeded {
            weight: tail,
            tolerance: TAIL_TOLERANCE,
        });
    }
    let total: f64 = weights.iter().sum();
    let d = space.dimension();
    let mut m = CMatrix::zeros(d, d);
    for (k, w) in weights.iter().enumerate() {
        let i = single_mode_index(space, mode, k);
        m[(i, i)] = c(w / total);
    }
    let mut rho = DensityOperator::new(space.clone(), m)?;
    rho.discarded_tail = tail;
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{anticommutator, commutator, max_abs};

    fn two_fermions() -> Arc<FockSpace> {
        FockSpace::new(vec![ModeSpec::fermion(0.0, 1.0), ModeSpec::fermion(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn annihilator_matrix_elements() {
        let s = FockSpace::single_boson(0.0, 1.0, 2).unwrap();
        let a = build_annihilator(&s, 0).unwrap();
        let m = a.matrix();
        assert_eq!(m[(0, 1)], c(1.0));
        assert_eq!(m[(1, 2)], c(2f64.sqrt()));
        assert!(m.column(0).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn vacuum_column_is_zero_for_every_mode() {
        let s = FockSpace::new(vec![
            ModeSpec::boson(0.0, 1.0).with_cutoff(2),
            ModeSpec::fermion(0.0, 1.0),
            ModeSpec::boson(0.0, 1.0).with_cutoff(1),
        ])
        .unwrap();
        for j in 0..3 {
            let a = build_annihilator(&s, j).unwrap();
            assert!(a.matrix().column(0).iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn fermionic_anticommutators_by_brute_force() {
        let s = two_fermions();
        let a: Vec<_> = (0..2).map(|j| build_annihilator(&s, j).unwrap()).collect();
        let id = CMatrix::identity(4, 4);
        for j in 0..2 {
            for k in 0..2 {
                let ak = a[k].matrix();
                let ac = anticommutator(a[j].matrix(), &ak.adjoint());
                let expect = if j == k { id.clone() } else { CMatrix::zeros(4, 4) };
                assert_eq!(ac, expect, "{{a_{j}, a_{k}^dag}}");
                assert_eq!(anticommutator(a[j].matrix(), ak), CMatrix::zeros(4, 4));
            }
        }
    }

    #[test]
    fn boson_fermion_operators_commute() {
        let s = FockSpace::new(vec![
            ModeSpec::fermion(0.0, 1.0),
            ModeSpec::boson(0.0, 1.0).with_cutoff(2),
            ModeSpec::fermion(0.0, 1.0),
        ])
        .unwrap();
        let f0 = build_annihilator(&s, 0).unwrap();
        let b = build_annihilator(&s, 1).unwrap();
        let f2 = build_annihilator(&s, 2).unwrap();
        assert_eq!(max_abs(&commutator(f0.matrix(), b.matrix())), 0.0);
        assert_eq!(max_abs(&commutator(f2.matrix(), &b.matrix().adjoint())), 0.0);
        assert_eq!(max_abs(&anticommutator(f0.matrix(), &f2.matrix().adjoint())), 0.0);
    }

    #[test]
    fn number_operator_is_diag_and_adag_a() {
        let s = FockSpace::single_boson(0.0, 1.0, 3).unwrap();
        let n = build_number(&s, 0).unwrap();
        for k in 0..4 {
            assert_eq!(n.matrix()[(k, k)], c(k as f64));
        }
        let a = build_annihilator(&s, 0).unwrap();
        let ada = a.matrix().adjoint() * a.matrix();
        assert!(max_abs(&(ada - n.matrix())) < 1e-15);
    }

    #[test]
    fn two_mode_total_number_eigenvalues() {
        let s = FockSpace::new(vec![
            ModeSpec::boson(0.0, 1.0).with_cutoff(3),
            ModeSpec::boson(0.0, 1.0).with_cutoff(2),
        ])
        .unwrap();
        let n = build_number(&s, 0).unwrap().matrix() + build_number(&s, 1).unwrap().matrix();
        for n1 in 0..=3 {
            for n2 in 0..=2 {
                let i = s.index_of(&[n1, n2]).unwrap();
                assert_eq!(n[(i, i)], c((n1 + n2) as f64));
            }
        }
    }

    #[test]
    fn ccr_holds_below_cutoff() {
        let s = FockSpace::new(vec![
            ModeSpec::boson(0.0, 1.0).with_cutoff(3),
            ModeSpec::boson(0.0, 1.0).with_cutoff(2),
        ])
        .unwrap();
        for j in 0..2 {
            let a = build_annihilator(&s, j).unwrap();
            let comm = commutator(a.matrix(), &a.matrix().adjoint());
            let keep: Vec<usize> = (0..s.dimension())
                .filter(|&i| (0..2).all(|k| s.occupation(i, k) < s.modes()[k].cutoff))
                .collect();
            let sub = crate::linalg::restrict(&comm, &keep);
            let id = CMatrix::identity(keep.len(), keep.len());
            assert!(max_abs(&(sub - id)) < 1e-12);
        }
    }

    #[test]
    fn index_map_round_trip_and_vacuum_first() {
        let s = FockSpace::new(vec![
            ModeSpec::boson(0.0, 1.0).with_cutoff(2),
            ModeSpec::fermion(0.0, 1.0),
            ModeSpec::boson(0.0, 1.0).with_cutoff(3),
        ])
        .unwrap();
        assert_eq!(s.dimension(), 3 * 2 * 4);
        assert_eq!(s.index_of(&[0, 0, 0]).unwrap(), 0);
        for i in 0..s.dimension() {
            assert_eq!(s.index_of(&s.occupations(i)).unwrap(), i);
        }
        // mode 0 varies slowest
        assert_eq!(s.index_of(&[1, 0, 0]).unwrap(), 8);
        assert_eq!(s.index_of(&[0, 0, 1]).unwrap(), 1);
    }

    #[test]
    fn fermion_cutoff_forced_to_one() {
        let s = FockSpace::new(vec![ModeSpec::fermion(0.0, 1.0).with_cutoff(5)]).unwrap();
        assert_eq!(s.dimension(), 2);
    }

    #[test]
    fn negative_width_rejected() {
        assert!(matches!(
            FockSpace::new(vec![ModeSpec::boson(0.0, -1.0)]),
            Err(Error::InvalidMode { mode: 0, .. })
        ));
    }

    #[test]
    fn mode_out_of_range() {
        let s = FockSpace::single_boson(0.0, 1.0, 2).unwrap();
        assert!(matches!(
            build_annihilator(&s, 1),
            Err(Error::ModeOutOfRange { mode: 1, modes: 1 })
        ));
        assert!(build_number(&s, 3).is_err());
    }

    #[test]
    fn number_states() {
        let s = FockSpace::single_boson(0.0, 1.0, 4).unwrap();
        let vac = number_state(&s, &[0]).unwrap();
        assert_eq!(vac.trace(), c(1.0));
        let two = number_state(&s, &[2]).unwrap();
        assert_eq!(two.matrix()[(2, 2)], c(1.0));
        assert_eq!(two.matrix().iter().filter(|z| z.norm() != 0.0).count(), 1);
        assert!(matches!(
            number_state(&s, &[5]),
            Err(Error::OccupationExceedsCutoff { occupation: 5, cutoff: 4, .. })
        ));

        let s2 = FockSpace::new(vec![
            ModeSpec::boson(0.0, 0.5).with_cutoff(3),
            ModeSpec::boson(0.0, 1.5).with_cutoff(3),
        ])
        .unwrap();
        let r = number_state(&s2, &[2, 1]).unwrap();
        let i = s2.index_of(&[2, 1]).unwrap();
        assert_eq!(r.matrix()[(i, i)], c(1.0));
    }

    #[test]
    fn coherent_state_amplitudes() {
        let s = FockSpace::single_boson(0.0, 1.0, 12).unwrap();
        let vac = coherent_state(&s, 0, C64::new(0.0, 0.0)).unwrap();
        assert!((vac.matrix()[(0, 0)] - c(1.0)).norm() < 1e-15);

        let rho = coherent_state(&s, 0, c(1.0)).unwrap();
        let mut fact = 1.0;
        let mut mean = 0.0;
        for k in 0..=12 {
            if k > 0 {
                fact *= k as f64;
            }
            let p = (-1f64).exp() / fact;
            assert!((rho.matrix()[(k, k)].re - p).abs() < 1e-10, "k={k}");
            mean += k as f64 * rho.matrix()[(k, k)].re;
        }
        assert!((mean - 1.0).abs() < 1e-9);
        assert!(rho.discarded_tail() > 0.0 && rho.discarded_tail() < TAIL_TOLERANCE);
    }

    #[test]
    fn coherent_tail_and_fermion_errors() {
        let s = FockSpace::single_boson(0.0, 1.0, 8).unwrap();
        assert!(matches!(
            coherent_state(&s, 0, c(1.0)),
            Err(Error::TailWeightExceeded { .. })
        ));
        let f = FockSpace::new(vec![ModeSpec::fermion(0.0, 1.0)]).unwrap();
        assert!(matches!(
            coherent_state(&f, 0, c(0.1)),
            Err(Error::FermionicMode { mode: 0 })
        ));
        assert!(matches!(
            poisson_mixture(&s, 0, 2.0),
            Err(Error::TailWeightExceeded { .. })
        ));
    }

    #[test]
    fn poisson_mixture_weights() {
        let s = FockSpace::single_boson(0.0, 1.0, 12).unwrap();
        let vac = poisson_mixture(&s, 0, 0.0).unwrap();
        assert_eq!(vac.matrix()[(0, 0)], c(1.0));
        let rho = poisson_mixture(&s, 0, 1.0).unwrap();
        let mut fact = 1.0;
        for k in 0..=12 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((rho.matrix()[(k, k)].re - (-1f64).exp() / fact).abs() < 1e-10);
        }
        assert!(crate::linalg::hermiticity_defect(rho.matrix()) == 0.0);
    }

    #[test]
    fn density_validation_rejects_bad_matrices() {
        let s = FockSpace::single_boson(0.0, 1.0, 1).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(matches!(
            DensityOperator::new(s.clone(), m),
            Err(Error::Invariant { name: "density_positive", .. })
        ));
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(0.9);
        assert!(DensityOperator::new(s, m).is_err());
    }
}
