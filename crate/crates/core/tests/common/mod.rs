// SPDX-License-Identifier: Apache-2.0

//! Shared helpers for integration tests: random states and observables,
//! and direct evaluations of the analytic decay laws used as oracles.

#![allow(dead_code)]

use std::sync::Arc;

use fockdecay::linalg::{c, CMatrix, C64};
use fockdecay::{DensityOperator, FockSpace, OperatorMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Mixture of `count` Haar-random pure states supported on `support`.
pub fn random_state(
    rng: &mut ChaCha8Rng,
    space: &Arc<FockSpace>,
    support: &[usize],
    count: usize,
) -> DensityOperator {
    let d = space.dimension();
    let mut rho = CMatrix::zeros(d, d);
    let weights: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let mut psi = nalgebra::DVector::<C64>::zeros(d);
        for &i in support {
            psi[i] = gaussian(rng);
        }
        let norm = psi.norm();
        psi /= c(norm);
        rho += &psi * psi.adjoint() * c(w / total);
    }
    let rho = (&rho + rho.adjoint()) * c(0.5);
    let tr = rho.trace();
    DensityOperator::new(space.clone(), rho / tr).unwrap()
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(rng: &mut ChaCha8Rng, space: &Arc<FockSpace>) -> OperatorMatrix {
    let d = space.dimension();
    let a = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    OperatorMatrix::new(space.clone(), (&a + a.adjoint()) * c(0.5)).unwrap()
}

/// Random positive semidefinite matrix B B†.
pub fn random_positive(rng: &mut ChaCha8Rng, space: &Arc<FockSpace>) -> OperatorMatrix {
    let d = space.dimension();
    let b = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    OperatorMatrix::new(space.clone(), &b * b.adjoint()).unwrap()
}

pub fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Binomial law B(n, q) at k.
pub fn binomial_pmf(n: usize, q: f64, k: usize) -> f64 {
    choose(n, k) * q.powi(k as i32) * (1.0 - q).powi((n - k) as i32)
}

pub fn poisson_pmf(mean: f64, k: usize) -> f64 {
    (-mean).exp() * mean.powi(k as i32) / factorial(k)
}

/// Single-mode image of |n⟩⟨n'| after time t, evaluated term by term:
/// Σ_k √(C(n,k)C(n',k)) e^{−im(n−n')t} e^{−Γ(n+n'−2k)t/2} (1−e^{−Γt})^k |n−k⟩⟨n'−k|.
pub fn single_mode_image(
    n: usize,
    np: usize,
    mass: f64,
    width: f64,
    t: f64,
    dim: usize,
) -> CMatrix {
    let mut out = CMatrix::zeros(dim, dim);
    let phase = (C64::new(0.0, -mass * (n as f64 - np as f64) * t)).exp();
    for k in 0..=n.min(np) {
        let amp = (choose(n, k) * choose(np, k)).sqrt()
            * (-0.5 * width * (n + np - 2 * k) as f64 * t).exp()
            * (1.0 - (-width * t).exp()).powi(k as i32);
        out[(n - k, np - k)] += phase * amp;
    }
    out
}

/// Mean number for two flavours started in |n1, n2⟩.
pub fn mean_number_two_flavour(n: (usize, usize), theta: f64, widths: (f64, f64), t: f64) -> f64 {
    let (e1, e2) = ((-widths.0 * t).exp(), (-widths.1 * t).exp());
    let (n1, n2) = (n.0 as f64, n.1 as f64);
    0.5 * (e1 + e2) * (n1 + n2) + 0.5 * (e1 - e2) * (n1 - n2) * theta.cos()
}

/// Mean strangeness for two flavours started in |n1, n2⟩.
pub fn mean_strangeness_two_flavour(
    n: (usize, usize),
    theta: f64,
    masses: (f64, f64),
    widths: (f64, f64),
    t: f64,
) -> f64 {
    let (e1, e2) = ((-widths.0 * t).exp(), (-widths.1 * t).exp());
    let eg = (-0.5 * (widths.0 + widths.1) * t).exp();
    let dm = masses.1 - masses.0;
    let (n1, n2) = (n.0 as f64, n.1 as f64);
    let (s, co) = theta.sin_cos();
    0.5 * (e1 - e2) * (n1 + n2) * co
        + (0.5 * (e1 + e2) * co * co + eg * (dm * t).cos() * s * s) * (n1 - n2)
}

pub fn max_abs_on(a: &CMatrix, b: &CMatrix, idx: &[usize]) -> f64 {
    let mut m: f64 = 0.0;
    for &i in idx {
        for &j in idx {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}
