// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use fockdecay::channel::{decay_amplitude, survival_amplitude};
use fockdecay::linalg::{c, max_abs, trace_distance, CMatrix, C64};
use fockdecay::*;
use rand::Rng;

#[test]
fn matrix_elements_follow_single_mode_law() {
    let (m, g) = (1.3, 0.7);
    let s = FockSpace::single_boson(m, g, 4).unwrap();
    let model = DecayModel::unmixed(&s).unwrap();
    for &t in &[0.1, 0.9, 2.5] {
        let kraus = build_kraus(&model, t, 4).unwrap();
        for n in 0..=4 {
            for np in 0..=4 {
                let mut unit = CMatrix::zeros(5, 5);
                unit[(n, np)] = c(1.0);
                let mut image = CMatrix::zeros(5, 5);
                for e in kraus.operators() {
                    let e = e.matrix.matrix();
                    image += e * &unit * e.adjoint();
                }
                let oracle = single_mode_image(n, np, m, g, t, 5);
                assert!(max_abs(&(image - oracle)) <= 1e-12, "n={n} n'={np} t={t}");
            }
        }
    }
}

#[test]
fn number_state_decays_binomially() {
    let s = FockSpace::single_boson(0.4, 1.0, 6).unwrap();
    let model = DecayModel::unmixed(&s).unwrap();
    let rho = number_state(&s, &[4]).unwrap();
    for &t in &[0.1, 2f64.ln(), 3.0] {
        let out = &evolve_state(&model, &rho, &[t]).unwrap()[0];
        let q = (-t).exp();
        for (occ, p) in occupation_distribution(out) {
            let k = occ[0];
            let expect = if k <= 4 { binomial_pmf(4, q, k) } else { 0.0 };
            assert!((p - expect).abs() <= 1e-12);
        }
    }
}

#[test]
fn coherent_and_poisson_mixture_agree() {
    let s = FockSpace::single_boson(0.0, 1.0, 16).unwrap();
    let model = DecayModel::unmixed(&s).unwrap();
    let alpha = 1.2;
    let coh = coherent_state(&s, 0, C64::new(alpha, 0.0)).unwrap();
    assert!(coh.discarded_tail() < 1e-10);
    let mix = poisson_mixture(&s, 0, alpha * alpha).unwrap();
    let a = &evolve_state(&model, &coh, &[1.0]).unwrap()[0];
    let b = &evolve_state(&model, &mix, &[1.0]).unwrap()[0];
    let (da, db) = (occupation_distribution(a), occupation_distribution(b));
    let mean = alpha * alpha * (-1f64).exp();
    for (occ, p) in &da {
        assert!((p - poisson_pmf(mean, occ[0])).abs() <= 1e-9);
        assert!((p - db[occ]).abs() <= 1e-12);
    }
    assert!(poisson_mixture(&s, 0, 40.0).is_err());
}

#[test]
fn completeness_single_and_two_mode() {
    let single = FockSpace::single_boson(0.3, 1.0, 6).unwrap();
    let two = FockSpace::new(vec![
        ModeSpec::boson(0.5, 0.4).with_cutoff(3),
        ModeSpec::boson(2.0, 1.3).with_cutoff(2),
    ])
    .unwrap();
    for space in [single, two] {
        let model = DecayModel::unmixed(&space).unwrap();
        let g = model.max_width();
        for i in 0..20 {
            let t = 10.0 / g * i as f64 / 19.0;
            let kraus = build_kraus(&model, t, space.max_total_occupation()).unwrap();
            assert!(kraus.completeness_defect() <= 1e-10);
        }
    }
}

#[test]
fn semigroup_and_vacuum_attractor() {
    let mut r = rng(3);
    let space = FockSpace::new(vec![
        ModeSpec::boson(0.5, 0.8).with_cutoff(3),
        ModeSpec::fermion(1.0, 1.1),
    ])
    .unwrap();
    let model = DecayModel::unmixed(&space).unwrap();
    let all: Vec<usize> = (0..space.dimension()).collect();
    let vacuum = number_state(&space, &[0, 0]).unwrap();
    for _ in 0..10 {
        let rho = random_state(&mut r, &space, &all, 2);
        let (t1, t2) = (r.random::<f64>() * 2.0, r.random::<f64>() * 2.0);
        let mid = &evolve_state(&model, &rho, &[t2]).unwrap()[0];
        let composed = &evolve_state(&model, mid, &[t1]).unwrap()[0];
        let direct = &evolve_state(&model, &rho, &[t1 + t2]).unwrap()[0];
        assert!(trace_distance(composed.matrix(), direct.matrix()) <= 1e-10);

        let late = &evolve_state(&model, &rho, &[40.0 / model.min_width()]).unwrap()[0];
        assert!(trace_distance(late.matrix(), vacuum.matrix()) < 1e-6);
    }
}

#[test]
fn fermion_pair_decay() {
    let space = FockSpace::new(vec![ModeSpec::fermion(0.2, 0.9), ModeSpec::fermion(1.4, 1.6)]).unwrap();
    let model = DecayModel::unmixed(&space).unwrap();
    let full = number_state(&space, &[1, 1]).unwrap();
    let n0 = build_number(&space, 0).unwrap();
    let n1 = build_number(&space, 1).unwrap();
    for &t in &[0.0, 0.5, 2.0] {
        let kraus = build_kraus(&model, t, 2).unwrap();
        assert!(kraus.operators().iter().all(|e| e.partition.iter().all(|&k| k <= 1)));
        assert_eq!(kraus.operators().len(), 4);
        assert!(kraus.completeness_defect() <= 1e-10);
        let out = apply_channel(&kraus, &full).unwrap();
        assert!((out.trace() - c(1.0)).norm() <= 1e-12);
        assert!((expectation(&out, &n0).unwrap() - (-0.9 * t).exp()).abs() <= 1e-12);
        assert!((expectation(&out, &n1).unwrap() - (-1.6 * t).exp()).abs() <= 1e-12);
    }
}

#[test]
fn amplitudes_saturate() {
    assert_eq!(decay_amplitude(1.0, 800.0), 1.0);
    assert_eq!(survival_amplitude(1.0, 800.0), 0.0);
    assert!((decay_amplitude(2.0, 0.5) - (1.0 - (-1f64).exp()).sqrt()).abs() < 1e-15);
}

#[test]
fn support_beyond_kraus_order_rejected() {
    let s = FockSpace::single_boson(0.0, 1.0, 4).unwrap();
    let model = DecayModel::unmixed(&s).unwrap();
    let kraus = build_kraus(&model, 1.0, 2).unwrap();
    let rho = number_state(&s, &[3]).unwrap();
    assert!(matches!(apply_channel(&kraus, &rho), Err(Error::SupportExceedsKraus { .. })));
    assert!(matches!(evolve_state(&model, &rho, &[1.0, 0.5]), Err(Error::UnsortedTimes)));
}
