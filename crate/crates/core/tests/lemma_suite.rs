use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_abs_diff_eq;
use tpsk_core::entropy::h3;
use tpsk_core::lemma_lab::{
    find_monotonicity_counterexample, nu4_eval, verify, verify_named, verify_with, SearchMode, VerifyOptions,
};
use tpsk_core::spectrum::{depressed_coeffs, gram_spectrum_oracle, is_valid, spectrum};
use tpsk_core::{EnsembleParams, Error, ProbabilityTriple, PropertyId};

#[test]
fn every_property_holds_on_the_proof_region() {
    for id in PropertyId::ALL {
        let report = verify(id, 1000, 2024).unwrap();
        assert!(report.passed, "{id}: {report:?}");
        assert_eq!(report.samples_tested, 1000);
        assert!(report.worst_violation <= report.slack);
    }
}

#[test]
fn reports_are_reproducible_per_seed() {
    let a = verify(PropertyId::EntropyConcave, 200, 7).unwrap();
    let b = verify(PropertyId::EntropyConcave, 200, 7).unwrap();
    let c = verify(PropertyId::EntropyConcave, 200, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.worst_witness, c.worst_witness);
}

#[test]
fn phases_beyond_quarter_turn_are_flagged() {
    let options = VerifyOptions { theta_max: PI };
    let report = verify_with(PropertyId::T0Increasing, 500, 1, &options).unwrap();
    assert!(report.outside_proof_region);
}

#[test]
fn unknown_property_is_rejected() {
    assert!(matches!(verify_named("t1_wobbly", 10, 1), Err(Error::UnknownProperty(_))));
    assert!(verify_named("g_bounded", 10, 1).unwrap().passed);
}

#[test]
fn nu4_examples() {
    assert!(nu4_eval([1.0 / 3.0; 3], FRAC_PI_2, 0.5).unwrap() >= 0.0);
    assert_abs_diff_eq!(nu4_eval([0.2, 0.5, 0.3], 0.0, 1.0).unwrap(), 0.0, epsilon = 1e-15);
}

#[test]
fn g_stays_inside_unit_interval_where_defined() {
    let e = EnsembleParams::new([0.5, 0.3, 0.2], 0.6, 1.0).unwrap();
    let g = depressed_coeffs(&e).g().unwrap();
    assert!(g.abs() <= 1.0 + 1e-12);
}

#[test]
fn t0_convex_at_uniform_zero_phase() {
    let t0 = |z: f64| spectrum(&EnsembleParams::uniform(z, 0.0).unwrap()).unwrap().x0();
    for i in 2..200 {
        let (a, b, c) = ((i - 1) as f64 / 201.0, i as f64 / 201.0, (i + 1) as f64 / 201.0);
        assert!(t0(a) - 2.0 * t0(b) + t0(c) >= -1e-8);
    }
}

#[test]
fn equal_moduli_admit_no_counterexample() {
    assert!(find_monotonicity_counterexample(100_000, 17, SearchMode::Equal).is_none());
}

#[test]
fn witness_replays_through_the_oracle() {
    let Some(w) = find_monotonicity_counterexample(1_000_000, 2024, SearchMode::Unequal) else {
        panic!("no witness within budget");
    };
    assert!(w.upper_entropy > w.lower_entropy + 1e-9);
    for k in 0..3 {
        assert!(w.lower_moduli[k] <= w.upper_moduli[k]);
    }
    let lower = h3(&ProbabilityTriple::from(gram_spectrum_oracle(&w.probs, &w.lower().unwrap()).unwrap()));
    let upper = h3(&ProbabilityTriple::from(gram_spectrum_oracle(&w.probs, &w.upper().unwrap()).unwrap()));
    assert_abs_diff_eq!(lower, w.lower_entropy, epsilon = 1e-15);
    assert_abs_diff_eq!(upper, w.upper_entropy, epsilon = 1e-15);
    let folded = w.lower().unwrap().total_phase().abs();
    assert!(folded <= FRAC_PI_2 + 1e-12);
}

#[test]
fn validity_boundary_matches_zero_eigenvalue() {
    let probs = [0.4, 0.35, 0.25];
    let theta = 0.9;
    let mut last_valid = None;
    for i in 1..=2000 {
        let z = i as f64 / 2000.0;
        if is_valid(&EnsembleParams::new(probs, z, theta).unwrap()).valid {
            last_valid = Some(z);
        }
    }
    let z = last_valid.unwrap();
    let x = gram_spectrum_oracle(&probs, &tpsk_core::GeneralOverlaps::from_uniform(z, theta).unwrap()).unwrap();
    assert!(x.x2() >= 0.0 && x.x2() < 1e-3);
}

#[test]
fn oracle_diff_is_tiny_and_seeded() {
    let a = tpsk_core::lemma_lab::oracle_diff(2000, 3, PI).unwrap();
    assert_eq!(a.samples_tested, 2000);
    assert!(a.max_abs_error < 1e-9);
    assert_eq!(a, tpsk_core::lemma_lab::oracle_diff(2000, 3, PI).unwrap());
    assert!(tpsk_core::lemma_lab::oracle_diff(0, 3, PI).is_err());
}
