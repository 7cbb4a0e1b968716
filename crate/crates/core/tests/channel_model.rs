//! Channel quantities against independent constructions: a truncated
//! Fock-space inner product for coherent-state overlaps, and direct
//! quadrature of the outcome densities.

use std::f64::consts::{PI, TAU};

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tpsk_core::channel::{coherent_overlap, triangle_phase, TRIANGLE_PHASE_FACTOR};
use tpsk_core::keyrate::h_e_given_x_from_noise;
use tpsk_core::quadrature::integrate_polar;
use tpsk_core::{ChannelModel, PhasePoint, QuadratureSpec, Symbol};

/// `⟨α|β⟩ = e^{-(|α|²+|β|²)/2} Σ_n (ᾱβ)^n / n!`, summed in Fock space.
fn fock_overlap(a: Complex64, b: Complex64) -> Complex64 {
    let x = a.conj() * b;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..200 {
        term *= x / n as f64;
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    sum * (-(a.norm_sqr() + b.norm_sqr()) / 2.0).exp()
}

#[test]
fn overlap_matches_fock_space_inner_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (ri, rj) = (rng.random::<f64>() * 2.5, rng.random::<f64>() * 2.5);
        let (si, sj) = (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
        let (modulus, phase) = coherent_overlap(ri, si, rj, sj).unwrap();
        let fock = fock_overlap(Complex64::from_polar(ri, si), Complex64::from_polar(rj, sj));
        assert_abs_diff_eq!(modulus, fock.norm(), epsilon = 1e-12);
        // The returned phase is that of ⟨α_j|α_i⟩.
        if modulus > 1e-8 {
            let gap = (phase + fock.arg()).rem_euclid(TAU);
            assert!(gap.min(TAU - gap) < 1e-9, "phase {phase} vs {}", fock.arg());
        }
    }
}

#[test]
fn fock_reference_value() {
    // ⟨0.7|0.7 e^{2πi/3}⟩ at 40 digits: modulus 0.47950545897489408953, phase 0.42435244785437493691.
    let v = fock_overlap(Complex64::new(0.7, 0.0), Complex64::from_polar(0.7, TAU / 3.0));
    assert_abs_diff_eq!(v.norm(), 0.479_505_458_974_894_09, epsilon = 1e-15);
    assert_abs_diff_eq!(v.arg(), 0.424_352_447_854_374_94, epsilon = 1e-15);
}

#[test]
fn product_of_symmetric_overlaps_carries_minus_triangle_phase() {
    for r in [0.1, 0.5, 0.9, 1.3] {
        let sigma = Symbol::ALL.map(Symbol::phase);
        let pairs = [(0, 1), (1, 2), (2, 0)];
        let mut total = 0.0;
        let mut sides = [0.0; 3];
        for (k, (i, j)) in pairs.into_iter().enumerate() {
            let (m, ph) = coherent_overlap(r, sigma[i], r, sigma[j]).unwrap();
            total += ph;
            sides[k] = (-2.0 * m.ln()).sqrt();
        }
        let theta = triangle_phase(sides[0], sides[1], sides[2]).unwrap();
        assert_abs_diff_eq!(total, -theta, epsilon = 1e-12);
        assert_abs_diff_eq!(theta, TRIANGLE_PHASE_FACTOR * r * r, epsilon = 1e-12);
    }
}

#[test]
fn phase_is_a_function_of_radii_and_modulus() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (ri, rj) = (0.1 + rng.random::<f64>(), 0.1 + rng.random::<f64>());
        let (si, sj) = (rng.random::<f64>() * PI, rng.random::<f64>() * PI);
        let (m, ph) = coherent_overlap(ri, si, rj, sj).unwrap();
        let side = (-2.0 * m.ln()).max(0.0).sqrt();
        // Triangle (origin, α_i, α_j) with sides r_i, r_j, c; phase magnitude is twice its area.
        let area2 = triangle_phase(ri, rj, side).unwrap();
        assert_abs_diff_eq!(ph.abs(), area2, epsilon = 1e-9);
    }
}

#[test]
fn eve_and_bob_phases_split_the_triangle() {
    let ch = ChannelModel::pure_loss(0.3, 0.8).unwrap();
    assert_abs_diff_eq!(
        ch.eve_phase() + ch.bob_phase(),
        TRIANGLE_PHASE_FACTOR * 0.64,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(ch.eve_overlap_modulus() * ch.bob_overlap_modulus(), (-1.5f64 * 0.64).exp(), epsilon = 1e-15);
}

#[test]
fn outcome_density_normalizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = QuadratureSpec::default();
    for _ in 0..20 {
        let eta = rng.random::<f64>();
        let delta = rng.random::<f64>() * 0.5;
        let r = rng.random::<f64>() * 2.0;
        let ch = ChannelModel::new(eta, delta, r, 0.0).unwrap();
        let total = integrate_polar(|rad, phi| ch.p_y(&PhasePoint::new(rad, phi).unwrap()), &ch, &spec).unwrap();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
    }
}

#[test]
fn conditional_density_normalizes_per_symbol() {
    let ch = ChannelModel::new(0.6, 0.05, 1.1, 0.0).unwrap();
    let spec = QuadratureSpec::default();
    for x in Symbol::ALL {
        let total = integrate_polar(|r, phi| ch.p_y_given_x(&PhasePoint::new(r, phi).unwrap(), x), &ch, &spec).unwrap();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
    }
}

#[test]
fn posterior_sums_to_one_and_matches_bayes() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ch = ChannelModel::new(0.7, 0.02, 0.9, 0.0).unwrap();
    for _ in 0..1000 {
        let y = PhasePoint::new(rng.random::<f64>() * 6.0, rng.random::<f64>() * TAU).unwrap();
        let post = ch.posterior(&y);
        assert_abs_diff_eq!(post.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let py = ch.p_y(&y);
        if py > 1e-200 {
            for x in Symbol::ALL {
                let bayes = ch.p_y_given_x(&y, x) / (3.0 * py);
                assert_abs_diff_eq!(post[x.index()], bayes, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn conditional_entropy_reference_value() {
    // (1+V)log₂(1+V) - V log₂V at V = 0.005, evaluated with 40-digit arithmetic.
    assert_abs_diff_eq!(h_e_given_x_from_noise(0.01), 0.045_450_759_860_098_561_7, epsilon = 1e-15);
}
