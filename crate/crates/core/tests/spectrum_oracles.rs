//! Spectrum routes checked against each other and against a Jacobi
//! eigensolver on the real 6×6 embedding of the Gram matrix.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use tpsk_core::entropy::{h3, majorizes, ProbabilityTriple};
use tpsk_core::spectrum::{
    char_coeffs_general, gram_eigenvalues, gram_spectrum_oracle, is_valid, spectrum, spectrum_uniform,
};
use tpsk_core::{EnsembleParams, GeneralOverlaps};

/// Cyclic Jacobi on a symmetric matrix; returns eigenvalues descending.
fn jacobi_eigenvalues<const N: usize>(mut a: [[f64; N]; N]) -> [f64; N] {
    for _sweep in 0..100 {
        let off: f64 = (0..N)
            .flat_map(|i| (0..N).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d = [0.0; N];
    for i in 0..N {
        d[i] = a[i][i];
    }
    d.sort_by(|x, y| y.total_cmp(x));
    d
}

/// Eigenvalues of a Hermitian 3×3 matrix via its real embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is the original one doubled.
fn hermitian_eigenvalues(m: &[[Complex64; 3]; 3]) -> [f64; 3] {
    let mut big = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            big[i][j] = m[i][j].re;
            big[i + 3][j + 3] = m[i][j].re;
            big[i][j + 3] = -m[i][j].im;
            big[i + 3][j] = m[i][j].im;
        }
    }
    let d = jacobi_eigenvalues(big);
    [0.5 * (d[0] + d[1]), 0.5 * (d[2] + d[3]), 0.5 * (d[4] + d[5])]
}

fn simplex() -> impl Strategy<Value = [f64; 3]> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        [lo, hi - lo, 1.0 - hi]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 2000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn trig_route_matches_gram_oracle(probs in simplex(), z in 0.0f64..1.0, theta in 0.0f64..PI) {
        let e = EnsembleParams::new(probs, z, theta).unwrap();
        if !is_valid(&e).valid {
            return Ok(());
        }
        let Ok(fast) = spectrum(&e) else { return Ok(()); };
        let ov = GeneralOverlaps::from_uniform(z, theta).unwrap();
        let slow = gram_spectrum_oracle(&probs, &ov).unwrap();
        for k in 0..3 {
            prop_assert!((fast.as_array()[k] - slow.as_array()[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn gram_oracle_matches_jacobi(
        probs in simplex(),
        moduli in prop::array::uniform3(0.0f64..1.0),
        phases in prop::array::uniform3(0.0f64..(2.0 * PI)),
    ) {
        let ov = GeneralOverlaps::from_polar(moduli, phases).unwrap();
        let reference = hermitian_eigenvalues(&ov.gram_matrix(&probs));
        let roots = gram_eigenvalues(&probs, &ov).unwrap();
        for k in 0..3 {
            prop_assert!((roots[k] - reference[k]).abs() < 1e-9, "{roots:?} vs {reference:?}");
        }
    }

    #[test]
    fn char_coeffs_reproduce_jacobi_invariants(
        probs in simplex(),
        moduli in prop::array::uniform3(0.0f64..1.0),
        phases in prop::array::uniform3(0.0f64..(2.0 * PI)),
    ) {
        let ov = GeneralOverlaps::from_polar(moduli, phases).unwrap();
        let x = hermitian_eigenvalues(&ov.gram_matrix(&probs));
        let (c, d) = char_coeffs_general(&probs, &ov).unwrap();
        prop_assert!((c - (x[0] * x[1] + x[0] * x[2] + x[1] * x[2])).abs() < 1e-12);
        prop_assert!((d + x[0] * x[1] * x[2]).abs() < 1e-12);
    }

    #[test]
    fn overlap_phase_is_gauge_invariant(
        probs in simplex(),
        z in 0.0f64..1.0,
        theta in 0.0f64..(PI / 2.0),
        a in 0.0f64..(2.0 * PI),
        b in 0.0f64..(2.0 * PI),
    ) {
        let direct = GeneralOverlaps::from_uniform(z, theta).unwrap();
        let spread = GeneralOverlaps::from_polar([z; 3], [a, b, theta - a - b]).unwrap();
        let x = gram_eigenvalues(&probs, &direct).unwrap();
        let y = gram_eigenvalues(&probs, &spread).unwrap();
        for k in 0..3 {
            prop_assert!((x[k] - y[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn larger_overlap_majorizes(
        probs in simplex(),
        z1 in 0.0f64..1.0,
        z2 in 0.0f64..1.0,
        theta in 0.0f64..(PI / 2.0),
    ) {
        let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
        let e_lo = EnsembleParams::new(probs, lo, theta).unwrap();
        let e_hi = EnsembleParams::new(probs, hi, theta).unwrap();
        let (Ok(s_lo), Ok(s_hi)) = (spectrum(&e_lo), spectrum(&e_hi)) else { return Ok(()); };
        let (u, v) = (ProbabilityTriple::from(s_hi), ProbabilityTriple::from(s_lo));
        prop_assert!(majorizes(&u, &v));
        prop_assert!(h3(&u) <= h3(&v) + 1e-10);
    }
}

#[test]
fn uniform_closed_form_tracks_general_route_at_degenerate_points() {
    for z in [0.0, 0.25, 0.5, 0.999, 1.0] {
        let closed = spectrum_uniform(z, 0.0).unwrap().as_array();
        let general = spectrum(&EnsembleParams::uniform(z, 0.0).unwrap()).unwrap().as_array();
        for k in 0..3 {
            assert_abs_diff_eq!(closed[k], general[k], epsilon = 1e-12);
        }
    }
}

#[test]
fn jacobi_reference_on_known_matrix() {
    let d = jacobi_eigenvalues([[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]]);
    assert_abs_diff_eq!(d[0], 5.0, epsilon = 1e-14);
    assert_abs_diff_eq!(d[1], 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(d[2], 1.0, epsilon = 1e-14);
}
