//! Cross-module pipeline checks: oracle consistency, rotation covariance,
//! grid-family equivalence on exact polynomials, and bias-bound behaviour.

use num_complex::Complex64 as C64;
use padua_tomo::estimator::{estimate_with_errors, rho_matrix};
use padua_tomo::experiments::sample_state;
use padua_tomo::padua::{
    equidistant_grid, interpolate_padua, interpolate_tensor, padua_points, ChebCoeffs,
    FunctionTag, MeasurementRecord,
};
use padua_tomo::polar::{cheb_to_monomial_truncated, monomial_to_polar, polar_from_record};
use padua_tomo::states::{
    q_function, test_state, to_density_matrix, DensityMatrix, FockState, PhasePoint,
};

fn q_record(rho: &DensityMatrix, n: usize, l: f64) -> MeasurementRecord {
    let grid = padua_points(n, l).unwrap();
    sample_state(rho, &grid, FunctionTag::HusimiQ, 0.0, 0).unwrap()
}

#[test]
fn fock_states_reconstruct_on_the_diagonal() {
    // |m> for m <= 3 at n = 16: diagonal within 1e-4 of the unit entry,
    // everything else within 1e-4 of zero
    for m in 0..=3usize {
        let mut amps = vec![C64::new(0.0, 0.0); m + 1];
        amps[m] = C64::new(1.0, 0.0);
        let rho = to_density_matrix(&FockState::new(amps).unwrap());
        let rec = q_record(&rho, 16, 0.4);
        let est = rho_matrix(&polar_from_record(&rec, 8).unwrap(), 4).unwrap();
        for j in 0..=4 {
            for k in 0..=4 {
                let expect = if j == m && k == m { 1.0 } else { 0.0 };
                let dev = (est.entry(j, k) - C64::new(expect, 0.0)).norm();
                assert!(dev < 1e-4, "|{m}>: rho_{j}{k} off by {dev}");
            }
        }
    }
}

#[test]
fn rotation_covariance_of_polar_coefficients() {
    // rotating the state by phi rotates Q by phi, so c_{m,p} picks up e^{ip phi}
    // and |c_{m,p}| is invariant
    let phi = std::f64::consts::FRAC_PI_2;
    let base = test_state();
    let rotated = FockState::new(
        base.amplitudes()
            .iter()
            .enumerate()
            .map(|(n, a)| a * C64::from_polar(1.0, -(n as f64) * phi))
            .collect(),
    )
    .unwrap();
    let (n, l, q_max) = (20, 1.2, 8);
    let p1 = polar_from_record(&q_record(&to_density_matrix(&base), n, l), q_max).unwrap();
    let p2 = polar_from_record(&q_record(&to_density_matrix(&rotated), n, l), q_max).unwrap();
    for m in 0..=q_max {
        for p in -(m as i64)..=(m as i64) {
            let (a, b) = (p1.coeff(m, p), p2.coeff(m, p));
            assert!(
                (a.norm() - b.norm()).abs() < 1e-6,
                "|c_{m},{p}| changed: {} vs {}",
                a.norm(),
                b.norm()
            );
            // the phase relation c' = c e^{ip phi} holds for the function's
            // own coefficients; entries below the interpolation-error floor
            // are excluded (they do not transform)
            if a.norm() > 1e-3 {
                let expect = a * C64::from_polar(1.0, p as f64 * phi);
                assert!(
                    (b - expect).norm() < 1e-6,
                    "c_{m},{p}: {b} vs rotated {expect}"
                );
            }
        }
    }
}

#[test]
fn pipelines_agree_on_exact_polynomials() {
    // a total-degree-4 polynomial sampled on both grid families gives the
    // same density-matrix estimate, because both reproduce it exactly
    let l = 1.3;
    let mut poly = ChebCoeffs::zero(4, l);
    let mut s = 0.77_f64;
    for a in 0..=4usize {
        for b in 0..=(4 - a) {
            s = (s * 881.0).fract();
            poly.set_coeff(a, b, (2.0 * s - 1.0) * 0.1);
        }
    }
    let pd_grid = padua_points(6, l).unwrap();
    let pd_vals: Vec<f64> = pd_grid.points.iter().map(|&p| poly.eval(p)).collect();
    let pd_rec = MeasurementRecord::new(pd_grid, pd_vals, 0.0, FunctionTag::HusimiQ).unwrap();

    let eq_grid = equidistant_grid(7, 7, l).unwrap();
    let eq_vals: Vec<f64> = eq_grid.points.iter().map(|&p| poly.eval(p)).collect();
    let eq_rec = MeasurementRecord::new(eq_grid, eq_vals, 0.0, FunctionTag::HusimiQ).unwrap();

    let d_max = 2;
    let pd_est = rho_matrix(
        &monomial_to_polar(
            &cheb_to_monomial_truncated(&interpolate_padua(&pd_rec).unwrap(), 2 * d_max).unwrap(),
        ),
        d_max,
    )
    .unwrap();
    let eq_est = rho_matrix(
        &monomial_to_polar(
            &cheb_to_monomial_truncated(&interpolate_tensor(&eq_rec).unwrap(), 2 * d_max).unwrap(),
        ),
        d_max,
    )
    .unwrap();
    for j in 0..=d_max {
        for k in 0..=d_max {
            let dev = (pd_est.entry(j, k) - eq_est.entry(j, k)).norm();
            assert!(dev < 1e-10, "rho_{j}{k} differs by {dev}");
        }
    }
}

#[test]
fn recon_bound_shrinks_with_order() {
    let rho = to_density_matrix(&test_state());
    let l = 2.0;
    let at = |n: usize| {
        let rec = q_record(&rho, n, l);
        let set = estimate_with_errors(&rec, Some(&rho), 4, 1.0).unwrap();
        set.get(4, 4).recon_bound.unwrap()
    };
    let (b20, b24) = (at(20), at(24));
    assert!(b24 < b20, "recon bound for rho_44: {b24} at n=24 vs {b20} at n=20");
}

#[test]
fn noiseless_estimate_has_zero_sigma_and_matching_bias() {
    let rho = to_density_matrix(&test_state());
    let rec = q_record(&rho, 14, 2.0);
    let set = estimate_with_errors(&rec, Some(&rho), 3, 1.0).unwrap();
    for r in &set.results {
        assert_eq!(r.sigma_bound, 0.0);
        // with a noiseless record, recon_bound is exactly |ideal - value|
        let ideal = if r.j < rho.dim() && r.k < rho.dim() {
            rho.entry(r.j, r.k)
        } else {
            C64::new(0.0, 0.0)
        };
        let direct = (ideal - r.value).norm();
        assert!((r.recon_bound.unwrap() - direct).abs() < 1e-14);
    }
}

#[test]
fn noise_dominated_warning_fires() {
    let rho = to_density_matrix(&test_state());
    let grid = padua_points(12, 2.0).unwrap();
    // huge noise drowns every element
    let rec = sample_state(&rho, &grid, FunctionTag::HusimiQ, 0.5, 9).unwrap();
    let set = estimate_with_errors(&rec, None, 3, 1.0).unwrap();
    assert!(!set.warnings.is_empty());
    assert!(set.note.is_some());
}

#[test]
fn wigner_record_interpolates_but_does_not_estimate() {
    use padua_tomo::states::wigner_function;
    let rho = to_density_matrix(&test_state());
    let grid = padua_points(12, 2.0).unwrap();
    let rec = sample_state(&rho, &grid, FunctionTag::Wigner, 0.0, 0).unwrap();
    // surface reconstruction works for Wigner samples
    let cheb = interpolate_padua(&rec).unwrap();
    let p = PhasePoint::new(0.4, -0.3);
    assert!((cheb.eval(p) - wigner_function(&rho, p)).abs() < 0.05);
    // density-matrix extraction is a Q-function construction
    assert!(estimate_with_errors(&rec, None, 2, 1.0).is_err());
}

#[test]
fn q_record_values_bounded_by_inv_pi() {
    let rho = to_density_matrix(&test_state());
    let rec = q_record(&rho, 20, 3.0);
    let bound = 1.0 / std::f64::consts::PI + 1e-12;
    assert!(rec.values.iter().all(|v| *v >= 0.0 && *v <= bound));
    assert!(rec.values.iter().cloned().fold(0.0_f64, f64::max) > 0.1);
    let _ = q_function(&rho, PhasePoint::origin());
}
