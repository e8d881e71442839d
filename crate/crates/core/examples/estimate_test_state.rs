//! Minimal pipeline run: sample the built-in test state, estimate the
//! density matrix, print the elements with their error budget.

use padua_tomo::{
    estimate_with_errors, padua_points, sample_state, test_state, to_density_matrix, FunctionTag,
};

fn main() {
    let rho = to_density_matrix(&test_state());
    // the window trades reconstruction bias against noise amplification:
    // tight windows resolve the origin derivatives but blow up 1/L^q noise
    // gains, wide ones do the opposite
    let grid = padua_points(24, 2.0).unwrap();
    let record = sample_state(&rho, &grid, FunctionTag::HusimiQ, 1e-6, 7).unwrap();
    let set = estimate_with_errors(&record, Some(&rho), 4, 1.0).unwrap();
    for r in &set.results {
        println!(
            "rho_{}{} = {:>11.4e} {:+.4e}i  +/- {:.2e} (noise) +/- {:.2e} (bias)",
            r.j,
            r.k,
            r.value.re,
            r.value.im,
            r.sigma_bound,
            r.recon_bound.unwrap()
        );
    }
    let r22 = set.get(2, 2);
    println!("\nrho_22 = {} (ideal 0.5)", r22.value);
}
