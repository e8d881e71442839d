//! Phase-space tomography of continuous-variable quantum states.
//!
//! The pipeline reconstructs a Husimi-Q (or Wigner) quasi-probability surface
//! from samples at the Padua points — the near-optimal nodes for total-degree
//! bivariate interpolation — and reads density-matrix elements directly off
//! the interpolating polynomial, together with analytic noise bounds.
//!
//! Modules follow the pipeline order:
//!
//! * [`states`] — truncated-Fock states and exact Q / Wigner oracles
//! * [`padua`] — sampling grids, interpolation, evaluation, Lebesgue estimate
//! * [`polar`] — Chebyshev-to-monomial-to-polar basis changes (192-bit core)
//! * [`estimator`] — density-matrix elements, constant tables, error bounds
//! * [`experiments`] — convergence / noise / thresholding / comparison studies
//! * [`io`] — file formats and run manifests

pub mod bigfloat;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod io;
pub mod padua;
pub mod polar;
pub mod states;

pub use error::{Result, TomoError};
pub use estimator::{
    comb_factor, d_coeff, estimate_with_errors, nearest_psd, rho_element, rho_matrix,
    sigma_bound, ChebToRhoMap, DmConstants, EstimateResult, EstimateSet,
};
pub use experiments::{
    convergence_study, equidistant_comparison_study, noise_study, sample_state, threshold_equidistant,
    threshold_padua, threshold_study, StudyConfig, StudyKind, StudyResult,
};
pub use padua::{
    equidistant_grid, eval_cheb, eval_grid, interpolate_padua, interpolate_tensor,
    lebesgue_estimate, padua_points, ChebCoeffs, FunctionTag, GridKind, MeasurementRecord,
    PhaseGrid, DEFAULT_HALF_WIDTH,
};
pub use polar::{cheb_to_monomial_truncated, monomial_to_polar, polar_from_record, PolarPoly};
pub use states::{
    coherent_overlap, q_function, test_state, to_density_matrix, wigner_function, DensityMatrix,
    FockState, PhasePoint,
};
