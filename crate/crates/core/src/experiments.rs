//! Deterministic, seedable batch studies: interpolation-error convergence,
//! noise propagation through the estimator, measurement thresholding, and the
//! equidistant-grid comparison.
//!
//! Noise draws are keyed by (seed, stream, point index) on a counter-based
//! generator, so any cell can be recomputed independently and results are
//! byte-reproducible regardless of evaluation order.

use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::estimator::{sigma_bound, ChebToRhoMap};
use crate::padua::{
    equidistant_grid, interpolate_padua, interpolate_tensor, padua_points, FunctionTag,
    MeasurementRecord, PhaseGrid,
};
use crate::polar::{cheb_to_monomial_truncated, monomial_to_polar};
use crate::states::{q_function, wigner_function, DensityMatrix, PhasePoint};

/// Standard-normal draw for (seed, stream, point): two words of a ChaCha8
/// stream through the Box-Muller transform, at a fixed counter offset so
/// consumption never depends on neighbouring points.
pub fn noise_value(seed: u64, stream: u64, point: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(point as u128 * 4);
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn oracle_value(rho: &DensityMatrix, tag: FunctionTag, p: PhasePoint) -> f64 {
    match tag {
        FunctionTag::HusimiQ => q_function(rho, p),
        FunctionTag::Wigner => wigner_function(rho, p),
    }
}

/// Samples the exact quasi-probability on a grid and adds i.i.d. Gaussian
/// noise of standard deviation epsilon (stream 0 of the seed).
pub fn sample_state(
    rho: &DensityMatrix,
    grid: &PhaseGrid,
    tag: FunctionTag,
    epsilon: f64,
    seed: u64,
) -> Result<MeasurementRecord> {
    sample_state_stream(rho, grid, tag, epsilon, seed, 0)
}

/// Same as `sample_state` with an explicit noise stream (trial index).
pub fn sample_state_stream(
    rho: &DensityMatrix,
    grid: &PhaseGrid,
    tag: FunctionTag,
    epsilon: f64,
    seed: u64,
    stream: u64,
) -> Result<MeasurementRecord> {
    if epsilon < 0.0 {
        return Err(TomoError::InvalidInput(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let mut values: Vec<f64> =
        grid.points.iter().map(|&p| oracle_value(rho, tag, p)).collect();
    if epsilon > 0.0 {
        for (i, v) in values.iter_mut().enumerate() {
            *v += epsilon * noise_value(seed, stream, i);
        }
    }
    MeasurementRecord::new(grid.clone(), values, epsilon, tag)
}

/// Zeroes every sample with |v| below the threshold; the grid is unchanged so
/// interpolation stays valid. Returns the thresholded record and the count of
/// surviving nonzero measurements.
pub fn threshold_padua(record: &MeasurementRecord, threshold: f64) -> (MeasurementRecord, usize) {
    let values: Vec<f64> = record
        .values
        .iter()
        .map(|&v| if v.abs() < threshold { 0.0 } else { v })
        .collect();
    let surviving = values.iter().filter(|v| **v != 0.0).count();
    let rec = MeasurementRecord {
        grid: record.grid.clone(),
        values,
        noise_sigma: record.noise_sigma,
        function: record.function,
    };
    (rec, surviving)
}

/// Keeps the `keep` largest-magnitude samples and zeroes the rest, ties
/// broken by grid order.
pub fn threshold_equidistant(
    record: &MeasurementRecord,
    keep: usize,
) -> Result<(MeasurementRecord, usize)> {
    let n = record.values.len();
    if keep > n {
        return Err(TomoError::InvalidInput(format!("keep = {keep} exceeds {n} samples")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        record.values[b]
            .abs()
            .partial_cmp(&record.values[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut values = vec![0.0; n];
    for &i in order.iter().take(keep) {
        values[i] = record.values[i];
    }
    let surviving = values.iter().filter(|v| **v != 0.0).count();
    let rec = MeasurementRecord {
        grid: record.grid.clone(),
        values,
        noise_sigma: record.noise_sigma,
        function: record.function,
    };
    Ok((rec, surviving))
}

/// Which study a `StudyResult` came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Convergence,
    Noise,
    Threshold,
    Equidistant,
}

/// Batch-job configuration shared by all studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    /// ground-truth state (wire form; resolved through `io::resolve_state`)
    pub state: crate::io::StateSpec,
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_d_max")]
    pub d_max: usize,
    #[serde(default = "default_k_factor")]
    pub k_factor: f64,
    /// equidistant-study grid sizes (rows = cols), inclusive
    #[serde(default = "default_rows_range")]
    pub rows_range: (usize, usize),
    /// threshold-study magnitude cutoff
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// probe-grid resolution for interpolant comparisons
    #[serde(default = "default_probe_resolution")]
    pub probe_resolution: usize,
}

fn default_epsilons() -> Vec<f64> {
    vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
}
fn default_trials() -> usize {
    10_000
}
fn default_half_width() -> f64 {
    crate::padua::DEFAULT_HALF_WIDTH
}
fn default_d_max() -> usize {
    4
}
fn default_k_factor() -> f64 {
    1.0
}
fn default_rows_range() -> (usize, usize) {
    (5, 16)
}
fn default_threshold() -> f64 {
    1e-2
}
fn default_probe_resolution() -> usize {
    80
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(TomoError::InvalidInput(format!(
                "n-range [{}, {}] is empty or degenerate",
                self.n_min, self.n_max
            )));
        }
        if self.trials == 0 {
            return Err(TomoError::InvalidInput("trials must be >= 1".into()));
        }
        if !self.half_width.is_finite() || self.half_width <= 0.0 {
            return Err(TomoError::InvalidInput("half-width must be positive".into()));
        }
        if 2 * self.d_max > self.n_min {
            return Err(TomoError::InsufficientOrder(format!(
                "d_max = {} needs n >= {}, range starts at {}",
                self.d_max,
                2 * self.d_max,
                self.n_min
            )));
        }
        Ok(())
    }

    pub fn resolve_state(&self) -> Result<DensityMatrix> {
        self.state.to_density_matrix()
    }
}

/// One aggregate per (n, epsilon, j, k).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyCell {
    pub n: usize,
    pub n_points: usize,
    pub epsilon: f64,
    pub j: usize,
    pub k: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    /// std of the estimate over trials, centered on the noiseless value
    pub sigma: Option<f64>,
    /// reconstruction error; relative when the ideal element is nonzero
    pub delta: Option<f64>,
    pub delta_is_relative: bool,
}

/// Power-law fit sigma = A eps^p for one element at one grid size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseFit {
    pub j: usize,
    pub k: usize,
    pub n: usize,
    pub n_points: usize,
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// prefactor divided by the analytic sigma-bound bracket at K = 1
    pub k_cell: f64,
}

/// Measurement-thinning comparison numbers (thresholded Padua vs the
/// keep-largest equidistant counterpart).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: usize,
    pub rows: usize,
    pub threshold: f64,
    pub surviving: usize,
    pub total: usize,
    pub keep: usize,
    pub max_dev_thresholded_vs_full: f64,
    pub max_dev_thresholded_vs_exact: f64,
    pub max_dev_equidistant_vs_exact: f64,
    pub probe_resolution: usize,
}

/// Output of any study; unused sections stay empty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub cells: Vec<StudyCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub equidistant_cells: Vec<StudyCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise_fits: Vec<NoiseFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_empirical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_report: Option<ThresholdReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// sigma is centered on the noiseless reconstruction rho[N, 0]
    pub sigma_reference: String,
}

fn sigma_reference_note() -> String {
    "sigma centered on the noiseless reconstruction rho[N,0]".to_string()
}

fn ideal_entry(rho: &DensityMatrix, j: usize, k: usize) -> C64 {
    if j < rho.dim() && k < rho.dim() {
        rho.entry(j, k)
    } else {
        C64::new(0.0, 0.0)
    }
}

/// Noiseless pipeline per n: relative reconstruction error for every element
/// with a nonzero ideal value, absolute (flagged) otherwise.
pub fn convergence_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let rho = cfg.resolve_state()?;
    let d_max = cfg.d_max;
    let mut cells = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        let grid = padua_points(n, cfg.half_width)?;
        let record = sample_state(&rho, &grid, FunctionTag::HusimiQ, 0.0, cfg.seed)?;
        let mono = cheb_to_monomial_truncated(&interpolate_padua(&record)?, 2 * d_max)?;
        let est = crate::estimator::rho_matrix(&monomial_to_polar(&mono), d_max)?;
        for j in 0..=d_max {
            for k in 0..=d_max {
                let ideal = ideal_entry(&rho, j, k);
                let err = (est.entry(j, k) - ideal).norm();
                let relative = ideal.norm() > 1e-12;
                cells.push(StudyCell {
                    n,
                    n_points: grid.len(),
                    epsilon: 0.0,
                    j,
                    k,
                    mean_re: est.entry(j, k).re,
                    mean_im: est.entry(j, k).im,
                    sigma: None,
                    delta: Some(if relative { err / ideal.norm() } else { err }),
                    delta_is_relative: relative,
                });
            }
        }
    }
    Ok(StudyResult {
        kind: StudyKind::Convergence,
        cells,
        equidistant_cells: Vec::new(),
        noise_fits: Vec::new(),
        k_empirical: None,
        threshold_report: None,
        warnings: Vec::new(),
        sigma_reference: sigma_reference_note(),
    })
}

/// Ordinary least squares of y on x; returns (slope, intercept, r_squared).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

/// Monte-Carlo noise propagation: per (n, epsilon, j, k) the standard
/// deviation of the estimate over `trials` noisy records, then a log-log
/// power-law fit per element and the empirical K calibration.
pub fn noise_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let rho = cfg.resolve_state()?;
    let d_max = cfg.d_max;
    let dim = d_max + 1;
    let mut cells = Vec::new();
    let mut fits = Vec::new();
    let mut warnings = Vec::new();
    if cfg.trials < 201 {
        warnings.push(format!(
            "trials = {} gives sampling error of sigma above 5% (need >= 201)",
            cfg.trials
        ));
    }
    let mut epsilons = cfg.epsilons.clone();
    epsilons.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut k_emp: f64 = 0.0;
    for n in cfg.n_min..=cfg.n_max {
        let grid = padua_points(n, cfg.half_width)?;
        let base: Vec<f64> =
            grid.points.iter().map(|&p| q_function(&rho, p)).collect();
        let map = ChebToRhoMap::new(n, cfg.half_width, d_max)?;
        let clean_rec =
            MeasurementRecord::new(grid.clone(), base.clone(), 0.0, FunctionTag::HusimiQ)?;
        let center = map.apply_record(&clean_rec)?;

        let mut sigma_tab = vec![vec![0.0; dim * dim]; epsilons.len()];
        for (ei, &eps) in epsilons.iter().enumerate() {
            let mut sum = vec![C64::new(0.0, 0.0); dim * dim];
            let mut sq = vec![0.0; dim * dim];
            for trial in 0..cfg.trials {
                let stream = (ei as u64) << 32 | trial as u64;
                let values: Vec<f64> = base
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v + eps * noise_value(cfg.seed, stream, i))
                    .collect();
                let rec =
                    MeasurementRecord::new(grid.clone(), values, eps, FunctionTag::HusimiQ)?;
                let est = map.apply_record(&rec)?;
                for e in 0..dim * dim {
                    sum[e] += est[e];
                    sq[e] += (est[e] - center[e]).norm_sqr();
                }
            }
            let t = cfg.trials as f64;
            for j in 0..dim {
                for k in 0..dim {
                    let e = j * dim + k;
                    let sigma = (sq[e] / (t - 1.0).max(1.0)).sqrt();
                    sigma_tab[ei][e] = sigma;
                    // direct calibration: noise gain per unit epsilon against
                    // the analytic bracket, maximized over every cell
                    k_emp = k_emp.max(sigma / (eps * sigma_bound(j, k, 1.0, 1.0)));
                    cells.push(StudyCell {
                        n,
                        n_points: grid.len(),
                        epsilon: eps,
                        j,
                        k,
                        mean_re: sum[e].re / t,
                        mean_im: sum[e].im / t,
                        sigma: Some(sigma),
                        delta: None,
                        delta_is_relative: false,
                    });
                }
            }
        }
        // per-element power-law fit over the epsilon set
        let lx: Vec<f64> = epsilons.iter().map(|e| e.log10()).collect();
        for j in 0..dim {
            for k in 0..dim {
                let e = j * dim + k;
                let ly: Vec<f64> =
                    (0..epsilons.len()).map(|ei| sigma_tab[ei][e].max(1e-300).log10()).collect();
                let (p, b, r2) = linear_fit(&lx, &ly);
                let a = 10f64.powf(b);
                let bracket = sigma_bound(j, k, 1.0, 1.0);
                let k_cell = a / bracket;
                if r2 < 0.99 {
                    warnings.push(format!("noise fit for rho_{j}{k} at n={n} has R^2 = {r2:.4}"));
                }
                fits.push(NoiseFit {
                    j,
                    k,
                    n,
                    n_points: grid.len(),
                    exponent: p,
                    prefactor: a,
                    r_squared: r2,
                    k_cell,
                });
            }
        }
    }
    Ok(StudyResult {
        kind: StudyKind::Noise,
        cells,
        equidistant_cells: Vec::new(),
        noise_fits: fits,
        k_empirical: Some(k_emp),
        threshold_report: None,
        warnings,
        sigma_reference: sigma_reference_note(),
    })
}

/// Thresholded-Padua vs keep-largest-equidistant comparison at the first n of
/// the configured range, probing interpolants against the exact oracle.
pub fn threshold_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let rho = cfg.resolve_state()?;
    let n = cfg.n_min;
    let l = cfg.half_width;
    let rows = cfg.rows_range.1;

    let grid = padua_points(n, l)?;
    let record = sample_state(&rho, &grid, FunctionTag::HusimiQ, 0.0, cfg.seed)?;
    let (thresholded, surviving) = threshold_padua(&record, cfg.threshold);
    let full_interp = interpolate_padua(&record)?;
    let thr_interp = interpolate_padua(&thresholded)?;

    let eq_grid = equidistant_grid(rows, rows, l)?;
    let eq_record = sample_state(&rho, &eq_grid, FunctionTag::HusimiQ, 0.0, cfg.seed)?;
    let (eq_kept, _) = threshold_equidistant(&eq_record, surviving)?;
    let eq_interp = interpolate_tensor(&eq_kept)?;

    let res = cfg.probe_resolution;
    let coord = |i: usize| -l + 2.0 * l * i as f64 / (res - 1) as f64;
    let (mut dev_full, mut dev_exact, mut dev_eq) = (0.0_f64, 0.0_f64, 0.0_f64);
    for ix in 0..res {
        for iy in 0..res {
            let p = PhasePoint::new(coord(ix), coord(iy));
            let exact = q_function(&rho, p);
            let v_full = full_interp.eval(p);
            let v_thr = thr_interp.eval(p);
            let v_eq = eq_interp.eval(p);
            dev_full = dev_full.max((v_thr - v_full).abs());
            dev_exact = dev_exact.max((v_thr - exact).abs());
            dev_eq = dev_eq.max((v_eq - exact).abs());
        }
    }
    Ok(StudyResult {
        kind: StudyKind::Threshold,
        cells: Vec::new(),
        equidistant_cells: Vec::new(),
        noise_fits: Vec::new(),
        k_empirical: None,
        threshold_report: Some(ThresholdReport {
            n,
            rows,
            threshold: cfg.threshold,
            surviving,
            total: record.values.len(),
            keep: surviving,
            max_dev_thresholded_vs_full: dev_full,
            max_dev_thresholded_vs_exact: dev_exact,
            max_dev_equidistant_vs_exact: dev_eq,
            probe_resolution: res,
        }),
        warnings: Vec::new(),
        sigma_reference: sigma_reference_note(),
    })
}

/// Reconstruction error of the tensor-product equidistant pipeline alongside
/// the Padua pipeline at matched numbers of samples.
pub fn equidistant_comparison_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let rho = cfg.resolve_state()?;
    let l = cfg.half_width;
    let (rows_min, rows_max) = cfg.rows_range;
    if rows_min < 2 || rows_min > rows_max {
        return Err(TomoError::InvalidInput(format!(
            "rows range [{rows_min}, {rows_max}] is empty or degenerate"
        )));
    }
    let mut eq_cells = Vec::new();
    let mut pd_cells = Vec::new();
    for rows in rows_min..=rows_max {
        let n_eq = rows - 1;
        let d_eff = cfg.d_max.min(n_eq / 2);
        let eq_grid = equidistant_grid(rows, rows, l)?;
        let eq_rec = sample_state(&rho, &eq_grid, FunctionTag::HusimiQ, 0.0, cfg.seed)?;
        let eq_cheb = interpolate_tensor(&eq_rec)?;
        let eq_est = crate::estimator::rho_matrix(
            &monomial_to_polar(&cheb_to_monomial_truncated(&eq_cheb, 2 * d_eff)?),
            d_eff,
        )?;
        push_delta_cells(&mut eq_cells, n_eq, rows * rows, &eq_est, &rho, d_eff);

        // Padua order with the closest point count
        let target = rows * rows;
        let n_pd = (2 * cfg.d_max..=64)
            .min_by_key(|&n| ((n + 1) * (n + 2) / 2).abs_diff(target))
            .unwrap();
        let pd_grid = padua_points(n_pd, l)?;
        let pd_rec = sample_state(&rho, &pd_grid, FunctionTag::HusimiQ, 0.0, cfg.seed)?;
        let pd_est = crate::estimator::rho_matrix(
            &monomial_to_polar(&cheb_to_monomial_truncated(
                &interpolate_padua(&pd_rec)?,
                2 * cfg.d_max,
            )?),
            cfg.d_max,
        )?;
        push_delta_cells(&mut pd_cells, n_pd, pd_grid.len(), &pd_est, &rho, cfg.d_max);
    }
    Ok(StudyResult {
        kind: StudyKind::Equidistant,
        cells: pd_cells,
        equidistant_cells: eq_cells,
        noise_fits: Vec::new(),
        k_empirical: None,
        threshold_report: None,
        warnings: Vec::new(),
        sigma_reference: sigma_reference_note(),
    })
}

fn push_delta_cells(
    cells: &mut Vec<StudyCell>,
    n: usize,
    n_points: usize,
    est: &DensityMatrix,
    ideal: &DensityMatrix,
    d_max: usize,
) {
    for j in 0..=d_max {
        for k in 0..=d_max {
            let id = ideal_entry(ideal, j, k);
            let err = (est.entry(j, k) - id).norm();
            let relative = id.norm() > 1e-12;
            cells.push(StudyCell {
                n,
                n_points,
                epsilon: 0.0,
                j,
                k,
                mean_re: est.entry(j, k).re,
                mean_im: est.entry(j, k).im,
                sigma: None,
                delta: Some(if relative { err / id.norm() } else { err }),
                delta_is_relative: relative,
            });
        }
    }
}
