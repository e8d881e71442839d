//! Padua-point and equidistant sampling grids on a square phase-space window,
//! interpolation of sampled values into a bivariate Chebyshev expansion, and
//! evaluation / quality estimation of that expansion.
//!
//! The Padua family used here is the generating-curve set
//! (L cos(j pi/n), L cos(k pi/(n+1))) for 0 <= j <= n, 0 <= k <= n+1 with
//! j + k even, which has (n+1)(n+2)/2 nodes and is unisolvent for total
//! degree n.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, TomoError};
use crate::states::PhasePoint;

/// Default half-width of the phase-space window. At this setting the cutoff-4
/// test state has |Q| >= 1e-2 on exactly 65 of the 231 order-20 Padua nodes,
/// the count the thresholding experiments are built around.
pub const DEFAULT_HALF_WIDTH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridKind {
    Padua { n: usize },
    Equidistant { rows: usize, cols: usize },
    Custom,
}

/// An ordered set of phase-space sampling points on [-L, L]^2.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    pub kind: GridKind,
    pub half_width: f64,
    pub points: Vec<PhasePoint>,
}

impl PhaseGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Padua points of order n on [-L, L]^2, in lexicographic (j, k) order.
pub fn padua_points(n: usize, half_width: f64) -> Result<PhaseGrid> {
    if n == 0 {
        return Err(TomoError::InvalidGrid(
            "padua order n = 0 is degenerate; use n = 1 for a constant fit".into(),
        ));
    }
    if !half_width.is_finite() || half_width <= 0.0 {
        return Err(TomoError::InvalidGrid(format!("half-width must be positive, got {half_width}")));
    }
    let mut points = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for j in 0..=n {
        for k in 0..=n + 1 {
            if (j + k) % 2 == 0 {
                points.push(PhasePoint::new(
                    half_width * (j as f64 * PI / n as f64).cos(),
                    half_width * (k as f64 * PI / (n + 1) as f64).cos(),
                ));
            }
        }
    }
    debug_assert_eq!(points.len(), (n + 1) * (n + 2) / 2);
    Ok(PhaseGrid { kind: GridKind::Padua { n }, half_width, points })
}

/// rows x cols points uniformly spaced over [-L, L]^2, edges included,
/// row-major (x varies over rows, y over columns).
pub fn equidistant_grid(rows: usize, cols: usize, half_width: f64) -> Result<PhaseGrid> {
    if rows < 2 || cols < 2 {
        return Err(TomoError::InvalidGrid(format!("need at least 2x2 points, got {rows}x{cols}")));
    }
    if !half_width.is_finite() || half_width <= 0.0 {
        return Err(TomoError::InvalidGrid(format!("half-width must be positive, got {half_width}")));
    }
    let coord = |i: usize, m: usize| -half_width + 2.0 * half_width * i as f64 / (m - 1) as f64;
    let mut points = Vec::with_capacity(rows * cols);
    for ix in 0..rows {
        for iy in 0..cols {
            points.push(PhasePoint::new(coord(ix, rows), coord(iy, cols)));
        }
    }
    Ok(PhaseGrid { kind: GridKind::Equidistant { rows, cols }, half_width, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionTag {
    HusimiQ,
    Wigner,
}

/// Sampled quasi-probability values aligned with a grid, plus the noise level
/// the samples were taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    pub noise_sigma: f64,
    pub function: FunctionTag,
}

impl MeasurementRecord {
    pub fn new(grid: PhaseGrid, values: Vec<f64>, noise_sigma: f64, function: FunctionTag) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(TomoError::InvalidInput(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if noise_sigma < 0.0 {
            return Err(TomoError::InvalidInput(format!("noise sigma must be >= 0, got {noise_sigma}")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(TomoError::NonFinite(format!("sample value {v}")));
        }
        Ok(Self { grid, values, noise_sigma, function })
    }
}

/// Bivariate Chebyshev expansion sum_{a+b<=n} c[a][b] T_a(x/L) T_b(y/L).
/// Coefficients with a + b > n are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebCoeffs {
    order: usize,
    half_width: f64,
    coeffs: Vec<f64>, // (n+1)^2 row-major, row = degree in x
}

impl ChebCoeffs {
    pub fn zero(order: usize, half_width: f64) -> Self {
        Self { order, half_width, coeffs: vec![0.0; (order + 1) * (order + 1)] }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a <= self.order && b <= self.order {
            self.coeffs[a * (self.order + 1) + b]
        } else {
            0.0
        }
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, v: f64) {
        let n = self.order;
        assert!(a + b <= n, "coefficient ({a},{b}) outside total degree {n}");
        self.coeffs[a * (n + 1) + b] = v;
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Plain evaluation; callers that care about extrapolation use `eval_cheb`.
    pub fn eval(&self, p: PhasePoint) -> f64 {
        let x = p.re / self.half_width;
        let y = p.im / self.half_width;
        let n = self.order;
        // collapse b by Clenshaw for each row, then collapse a
        let mut row_vals = vec![0.0; n + 1];
        for (a, slot) in row_vals.iter_mut().enumerate() {
            *slot = clenshaw(&self.coeffs[a * (n + 1)..a * (n + 1) + (n + 1 - a)], y);
        }
        clenshaw(&row_vals, x)
    }
}

/// Clenshaw recurrence for sum_k c[k] T_k(t).
fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let next = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = next;
    }
    t * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

/// Evaluation result carrying the out-of-domain flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebEval {
    pub value: f64,
    pub extrapolated: bool,
}

/// Evaluates the expansion at a point; sets `extrapolated` when the point lies
/// outside [-L, L]^2.
pub fn eval_cheb(coeffs: &ChebCoeffs, point: PhasePoint) -> ChebEval {
    let l = coeffs.half_width;
    ChebEval {
        value: coeffs.eval(point),
        extrapolated: point.re.abs() > l || point.im.abs() > l,
    }
}

/// resolution^2 values on the uniform grid over [-L, L]^2, row-major in x.
pub fn eval_grid(coeffs: &ChebCoeffs, resolution: usize) -> Result<Vec<(PhasePoint, f64)>> {
    if resolution < 2 {
        return Err(TomoError::InvalidInput(format!("resolution must be >= 2, got {resolution}")));
    }
    let l = coeffs.half_width;
    let coord = |i: usize| -l + 2.0 * l * i as f64 / (resolution - 1) as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for ix in 0..resolution {
        for iy in 0..resolution {
            let p = PhasePoint::new(coord(ix), coord(iy));
            out.push((p, coeffs.eval(p)));
        }
    }
    Ok(out)
}

/// Cubature weight multiplier of a Padua node: 1 interior, 1/2 on the
/// boundary, 1/4 at vertices, all over n(n+1).
pub fn padua_weight(j: usize, k: usize, n: usize) -> f64 {
    let wx = if j == 0 || j == n { 0.5 } else { 1.0 };
    let wy = if k == 0 || k == n + 1 { 0.5 } else { 1.0 };
    wx * wy / (n * (n + 1)) as f64
}

/// Recovers the (j, k) generating indices of each record point, in record
/// order. Rejects points that are not Padua nodes of the stated order and
/// duplicated or missing nodes, so value/point pairs may come in any order.
fn padua_indices(grid: &PhaseGrid, n: usize) -> Result<Vec<(usize, usize)>> {
    let l = grid.half_width;
    let tol = 1e-9 * l.max(1.0);
    let mut seen = vec![false; (n + 1) * (n + 2)];
    let mut idx = Vec::with_capacity(grid.len());
    for (i, p) in grid.points.iter().enumerate() {
        let tj = (p.re / l).clamp(-1.0, 1.0).acos() * n as f64 / PI;
        let tk = (p.im / l).clamp(-1.0, 1.0).acos() * (n + 1) as f64 / PI;
        let j = tj.round() as usize;
        let k = tk.round() as usize;
        let xj = l * (j as f64 * PI / n as f64).cos();
        let yk = l * (k as f64 * PI / (n + 1) as f64).cos();
        if j > n || k > n + 1 || !(j + k).is_multiple_of(2) || (p.re - xj).abs() > tol || (p.im - yk).abs() > tol {
            return Err(TomoError::GridMismatch(format!(
                "point {i} ({}, {}) is not an order-{n} Padua node",
                p.re, p.im
            )));
        }
        let flat = j * (n + 2) + k;
        if seen[flat] {
            return Err(TomoError::GridMismatch(format!("duplicate Padua node at point {i}")));
        }
        seen[flat] = true;
        idx.push((j, k));
    }
    Ok(idx)
}

/// Interpolates Padua samples into the total-degree-n Chebyshev expansion by
/// the weighted two-matrix-product scheme, halving the top corner coefficient.
pub fn interpolate_padua(record: &MeasurementRecord) -> Result<ChebCoeffs> {
    let n = match record.grid.kind {
        GridKind::Padua { n } => n,
        _ => {
            return Err(TomoError::GridMismatch(
                "interpolate_padua needs a padua grid (use interpolate_tensor for equidistant)".into(),
            ))
        }
    };
    let expected = (n + 1) * (n + 2) / 2;
    if record.grid.len() != expected {
        return Err(TomoError::GridMismatch(format!(
            "order-{n} padua grid has {expected} nodes, record has {}",
            record.grid.len()
        )));
    }
    let indices = padua_indices(&record.grid, n)?;

    // E[j][k] = w(j,k) * v(j,k) on the (n+1) x (n+2) index rectangle
    let cols = n + 2;
    let mut e = vec![0.0; (n + 1) * cols];
    for (i, &(j, k)) in indices.iter().enumerate() {
        e[j * cols + k] = padua_weight(j, k, n) * record.values[i];
    }

    // G = A * E, A[a][j] = T_a(cos(j pi/n)) = cos(a j pi/n)
    let mut g = vec![0.0; (n + 1) * cols];
    for a in 0..=n {
        for j in 0..=n {
            let ta = (a as f64 * j as f64 * PI / n as f64).cos();
            if ta == 0.0 {
                continue;
            }
            for k in 0..cols {
                g[a * cols + k] += ta * e[j * cols + k];
            }
        }
    }

    // C_raw = G * B^T, B[b][k] = cos(b k pi/(n+1))
    let mut out = ChebCoeffs::zero(n, record.grid.half_width);
    for a in 0..=n {
        for b in 0..=(n - a) {
            let mut acc = 0.0;
            for k in 0..cols {
                acc += g[a * cols + k] * (b as f64 * k as f64 * PI / (n + 1) as f64).cos();
            }
            let ga = if a > 0 { 2.0 } else { 1.0 };
            let gb = if b > 0 { 2.0 } else { 1.0 };
            out.set_coeff(a, b, 2.0 * ga * gb * acc);
        }
    }
    out.set_coeff(n, 0, out.coeff(n, 0) / 2.0);
    Ok(out)
}

/// Least-squares fit of equidistant rows x rows samples in the
/// product-Chebyshev basis of total degree rows - 1. Reproduces polynomials of
/// matching total degree exactly.
pub fn interpolate_tensor(record: &MeasurementRecord) -> Result<ChebCoeffs> {
    let (rows, cols) = match record.grid.kind {
        GridKind::Equidistant { rows, cols } => (rows, cols),
        _ => return Err(TomoError::GridMismatch("interpolate_tensor needs an equidistant grid".into())),
    };
    if rows != cols {
        return Err(TomoError::GridMismatch(format!("grid must be square, got {rows}x{cols}")));
    }
    let n = rows - 1;
    let l = record.grid.half_width;

    // basis of total degree n, column-indexed
    let basis: Vec<(usize, usize)> =
        (0..=n).flat_map(|a| (0..=(n - a)).map(move |b| (a, b))).collect();
    let m = basis.len();
    let npts = record.grid.len();

    // design matrix, row-major
    let mut design = vec![0.0; npts * m];
    for (r, p) in record.grid.points.iter().enumerate() {
        let tx = cheb_values(n, p.re / l);
        let ty = cheb_values(n, p.im / l);
        for (c, &(a, b)) in basis.iter().enumerate() {
            design[r * m + c] = tx[a] * ty[b];
        }
    }
    let sol = lstsq_householder(&mut design, npts, m, &record.values)?;

    let mut out = ChebCoeffs::zero(n, l);
    for (c, &(a, b)) in basis.iter().enumerate() {
        out.set_coeff(a, b, sol[c]);
    }
    Ok(out)
}

/// T_0..T_n at t.
pub(crate) fn cheb_values(n: usize, t: f64) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    v[0] = 1.0;
    if n >= 1 {
        v[1] = t;
    }
    for a in 2..=n {
        v[a] = 2.0 * t * v[a - 1] - v[a - 2];
    }
    v
}

/// Dense Householder QR least squares for the overdetermined system A x ~= b.
fn lstsq_householder(a: &mut [f64], rows: usize, cols: usize, b: &[f64]) -> Result<Vec<f64>> {
    assert!(rows >= cols);
    let mut rhs = b.to_vec();
    for c in 0..cols {
        // Householder vector for column c in rows c..
        let mut norm = 0.0;
        for r in c..rows {
            norm += a[r * cols + c] * a[r * cols + c];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return Err(TomoError::InvalidInput("rank-deficient least-squares system".into()));
        }
        let alpha = if a[c * cols + c] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; rows - c];
        v[0] = a[c * cols + c] - alpha;
        for r in c + 1..rows {
            v[r - c] = a[r * cols + c];
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        a[c * cols + c] = alpha;
        for r in c + 1..rows {
            a[r * cols + c] = 0.0;
        }
        for cc in c + 1..cols {
            let mut dot = 0.0;
            for r in c..rows {
                dot += v[r - c] * a[r * cols + cc];
            }
            let f = 2.0 * dot / vnorm2;
            for r in c..rows {
                a[r * cols + cc] -= f * v[r - c];
            }
        }
        let mut dot = 0.0;
        for r in c..rows {
            dot += v[r - c] * rhs[r];
        }
        let f = 2.0 * dot / vnorm2;
        for r in c..rows {
            rhs[r] -= f * v[r - c];
        }
    }
    // back substitution on the upper-triangular cols x cols block
    let mut x = vec![0.0; cols];
    for c in (0..cols).rev() {
        let mut acc = rhs[c];
        for cc in c + 1..cols {
            acc -= a[c * cols + cc] * x[cc];
        }
        x[c] = acc / a[c * cols + c];
    }
    Ok(x)
}

/// Numerical Lebesgue-constant estimate for the order-n Padua family.
#[derive(Debug, Clone, Copy)]
pub struct LebesgueEstimate {
    pub value: f64,
    pub probe_resolution: usize,
    /// true when probe_resolution < 4n, i.e. the maximum may be under-resolved
    pub under_resolved: bool,
}

/// Max over a probe grid of sum_k |ell_k(x, y)| where ell_k are the
/// fundamental Lagrange polynomials. Scale-invariant, computed on [-1, 1]^2.
///
/// Uses the closed form ell(j,k)(x,y) = 2 w(j,k) sum'_{a+b<=n} g_a g_b
/// T_a(x_j) T_b(y_k) T_a(x) T_b(y), with the (n,0) term halved, contracted
/// as two Chebyshev-Vandermonde matrix products per probe point.
pub fn lebesgue_estimate(n: usize, probe_resolution: usize) -> Result<LebesgueEstimate> {
    if n == 0 {
        return Err(TomoError::InvalidGrid("padua order n = 0 is degenerate".into()));
    }
    if probe_resolution < 2 {
        return Err(TomoError::InvalidInput("probe resolution must be >= 2".into()));
    }
    let cols = n + 2;
    let coord = |i: usize| -1.0 + 2.0 * i as f64 / (probe_resolution - 1) as f64;
    // node-side Chebyshev-Vandermonde matrices
    let mut a_mat = vec![0.0; (n + 1) * (n + 1)]; // a_mat[a][j] = T_a(cos(j pi/n))
    for a in 0..=n {
        for j in 0..=n {
            a_mat[a * (n + 1) + j] = (a as f64 * j as f64 * PI / n as f64).cos();
        }
    }
    let mut b_mat = vec![0.0; (n + 1) * cols]; // b_mat[b][k] = T_b(cos(k pi/(n+1)))
    for b in 0..=n {
        for k in 0..cols {
            b_mat[b * cols + k] = (b as f64 * k as f64 * PI / (n + 1) as f64).cos();
        }
    }
    let mut best: f64 = 0.0;
    let mut q = vec![0.0; (n + 1) * (n + 1)];
    let mut u = vec![0.0; (n + 1) * cols];
    let mut s = vec![0.0; (n + 1) * cols];
    for ix in 0..probe_resolution {
        let tx = cheb_values(n, coord(ix));
        for iy in 0..probe_resolution {
            let ty = cheb_values(n, coord(iy));
            for a in 0..=n {
                let ga = if a > 0 { 2.0 } else { 1.0 };
                for b in 0..=n {
                    q[a * (n + 1) + b] = if a + b <= n {
                        let gb = if b > 0 { 2.0 } else { 1.0 };
                        ga * gb * tx[a] * ty[b]
                    } else {
                        0.0
                    };
                }
            }
            q[n * (n + 1)] /= 2.0;
            // U = Q * B  ((n+1) x cols)
            for a in 0..=n {
                for k in 0..cols {
                    u[a * cols + k] = 0.0;
                }
                for b in 0..=(n - a) {
                    let qab = q[a * (n + 1) + b];
                    if qab == 0.0 {
                        continue;
                    }
                    for k in 0..cols {
                        u[a * cols + k] += qab * b_mat[b * cols + k];
                    }
                }
            }
            // S = A^T * U  ((n+1) x cols), row index j
            for j in 0..=n {
                for k in 0..cols {
                    s[j * cols + k] = 0.0;
                }
            }
            for a in 0..=n {
                for j in 0..=n {
                    let taj = a_mat[a * (n + 1) + j];
                    if taj == 0.0 {
                        continue;
                    }
                    for k in 0..cols {
                        s[j * cols + k] += taj * u[a * cols + k];
                    }
                }
            }
            let mut sum = 0.0;
            for j in 0..=n {
                for k in 0..cols {
                    if (j + k) % 2 == 0 {
                        sum += (2.0 * padua_weight(j, k, n) * s[j * cols + k]).abs();
                    }
                }
            }
            best = best.max(sum);
        }
    }
    Ok(LebesgueEstimate {
        value: best,
        probe_resolution,
        under_resolved: probe_resolution < 4 * n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{q_function, test_state, to_density_matrix};
    use proptest::prelude::*;

    #[test]
    fn padua_counts() {
        assert_eq!(padua_points(20, 3.0).unwrap().len(), 231);
        assert_eq!(padua_points(1, 1.0).unwrap().len(), 3);
        assert_eq!(padua_points(35, 3.0).unwrap().len(), 666);
        assert!(padua_points(0, 1.0).is_err());
    }

    #[test]
    fn padua_points_distinct_and_in_domain() {
        let g = padua_points(9, 2.5).unwrap();
        for (i, p) in g.points.iter().enumerate() {
            assert!(p.re.abs() <= 2.5 + 1e-12 && p.im.abs() <= 2.5 + 1e-12);
            for q in &g.points[i + 1..] {
                assert!((p.re - q.re).abs() > 1e-12 || (p.im - q.im).abs() > 1e-12);
            }
        }
    }

    #[test]
    fn equidistant_examples() {
        assert_eq!(equidistant_grid(16, 16, 3.0).unwrap().len(), 256);
        let g = equidistant_grid(2, 2, 1.5).unwrap();
        let corners: Vec<(f64, f64)> = g.points.iter().map(|p| (p.re, p.im)).collect();
        assert_eq!(corners, vec![(-1.5, -1.5), (-1.5, 1.5), (1.5, -1.5), (1.5, 1.5)]);
        let g3 = equidistant_grid(3, 3, 1.0).unwrap();
        assert!(g3.points.iter().any(|p| p.re == 0.0 && p.im == 0.0));
        assert!(equidistant_grid(1, 5, 1.0).is_err());
    }

    fn record_from_fn(
        grid: PhaseGrid,
        f: impl Fn(PhasePoint) -> f64,
    ) -> MeasurementRecord {
        let values = grid.points.iter().map(|&p| f(p)).collect();
        MeasurementRecord::new(grid, values, 0.0, FunctionTag::HusimiQ).unwrap()
    }

    #[test]
    fn interpolate_constant() {
        let rec = record_from_fn(padua_points(6, 2.0).unwrap(), |_| 1.0);
        let c = interpolate_padua(&rec).unwrap();
        assert!((c.coeff(0, 0) - 1.0).abs() < 1e-12);
        for a in 0..=6 {
            for b in 0..=6 {
                if a + b > 0 {
                    assert!(c.coeff(a, b).abs() < 1e-12, "c[{a}][{b}] = {}", c.coeff(a, b));
                }
            }
        }
    }

    #[test]
    fn interpolate_linear_x() {
        let l = 2.5;
        let rec = record_from_fn(padua_points(5, l).unwrap(), |p| p.re / l);
        let c = interpolate_padua(&rec).unwrap();
        assert!((c.coeff(1, 0) - 1.0).abs() < 1e-12);
        assert!(c.coeff(0, 0).abs() < 1e-13);
        assert!(c.coeff(0, 1).abs() < 1e-13);
    }

    #[test]
    fn interpolate_matches_oracle_interior() {
        // the cutoff-4 test state on a window where total degree 20 resolves Q
        let l = 1.4;
        let rho = to_density_matrix(&test_state());
        let rec = record_from_fn(padua_points(20, l).unwrap(), |p| q_function(&rho, p));
        let c = interpolate_padua(&rec).unwrap();
        let mut x = 0.37_f64;
        let mut worst = 0.0_f64;
        for _ in 0..200 {
            x = (x * 997.0).fract();
            let y = (x * 613.0).fract();
            let p = PhasePoint::new((2.0 * x - 1.0) * 0.9 * l, (2.0 * y - 1.0) * 0.9 * l);
            worst = worst.max((c.eval(p) - q_function(&rho, p)).abs());
        }
        assert!(worst < 1e-6, "interior max-abs {worst}");
    }

    #[test]
    fn rejects_equidistant_record() {
        let rec = record_from_fn(equidistant_grid(4, 4, 1.0).unwrap(), |_| 1.0);
        assert!(interpolate_padua(&rec).is_err());
    }

    #[test]
    fn tensor_constant_and_t2() {
        let rec = record_from_fn(equidistant_grid(5, 5, 2.0).unwrap(), |_| 3.25);
        let c = interpolate_tensor(&rec).unwrap();
        assert!((c.coeff(0, 0) - 3.25).abs() < 1e-10);

        let l = 1.0;
        let rec2 = record_from_fn(equidistant_grid(5, 5, l).unwrap(), |p| {
            2.0 * (p.re / l).powi(2) - 1.0
        });
        let c2 = interpolate_tensor(&rec2).unwrap();
        assert!((c2.coeff(2, 0) - 1.0).abs() < 1e-10, "c20 = {}", c2.coeff(2, 0));
        assert!(c2.coeff(0, 0).abs() < 1e-10);
    }

    #[test]
    fn tensor_rejects_non_square() {
        let rec = record_from_fn(equidistant_grid(4, 5, 1.0).unwrap(), |_| 1.0);
        assert!(interpolate_tensor(&rec).is_err());
    }

    #[test]
    fn tensor_worse_than_padua_on_test_state() {
        let l = DEFAULT_HALF_WIDTH;
        let rho = to_density_matrix(&test_state());
        let pad = interpolate_padua(&record_from_fn(padua_points(20, l).unwrap(), |p| {
            q_function(&rho, p)
        }))
        .unwrap();
        let eq = interpolate_tensor(&record_from_fn(equidistant_grid(16, 16, l).unwrap(), |p| {
            q_function(&rho, p)
        }))
        .unwrap();
        let mut x = 0.81_f64;
        let (mut worst_pad, mut worst_eq) = (0.0_f64, 0.0_f64);
        for _ in 0..200 {
            x = (x * 997.0).fract();
            let y = (x * 613.0).fract();
            let p = PhasePoint::new((2.0 * x - 1.0) * 0.9 * l, (2.0 * y - 1.0) * 0.9 * l);
            let exact = q_function(&rho, p);
            worst_pad = worst_pad.max((pad.eval(p) - exact).abs());
            worst_eq = worst_eq.max((eq.eval(p) - exact).abs());
        }
        assert!(
            worst_eq > worst_pad,
            "equidistant {worst_eq} should exceed padua {worst_pad}"
        );
    }

    #[test]
    fn eval_cheb_basics() {
        let mut c = ChebCoeffs::zero(3, 2.0);
        c.set_coeff(0, 0, 1.0);
        let r = eval_cheb(&c, PhasePoint::new(0.3, -1.9));
        assert_eq!(r.value, 1.0);
        assert!(!r.extrapolated);
        assert!(eval_cheb(&c, PhasePoint::new(2.1, 0.0)).extrapolated);

        let mut c11 = ChebCoeffs::zero(3, 2.0);
        c11.set_coeff(1, 1, 1.0);
        let at_corner = eval_cheb(&c11, PhasePoint::new(2.0, 2.0));
        assert!((at_corner.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_round_trip() {
        let l = DEFAULT_HALF_WIDTH;
        let rho = to_density_matrix(&test_state());
        let rec = record_from_fn(padua_points(12, l).unwrap(), |p| q_function(&rho, p));
        let c = interpolate_padua(&rec).unwrap();
        let vmax = rec.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (p, v) in rec.grid.points.iter().zip(&rec.values) {
            assert!((c.eval(*p) - v).abs() < 1e-10 * vmax);
        }
    }

    #[test]
    fn eval_grid_constant() {
        let mut c = ChebCoeffs::zero(2, 1.0);
        c.set_coeff(0, 0, 2.0);
        let g = eval_grid(&c, 5).unwrap();
        assert_eq!(g.len(), 25);
        assert!(g.iter().all(|(_, v)| (*v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn lebesgue_basics() {
        let l1 = lebesgue_estimate(1, 50).unwrap();
        assert!(l1.value >= 1.0);
        assert!((l1.value - 2.0).abs() < 0.05, "Lambda_1 = {}", l1.value);

        let a = lebesgue_estimate(8, 200).unwrap();
        let b = lebesgue_estimate(8, 400).unwrap();
        assert!((a.value - b.value).abs() / b.value < 0.02);
        assert!(!a.under_resolved);
        assert!(lebesgue_estimate(8, 20).unwrap().under_resolved);
    }

    #[test]
    fn lebesgue_log_square_upper_bound() {
        // growth no faster than C (1 + ln^2 n) for a fitted constant
        let ns = [4usize, 8, 16, 32];
        let mut ratio_max = 0.0_f64;
        let mut vals = Vec::new();
        for &n in &ns {
            let est = lebesgue_estimate(n, 4 * n.max(10)).unwrap();
            let g = 1.0 + (n as f64).ln().powi(2);
            ratio_max = ratio_max.max(est.value / g);
            vals.push(est.value);
        }
        for (i, &n) in ns.iter().enumerate() {
            let g = 1.0 + (n as f64).ln().powi(2);
            assert!(vals[i] <= ratio_max * g * (1.0 + 1e-12));
        }
        // monotone growth sanity
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn polynomial_reproduction(seed in 0u64..1000) {
            // random total-degree-n polynomial in the Chebyshev basis
            let n = 3 + (seed % 7) as usize;
            let l = 1.0 + (seed % 5) as f64;
            let mut c_in = ChebCoeffs::zero(n, l);
            let mut state = seed as f64 * 0.618 + 0.123;
            for a in 0..=n {
                for b in 0..=(n - a) {
                    state = (state * 997.0).fract();
                    c_in.set_coeff(a, b, 2.0 * state - 1.0);
                }
            }
            let grid = padua_points(n, l).unwrap();
            let values: Vec<f64> = grid.points.iter().map(|&p| c_in.eval(p)).collect();
            let rec = MeasurementRecord::new(grid, values, 0.0, FunctionTag::HusimiQ).unwrap();
            let c_out = interpolate_padua(&rec).unwrap();
            let mut x = 0.5_f64;
            for _ in 0..100 {
                x = (x * 613.0).fract();
                let y = (x * 331.0).fract();
                let p = PhasePoint::new((2.0 * x - 1.0) * l, (2.0 * y - 1.0) * l);
                let (u, v) = (c_in.eval(p), c_out.eval(p));
                let scale = u.abs().max(1.0);
                prop_assert!((u - v).abs() < 1e-9 * scale);
            }
        }

        #[test]
        fn permutation_invariance(seed in 0u64..1000) {
            let n = 4usize;
            let l = 2.0;
            let grid = padua_points(n, l).unwrap();
            let values: Vec<f64> = (0..grid.len()).map(|i| ((i as f64 + seed as f64) * 0.37).sin()).collect();
            let rec = MeasurementRecord::new(grid.clone(), values.clone(), 0.0, FunctionTag::HusimiQ).unwrap();
            let c1 = interpolate_padua(&rec).unwrap();

            // reverse both points and values
            let mut pts = grid.points.clone();
            pts.reverse();
            let mut vals = values.clone();
            vals.reverse();
            let shuffled = PhaseGrid { kind: grid.kind, half_width: l, points: pts };
            let rec2 = MeasurementRecord::new(shuffled, vals, 0.0, FunctionTag::HusimiQ).unwrap();
            let c2 = interpolate_padua(&rec2).unwrap();
            for (u, v) in c1.coeffs().iter().zip(c2.coeffs()) {
                prop_assert!((u - v).abs() < 1e-13);
            }
        }

        #[test]
        fn linearity(seed in 0u64..1000) {
            let n = 5usize;
            let l = 1.5;
            let grid = padua_points(n, l).unwrap();
            let v: Vec<f64> = (0..grid.len()).map(|i| ((i as f64 + seed as f64) * 0.49).sin()).collect();
            let w: Vec<f64> = (0..grid.len()).map(|i| ((i as f64 * 1.7 + seed as f64) * 0.31).cos()).collect();
            let (a, b) = (1.75, -0.4);
            let mk = |vals: Vec<f64>| {
                MeasurementRecord::new(grid.clone(), vals, 0.0, FunctionTag::HusimiQ).unwrap()
            };
            let cv = interpolate_padua(&mk(v.clone())).unwrap();
            let cw = interpolate_padua(&mk(w.clone())).unwrap();
            let combo: Vec<f64> = v.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
            let cc = interpolate_padua(&mk(combo)).unwrap();
            for ((x, y), z) in cv.coeffs().iter().zip(cw.coeffs()).zip(cc.coeffs()) {
                prop_assert!((a * x + b * y - z).abs() < 1e-12);
            }
        }

        #[test]
        fn degree_support(seed in 0u64..100) {
            let n = 6usize;
            let grid = padua_points(n, 1.0).unwrap();
            let v: Vec<f64> = (0..grid.len()).map(|i| ((i as f64 + seed as f64) * 0.73).sin()).collect();
            let rec = MeasurementRecord::new(grid, v, 0.0, FunctionTag::HusimiQ).unwrap();
            let c = interpolate_padua(&rec).unwrap();
            for a in 0..=n {
                for b in 0..=n {
                    if a + b > n {
                        prop_assert_eq!(c.coeff(a, b), 0.0);
                    }
                }
            }
        }
    }

    /// Brute-force oracle: solve the full Chebyshev-Vandermonde system by
    /// Gaussian elimination and compare with the weighted-sum scheme.
    #[test]
    fn matches_dense_solve_oracle() {
        let n = 7usize;
        let l = 1.8;
        let grid = padua_points(n, l).unwrap();
        let npts = grid.len();
        let basis: Vec<(usize, usize)> =
            (0..=n).flat_map(|a| (0..=(n - a)).map(move |b| (a, b))).collect();
        assert_eq!(basis.len(), npts);
        let values: Vec<f64> = (0..npts).map(|i| ((i * i) as f64 * 0.123).sin()).collect();

        // dense solve
        let mut m = vec![0.0; npts * npts];
        for (r, p) in grid.points.iter().enumerate() {
            let tx = cheb_values(n, p.re / l);
            let ty = cheb_values(n, p.im / l);
            for (c, &(a, b)) in basis.iter().enumerate() {
                m[r * npts + c] = tx[a] * ty[b];
            }
        }
        let mut rhs = values.clone();
        // Gaussian elimination with partial pivoting
        for col in 0..npts {
            let piv = (col..npts).max_by(|&i, &j| {
                m[i * npts + col].abs().partial_cmp(&m[j * npts + col].abs()).unwrap()
            }).unwrap();
            if piv != col {
                for c in 0..npts {
                    m.swap(col * npts + c, piv * npts + c);
                }
                rhs.swap(col, piv);
            }
            let d = m[col * npts + col];
            for r in col + 1..npts {
                let f = m[r * npts + col] / d;
                if f == 0.0 { continue; }
                for c in col..npts {
                    m[r * npts + c] -= f * m[col * npts + c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
        let mut sol = vec![0.0; npts];
        for r in (0..npts).rev() {
            let mut acc = rhs[r];
            for c in r + 1..npts {
                acc -= m[r * npts + c] * sol[c];
            }
            sol[r] = acc / m[r * npts + r];
        }

        let rec = MeasurementRecord::new(grid, values, 0.0, FunctionTag::HusimiQ).unwrap();
        let fast = interpolate_padua(&rec).unwrap();
        for (c, &(a, b)) in basis.iter().enumerate() {
            assert!(
                (fast.coeff(a, b) - sol[c]).abs() < 1e-9,
                "coeff ({a},{b}): {} vs {}",
                fast.coeff(a, b),
                sol[c]
            );
        }
    }
}
