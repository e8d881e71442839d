//! Truncated-Fock-space states and their exact Husimi-Q / Wigner functions.
//!
//! These serve as the ground-truth measurement oracle for every experiment:
//! a state is either a pure superposition of number states or a general
//! density matrix, and `q_function` / `wigner_function` evaluate the exact
//! quasi-probability at any phase-space point.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Result, TomoError};

/// Normalization tolerance for pure states and Hermiticity checks.
pub const STATE_TOL: f64 = 1e-12;

/// A point alpha = re + i*im in phase space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub re: f64,
    pub im: f64,
}

impl PhasePoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn origin() -> Self {
        Self { re: 0.0, im: 0.0 }
    }

    /// |alpha|
    pub fn radius(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// arg(alpha), measured from the +x axis.
    pub fn angle(&self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn as_complex(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Pure state in a truncated Fock basis, indexed by photon number 0..=cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: Vec<C64>,
}

impl FockState {
    /// Builds a state from amplitudes; requires sum |a_n|^2 = 1 within 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(TomoError::InvalidInput("state needs at least one amplitude".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(TomoError::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Coherent state |beta> truncated at the given cutoff and renormalized.
    pub fn coherent(beta: C64, cutoff: usize) -> Self {
        let mut amps = Vec::with_capacity(cutoff + 1);
        for n in 0..=cutoff {
            // beta^n / sqrt(n!) * e^{-|beta|^2/2}
            let ln_mag = (n as f64) * beta.norm().max(f64::MIN_POSITIVE).ln()
                - 0.5 * ln_factorial(n)
                - 0.5 * beta.norm_sqr();
            let phase = (n as f64) * beta.arg();
            let mag = if beta.norm() == 0.0 && n > 0 { 0.0 } else { ln_mag.exp() };
            amps.push(C64::from_polar(mag, phase));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        Self { amplitudes: amps }
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes.get(n).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }
}

/// The cutoff-4 test state (1/sqrt2)(|0bar> + i|1bar>) of the lowest-order
/// binomial code: a_0 = 1/2, a_2 = i/sqrt2, a_4 = 1/2.
pub fn test_state() -> FockState {
    let h = 0.5;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    FockState {
        amplitudes: vec![
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, s),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ],
    }
}

/// Density matrix on a truncated Fock space. Hermiticity is enforced at
/// construction; trace is checked only through `trace()` by callers that
/// require physical inputs (reconstructed estimates need not have trace 1).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Vec<C64>,
    dim: usize,
}

impl DensityMatrix {
    pub fn new(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(TomoError::NotSquare { rows: dim, row: r, cols: row.len() });
            }
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in &rows {
            entries.extend_from_slice(row);
        }
        let dm = Self { entries, dim };
        dm.check_hermitian()?;
        Ok(dm)
    }

    /// rho = |psi><psi|.
    pub fn from_pure(state: &FockState) -> Self {
        let dim = state.cutoff() + 1;
        let mut entries = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                entries.push(state.amplitude(j) * state.amplitude(k).conj());
            }
        }
        Self { entries, dim }
    }

    pub(crate) fn from_entries_unchecked(entries: Vec<C64>, dim: usize) -> Self {
        Self { entries, dim }
    }

    fn check_hermitian(&self) -> Result<()> {
        for j in 0..self.dim {
            for k in j..self.dim {
                let dev = (self.entry(j, k) - self.entry(k, j).conj()).norm();
                if dev > STATE_TOL {
                    return Err(TomoError::NotHermitian { j, k, dev });
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.dim - 1
    }

    pub fn entry(&self, j: usize, k: usize) -> C64 {
        self.entries[j * self.dim + k]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|j| self.entry(j, j)).sum()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }
}

/// Same operation as `DensityMatrix::from_pure`, under the name used by the
/// rest of the pipeline.
pub fn to_density_matrix(state: &FockState) -> DensityMatrix {
    DensityMatrix::from_pure(state)
}

/// ln(n!) by cumulative summation; exact to ~1e-15 relative for the n used here.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE_LEN: usize = 256;
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; TABLE_LEN];
        for i in 2..TABLE_LEN {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if n < TABLE_LEN {
        table[n]
    } else {
        // Stirling with correction terms; n this large never occurs in practice.
        let x = n as f64 + 1.0;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
    }
}

/// <alpha|n> = e^{-|alpha|^2/2} (alpha*)^n / sqrt(n!)
pub fn coherent_overlap(n: usize, alpha: PhasePoint) -> C64 {
    let a = alpha.as_complex();
    let r2 = a.norm_sqr();
    if a.norm() == 0.0 {
        return if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let ln_mag = (n as f64) * a.norm().ln() - 0.5 * ln_factorial(n) - 0.5 * r2;
    let phase = -(n as f64) * a.arg();
    C64::from_polar(ln_mag.exp(), phase)
}

/// Husimi Q(alpha) = <alpha|rho|alpha> / pi. Real, in [0, 1/pi] for positive rho.
pub fn q_function(rho: &DensityMatrix, alpha: PhasePoint) -> f64 {
    let dim = rho.dim();
    let v: Vec<C64> = (0..dim).map(|n| coherent_overlap(n, alpha)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..dim {
        for k in 0..dim {
            acc += v[j] * rho.entry(j, k) * v[k].conj();
        }
    }
    acc.re / PI
}

/// <m|D(alpha)|n> via the associated-Laguerre closed form, with the Laguerre
/// value computed by the stable three-term recurrence.
pub fn displacement_element(m: usize, n: usize, alpha: C64) -> C64 {
    let x = alpha.norm_sqr();
    let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
    let k = hi - lo;
    let lag = laguerre(lo, k as f64, x);
    let ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) - 0.5 * x;
    let pref = if m >= n {
        // sqrt(n!/m!) alpha^{m-n}
        alpha.powu(k as u32)
    } else {
        (-alpha.conj()).powu(k as u32)
    };
    pref * lag * ln_mag.exp()
}

/// Associated Laguerre L_n^{(k)}(x) by upward recurrence.
fn laguerre(n: usize, k: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut l_prev = 1.0;
    let mut l = 1.0 + k - x;
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + k - x) * l - (mf + k) * l_prev) / (mf + 1.0);
        l_prev = l;
        l = next;
    }
    l
}

/// Wigner W(alpha) = (1/pi) Tr[Pi D(-alpha) rho D(alpha)], evaluated through
/// the displaced-parity sum. The parity trace runs over Fock levels beyond the
/// state cutoff until the displaced populations are negligible.
pub fn wigner_function(rho: &DensityMatrix, alpha: PhasePoint) -> f64 {
    let a = alpha.as_complex();
    let dim = rho.dim();
    // trace space: displaced number states keep ~Poisson(|alpha|^2) support
    let m_max = dim + 2 * (a.norm_sqr().ceil() as usize) + 40;
    // d[j][m] = <j|D(alpha)|m> for j < dim
    let mut w = 0.0;
    let mut sign = 1.0;
    let mut col = vec![C64::new(0.0, 0.0); dim];
    for m in 0..m_max {
        for (j, c) in col.iter_mut().enumerate() {
            *c = displacement_element(j, m, a);
        }
        // <m|D(-alpha)|j> = conj(<j|D(alpha)|m>)
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..dim {
            for k in 0..dim {
                acc += col[j].conj() * rho.entry(j, k) * col[k];
            }
        }
        w += sign * acc.re;
        sign = -sign;
    }
    w / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn test_state_amplitudes() {
        let s = test_state();
        assert_eq!(s.amplitude(0), C64::new(0.5, 0.0));
        assert!((s.amplitude(2) - C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(s.amplitude(4), C64::new(0.5, 0.0));
        assert_eq!(s.cutoff(), 4);
        let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!(close(norm, 1.0, 1e-12));
    }

    #[test]
    fn density_matrix_from_test_state() {
        let rho = to_density_matrix(&test_state());
        assert!(close(rho.entry(2, 2).re, 0.5, 1e-15));
        assert!(close(rho.entry(0, 4).re, 0.25, 1e-15));
        let vac = FockState::new(vec![C64::new(1.0, 0.0)]).unwrap();
        let rho_vac = to_density_matrix(&vac);
        assert_eq!(rho_vac.entry(0, 0), C64::new(1.0, 0.0));
        assert_eq!(rho_vac.dim(), 1);
    }

    #[test]
    fn rejects_unnormalized() {
        let r = FockState::new(vec![C64::new(0.5, 0.0)]);
        assert!(matches!(r, Err(TomoError::NotNormalized { .. })));
    }

    #[test]
    fn rejects_non_hermitian() {
        let rows = vec![
            vec![C64::new(0.5, 0.0), C64::new(0.1, 0.2)],
            vec![C64::new(0.1, 0.2), C64::new(0.5, 0.0)],
        ];
        assert!(matches!(DensityMatrix::new(rows), Err(TomoError::NotHermitian { .. })));
    }

    #[test]
    fn coherent_overlap_examples() {
        assert_eq!(coherent_overlap(0, PhasePoint::origin()), C64::new(1.0, 0.0));
        assert_eq!(coherent_overlap(1, PhasePoint::origin()), C64::new(0.0, 0.0));
        let v = coherent_overlap(2, PhasePoint::new(1.0, 0.0));
        let expect = (-0.5f64).exp() / 2f64.sqrt();
        assert!(close(v.re, expect, 1e-12));
        assert!(close(v.im, 0.0, 1e-12));
    }

    #[test]
    fn q_function_examples() {
        let vac = to_density_matrix(&FockState::new(vec![C64::new(1.0, 0.0)]).unwrap());
        assert!(close(q_function(&vac, PhasePoint::origin()), 1.0 / PI, 1e-14));

        let rho = to_density_matrix(&test_state());
        assert!(close(q_function(&rho, PhasePoint::origin()), 0.25 / PI, 1e-14));

        let coh = to_density_matrix(&FockState::coherent(C64::new(1.0, 0.0), 30));
        let q = q_function(&coh, PhasePoint::new(1.0, 0.0));
        assert!(close(q, 1.0 / PI, 1e-8));
    }

    #[test]
    fn wigner_examples() {
        let vac = to_density_matrix(&FockState::new(vec![C64::new(1.0, 0.0)]).unwrap());
        assert!(close(wigner_function(&vac, PhasePoint::origin()), 1.0 / PI, 1e-12));

        let one = to_density_matrix(
            &FockState::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap(),
        );
        assert!(close(wigner_function(&one, PhasePoint::origin()), -1.0 / PI, 1e-12));

        let rho = to_density_matrix(&test_state());
        assert!(close(wigner_function(&rho, PhasePoint::origin()), 1.0 / PI, 1e-12));
    }

    #[test]
    fn vacuum_wigner_is_gaussian() {
        let vac = to_density_matrix(&FockState::new(vec![C64::new(1.0, 0.0)]).unwrap());
        // deterministic pseudo-random points with |alpha| <= 3
        let mut x = 0.123_f64;
        for _ in 0..100 {
            x = (x * 997.0).fract();
            let y = (x * 631.0).fract();
            let p = PhasePoint::new(6.0 * x - 3.0, 6.0 * y - 3.0);
            if p.radius() > 3.0 {
                continue;
            }
            let w = wigner_function(&vac, p);
            let expect = (-2.0 * p.radius().powi(2)).exp() / PI;
            assert!(close(w, expect, 1e-10), "W({:?}) = {w}, expect {expect}", p);
        }
    }

    #[test]
    fn global_phase_invariance() {
        let s = test_state();
        let phase = C64::from_polar(1.0, 0.73);
        let rotated =
            FockState::new(s.amplitudes().iter().map(|a| a * phase).collect()).unwrap();
        let r1 = to_density_matrix(&s);
        let r2 = to_density_matrix(&rotated);
        for &p in &[PhasePoint::new(0.3, -0.8), PhasePoint::new(1.5, 2.0)] {
            assert!(close(q_function(&r1, p), q_function(&r2, p), 1e-14));
            assert!(close(wigner_function(&r1, p), wigner_function(&r2, p), 1e-12));
        }
    }

    #[test]
    fn pure_state_q_consistency() {
        // density-matrix route vs direct amplitude inner product
        let s = test_state();
        let rho = to_density_matrix(&s);
        for &p in &[PhasePoint::new(0.9, 0.4), PhasePoint::new(-1.2, 2.1)] {
            let mut amp = C64::new(0.0, 0.0);
            for n in 0..=s.cutoff() {
                amp += coherent_overlap(n, p) * s.amplitude(n);
            }
            let q_direct = amp.norm_sqr() / PI;
            assert!(close(q_direct, q_function(&rho, p), 1e-12));
        }
    }

    #[test]
    fn q_integrates_to_one() {
        // integral over a disk of radius 6 with substitution u = r^2
        let rho = to_density_matrix(&test_state());
        let n_theta = 64;
        let n_u = 2000;
        let u_max = 36.0;
        let du = u_max / n_u as f64;
        let mut total = 0.0;
        for it in 0..n_theta {
            let theta = 2.0 * PI * (it as f64) / (n_theta as f64);
            let (s, c) = theta.sin_cos();
            // composite Simpson in u
            let f = |u: f64| {
                let r = u.sqrt();
                q_function(&rho, PhasePoint::new(r * c, r * s))
            };
            let mut acc = f(0.0) + f(u_max);
            for i in 1..n_u {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(i as f64 * du);
            }
            total += acc * du / 3.0 / 2.0; // du/3 Simpson, 1/2 from u-substitution
        }
        total *= 2.0 * PI / n_theta as f64;
        assert!(close(total, 1.0, 1e-6), "integral = {total}");
    }
}
