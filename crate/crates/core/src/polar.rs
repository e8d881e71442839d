//! Conversion of the bivariate Chebyshev interpolant into polar-form
//! coefficients c[m][p] of sum c_{m,p} r^m e^{i p theta}, the representation
//! the density-matrix estimator consumes.
//!
//! Coordinate convention: alpha = x + i y with x horizontal, theta measured
//! from the +x axis.

use num_complex::Complex64 as C64;

use crate::bigfloat::Ext;
use crate::error::{Result, TomoError};
use crate::padua::{interpolate_padua, ChebCoeffs, MeasurementRecord};

/// Integer Chebyshev-to-monomial table: t[a][i] = coefficient of x^i in T_a.
/// Exact in i64 for every order used here (max entry ~7.5e11 at a = 35).
pub(crate) fn cheb_monomial_table(n: usize) -> Vec<Vec<i64>> {
    let mut t = vec![vec![0i64; n + 1]; n + 1];
    t[0][0] = 1;
    if n >= 1 {
        t[1][1] = 1;
    }
    for a in 2..=n {
        for i in 0..=n {
            let mut v = -t[a - 2][i];
            if i >= 1 {
                v += 2 * t[a - 1][i - 1];
            }
            t[a][i] = v;
        }
    }
    t
}

/// Truncated monomial expansion of the interpolant in physical (x, y) units;
/// entries are held at extended precision until rounded out by consumers.
#[derive(Debug, Clone)]
pub struct MonomialCoeffs {
    order: usize,
    q_max: usize,
    half_width: f64,
    coeffs: Vec<Ext>, // (q_max+1)^2, row-major in i
}

impl MonomialCoeffs {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub(crate) fn coeff_ext(&self, i: usize, j: usize) -> &Ext {
        &self.coeffs[i * (self.q_max + 1) + j]
    }

    /// Coefficient of x^i y^j rounded to f64.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.q_max {
            0.0
        } else {
            self.coeff_ext(i, j).to_f64()
        }
    }
}

/// m_{i,j} = sum_{a,b} c_{a,b} t_{a,i} t_{b,j} / L^{i+j} for i + j <= q_max,
/// accumulated at 192-bit precision.
pub fn cheb_to_monomial_truncated(cheb: &ChebCoeffs, q_max: usize) -> Result<MonomialCoeffs> {
    let n = cheb.order();
    if q_max > n {
        return Err(TomoError::InsufficientOrder(format!(
            "q_max = {q_max} exceeds interpolant order n = {n}"
        )));
    }
    let l = cheb.half_width();
    let t = cheb_monomial_table(n);
    let inv_l = Ext::from_i64(1).div(&Ext::from_f64(l));
    // u[a][i] = t[a][i] / L^i
    let mut u = vec![Ext::zero(); (n + 1) * (q_max + 1)];
    let mut l_pow = Ext::from_i64(1);
    for i in 0..=q_max {
        for a in 0..=n {
            if t[a][i] != 0 {
                u[a * (q_max + 1) + i] = Ext::from_i64(t[a][i]).mul(&l_pow);
            }
        }
        l_pow = l_pow.mul(&inv_l);
    }
    // g[a][j] = sum_b c[a][b] u[b][j]
    let mut g = vec![Ext::zero(); (n + 1) * (q_max + 1)];
    for a in 0..=n {
        for j in 0..=q_max {
            let mut acc = Ext::zero();
            for b in (j % 2..=(n - a)).step_by(2) {
                let c = cheb.coeff(a, b);
                if c != 0.0 && t[b][j] != 0 {
                    acc = Ext::from_f64(c).mul_add(&u[b * (q_max + 1) + j], &acc);
                }
            }
            g[a * (q_max + 1) + j] = acc;
        }
    }
    // m[i][j] = sum_a u[a][i] g[a][j]
    let mut coeffs = vec![Ext::zero(); (q_max + 1) * (q_max + 1)];
    for i in 0..=q_max {
        for j in 0..=(q_max - i) {
            let mut acc = Ext::zero();
            for a in (i % 2..=n).step_by(2) {
                if t[a][i] != 0 {
                    acc = u[a * (q_max + 1) + i].mul_add(&g[a * (q_max + 1) + j], &acc);
                }
            }
            coeffs[i * (q_max + 1) + j] = acc;
        }
    }
    Ok(MonomialCoeffs { order: n, q_max, half_width: l, coeffs })
}

/// Polar expansion sum_{m<=q_max, |p|<=m} c_{m,p} r^m e^{i p theta}.
/// Structure: c_{m,p} = 0 when m and |p| have different parity or |p| > m;
/// real-valued inputs give c_{m,-p} = conj(c_{m,p}).
#[derive(Debug, Clone, PartialEq)]
pub struct PolarPoly {
    order: usize,
    q_max: usize,
    half_width: f64,
    coeffs: Vec<C64>, // (q_max+1) x (2 q_max + 1), index [m][p + q_max]
}

impl PolarPoly {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn coeff(&self, m: usize, p: i64) -> C64 {
        if m > self.q_max || p.unsigned_abs() as usize > m {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[m * (2 * self.q_max + 1) + (p + self.q_max as i64) as usize]
        }
    }

    /// All entries (m, p, c) with |c| > threshold, in (m, p) order.
    pub fn entries(&self, threshold: f64) -> Vec<(usize, i64, C64)> {
        let mut out = Vec::new();
        for m in 0..=self.q_max {
            for p in -(m as i64)..=(m as i64) {
                let c = self.coeff(m, p);
                if c.norm() > threshold {
                    out.push((m, p, c));
                }
            }
        }
        out
    }

    /// Evaluates the polar expansion at (r, theta); used by consistency tests.
    pub fn eval(&self, r: f64, theta: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for m in 0..=self.q_max {
            let rm = r.powi(m as i32);
            for p in -(m as i64)..=(m as i64) {
                let c = self.coeff(m, p);
                if c != C64::new(0.0, 0.0) {
                    acc += c * rm * C64::from_polar(1.0, p as f64 * theta);
                }
            }
        }
        acc
    }
}

/// Extended-precision accumulator for one polar table.
struct PolarAcc {
    q_max: usize,
    re: Vec<Ext>,
    im: Vec<Ext>,
}

impl PolarAcc {
    fn new(q_max: usize) -> Self {
        let len = (q_max + 1) * (2 * q_max + 1);
        Self { q_max, re: vec![Ext::zero(); len], im: vec![Ext::zero(); len] }
    }

    /// Adds the polar decomposition of coeff * x^i y^j:
    /// x^i y^j = r^{i+j} (1/2)^{i+j} (-i)^j
    ///           sum_{u,v} binom(i,u) binom(j,v) (-1)^{j-v} e^{i(2u-i+2v-j)theta}
    fn add_monomial(&mut self, i: usize, j: usize, coeff: &Ext) {
        let m = i + j;
        let scale = coeff.mul(&Ext::from_f64(0.5f64.powi(m as i32)));
        // (-i)^j cycles 1, -i, -1, i
        let (re_part, sign) = match j % 4 {
            0 => (true, 1.0),
            1 => (false, -1.0),
            2 => (true, -1.0),
            _ => (false, 1.0),
        };
        for u in 0..=i {
            for v in 0..=j {
                let p = 2 * (u + v) as i64 - m as i64;
                let mut w = binom(i, u) * binom(j, v) * if (j - v) % 2 == 1 { -1 } else { 1 };
                if sign < 0.0 {
                    w = -w;
                }
                let term = scale.mul(&Ext::from_i64(w as i64));
                let idx = m * (2 * self.q_max + 1) + (p + self.q_max as i64) as usize;
                if re_part {
                    self.re[idx] = self.re[idx].add(&term);
                } else {
                    self.im[idx] = self.im[idx].add(&term);
                }
            }
        }
    }

    fn finish(self, order: usize, half_width: f64) -> PolarPoly {
        let coeffs = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| C64::new(r.to_f64(), i.to_f64()))
            .collect();
        PolarPoly { order, q_max: self.q_max, half_width, coeffs }
    }
}

fn binom(n: usize, k: usize) -> i128 {
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Rewrites the truncated monomial expansion in polar coordinates.
pub fn monomial_to_polar(mono: &MonomialCoeffs) -> PolarPoly {
    let q_max = mono.q_max();
    let mut acc = PolarAcc::new(q_max);
    for i in 0..=q_max {
        for j in 0..=(q_max - i) {
            acc.add_monomial(i, j, mono.coeff_ext(i, j));
        }
    }
    acc.finish(mono.order(), mono.half_width())
}

/// Polar coefficients of a single Chebyshev basis function T_a(x/L) T_b(y/L),
/// truncated at radial order q_max. Used to assemble state-independent
/// coefficient-to-estimate maps.
pub(crate) fn basis_polar(a: usize, b: usize, l: f64, q_max: usize) -> PolarPoly {
    let n = a.max(b);
    let t = cheb_monomial_table(n);
    let inv_l = Ext::from_i64(1).div(&Ext::from_f64(l));
    let mut acc = PolarAcc::new(q_max);
    for i in (a % 2..=a.min(q_max)).step_by(2) {
        if t[a][i] == 0 {
            continue;
        }
        for j in (b % 2..=b.min(q_max.saturating_sub(i))).step_by(2) {
            if t[b][j] == 0 || i + j > q_max {
                continue;
            }
            let coeff = Ext::from_i64(t[a][i])
                .mul(&Ext::from_i64(t[b][j]))
                .mul(&inv_l.powi(i + j));
            acc.add_monomial(i, j, &coeff);
        }
    }
    acc.finish(n, l)
}

/// Full bridge from a Padua measurement record to the polar expansion:
/// interpolate, change basis to monomials, rewrite in polar form.
pub fn polar_from_record(record: &MeasurementRecord, q_max: usize) -> Result<PolarPoly> {
    let cheb = interpolate_padua(record)?;
    let mono = cheb_to_monomial_truncated(&cheb, q_max)?;
    Ok(monomial_to_polar(&mono))
}
