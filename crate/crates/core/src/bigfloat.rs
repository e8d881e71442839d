//! Fixed-precision software floats for the Chebyshev-to-monomial basis change.
//!
//! The basis change multiplies Chebyshev-to-monomial integer coefficients of
//! magnitude up to ~1e12 against near-cancelling expansion coefficients, so
//! the accumulation is carried at 192-bit mantissa precision and rounded to
//! f64 only at the polar-coefficient boundary.

use astro_float::{BigFloat, RoundingMode, Sign, WORD_BIT_SIZE};

/// Working mantissa precision in bits.
pub const PRECISION: usize = 192;

const RM: RoundingMode = RoundingMode::ToEven;

/// A 192-bit-mantissa float with value semantics.
#[derive(Debug, Clone)]
pub struct Ext(BigFloat);

impl Ext {
    pub fn zero() -> Self {
        Ext(BigFloat::from_f64(0.0, PRECISION))
    }

    pub fn from_f64(v: f64) -> Self {
        Ext(BigFloat::from_f64(v, PRECISION))
    }

    pub fn from_i64(v: i64) -> Self {
        Ext(BigFloat::from_i64(v, PRECISION))
    }

    pub fn add(&self, rhs: &Ext) -> Ext {
        Ext(self.0.add(&rhs.0, PRECISION, RM))
    }

    pub fn sub(&self, rhs: &Ext) -> Ext {
        Ext(self.0.sub(&rhs.0, PRECISION, RM))
    }

    pub fn mul(&self, rhs: &Ext) -> Ext {
        Ext(self.0.mul(&rhs.0, PRECISION, RM))
    }

    pub fn div(&self, rhs: &Ext) -> Ext {
        Ext(self.0.div(&rhs.0, PRECISION, RM))
    }

    pub fn neg(&self) -> Ext {
        let mut v = self.0.clone();
        v.inv_sign();
        Ext(v)
    }

    /// self * rhs + addend, rounding between the two steps.
    pub fn mul_add(&self, rhs: &Ext, addend: &Ext) -> Ext {
        self.mul(rhs).add(addend)
    }

    /// Integer power by repeated multiplication (exponents here stay tiny).
    pub fn powi(&self, k: usize) -> Ext {
        let mut acc = Ext::from_i64(1);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Rounds to the nearest f64.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        match self.0.as_raw_parts() {
            Some((words, _mant_len, sign, exp, _inexact)) => {
                // value = 0.mantissa * 2^exp with the mantissa MSB-aligned in `words`
                let nw = words.len();
                let hi = words[nw - 1] as u128;
                let lo = if nw >= 2 { words[nw - 2] as u128 } else { 0 };
                let mant = ((hi << WORD_BIT_SIZE) | lo) as f64;
                // scale by 2^(exp - 128) in two steps to dodge over/underflow
                let e = exp - 2 * WORD_BIT_SIZE as i32;
                let e1 = e / 2;
                let acc = mant * exp2i(e1) * exp2i(e - e1);
                if sign == Sign::Neg {
                    -acc
                } else {
                    acc
                }
            }
            None => f64::NAN,
        }
    }

    pub fn abs_to_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

/// 2^k; out-of-range exponents fall back to powi (0 or inf).
fn exp2i(k: i32) -> f64 {
    if (-1022..=1023).contains(&k) {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        2f64.powi(k)
    }
}
