//! Irwin–Hall distribution (sum of `k` independent `U(0,1)` variables).
//!
//! Two evaluation routes:
//!
//! * [`cdf_exact`] evaluates the alternating sum
//!   `(1/k!) Σ_{j≤⌊x⌋} (−1)^j C(k,j) (x−j)^k` in exact big-integer arithmetic.
//!   An `f64` argument is a dyadic rational, so no rounding happens until the
//!   final quotient is converted back to `f64`. In double precision the same
//!   sum loses every significant digit for `k ≈ 30` near the middle of the
//!   support.
//! * [`IrwinHall`] precomputes, for each unit piece `[j, j+1]`, the Taylor
//!   coefficients of the CDF about the piece midpoint (again exactly, then
//!   rounded once) and evaluates them by Horner's rule. Only the lower half of
//!   the support is tabulated; the upper half uses the symmetry
//!   `F(x) = 1 − F(k − x)`, which also gives full relative accuracy for the
//!   survival function.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

fn binomials(k: u32) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 0..k {
        let next = &row[i as usize] * BigInt::from(k - i) / BigInt::from(i + 1);
        row.push(next);
    }
    row
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Correctly scaled `num / den` as `f64` (truncated to 64 significant bits
/// before the final rounding, far below `f64` resolution).
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let negative = num.sign() != den.sign();
    let (num, den) = (num.abs(), den.abs());
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let mut value = q.to_f64().unwrap_or(f64::INFINITY);
    // Apply 2^-shift in steps that cannot overflow or underflow prematurely.
    let mut s = shift;
    while s > 0 {
        let step = s.min(1000);
        value *= 2f64.powi(-(step as i32));
        s -= step;
    }
    while s < 0 {
        let step = (-s).min(1000);
        value *= 2f64.powi(step as i32);
        s += step;
    }
    if negative {
        -value
    } else {
        value
    }
}

/// Split a finite non-negative `f64` into `(m, e)` with `x = m / 2^e`, `e ≥ 0`.
fn dyadic(x: f64) -> (BigInt, u64) {
    debug_assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7FF) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, e2) = if exp == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    // x = mantissa · 2^e2
    if e2 >= 0 {
        (BigInt::from(mantissa) << e2 as u64, 0)
    } else {
        let tz = (mantissa.trailing_zeros() as i64).min(-e2);
        (BigInt::from(mantissa >> tz), (-e2 - tz) as u64)
    }
}

/// Exact Irwin–Hall CDF at `x`, clamped to `[0, 1]`.
pub fn cdf_exact(k: u32, x: f64) -> f64 {
    assert!(k >= 1, "Irwin–Hall order must be positive");
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x >= k as f64 {
        return 1.0;
    }
    let (m, e) = dyadic(x);
    let one = BigInt::one() << e;
    let binom = binomials(k);
    let upper = x.floor() as u32;
    let mut sum = BigInt::zero();
    for j in 0..=upper {
        let base = &m - &one * BigInt::from(j);
        if base.sign() != Sign::Plus {
            break;
        }
        let term = &binom[j as usize] * num_traits::pow(base, k as usize);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let den = factorial(k) << (e * k as u64);
    ratio_to_f64(&sum, &den).clamp(0.0, 1.0)
}

/// Fast Irwin–Hall CDF / survival function for a fixed order `k`.
#[derive(Debug, Clone)]
pub struct IrwinHall {
    k: u32,
    /// `pieces[j][d]`: coefficient of `(x − j − ½)^d` on `[j, j+1]`.
    pieces: Vec<Vec<f64>>,
    /// `1 / k!` and `1 / (k−1)!`; the first piece is the monomial `x^k / k!`.
    inv_kfact: f64,
    inv_km1fact: f64,
}

impl IrwinHall {
    pub fn new(k: u32) -> Self {
        assert!(k >= 1, "Irwin–Hall order must be positive");
        let binom = binomials(k);
        let kfact = factorial(k);
        let n_pieces = k.div_ceil(2);
        let mut pieces = Vec::with_capacity(n_pieces as usize);
        for j in 0..n_pieces {
            // F(c+t) on piece j, c = j + 1/2:
            //   (1/k!) Σ_i (−1)^i C(k,i) Σ_d C(k,d) (c−i)^{k−d} t^d
            // with c − i = (2j + 1 − 2i)/2, so every coefficient is
            //   C(k,d) Σ_i (−1)^i C(k,i) (2j+1−2i)^{k−d} / (k! · 2^{k−d}).
            let coeffs = (0..=k)
                .map(|d| {
                    let mut acc = BigInt::zero();
                    for i in 0..=j {
                        let base = BigInt::from(2 * j as i64 + 1 - 2 * i as i64);
                        let term =
                            &binom[i as usize] * num_traits::pow(base, (k - d) as usize);
                        if i % 2 == 0 {
                            acc += term;
                        } else {
                            acc -= term;
                        }
                    }
                    let num = &binom[d as usize] * acc;
                    let den = &kfact << (k - d) as u64;
                    ratio_to_f64(&num, &den)
                })
                .collect();
            pieces.push(coeffs);
        }
        let inv_kfact = ratio_to_f64(&BigInt::one(), &kfact);
        let inv_km1fact = ratio_to_f64(&BigInt::one(), &factorial(k - 1));
        Self { k, pieces, inv_kfact, inv_km1fact }
    }

    /// Shared instance for order `k`; tables are built once per process.
    pub fn shared(k: u32) -> Arc<IrwinHall> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<IrwinHall>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("Irwin–Hall cache poisoned");
        guard.entry(k).or_insert_with(|| Arc::new(IrwinHall::new(k))).clone()
    }

    pub fn order(&self) -> u32 {
        self.k
    }

    /// CDF on the lower half `0 ≤ x ≤ k/2`.
    #[inline]
    fn lower(&self, x: f64) -> f64 {
        if x < 1.0 {
            return x.powi(self.k as i32) * self.inv_kfact;
        }
        let j = (x.floor() as usize).min(self.pieces.len() - 1);
        let t = x - j as f64 - 0.5;
        let c = &self.pieces[j];
        let mut acc = 0.0;
        for &a in c.iter().rev() {
            acc = acc * t + a;
        }
        acc.max(0.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.k as f64;
        if x <= 0.0 {
            0.0
        } else if x >= k {
            1.0
        } else if x <= 0.5 * k {
            self.lower(x).min(1.0)
        } else {
            (1.0 - self.lower(k - x)).clamp(0.0, 1.0)
        }
    }

    /// `1 − F(x)`, accurate in relative terms deep into the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        let k = self.k as f64;
        if x <= 0.0 {
            1.0
        } else if x >= k {
            0.0
        } else if x >= 0.5 * k {
            self.lower(k - x).min(1.0)
        } else {
            (1.0 - self.lower(x)).clamp(0.0, 1.0)
        }
    }

    /// Quantile by safeguarded Newton iteration on the CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.k as f64;
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return k;
        }
        let (mut lo, mut hi) = (0.0f64, k);
        // Normal approximation as a starting point.
        let sd = (k / 12.0).sqrt();
        let mut x = (0.5 * k + sd * crate::special::normal_quantile(u)).clamp(0.0, k);
        for _ in 0..100 {
            let f = self.cdf(x) - u;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let dens = self.pdf(x);
            let mut next = if dens > 0.0 { x - f / dens } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * k.max(1.0) || hi - lo <= 1e-15 * k {
                return next;
            }
            x = next;
        }
        x
    }

    /// Density, the derivative of the piecewise Taylor expansion.
    pub fn pdf(&self, x: f64) -> f64 {
        let k = self.k as f64;
        if x <= 0.0 || x >= k {
            return 0.0;
        }
        let y = if x <= 0.5 * k { x } else { k - x };
        if y < 1.0 {
            return y.powi(self.k as i32 - 1) * self.inv_km1fact;
        }
        let j = (y.floor() as usize).min(self.pieces.len() - 1);
        let t = y - j as f64 - 0.5;
        let c = &self.pieces[j];
        let mut acc = 0.0;
        for (d, &a) in c.iter().enumerate().skip(1).rev() {
            acc = acc * t + d as f64 * a;
        }
        acc.max(0.0)
    }
}
