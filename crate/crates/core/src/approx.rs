//! Fixed-point ball arithmetic.
//!
//! An [`Approx`] is a midpoint `mid · 2^-prec` together with a radius
//! `rad · 2^-prec`, both held as integers, so every bound is exact and
//! rounds outward. The true quantity always lies in `[mid - rad, mid + rad]`.
//!
//! Only what the radical engine needs is here: ring operations, square
//! root, π, and sine/cosine by Taylor series with explicit truncation and
//! rounding accounting.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A real number known to lie within a closed ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approx {
    mid: BigInt,
    rad: BigInt,
    prec: u32,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// `n / 2^bits` rounded to nearest, ties away from zero.
fn shr_round(n: &BigInt, bits: u32) -> BigInt {
    if bits == 0 {
        return n.clone();
    }
    let half = pow2(bits - 1);
    if n.is_negative() {
        -((-n + &half) >> bits as usize)
    } else {
        (n + &half) >> bits as usize
    }
}

/// `n / 2^bits` rounded up, for nonnegative `n`.
fn shr_ceil(n: &BigInt, bits: u32) -> BigInt {
    if bits == 0 {
        return n.clone();
    }
    (n + pow2(bits) - 1) >> bits as usize
}

fn isqrt_ceil(n: &BigInt) -> BigInt {
    let r = n.sqrt();
    if &r * &r == *n {
        r
    } else {
        r + 1
    }
}

impl Approx {
    /// An exact integer.
    pub fn from_int(v: i64, prec: u32) -> Self {
        Self {
            mid: BigInt::from(v) << prec as usize,
            rad: BigInt::zero(),
            prec,
        }
    }

    /// The exact dyadic `mant · 2^-frac_bits`; fails if it needs more than
    /// `prec` fractional bits.
    pub fn from_dyadic(mant: BigInt, frac_bits: u32, prec: u32) -> Result<Self> {
        if frac_bits > prec {
            return Err(Error::InsufficientPrecision {
                needed: frac_bits,
                available: prec,
            });
        }
        Ok(Self {
            mid: mant << (prec - frac_bits) as usize,
            rad: BigInt::zero(),
            prec,
        })
    }

    /// A rational rounded to nearest at `prec` bits.
    pub fn from_ratio(q: &BigRational, prec: u32) -> Self {
        let scaled = q.numer() << prec as usize;
        let (quot, rem) = scaled.div_mod_floor(q.denom());
        let rad = if rem.is_zero() {
            BigInt::zero()
        } else {
            BigInt::one()
        };
        Self {
            mid: quot,
            rad,
            prec,
        }
    }

    /// Midpoint and radius given directly in units of `2^-prec`.
    pub fn from_parts(mid: BigInt, rad: BigInt, prec: u32) -> Self {
        assert!(!rad.is_negative(), "radius must be nonnegative");
        Self { mid, rad, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Midpoint mantissa in units of `2^-prec`.
    pub fn mid(&self) -> &BigInt {
        &self.mid
    }

    /// Radius in units of `2^-prec`.
    pub fn rad(&self) -> &BigInt {
        &self.rad
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Lower end of the ball, in units of `2^-prec`.
    pub fn lo(&self) -> BigInt {
        &self.mid - &self.rad
    }

    /// Upper end of the ball, in units of `2^-prec`.
    pub fn hi(&self) -> BigInt {
        &self.mid + &self.rad
    }

    /// Builds the smallest ball at `prec` covering `[lo, hi]` (units `2^-prec`).
    fn from_interval(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        debug_assert!(lo <= hi);
        let mid = (&lo + &hi).div_floor(&BigInt::from(2));
        let rad = &hi - &mid;
        Self { mid, rad, prec }
    }

    /// Re-expresses the ball at another precision, widening it to cover the
    /// rounding of the midpoint.
    pub fn with_prec(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let d = (prec - self.prec) as usize;
                Self {
                    mid: &self.mid << d,
                    rad: &self.rad << d,
                    prec,
                }
            }
            Ordering::Less => {
                let d = self.prec - prec;
                let mid = shr_round(&self.mid, d);
                let exact = (&mid << d as usize) == self.mid;
                let mut rad = shr_ceil(&self.rad, d);
                if !exact {
                    rad += 1;
                }
                Self { mid, rad, prec }
            }
        }
    }

    /// Adds `extra` units of `2^-prec` to the radius.
    pub fn widen(mut self, extra: &BigInt) -> Self {
        self.rad += extra;
        self
    }

    /// Adds `bound` (a nonnegative rational) to the radius, rounded up.
    pub fn widen_by(self, bound: &BigRational) -> Self {
        let ulps = (bound * BigRational::from_integer(pow2(self.prec))).ceil();
        let prec = self.prec;
        self.widen(&ulps.to_integer().max(BigInt::zero()))
            .with_prec(prec)
    }

    fn check_prec(&self, other: &Self) {
        assert_eq!(self.prec, other.prec, "precision mismatch in ball arithmetic");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_prec(other);
        Self {
            mid: &self.mid + &other.mid,
            rad: &self.rad + &other.rad,
            prec: self.prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_prec(other);
        Self {
            mid: &self.mid - &other.mid,
            rad: &self.rad + &other.rad,
            prec: self.prec,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            mid: -&self.mid,
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn abs_mid(&self) -> Self {
        Self {
            mid: self.mid.abs(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_prec(other);
        let p = self.prec;
        let full = &self.mid * &other.mid;
        let mid = shr_round(&full, p);
        let exact = (&mid << p as usize) == full;
        // |a|·rb + |b|·ra + ra·rb, scaled back down and rounded up.
        let spread = self.mid.abs() * &other.rad + other.mid.abs() * &self.rad + &self.rad * &other.rad;
        let mut rad = shr_ceil(&spread, p);
        if !exact {
            rad += 1;
        }
        Self { mid, rad, prec: p }
    }

    /// Multiplication by a small integer, exact.
    pub fn mul_int(&self, k: i64) -> Self {
        Self {
            mid: &self.mid * k,
            rad: &self.rad * k.unsigned_abs(),
            prec: self.prec,
        }
    }

    /// Division by a positive integer, rounded.
    pub fn div_int(&self, k: u64) -> Self {
        assert!(k > 0);
        let k = BigInt::from(k);
        let (q, r) = self.mid.div_mod_floor(&k);
        let rad = shr_ceil_div(&self.rad, &k) + if r.is_zero() { 0 } else { 1 };
        Self {
            mid: q,
            rad,
            prec: self.prec,
        }
    }

    /// Exact multiplication by `2^k` for `k` of either sign; a right shift
    /// rounds and widens.
    pub fn scale_pow2(&self, k: i32) -> Self {
        if k >= 0 {
            Self {
                mid: &self.mid << k as usize,
                rad: &self.rad << k as usize,
                prec: self.prec,
            }
        } else {
            let d = (-k) as u32;
            let mid = shr_round(&self.mid, d);
            let exact = (&mid << d as usize) == self.mid;
            let mut rad = shr_ceil(&self.rad, d);
            if !exact {
                rad += 1;
            }
            Self {
                mid,
                rad,
                prec: self.prec,
            }
        }
    }

    /// Square root over the ball, with the lower end intersected with the
    /// domain `[0, ∞)`. Fails only when the whole ball is negative.
    pub fn sqrt(&self) -> Result<Self> {
        let p = self.prec;
        let hi = self.hi();
        if hi.is_negative() {
            return Err(Error::Invariant(format!(
                "square root of a negative ball (upper end {})",
                self.to_f64_lossy_hi()
            )));
        }
        let lo = self.lo().max(BigInt::zero());
        let lo_root = (lo << p as usize).sqrt();
        let hi_root = isqrt_ceil(&(hi << p as usize));
        Ok(Self::from_interval(lo_root, hi_root, p))
    }

    fn to_f64_lossy_hi(&self) -> f64 {
        ratio_to_f64(&self.hi(), self.prec)
    }

    /// Midpoint as the nearest `f64` (for display and quick checks only).
    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.mid, self.prec)
    }

    /// Radius as an `f64` that is never below the exact radius.
    pub fn bound_f64(&self) -> f64 {
        if self.rad.is_zero() {
            return 0.0;
        }
        f64_up(ratio_to_f64(&self.rad, self.prec))
    }

    /// Exact radius as a rational.
    pub fn bound_ratio(&self) -> BigRational {
        BigRational::new(self.rad.clone(), pow2(self.prec))
    }

    /// Exact midpoint as a rational.
    pub fn mid_ratio(&self) -> BigRational {
        BigRational::new(self.mid.clone(), pow2(self.prec))
    }

    /// Whether `q` lies inside the ball.
    pub fn contains(&self, q: &BigRational) -> bool {
        (self.mid_ratio() - q).abs() <= self.bound_ratio()
    }

    /// Whether the ball lies entirely below `q`.
    pub fn is_below(&self, q: &BigRational) -> bool {
        BigRational::new(self.hi(), pow2(self.prec)) < *q
    }

    /// Whether the ball lies entirely above `q`.
    pub fn is_above(&self, q: &BigRational) -> bool {
        BigRational::new(self.lo(), pow2(self.prec)) > *q
    }

    /// Largest possible distance between a point of `self` and a point of
    /// `other`, as a rational upper bound.
    pub fn max_distance(&self, other: &Self) -> BigRational {
        let d = self.sub(other);
        (d.mid_ratio().abs()) + d.bound_ratio()
    }

    /// Midpoint rounded to `digits` decimal places, formatted without
    /// exponent.
    pub fn to_decimal(&self, digits: usize) -> String {
        format_decimal(&self.mid, self.prec, digits)
    }
}

fn shr_ceil_div(n: &BigInt, k: &BigInt) -> BigInt {
    n.div_ceil(k)
}

/// Nearest `f64` to `n · 2^-prec`.
fn ratio_to_f64(n: &BigInt, prec: u32) -> f64 {
    BigRational::new(n.clone(), pow2(prec))
        .to_f64()
        .unwrap_or(f64::NAN)
}

/// Nudges a nonnegative `f64` strictly upward so that it bounds the value it
/// was rounded from.
pub(crate) fn f64_up(x: f64) -> f64 {
    let y = x * (1.0 + 4.0 * f64::EPSILON);
    if y == 0.0 {
        f64::from_bits(1)
    } else {
        y.next_up()
    }
}

/// Formats `mant · 2^-prec` rounded to `digits` places.
pub fn format_decimal(mant: &BigInt, prec: u32, digits: usize) -> String {
    let ten_pow = num_traits::pow(BigInt::from(10), digits);
    let scaled = shr_round(&(mant * &ten_pow), prec);
    let negative = scaled.is_negative();
    let abs = scaled.abs();
    let (int_part, frac_part) = abs.div_rem(&ten_pow);
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        out.push('.');
        out.push_str(&format!("{:0>width$}", frac_part.to_string(), width = digits));
    }
    out
}

/// Formats a nonnegative bound in scientific notation, rounding the
/// mantissa up so the printed figure never understates it.
pub fn format_bound(b: f64) -> String {
    if b == 0.0 {
        return "0".to_string();
    }
    let mut exp = b.log10().floor() as i32;
    let mut m = f64_up(b / 10f64.powi(exp));
    if m < 1.0 {
        m *= 10.0;
        exp -= 1;
    }
    let mut m = (m * 100.0).ceil() / 100.0;
    if m >= 10.0 {
        m /= 10.0;
        exp += 1;
        m = (m * 100.0).ceil() / 100.0;
    }
    format!("{m:.2}e{exp}")
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.prec as f64) * std::f64::consts::LOG10_2).floor() as usize;
        write!(
            f,
            "{} ± {}",
            self.to_decimal(digits.min(40)),
            format_bound(self.bound_f64())
        )
    }
}

// ---------------------------------------------------------------------------
// Constants and elementary functions
// ---------------------------------------------------------------------------

/// `atan(1/k)` scaled by `2^bits`, with the ulp error of the sum.
fn atan_inv(k: u64, bits: u32) -> (BigInt, u64) {
    let k2 = BigInt::from(k * k);
    let mut power = pow2(bits) / k; // floor(2^bits / k^(2j+1))
    let mut sum = BigInt::zero();
    let mut terms = 0u64;
    let mut j = 0u64;
    while !power.is_zero() {
        let term = &power / (2 * j + 1);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        terms += 1;
        power /= &k2;
        j += 1;
    }
    // each term is a floor (< 1 ulp); the alternating tail is < 1 ulp
    (sum, terms + 1)
}

fn compute_pi(prec: u32) -> Approx {
    let bits = prec + 16;
    let (a5, e5) = atan_inv(5, bits);
    let (a239, e239) = atan_inv(239, bits);
    let mid = a5 * 16 - a239 * 4;
    let rad = BigInt::from(16 * e5 + 4 * e239);
    Approx::from_parts(mid, rad, bits).with_prec(prec)
}

/// π as a ball at `prec` bits (Machin's formula), cached per precision.
pub fn pi(prec: u32) -> Approx {
    static CACHE: OnceLock<Mutex<HashMap<u32, Approx>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("pi cache poisoned").get(&prec) {
        return v.clone();
    }
    let v = compute_pi(prec);
    cache
        .lock()
        .expect("pi cache poisoned")
        .insert(prec, v.clone());
    v
}

/// Taylor series `Σ (-1)^j x^(2j+s)/(2j+s)!` at the exact point `x` with
/// `|x| ≤ 2`, where `s = 1` gives sine and `s = 0` cosine. Returns the sum
/// and its ulp error bound.
fn taylor_point(x: &BigInt, prec: u32, odd: bool) -> (BigInt, BigInt) {
    let p = prec as usize;
    let x2 = shr_round(&(x * x), prec);
    let (mut term, mut k) = if odd {
        (x.clone(), 1u64)
    } else {
        (BigInt::one() << p, 0u64)
    };
    let mut sum = BigInt::zero();
    let mut n_terms = 0u64;
    let mut j = 0u64;
    while !term.is_zero() {
        if j % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        n_terms += 1;
        let denom = (k + 1) * (k + 2);
        term = shr_round(&(&term * &x2), prec) / denom;
        k += 2;
        j += 1;
    }
    // With |x| ≤ 2 every computed term is within 4 ulps of the true term
    // and the terms decrease from the second on, so the truncated tail is
    // below 4 ulps as well.
    (sum, BigInt::from(4 * (n_terms + 1)))
}

fn taylor(t: &Approx, odd: bool) -> Approx {
    let two = BigInt::from(2) << t.prec as usize;
    assert!(
        t.mid.abs() <= two,
        "Taylor evaluation needs a reduced argument"
    );
    let p = t.prec;
    let (sum, err) = taylor_point(&t.mid, p, odd);
    // sine and cosine are 1-Lipschitz
    Approx::from_parts(sum, err + &t.rad, p)
}

/// Reduces `t` to `r` with `t = r + q·π/2`, `|r| ≤ π/4` roughly, returning
/// `(r, q mod 4)`. The reduction is carried at extra precision so the
/// multiple of π/2 does not swamp the result.
fn reduce_quadrant(t: &Approx) -> (Approx, u8) {
    let p = t.prec;
    let mag = (t.mid.abs() >> p as usize).bits() as u32;
    let work = p + mag + 8;
    let half_pi = pi(work).scale_pow2(-1);
    let tw = t.with_prec(work);
    // q = round(t / (π/2)) from the midpoints; any integer q is valid.
    let q = (BigRational::new(tw.mid.clone(), half_pi.mid.clone())).round().to_integer();
    let q_small = q.mod_floor(&BigInt::from(4)).to_u8().expect("mod 4");
    let r = tw.sub(&half_pi.mul(&Approx::from_parts(q << work as usize, BigInt::zero(), work)));
    (r.with_prec(p), q_small)
}

/// Sine of a ball.
pub fn sin(t: &Approx) -> Approx {
    let (r, q) = reduce_quadrant(t);
    match q {
        0 => taylor(&r, true),
        1 => taylor(&r, false),
        2 => taylor(&r, true).neg(),
        _ => taylor(&r, false).neg(),
    }
}

/// Cosine of a ball.
pub fn cos(t: &Approx) -> Approx {
    let (r, q) = reduce_quadrant(t);
    match q {
        0 => taylor(&r, false),
        1 => taylor(&r, true).neg(),
        2 => taylor(&r, false).neg(),
        _ => taylor(&r, true),
    }
}
