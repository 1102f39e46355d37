//! Evaluation of the radical `a₀√(2 + a₁√(2 + a₂√(2 + ⋯)))`.
//!
//! Three routes to the same numbers:
//!
//! * [`partial_radical`] nests square roots from the inside out, exactly as
//!   written, stopping at depth `n` with innermost term `a_{n−1}√2`;
//! * [`partial_sine`] evaluates `2·sin((Σ_{k<n} P_k/2^k)·π/4)`, which is
//!   the same finite radical in trigonometric form;
//! * [`limit_closed_form`] evaluates the limit `−2·cos(Qπ)` from the binary
//!   number `Q = 0.Q₀Q₁Q₂…`.
//!
//! Every result is an [`Approx`] whose radius is a rigorous bound on the
//! distance to the exact mathematical value.
//!
//! The inverse direction, from a value or from `Q` back to a sign
//! sequence, is [`invert_from_q`] and [`invert_from_value`].

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::approx::{self, f64_up, Approx};
use crate::error::{Error, Result};
use crate::parity::{self, exact_q, q_digits, q_value, signs_from_parities, DyadicDigits};
use crate::seq::{Kind, Sign, SignSequence};

/// Upper limit on working precision; keeps bound conversions to `f64`
/// away from underflow.
pub const MAX_WORKING_BITS: u32 = 900;

/// Longest repeating block [`invert_from_q`] will write out as a closed form.
pub const MAX_CLOSED_FORM_PERIOD: usize = 4096;

/// Working precision for a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    working_bits: u32,
    trig_guard_bits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            working_bits: 128,
            trig_guard_bits: 16,
        }
    }
}

impl PrecisionContext {
    pub fn new(working_bits: u32, trig_guard_bits: u32) -> Result<Self> {
        if !(53..=MAX_WORKING_BITS).contains(&working_bits) {
            return Err(Error::Domain(format!(
                "working precision must be between 53 and {MAX_WORKING_BITS} bits, got {working_bits}"
            )));
        }
        if trig_guard_bits == 0 || trig_guard_bits > 256 {
            return Err(Error::Domain(format!(
                "guard bits must be between 1 and 256, got {trig_guard_bits}"
            )));
        }
        Ok(Self {
            working_bits,
            trig_guard_bits,
        })
    }

    /// Default guard bits at the given working precision.
    pub fn with_bits(working_bits: u32) -> Result<Self> {
        Self::new(working_bits, Self::default().trig_guard_bits)
    }

    pub fn working_bits(&self) -> u32 {
        self.working_bits
    }

    pub fn trig_guard_bits(&self) -> u32 {
        self.trig_guard_bits
    }

    fn internal_bits(&self) -> u32 {
        self.working_bits + self.trig_guard_bits
    }

    /// Number of digits of `Q` used by default: one per output bit plus a
    /// margin, and never fewer than 64.
    pub fn default_digit_count(&self) -> usize {
        (self.working_bits as usize + 8).max(64)
    }
}

fn require_depth(depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::Domain("depth must be at least 1".into()));
    }
    Ok(())
}

/// The radical cut off at depth `n`, evaluated innermost-out.
///
/// Internally the precision grows with the depth: a radicand can be as
/// small as about `4^{−n}` and must stay resolvable.
pub fn partial_radical(s: &SignSequence, depth: usize, ctx: &PrecisionContext) -> Result<Approx> {
    require_depth(depth)?;
    let signs = s.terms(depth)?;
    let p = ctx.internal_bits() + 2 * depth as u32;
    let two = Approx::from_int(2, p);
    let two_mant = two.mid().clone();
    let mut v = two.sqrt()?;
    for level in (0..depth - 1).rev() {
        if v.hi().is_negative() || v.lo() > two_mant {
            return Err(Error::Invariant(format!(
                "nested value left [0, 2] at level {}",
                level + 1
            )));
        }
        let radicand = if signs[level + 1].is_plus() {
            two.add(&v)
        } else {
            two.sub(&v)
        };
        if radicand.mid().is_negative() {
            return Err(Error::NegativeRadicand { level });
        }
        v = radicand.sqrt()?;
    }
    let x = if signs[0].is_plus() { v } else { v.neg() };
    Ok(x.with_prec(ctx.working_bits))
}

/// `2·sin(x·π/4)` for a ball `x`.
fn two_sin_quarter_pi(x: &Approx) -> Approx {
    let p = x.prec();
    let t = x.mul(&approx::pi(p)).scale_pow2(-2);
    approx::sin(&t).mul_int(2)
}

/// `2·sin((Σ_{k<n} P_k/2^k)·π/4)`; equal to [`partial_radical`] at the
/// same depth.
pub fn partial_sine(s: &SignSequence, depth: usize, ctx: &PrecisionContext) -> Result<Approx> {
    require_depth(depth)?;
    let parities = parity::parities(s, depth)?;
    // Σ P_k 2^{−k} with n − 1 fractional bits
    let mant = parities
        .values()
        .iter()
        .fold(BigInt::zero(), |acc, p| (acc << 1) + p.value() as i64);
    let p = ctx.internal_bits() + depth as u32;
    let sum = Approx::from_dyadic(mant, depth as u32 - 1, p)?;
    Ok(two_sin_quarter_pi(&sum).with_prec(ctx.working_bits))
}

/// `−2·cos(Qπ)` for a ball `Q`, computed as `2·sin((4Q − 2)·π/4)`.
fn limit_from_q(q: &Approx) -> Approx {
    two_sin_quarter_pi(&parity::a_value(q))
}

/// The limit `x = −2·cos(Qπ)` of an infinite sequence.
///
/// `Q` is taken from its first `digits` binary digits, giving a bound of
/// `2π·2^{−digits}` plus rounding. Eventually periodic sequences use the
/// exact rational `Q` instead, and the bound is rounding only.
pub fn limit_closed_form(s: &SignSequence, ctx: &PrecisionContext, digits: usize) -> Result<Approx> {
    if s.kind() == Kind::Finite {
        return Err(Error::Domain(
            "a finite sequence has no limit; evaluate it with partial_radical instead".into(),
        ));
    }
    if digits == 0 {
        return Err(Error::Domain("digit count must be at least 1".into()));
    }
    let x = match exact_q(s) {
        Some(q) => limit_from_q(&Approx::from_ratio(&q, ctx.internal_bits())),
        None => {
            let d = q_digits(s, digits)?;
            let p = ctx
                .internal_bits()
                .max(digits as u32 + parity::GUARD_BITS);
            limit_from_q(&q_value(&d, p)?)
        }
    };
    Ok(x.with_prec(ctx.working_bits))
}

/// [`limit_closed_form`] through the digit prefix only, even when an exact
/// rational `Q` is available.
pub fn limit_from_digits(d: &DyadicDigits, ctx: &PrecisionContext) -> Result<Approx> {
    let p = ctx.internal_bits().max(d.len() as u32 + parity::GUARD_BITS);
    Ok(limit_from_q(&q_value(d, p)?).with_prec(ctx.working_bits))
}

/// Gap between the limit and the depth-`n` partial value: `π·2^{−n}`,
/// rounded up.
pub fn tail_bound(depth: usize) -> f64 {
    f64_up(std::f64::consts::PI * 2f64.powi(-(depth.min(1100) as i32)))
}

/// [`tail_bound`] as an exact rational upper bound.
pub fn tail_bound_ratio(depth: usize) -> BigRational {
    let pi = approx::pi(64);
    BigRational::new(pi.hi(), BigInt::one() << (64 + depth))
}

/// One row of a convergence table.
#[derive(Clone, Debug)]
pub struct ConvergeRow {
    pub depth: usize,
    pub partial: Approx,
    /// `|x − xₙ|` as a ball.
    pub gap: Approx,
    pub tail_bound: f64,
}

impl ConvergeRow {
    /// Whether the computed gap is consistent with `|x − xₙ| ≤ π·2^{−n}`
    /// once the evaluation bounds are allowed for.
    pub fn within_envelope(&self) -> bool {
        self.gap.mid_ratio().abs() <= tail_bound_ratio(self.depth) + self.gap.bound_ratio()
    }
}

/// Partial values at depths `1..=max_depth` next to the limit.
pub fn converge_table(s: &SignSequence, max_depth: usize, ctx: &PrecisionContext) -> Result<Vec<ConvergeRow>> {
    require_depth(max_depth)?;
    let digits = match s.readable_len() {
        Some(bound) => ctx.default_digit_count().min(bound),
        None => ctx.default_digit_count(),
    };
    let x = limit_closed_form(s, ctx, digits)?;
    (1..=max_depth)
        .into_par_iter()
        .map(|depth| {
            let partial = partial_radical(s, depth, ctx)?;
            let gap = x.sub(&partial).abs_mid();
            Ok(ConvergeRow {
                depth,
                partial,
                gap,
                tail_bound: tail_bound(depth),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

/// Which binary expansion to use for a dyadic `Q`, which has two.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Expansion {
    /// `0.0111…` for `1/2`; `Q = 1` is `0.111…`. Always available.
    #[default]
    TrailingOnes,
    /// `0.1000…` for `1/2`. Falls back to trailing ones for `Q = 1`.
    TrailingZeros,
}

/// Where an inversion starts from.
#[derive(Clone, Debug)]
pub enum QSource {
    Rational(BigRational),
    Digits(DyadicDigits),
}

/// A sign sequence recovered from `Q` or from a limit value.
#[derive(Clone, Debug)]
pub struct Inversion {
    /// The first requested signs.
    pub signs: Vec<Sign>,
    /// The whole sequence, when `Q` is rational with a short enough period.
    pub closed_form: Option<SignSequence>,
    /// `Q` exactly, when known.
    pub q_exact: Option<BigRational>,
    /// An interval known to contain `Q`.
    pub q_enclosure: (BigRational, BigRational),
}

/// Binary digits of a rational in `[0, 1]` as a pre-periodic part and a
/// repeating block, or `None` if the block is longer than `max_period`.
pub fn binary_expansion(q: &BigRational, conv: Expansion, max_period: usize) -> Option<(Vec<u8>, Vec<u8>)> {
    if q.is_zero() {
        return Some((vec![], vec![0]));
    }
    let den = q.denom();
    let twos = den.trailing_zeros().unwrap_or(0) as usize;
    let odd = den >> twos;
    if odd.is_one() {
        // q = m / 2^e with m odd, or q = 1
        let m = q.numer().clone();
        let (head, tail) = match conv {
            Expansion::TrailingZeros if !q.is_one() => (m, 0u8),
            _ => (m - 1, 1u8),
        };
        let digits = (0..twos)
            .rev()
            .map(|i| u8::from(head.bit(i as u64)))
            .collect();
        return Some((digits, vec![tail]));
    }
    // long division; remainders repeat once the 2-adic part is consumed
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits = Vec::new();
    let mut r = q.numer().clone();
    loop {
        if let Some(&start) = seen.get(&r) {
            let period = digits.split_off(start);
            return Some((digits, period));
        }
        if digits.len() > twos + max_period {
            return None;
        }
        seen.insert(r.clone(), digits.len());
        r <<= 1;
        if &r >= den {
            digits.push(1);
            r -= den;
        } else {
            digits.push(0);
        }
    }
}

/// The first `count` binary digits of a rational in `[0, 1)`; `1` gives all
/// ones.
fn leading_digits(q: &BigRational, count: usize) -> Vec<u8> {
    if q.is_one() {
        return vec![1; count];
    }
    let den = q.denom();
    let mut r = q.numer().clone();
    (0..count)
        .map(|_| {
            r <<= 1;
            if &r >= den {
                r -= den;
                1
            } else {
                0
            }
        })
        .collect()
}

/// The sign sequence whose `Q` has the given eventually periodic digits.
fn sequence_from_digits(pre: &[u8], period: &[u8]) -> Result<SignSequence> {
    let span = pre.len() + period.len() + 1;
    let digits: Vec<u8> = pre
        .iter()
        .chain(period.iter().cycle())
        .take(span)
        .copied()
        .collect();
    let parities = DyadicDigits::new(digits)?.parities();
    let signs = signs_from_parities(parities.values());
    let (head, block) = signs.split_at(pre.len() + 1);
    SignSequence::periodic(head.to_vec(), block.to_vec())
}

fn check_unit_interval(q: &BigRational) -> Result<()> {
    if q.is_negative() || q > &BigRational::one() {
        return Err(Error::Domain(format!("Q must lie in [0, 1], got {q}")));
    }
    Ok(())
}

/// Signs from `Q`: binary digits → parities `P_m = 2Q_m − 1` → signs
/// `a₀ = P₀`, `a_m = P_{m−1}P_m`.
///
/// Dyadic rationals follow `conv`. A rational `Q` also yields the whole
/// sequence in closed form.
pub fn invert_from_q(src: &QSource, terms: usize, conv: Expansion) -> Result<Inversion> {
    require_depth(terms)?;
    match src {
        QSource::Rational(q) => {
            check_unit_interval(q)?;
            let closed_form = match binary_expansion(q, conv, MAX_CLOSED_FORM_PERIOD) {
                Some((pre, period)) => Some(sequence_from_digits(&pre, &period)?),
                None => None,
            };
            let signs = match &closed_form {
                Some(s) => s.terms(terms)?,
                None => {
                    let digits = DyadicDigits::new(leading_digits(q, terms))?;
                    signs_from_parities(digits.parities().values())
                }
            };
            Ok(Inversion {
                signs,
                closed_form,
                q_exact: Some(q.clone()),
                q_enclosure: (q.clone(), q.clone()),
            })
        }
        QSource::Digits(d) => {
            if terms > d.len() {
                return Err(Error::Domain(format!(
                    "{terms} signs requested but only {} digits of Q are known",
                    d.len()
                )));
            }
            let signs = signs_from_parities(&d.parities().values()[..terms]);
            let lo = d.prefix_sum();
            let hi = &lo + d.tail_bound();
            Ok(Inversion {
                signs,
                closed_form: None,
                q_exact: None,
                q_enclosure: (lo, hi),
            })
        }
    }
}

/// The rational with the smallest denominator in `[lo, hi]`, for
/// `0 ≤ lo ≤ hi`.
pub fn simplest_between(lo: &BigRational, hi: &BigRational) -> BigRational {
    debug_assert!(!lo.is_negative() && lo <= hi);
    let up = lo.ceil();
    if &up <= hi {
        return up;
    }
    let whole = lo.floor();
    let inner = simplest_between(
        &(hi - &whole).recip(),
        &(lo - &whole).recip(),
    );
    whole + inner.recip()
}

/// Denominators up to `2^{working_bits/4}` are taken as exact when a value
/// is inverted.
fn snap_limit(ctx: &PrecisionContext) -> BigInt {
    BigInt::one() << (ctx.working_bits / 4) as usize
}

#[derive(PartialEq, Eq)]
enum Side {
    Below,
    Above,
    Unknown,
}

fn side_of(q: &BigRational, x: &BigRational, prec: u32) -> Side {
    let f = limit_from_q(&Approx::from_ratio(q, prec));
    if f.is_below(x) {
        Side::Below
    } else if f.is_above(x) {
        Side::Above
    } else {
        Side::Unknown
    }
}

/// Narrows an interval known to contain `Q` with `−2cos(Qπ) = x`.
fn enclose_q(x: &BigRational, ctx: &PrecisionContext) -> (BigRational, BigRational) {
    let p = ctx.internal_bits();
    let steps = p as usize;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut lo = BigRational::zero();
    let mut hi = BigRational::one();
    for _ in 0..steps {
        let c = (&lo + &hi) * &half;
        match side_of(&c, x, p) {
            Side::Below => lo = c,
            Side::Above => hi = c,
            Side::Unknown => {
                // the undecidable zone around c is an interval; find its
                // decidable edges on both sides
                let (mut l, mut r) = (lo.clone(), c.clone());
                for _ in 0..steps {
                    let m = (&l + &r) * &half;
                    if side_of(&m, x, p) == Side::Below {
                        l = m;
                    } else {
                        r = m;
                    }
                }
                let (mut l2, mut r2) = (c, hi.clone());
                for _ in 0..steps {
                    let m = (&l2 + &r2) * &half;
                    if side_of(&m, x, p) == Side::Above {
                        r2 = m;
                    } else {
                        l2 = m;
                    }
                }
                return (l, r2);
            }
        }
    }
    (lo, hi)
}

/// Signs of a sequence whose limit is `x`, via `Q = arccos(−x/2)/π`.
///
/// `Q` is located by bisection on the monotone map `Q ↦ −2cos(Qπ)`. If
/// the resulting interval contains a rational of denominator at most
/// `2^{working_bits/4}`, that rational is taken as `Q` exactly and the
/// result carries a closed form. Otherwise the signs come from the digits
/// of the interval's midpoint.
pub fn invert_from_value(x: &BigRational, terms: usize, ctx: &PrecisionContext, conv: Expansion) -> Result<Inversion> {
    require_depth(terms)?;
    let two = BigRational::from_integer(BigInt::from(2));
    if x.abs() > two {
        return Err(Error::Domain(format!("a limit must lie in [-2, 2], got {x}")));
    }
    let (lo, hi) = enclose_q(x, ctx);
    let candidate = simplest_between(&lo, &hi);
    if candidate.denom() <= &snap_limit(ctx) {
        let mut inv = invert_from_q(&QSource::Rational(candidate), terms, conv)?;
        inv.q_enclosure = (lo, hi);
        return Ok(inv);
    }
    let mid = (&lo + &hi) / two;
    let digits = DyadicDigits::new(leading_digits(&mid, terms))?;
    Ok(Inversion {
        signs: signs_from_parities(digits.parities().values()),
        closed_form: None,
        q_exact: None,
        q_enclosure: (lo, hi),
    })
}

/// Parses a decimal (`"-0.25"`, `"2"`) or a fraction (`"1/3"`) exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Domain(format!("not a number: {text:?}"));
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        return Ok(BigRational::new(n, d));
    }
    let (negative, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = BigRational::new(numer, denom);
    Ok(if negative { -q } else { q })
}

/// `Q` as an `f64`, for display.
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Whether `q` is a dyadic rational, the case with two binary expansions.
pub fn is_dyadic(q: &BigRational) -> bool {
    let den = q.denom();
    let twos = den.trailing_zeros().unwrap_or(0);
    (den >> twos as usize).is_one()
}

/// `gcd`-reduced fraction text, `"p/q"` or `"p"`.
pub fn format_ratio(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        let g = q.numer().gcd(q.denom());
        format!("{}/{}", q.numer() / &g, q.denom() / &g)
    }
}
