//! Partial parities `P_m = a₀a₁⋯a_m`, the binary digits `Q_m = (1 + P_m)/2`,
//! the number `Q = 0.Q₀Q₁Q₂…₂` and `a = 4Q − 2`.
//!
//! The limit of the radical depends on the signs only through `Q`, so this
//! is the bridge between sign sequences and the closed form in
//! [`crate::eval`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::approx::Approx;
use crate::error::{Error, Result};
use crate::seq::{Kind, Sign, SignSequence};

/// Extra fractional bits demanded beyond the digit count when summing `Q`.
pub const GUARD_BITS: u32 = 4;

/// The running products `P₀, P₁, …, P_{L−1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityPrefix {
    values: Vec<Sign>,
}

impl ParityPrefix {
    pub fn values(&self) -> &[Sign] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Q_m = (1 + P_m)/2` for each entry.
    pub fn digits(&self) -> DyadicDigits {
        DyadicDigits {
            digits: self.values.iter().map(|p| p.is_plus() as u8).collect(),
        }
    }
}

/// A prefix `Q₀Q₁…Q_{L−1}` of the binary expansion of `Q`.
///
/// Whatever the unseen digits are, `Q` lies in
/// `[Σ Q_m 2^{−(m+1)}, Σ Q_m 2^{−(m+1)} + 2^{−L}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicDigits {
    digits: Vec<u8>,
}

impl DyadicDigits {
    pub fn new(digits: Vec<u8>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::Domain("a digit prefix needs at least one digit".into()));
        }
        if let Some(bad) = digits.iter().find(|&&d| d > 1) {
            return Err(Error::Domain(format!("binary digit out of range: {bad}")));
        }
        Ok(Self { digits })
    }

    /// Reads `"0.0101"` or a bare `"0101"`.
    pub fn parse(text: &str) -> Result<Self> {
        let body = text.strip_prefix("0.").unwrap_or(text);
        let digits = body
            .bytes()
            .map(|b| match b {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::Domain(format!("not a binary digit string: {text:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(digits)
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `2^{−L}`, exactly.
    pub fn tail_bound(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.digits.len())
    }

    /// `P_m = 2Q_m − 1`.
    pub fn parities(&self) -> ParityPrefix {
        ParityPrefix {
            values: self
                .digits
                .iter()
                .map(|&d| if d == 1 { Sign::Plus } else { Sign::Minus })
                .collect(),
        }
    }

    /// The dyadic sum of the prefix as an exact rational.
    pub fn prefix_sum(&self) -> BigRational {
        BigRational::new(self.mantissa(), BigInt::one() << self.digits.len())
    }

    /// The digits read as an `L`-bit integer.
    fn mantissa(&self) -> BigInt {
        self.digits.iter().fold(BigInt::zero(), |acc, &d| (acc << 1) + d)
    }
}

impl fmt::Display for DyadicDigits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0.")?;
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// `P₀ … P_{count−1}` by the running product.
pub fn parities(s: &SignSequence, count: usize) -> Result<ParityPrefix> {
    if count == 0 {
        return Err(Error::Domain("parity count must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(count);
    let mut running = Sign::Plus;
    for m in 0..count {
        running = running * s.term_at(m)?;
        values.push(running);
    }
    Ok(ParityPrefix { values })
}

/// The first `count` binary digits of `Q`.
pub fn q_digits(s: &SignSequence, count: usize) -> Result<DyadicDigits> {
    Ok(parities(s, count)?.digits())
}

/// The prefix sum `Σ Q_m 2^{−(m+1)}` as an exact ball value at `precision`
/// bits, with the tail bound `2^{−L}` as its radius.
///
/// Refuses rather than rounds when `precision < L + 4`.
pub fn q_value(d: &DyadicDigits, precision: u32) -> Result<Approx> {
    let len = d.len() as u32;
    let needed = len + GUARD_BITS;
    if precision < needed {
        return Err(Error::InsufficientPrecision {
            needed,
            available: precision,
        });
    }
    let exact = Approx::from_dyadic(d.mantissa(), len, precision)?;
    Ok(exact.widen(&(BigInt::one() << (precision - len) as usize)))
}

/// `a = 4Q − 2`.
pub fn a_value(q: &Approx) -> Approx {
    q.mul_int(4).sub(&Approx::from_int(2, q.prec()))
}

/// Signs from parities: `a₀ = P₀`, `a_m = P_{m−1}·P_m`.
pub fn signs_from_parities(parities: &[Sign]) -> Vec<Sign> {
    let mut prev = Sign::Plus;
    parities
        .iter()
        .map(|&p| {
            let a = prev * p;
            prev = p;
            a
        })
        .collect()
}

/// `Q` as an exact rational for eventually periodic sequences.
///
/// Past the prefix the digits repeat with the period length `n` when the
/// product of the periodic block is `+1`, and with length `2n` otherwise
/// (each period flips every later parity).
pub fn exact_q(s: &SignSequence) -> Option<BigRational> {
    if s.kind() != Kind::EventuallyPeriodic {
        return None;
    }
    let pre = s.prefix().len();
    let n = s.period().len();
    let block_parity = s.period().iter().fold(Sign::Plus, |acc, &a| acc * a);
    let block = if block_parity.is_plus() { n } else { 2 * n };
    let digits = q_digits(s, pre + block).expect("periodic sequences are total");
    let bits = digits.digits();
    let to_int = |ds: &[u8]| ds.iter().fold(BigInt::zero(), |acc, &d| (acc << 1) + d);
    let head = to_int(&bits[..pre]);
    let body = to_int(&bits[pre..]);
    let repunit = (BigInt::one() << block) - 1;
    let numer = head * &repunit + body;
    let denom = (BigInt::one() << pre) * repunit;
    Some(BigRational::new(numer, denom))
}
