//! Sign sequences `a₀, a₁, a₂, …` and their textual form.
//!
//! A sequence is written with `+`/`-` characters; a block in parentheses
//! repeats forever:
//!
//! ```text
//! SEQ    := SIGNS | SIGNS? '(' SIGNS ')'
//! SIGNS  := ('+' | '-')+
//! ```
//!
//! `"+-+"` is finite, `"(+-)"` purely periodic, `"+-(+)"` eventually
//! periodic. Periodic descriptions are canonicalized on construction, so
//! two descriptions of the same infinite sequence compare equal.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::error::{Error, Result};

/// One coefficient `aₖ ∈ {−1, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Plus => '+',
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

/// What went wrong while reading a sequence string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    EmptyPeriod,
    UnexpectedChar(char),
    UnexpectedEnd,
    TrailingInput,
}

/// A syntax error, located by byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {}", describe(.kind))]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Empty => "empty sequence".into(),
        ParseErrorKind::EmptyPeriod => "empty periodic block".into(),
        ParseErrorKind::UnexpectedChar(c) => format!("unexpected character {c:?}"),
        ParseErrorKind::UnexpectedEnd => "unexpected end of input, expected ')'".into(),
        ParseErrorKind::TrailingInput => "input continues after the periodic block".into(),
    }
}

/// Random-access supplier for sequences given by a rule rather than a
/// closed form. Reads are bounded by a declared length.
#[derive(Clone)]
pub struct SignStream {
    supplier: Arc<dyn Fn(usize) -> Sign + Send + Sync>,
    bound: usize,
}

impl SignStream {
    pub fn new<F>(bound: usize, supplier: F) -> Self
    where
        F: Fn(usize) -> Sign + Send + Sync + 'static,
    {
        Self {
            supplier: Arc::new(supplier),
            bound,
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Finite,
    EventuallyPeriodic,
    Stream,
}

#[derive(Clone)]
enum Repr {
    Finite(Vec<Sign>),
    Periodic { prefix: Vec<Sign>, period: Vec<Sign> },
    Stream(SignStream),
}

/// A finitely described sequence of signs.
#[derive(Clone)]
pub struct SignSequence(Repr);

impl SignSequence {
    pub fn finite(signs: Vec<Sign>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self(Repr::Finite(signs)))
    }

    /// `prefix` followed by `period` repeated forever, canonicalized.
    pub fn periodic(prefix: Vec<Sign>, period: Vec<Sign>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        let (prefix, period) = canonicalize(prefix, period);
        Ok(Self(Repr::Periodic { prefix, period }))
    }

    pub fn purely_periodic(period: Vec<Sign>) -> Result<Self> {
        Self::periodic(Vec::new(), period)
    }

    pub fn stream(stream: SignStream) -> Self {
        Self(Repr::Stream(stream))
    }

    pub fn kind(&self) -> Kind {
        match &self.0 {
            Repr::Finite(_) => Kind::Finite,
            Repr::Periodic { .. } => Kind::EventuallyPeriodic,
            Repr::Stream(_) => Kind::Stream,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.kind() != Kind::Finite
    }

    pub fn is_purely_periodic(&self) -> bool {
        matches!(&self.0, Repr::Periodic { prefix, .. } if prefix.is_empty())
    }

    /// The finite signs, or the pre-periodic part; empty for streams.
    pub fn prefix(&self) -> &[Sign] {
        match &self.0 {
            Repr::Finite(v) => v,
            Repr::Periodic { prefix, .. } => prefix,
            Repr::Stream(_) => &[],
        }
    }

    /// The repeated block; empty unless the sequence is eventually periodic.
    pub fn period(&self) -> &[Sign] {
        match &self.0 {
            Repr::Periodic { period, .. } => period,
            _ => &[],
        }
    }

    /// Number of readable terms, or `None` when every index is readable.
    pub fn readable_len(&self) -> Option<usize> {
        match &self.0 {
            Repr::Finite(v) => Some(v.len()),
            Repr::Periodic { .. } => None,
            Repr::Stream(s) => Some(s.bound),
        }
    }

    /// The sign `aₘ`.
    pub fn term_at(&self, m: usize) -> Result<Sign> {
        match &self.0 {
            Repr::Finite(v) => v.get(m).copied().ok_or(Error::OutOfRange {
                index: m,
                len: v.len(),
            }),
            Repr::Periodic { prefix, period } => Ok(if m < prefix.len() {
                prefix[m]
            } else {
                period[(m - prefix.len()) % period.len()]
            }),
            Repr::Stream(s) => {
                if m >= s.bound {
                    Err(Error::StreamExhausted {
                        index: m,
                        bound: s.bound,
                    })
                } else {
                    Ok((s.supplier)(m))
                }
            }
        }
    }

    /// The first `n` signs.
    pub fn terms(&self, n: usize) -> Result<Vec<Sign>> {
        (0..n).map(|m| self.term_at(m)).collect()
    }

    /// Canonical text; streams have none.
    pub fn to_text(&self) -> Result<String> {
        match &self.0 {
            Repr::Finite(v) => Ok(signs_to_string(v)),
            Repr::Periodic { prefix, period } => Ok(format!(
                "{}({})",
                signs_to_string(prefix),
                signs_to_string(period)
            )),
            Repr::Stream(_) => Err(Error::StreamNotPrintable),
        }
    }
}

impl PartialEq for SignSequence {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => a == b,
            (
                Repr::Periodic { prefix, period },
                Repr::Periodic {
                    prefix: p2,
                    period: q2,
                },
            ) => prefix == p2 && period == q2,
            (Repr::Stream(a), Repr::Stream(b)) => {
                Arc::ptr_eq(&a.supplier, &b.supplier) && a.bound == b.bound
            }
            _ => false,
        }
    }
}

impl fmt::Debug for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Stream(s) => write!(f, "SignSequence(<stream, bound {}>)", s.bound),
            _ => write!(f, "SignSequence({})", self.to_text().unwrap_or_default()),
        }
    }
}

impl FromStr for SignSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_sequence(s)
    }
}

pub fn signs_to_string(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.as_char()).collect()
}

/// Smallest block whose repetition reproduces `period`.
pub fn minimal_period(period: &[Sign]) -> &[Sign] {
    let n = period.len();
    for d in 1..=n {
        if n % d == 0 && (d..n).all(|i| period[i] == period[i - d]) {
            return &period[..d];
        }
    }
    period
}

/// Minimizes the period, then folds trailing prefix signs into it by
/// rotation, so that each infinite sequence has exactly one description.
fn canonicalize(mut prefix: Vec<Sign>, period: Vec<Sign>) -> (Vec<Sign>, Vec<Sign>) {
    let mut period = minimal_period(&period).to_vec();
    while let Some(&last) = prefix.last() {
        if last != *period.last().expect("nonempty period") {
            break;
        }
        prefix.pop();
        period.rotate_right(1);
    }
    (prefix, period)
}

fn sign_at(bytes: &[u8], i: usize) -> Option<Sign> {
    match bytes.get(i) {
        Some(b'+') => Some(Sign::Plus),
        Some(b'-') => Some(Sign::Minus),
        _ => None,
    }
}

fn unexpected(text: &str, offset: usize) -> ParseError {
    let c = text[offset..].chars().next().expect("offset inside text");
    ParseError {
        offset,
        kind: ParseErrorKind::UnexpectedChar(c),
    }
}

/// Reads a sequence string.
pub fn parse_sequence(text: &str) -> Result<SignSequence> {
    let bytes = text.as_bytes();
    if bytes.is_empty() {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::Empty,
        }
        .into());
    }
    let mut i = 0;
    let mut prefix = Vec::new();
    while let Some(s) = sign_at(bytes, i) {
        prefix.push(s);
        i += 1;
    }
    if i == bytes.len() {
        return SignSequence::finite(prefix);
    }
    if bytes[i] != b'(' {
        return Err(unexpected(text, i).into());
    }
    i += 1;
    let open = i;
    let mut period = Vec::new();
    while let Some(s) = sign_at(bytes, i) {
        period.push(s);
        i += 1;
    }
    match bytes.get(i) {
        None => Err(ParseError {
            offset: i,
            kind: ParseErrorKind::UnexpectedEnd,
        }
        .into()),
        Some(b')') if period.is_empty() => Err(ParseError {
            offset: open,
            kind: ParseErrorKind::EmptyPeriod,
        }
        .into()),
        Some(b')') if i + 1 != bytes.len() => Err(ParseError {
            offset: i + 1,
            kind: ParseErrorKind::TrailingInput,
        }
        .into()),
        Some(b')') => SignSequence::periodic(prefix, period),
        Some(_) => Err(unexpected(text, i).into()),
    }
}

/// Canonical text of a closed-form sequence.
pub fn print_sequence(s: &SignSequence) -> Result<String> {
    s.to_text()
}

/// The first `len` signs as a finite sequence string; works for any kind.
pub fn print_truncated(s: &SignSequence, len: usize) -> Result<String> {
    Ok(signs_to_string(&s.terms(len)?))
}
