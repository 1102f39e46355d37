//! Limits of continued radicals `a₀√(2 + a₁√(2 + a₂√(2 + ⋯)))` with every
//! `aₖ ∈ {−1, +1}`.
//!
//! The limit depends on the signs through the binary number
//! `Q = 0.Q₀Q₁Q₂…`, where `Q_m = 1` exactly when `a₀a₁⋯a_m = +1`:
//!
//! ```text
//! x = −2·cos(Qπ)
//! ```
//!
//! This crate computes that closed form, checks it against direct nested
//! evaluation and against Chebyshev fixed points, and runs it backwards
//! from a value to a sign sequence. All numbers are [`Approx`] balls with
//! rigorous error bounds.
//!
//! ```
//! use radical::{limit_closed_form, parse_sequence, PrecisionContext};
//!
//! let ctx = PrecisionContext::default();
//! let s = parse_sequence("(-)").unwrap();
//! let x = limit_closed_form(&s, &ctx, ctx.default_digit_count()).unwrap();
//! assert_eq!(x.to_decimal(20), "-1.00000000000000000000");
//! ```
//!
//! The guide in `book/` walks through the mathematics chapter by chapter.

pub mod approx;
pub mod cheb;
pub mod cli;
pub mod error;
pub mod eval;
pub mod parity;
pub mod seq;

pub use approx::Approx;
pub use cheb::{cheb_pow2, fixed_point_check, ChebReport};
pub use error::{Error, Result};
pub use eval::{
    converge_table, invert_from_q, invert_from_value, limit_closed_form, partial_radical,
    partial_sine, tail_bound, ConvergeRow, Expansion, Inversion, PrecisionContext, QSource,
};
pub use parity::{a_value, exact_q, parities, q_digits, q_value, DyadicDigits, ParityPrefix};
pub use seq::{
    parse_sequence, print_sequence, print_truncated, Kind, ParseError, Sign, SignSequence,
    SignStream,
};

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/parity.md")]
    mod parity {}
    #[doc = include_str!("../../../book/src/limits.md")]
    mod limits {}
    #[doc = include_str!("../../../book/src/chebyshev.md")]
    mod chebyshev {}
    #[doc = include_str!("../../../book/src/inversion.md")]
    mod inversion {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
