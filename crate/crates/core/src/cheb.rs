//! Chebyshev fixed-point check for periodic radicals.
//!
//! If the signs repeat with period `n`, the limit `x` satisfies
//! `T_{2ⁿ}(x/2) = x/2`. `T_{2ⁿ}` is applied as `n` compositions of
//! `T₂(t) = 2t² − 1`; its coefficient expansion is never formed.

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::approx::Approx;
use crate::error::{Error, Result};
use crate::eval::{limit_closed_form, PrecisionContext};
use crate::seq::SignSequence;

/// `T_{2ⁿ}(t)` for a ball `t` in `[−1, 1]`, by repeated `t ← 2t² − 1`.
pub fn cheb_pow2(t: &Approx, n: u32, ctx: &PrecisionContext) -> Result<Approx> {
    let one = BigInt::one() << t.prec() as usize;
    // allow the ball to poke past ±1 by its own radius plus an ulp
    if t.mid().abs() - t.rad() > one.clone() + 1 {
        return Err(Error::Domain(format!(
            "Chebyshev argument {} is outside [-1, 1]",
            t.to_f64()
        )));
    }
    // each step can amplify the error fourfold
    let p = t.prec().max(ctx.working_bits() + ctx.trig_guard_bits()) + 2 * n + 2;
    let one_ball = Approx::from_int(1, p);
    let mut v = t.with_prec(p);
    for _ in 0..n {
        v = v.mul(&v).mul_int(2).sub(&one_ball);
    }
    Ok(v.with_prec(ctx.working_bits()))
}

/// Result of checking `T_{2ⁿ}(x/2) − x/2 = 0` for a periodic limit.
#[derive(Clone, Debug)]
pub struct ChebReport {
    pub period_n: usize,
    pub x: Approx,
    /// `T_{2ⁿ}(x/2) − x/2` at the computed `x`.
    pub residual: Approx,
    /// Largest residual consistent with an exact fixed point: the input
    /// bound pushed through `T_{2ⁿ}` (slope at most `4ⁿ`) plus rounding.
    pub tolerance: f64,
}

impl ChebReport {
    pub fn passed(&self) -> bool {
        self.residual.to_f64().abs() <= self.tolerance
    }
}

/// Checks that the limit of a purely periodic sequence is twice a fixed
/// point of `T_{2ⁿ}`, with `n` the canonical period length.
pub fn fixed_point_check(s: &SignSequence, ctx: &PrecisionContext) -> Result<ChebReport> {
    if !s.is_purely_periodic() {
        return Err(Error::Domain(
            "the Chebyshev check needs a purely periodic sequence".into(),
        ));
    }
    let n = s.period().len();
    let x = limit_closed_form(s, ctx, ctx.default_digit_count())?;
    let x_bound = x.bound_f64();
    let half_x = x.scale_pow2(-1);

    // rounding of the composition alone: evaluate at the exact midpoint
    let point = Approx::from_parts(half_x.mid().clone(), BigInt::from(0), half_x.prec());
    let at_point = cheb_pow2(&point, n as u32, ctx)?;
    let residual = cheb_pow2(&half_x, n as u32, ctx)?.sub(&half_x);

    let slope = 4f64.powi(n as i32);
    let tolerance = crate::approx::f64_up(
        (slope + 1.0) * x_bound / 2.0 + at_point.bound_f64() + ulp(ctx),
    );
    Ok(ChebReport {
        period_n: n,
        x,
        residual,
        tolerance,
    })
}

fn ulp(ctx: &PrecisionContext) -> f64 {
    2f64.powi(-(ctx.working_bits() as i32))
}
