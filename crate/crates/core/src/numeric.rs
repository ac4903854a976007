//! Scalar abstraction shared by the exact and floating point DP engines.
//!
//! The DP layer is generic over [`Weight`]. Two instances exist: [`Rational`]
//! (arbitrary precision, every identity holds exactly) and `f64` (fast, used
//! for large horizons, with Neumaier-compensated accumulation so the mass
//! conservation defect after `N` steps stays well below `N * 2^-48`).

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Signed, Zero};
use std::fmt::Debug;
use std::str::FromStr;

/// Exact rational scalar used throughout the model layer.
pub type Rational = Ratio<BigInt>;

/// Scalar the DP engines compute in.
pub trait Weight: Clone + PartialEq + PartialOrd + Debug + Send + Sync + 'static {
    /// True when arithmetic is exact (no rounding, identities checkable with `==`).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn from_ratio(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact/float division; callers guarantee `rhs != 0`.
    fn div(&self, rhs: &Self) -> Self;

    /// Accumulate `term` into `(sum, comp)`. For `f64` this is Neumaier's
    /// compensated step; for exact scalars `comp` stays zero.
    fn acc_add(sum: &mut Self, comp: &mut Self, term: &Self);

    /// Collapse an accumulator pair into a single value.
    fn acc_finish(sum: Self, comp: Self) -> Self;
}

impl Weight for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        <Rational as One>::one()
    }
    fn is_zero(&self) -> bool {
        <Rational as Zero>::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn from_ratio(q: &Rational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn acc_add(sum: &mut Self, _comp: &mut Self, term: &Self) {
        *sum += term;
    }
    fn acc_finish(sum: Self, _comp: Self) -> Self {
        sum
    }
}

impl Weight for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn from_ratio(q: &Rational) -> Self {
        ratio_to_f64(q)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn acc_add(sum: &mut Self, comp: &mut Self, term: &Self) {
        let t = *sum + *term;
        if sum.abs() >= term.abs() {
            *comp += (*sum - t) + *term;
        } else {
            *comp += (*term - t) + *sum;
        }
        *sum = t;
    }
    fn acc_finish(sum: Self, comp: Self) -> Self {
        sum + comp
    }
}

/// Convert without overflowing on large numerators: uses the 64-bit
/// approximation of the reduced fraction via scaling.
pub fn ratio_to_f64(q: &Rational) -> f64 {
    // num's Ratio<BigInt> has no direct to-f64 that is always safe, so go
    // through a scaled integer division with 80 bits of headroom.
    let numer = q.numer();
    let denom = q.denom();
    if numer.is_zero() {
        return 0.0;
    }
    let nbits = numer.bits() as i64;
    let dbits = denom.bits() as i64;
    // Shift so the quotient carries ~64 significant bits.
    let shift = 64 - (nbits - dbits);
    let (scaled, exp): (BigInt, i64) = if shift >= 0 {
        ((numer << shift as u64) / denom, -shift)
    } else {
        (numer / (denom << (-shift) as u64), -shift)
    };
    let approx: f64 = i128::try_from(&scaled).map(|v| v as f64).unwrap_or(f64::MAX);
    approx * (exp as f64).exp2()
}

/// Parse a probability string: either `a/b` or a finite decimal like `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((a, b)) = s.split_once('/') {
        let numer = BigInt::from_str(a.trim()).map_err(|e| format!("bad numerator {a:?}: {e}"))?;
        let denom = BigInt::from_str(b.trim()).map_err(|e| format!("bad denominator {b:?}: {e}"))?;
        if denom.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(numer, denom));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let int_part = if int_part.is_empty() || int_part == "-" {
            format!("{int_part}0")
        } else {
            int_part.to_string()
        };
        let negative = int_part.starts_with('-');
        let whole = BigInt::from_str(&int_part).map_err(|e| format!("bad decimal {s:?}: {e}"))?;
        let frac = BigInt::from_str(frac_part).map_err(|e| format!("bad decimal {s:?}: {e}"))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac_signed = if negative { -frac } else { frac };
        return Ok(Rational::new(whole * &scale + frac_signed, scale));
    }
    let n = BigInt::from_str(s).map_err(|e| format!("bad integer {s:?}: {e}"))?;
    Ok(Rational::from_integer(n))
}

/// Render a rational as `a/b`, or as a plain integer when the denominator is 1.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Compensated sum of an f64 slice.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        f64::acc_add(&mut sum, &mut comp, &v);
    }
    f64::acc_finish(sum, comp)
}

/// A computed scalar together with a one-sided error allowance.
///
/// `bound` covers truncation of DP horizons (mass still in flight) plus
/// propagated ingredient bounds. It is zero whenever the ingredients were
/// closed exactly.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ValueWithBound {
    pub value: f64,
    pub bound: f64,
}

impl ValueWithBound {
    pub fn exact(value: f64) -> Self {
        ValueWithBound { value, bound: 0.0 }
    }

    pub fn new(value: f64, bound: f64) -> Self {
        ValueWithBound { value, bound }
    }

    /// Product with first-order bound propagation.
    pub fn mul(&self, rhs: &ValueWithBound) -> ValueWithBound {
        ValueWithBound {
            value: self.value * rhs.value,
            bound: self.value.abs() * rhs.bound
                + rhs.value.abs() * self.bound
                + self.bound * rhs.bound,
        }
    }

    pub fn add(&self, rhs: &ValueWithBound) -> ValueWithBound {
        ValueWithBound {
            value: self.value + rhs.value,
            bound: self.bound + rhs.bound,
        }
    }

    pub fn scale(&self, c: f64) -> ValueWithBound {
        ValueWithBound {
            value: self.value * c,
            bound: self.bound * c.abs(),
        }
    }
}
