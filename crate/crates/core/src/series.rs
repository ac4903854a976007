//! Formal power series utilities: truncated exponentials over arbitrary
//! coefficient rings, and exact Laurent polynomials for bivariate identity
//! checking (power series in time, Laurent polynomial in position).

use crate::exactdp::LatticeDist;
use crate::numeric::{Rational, Weight};
use num::Zero;
use std::fmt::Debug;

/// Coefficient ring of a formal power series.
pub trait SeriesCoeff: Clone + Debug + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, rhs: &Self);
    fn mul(&self, rhs: &Self) -> Self;
    fn mul_nat(&self, n: u64) -> Self;
    fn div_nat(&self, n: u64) -> Self;
}

impl SeriesCoeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn mul_nat(&self, n: u64) -> Self {
        self * n as f64
    }
    fn div_nat(&self, n: u64) -> Self {
        self / n as f64
    }
}

impl SeriesCoeff for Rational {
    fn zero() -> Self {
        <Rational as Weight>::zero()
    }
    fn one() -> Self {
        <Rational as Weight>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_assign(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn mul_nat(&self, n: u64) -> Self {
        self * Rational::from_integer(n.into())
    }
    fn div_nat(&self, n: u64) -> Self {
        self / Rational::from_integer(n.into())
    }
}

/// Exact Laurent polynomial: rational coefficients over a window of integer
/// exponents. The normal form trims zero coefficients at both ends, so
/// equality is plain structural equality.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    lo: i64,
    coeffs: Vec<Rational>,
}

impl LaurentPoly {
    pub fn zero_poly() -> Self {
        LaurentPoly {
            lo: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: Rational) -> Self {
        LaurentPoly {
            lo: 0,
            coeffs: vec![c],
        }
        .normalized()
    }

    pub fn monomial(exp: i64, c: Rational) -> Self {
        LaurentPoly {
            lo: exp,
            coeffs: vec![c],
        }
        .normalized()
    }

    /// Build from a lattice law, keeping only positions in `[lo, hi]` and
    /// mapping position `i` to exponent `sign * i`.
    pub fn from_lattice(dist: &LatticeDist<Rational>, lo: i64, hi: i64, sign: i64) -> Self {
        assert!(sign == 1 || sign == -1);
        let mut terms: Vec<(i64, Rational)> = dist
            .iter()
            .filter(|(i, v)| *i >= lo && *i <= hi && !Zero::is_zero(*v))
            .map(|(i, v)| (sign * i, v.clone()))
            .collect();
        terms.sort_by_key(|(e, _)| *e);
        match (terms.first(), terms.last()) {
            (Some((elo, _)), Some((ehi, _))) => {
                let mut coeffs = vec![<Rational as Weight>::zero(); (ehi - elo + 1) as usize];
                let base = *elo;
                for (e, v) in terms {
                    coeffs[(e - base) as usize] = v;
                }
                LaurentPoly { lo: base, coeffs }
            }
            _ => LaurentPoly::zero_poly(),
        }
    }

    pub fn coeff(&self, exp: i64) -> Rational {
        if exp < self.lo {
            return <Rational as Weight>::zero();
        }
        self.coeffs
            .get((exp - self.lo) as usize)
            .cloned()
            .unwrap_or_else(<Rational as Weight>::zero)
    }

    pub fn exponents(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !Zero::is_zero(*c))
            .map(move |(k, c)| (self.lo + k as i64, c))
    }

    fn normalized(mut self) -> Self {
        let leading = self.coeffs.iter().take_while(|c| Zero::is_zero(*c)).count();
        if leading == self.coeffs.len() {
            return LaurentPoly::zero_poly();
        }
        let trailing = self
            .coeffs
            .iter()
            .rev()
            .take_while(|c| Zero::is_zero(*c))
            .count();
        self.coeffs.truncate(self.coeffs.len() - trailing);
        self.coeffs.drain(..leading);
        self.lo += leading as i64;
        self
    }

    /// Largest absolute coefficient of the difference, as a float; zero iff
    /// the polynomials are identical.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut diff = self.clone();
        let mut negated = other.clone();
        for c in &mut negated.coeffs {
            *c = -c.clone();
        }
        SeriesCoeff::add_assign(&mut diff, &negated);
        diff.coeffs
            .iter()
            .map(|c| crate::numeric::ratio_to_f64(c).abs())
            .fold(0.0, f64::max)
    }
}

impl SeriesCoeff for LaurentPoly {
    fn zero() -> Self {
        LaurentPoly::zero_poly()
    }

    fn one() -> Self {
        LaurentPoly::constant(<Rational as Weight>::one())
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_assign(&mut self, rhs: &Self) {
        if rhs.coeffs.is_empty() {
            return;
        }
        if self.coeffs.is_empty() {
            *self = rhs.clone();
            return;
        }
        let lo = self.lo.min(rhs.lo);
        let hi = (self.lo + self.coeffs.len() as i64).max(rhs.lo + rhs.coeffs.len() as i64);
        let mut coeffs = vec![<Rational as Weight>::zero(); (hi - lo) as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.lo - lo) as usize + k] = c.clone();
        }
        for (k, c) in rhs.coeffs.iter().enumerate() {
            coeffs[(rhs.lo - lo) as usize + k] += c;
        }
        *self = LaurentPoly { lo, coeffs }.normalized();
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return LaurentPoly::zero_poly();
        }
        let lo = self.lo + rhs.lo;
        let mut coeffs =
            vec![<Rational as Weight>::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if Zero::is_zero(a) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if Zero::is_zero(b) {
                    continue;
                }
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly { lo, coeffs }.normalized()
    }

    fn mul_nat(&self, n: u64) -> Self {
        let factor = Rational::from_integer(n.into());
        LaurentPoly {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| c * &factor).collect(),
        }
        .normalized()
    }

    fn div_nat(&self, n: u64) -> Self {
        let factor = Rational::from_integer(n.into());
        LaurentPoly {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| c / &factor).collect(),
        }
        .normalized()
    }
}

/// Truncated exponential of a power series with zero constant term.
///
/// Input and output are coefficient vectors indexed by the time order. Uses
/// the derivative recurrence `n d_n = sum_{k=1..n} (k b_k) d_{n-k}`, which
/// stays in the coefficient ring except for one division by `n` per order.
pub fn series_exp<C: SeriesCoeff>(b: &[C]) -> Vec<C> {
    let scaled: Vec<C> = b
        .iter()
        .enumerate()
        .map(|(k, c)| c.mul_nat(k as u64))
        .collect();
    series_exp_from_scaled(&scaled)
}

/// Same as [`series_exp`] but takes `c_k = k * b_k` directly, which callers
/// often have in closed form.
pub fn series_exp_from_scaled<C: SeriesCoeff>(c: &[C]) -> Vec<C> {
    if c.is_empty() {
        return Vec::new();
    }
    assert!(
        c[0].is_zero(),
        "series exponential needs a zero constant term"
    );
    let n_max = c.len() - 1;
    let mut d: Vec<C> = Vec::with_capacity(n_max + 1);
    d.push(C::one());
    for n in 1..=n_max {
        let mut acc = C::zero();
        for k in 1..=n {
            if c[k].is_zero() || d[n - k].is_zero() {
                continue;
            }
            let term = c[k].mul(&d[n - k]);
            acc.add_assign(&term);
        }
        d.push(acc.div_nat(n as u64));
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn scalar_exponential_matches_factorials() {
        // exp(x s): coefficient of s^n is x^n / n!.
        let x = q("3/2");
        let n = 12;
        let mut b = vec![<Rational as Weight>::zero(); n + 1];
        b[1] = x.clone();
        let d = series_exp(&b);
        let mut expect = <Rational as Weight>::one();
        for k in 0..=n {
            assert_eq!(d[k], expect, "order {k}");
            expect = &expect * &x / Rational::from_integer(((k + 1) as i64).into());
        }
    }

    #[test]
    fn float_exponential_matches_std_exp() {
        let mut b = vec![0.0f64; 20];
        b[1] = 0.3;
        b[2] = -0.1;
        b[3] = 0.05;
        let d = series_exp(&b);
        // Evaluate both sides at a small point inside the radius.
        let s = 0.4f64;
        let arg: f64 = (1..=3).map(|k| b[k] * s.powi(k as i32)).sum();
        let lhs: f64 = d.iter().enumerate().map(|(k, c)| c * s.powi(k as i32)).sum();
        assert!((lhs - arg.exp()).abs() < 1e-9);
    }

    #[test]
    fn laurent_arithmetic() {
        let z = LaurentPoly::monomial(1, q("1"));
        let zinv = LaurentPoly::monomial(-1, q("1"));
        let mut sum = z.clone();
        SeriesCoeff::add_assign(&mut sum, &zinv);
        let square = sum.mul(&sum);
        assert_eq!(square.coeff(2), q("1"));
        assert_eq!(square.coeff(0), q("2"));
        assert_eq!(square.coeff(-2), q("1"));
        assert_eq!(square.coeff(1), q("0"));

        let mut cancel = z.clone();
        let neg_z = LaurentPoly::monomial(1, q("-1"));
        SeriesCoeff::add_assign(&mut cancel, &neg_z);
        assert!(cancel.is_zero());
        assert_eq!(square.max_abs_diff(&square), 0.0);
        assert!(square.max_abs_diff(&sum) > 0.0);
    }

    #[test]
    fn laurent_exponential_matches_binomial_powers() {
        // exp((z + 1/z) s): coefficient of s^n is (z + 1/z)^n / n!.
        let mut base = LaurentPoly::monomial(1, q("1"));
        SeriesCoeff::add_assign(&mut base, &LaurentPoly::monomial(-1, q("1")));
        let n = 8;
        let mut b = vec![LaurentPoly::zero_poly(); n + 1];
        b[1] = base.clone();
        let d = series_exp(&b);
        let mut power = LaurentPoly::one();
        let mut fact = <Rational as Weight>::one();
        for k in 0..=n {
            if k > 0 {
                power = power.mul(&base);
                fact = &fact * &Rational::from_integer((k as i64).into());
            }
            let expect = power.mul(&LaurentPoly::constant(
                <Rational as Weight>::one() / &fact,
            ));
            assert_eq!(d[k], expect, "order {k}");
        }
    }

    #[test]
    fn from_lattice_restricts_and_maps_sign() {
        let dist = LatticeDist::<Rational>::from_parts(
            -2,
            vec![q("1/8"), q("1/4"), q("1/2"), q("1/8")],
        );
        let nonpos = LaurentPoly::from_lattice(&dist, i64::MIN / 2, 0, 1);
        assert_eq!(nonpos.coeff(-2), q("1/8"));
        assert_eq!(nonpos.coeff(0), q("1/2"));
        assert_eq!(nonpos.coeff(1), q("0"));
        let pos_flipped = LaurentPoly::from_lattice(&dist, 1, i64::MAX / 2, -1);
        assert_eq!(pos_flipped.coeff(-1), q("1/8"));
        assert_eq!(pos_flipped.coeff(1), q("0"));
    }
}
