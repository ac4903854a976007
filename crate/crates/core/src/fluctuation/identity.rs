//! Exact factorization identities linking the stopped walk to exponentials
//! of free-walk occupation series.
//!
//! Both identities are checked order by order in the time variable, with
//! coefficients that are Laurent polynomials in the space variable over
//! exact rationals. A correct DP engine produces residual zero, not merely
//! small.

use crate::exactdp::{constrained_table, free_scan, Budget, StepLaw, StoppingTime};
use crate::series::{series_exp_from_scaled, LaurentPoly, SeriesCoeff};
use crate::walkmodel::WalkSpec;

use super::FluctError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WhIdentity {
    /// Surviving mass of the walk kept at or below zero equals the series
    /// exponential of the free walk's nonpositive-part occupation series.
    Occupation,
    /// First-passage mass into the positive half-line equals one minus the
    /// series exponential of the negated positive-part occupation series.
    FirstHit,
}

impl WhIdentity {
    pub fn label(self) -> &'static str {
        match self {
            WhIdentity::Occupation => "occupation",
            WhIdentity::FirstHit => "first-hit",
        }
    }
}

impl std::str::FromStr for WhIdentity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "occupation" => Ok(WhIdentity::Occupation),
            "first-hit" | "first_hit" => Ok(WhIdentity::FirstHit),
            other => Err(format!(
                "unknown identity {other:?}; expected occupation or first-hit"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WhReport {
    pub identity: WhIdentity,
    pub order: usize,
    /// Largest coefficient mismatch across all orders, as a float.
    pub max_abs_residual: f64,
    /// True when every order matches exactly in rational arithmetic.
    pub exact: bool,
    pub first_mismatch: Option<usize>,
}

/// Check one factorization identity through the given order, exactly.
pub fn wh_series_check(
    walk: &WalkSpec,
    identity: WhIdentity,
    order: usize,
    budget: &Budget,
) -> Result<WhReport, FluctError> {
    let law = StepLaw::<crate::numeric::Rational>::from_walk(walk);

    // Free-walk occupation coefficients, restricted to the relevant side.
    let mut restricted: Vec<LaurentPoly> = Vec::with_capacity(order + 1);
    restricted.push(LaurentPoly::zero_poly());
    free_scan(&law, order, budget, |n, row| {
        if n == 0 {
            return;
        }
        let poly = match identity {
            WhIdentity::Occupation => {
                let lo = row.window().map(|(lo, _)| lo).unwrap_or(0);
                LaurentPoly::from_lattice(row, lo, 0, 1)
            }
            WhIdentity::FirstHit => {
                let hi = row.window().map(|(_, hi)| hi).unwrap_or(0);
                LaurentPoly::from_lattice(row, 1, hi, 1)
            }
        };
        restricted.push(poly);
    })?;

    let table = constrained_table::<crate::numeric::Rational>(
        walk,
        StoppingTime::gt(0),
        order,
        budget,
    )?;

    let rhs: Vec<LaurentPoly> = match identity {
        WhIdentity::Occupation => series_exp_from_scaled(&restricted),
        WhIdentity::FirstHit => {
            let negated: Vec<LaurentPoly> = restricted
                .iter()
                .map(|p| p.mul(&LaurentPoly::constant(-crate::numeric::Rational::from_integer(
                    1.into(),
                ))))
                .collect();
            let exp = series_exp_from_scaled(&negated);
            // 1 - exp(-series): order zero becomes the zero polynomial.
            exp.iter()
                .enumerate()
                .map(|(n, p)| {
                    let mut out = if n == 0 { LaurentPoly::one() } else { LaurentPoly::zero_poly() };
                    let neg =
                        p.mul(&LaurentPoly::constant(-crate::numeric::Rational::from_integer(
                            1.into(),
                        )));
                    SeriesCoeff::add_assign(&mut out, &neg);
                    out
                })
                .collect()
        }
    };

    let mut max_abs_residual = 0.0f64;
    let mut first_mismatch = None;
    for n in 0..=order {
        let lhs = match identity {
            WhIdentity::Occupation => {
                let row = &table.survival[n];
                match row.window() {
                    None => LaurentPoly::zero_poly(),
                    Some((lo, hi)) => LaurentPoly::from_lattice(row, lo, hi, 1),
                }
            }
            WhIdentity::FirstHit => {
                let row = &table.hit[n];
                match row.window() {
                    None => LaurentPoly::zero_poly(),
                    Some((lo, hi)) => LaurentPoly::from_lattice(row, lo, hi, 1),
                }
            }
        };
        let diff = lhs.max_abs_diff(&rhs[n]);
        if diff > 0.0 && first_mismatch.is_none() {
            first_mismatch = Some(n);
        }
        max_abs_residual = max_abs_residual.max(diff);
    }

    Ok(WhReport {
        identity,
        order,
        max_abs_residual,
        exact: first_mismatch.is_none(),
        first_mismatch,
    })
}
