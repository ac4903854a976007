//! Harmonic functions of the walk killed on the nonpositive half-line, and
//! the product-form evaluation of the boundary profile built from them.
//!
//! `V(x)` is the expected depth of the first entry into `(-inf, -x]`, which
//! is harmonic for the killed walk. It is exact at any horizon for walks
//! that are skip-free downward (every entry lands on `-x` precisely);
//! otherwise the surviving mass brackets the overshoot. `V'` is the same
//! construction on the time-reversed (negated) walk.

use crate::asymptotics::{default_grid, extrapolate, AsymError, DEFAULT_EXPONENTS};
use crate::exactdp::{constrained_scan, Budget, StepLaw, StoppingTime};
use crate::fluctuation::constants::z_parts;
use crate::fluctuation::FluctError;
use crate::numeric::{ValueWithBound, Weight};
use crate::walkmodel::WalkSpec;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Expected first-entry depth below `-x + 1`, started from the origin:
/// `V(x) = -E[S at the first time S <= -x]`, defined for `x >= 1`.
pub fn harmonic_value(
    walk: &WalkSpec,
    x: i64,
    n_max: usize,
    budget: &Budget,
) -> Result<ValueWithBound, FluctError> {
    walk.require_centered()?;
    if x < 1 {
        return Err(FluctError::InvalidArgument(format!(
            "harmonic value is defined for arguments >= 1, got {x}"
        )));
    }
    let skip_free = walk.min_step() == -1;
    let horizon = if skip_free {
        n_max.min(128).max(16)
    } else {
        n_max
    };
    let law = StepLaw::<f64>::from_walk(walk);
    let mut partial = 0.0f64;
    let mut comp = 0.0f64;
    let mut surv = 1.0f64;
    constrained_scan(&law, StoppingTime::le(-x), horizon, budget, |n, s, hit| {
        for (i, m) in hit.iter() {
            f64::acc_add(&mut partial, &mut comp, &(i as f64 * m));
        }
        if n == horizon {
            surv = s.total();
        }
    })?;
    let partial = f64::acc_finish(partial, comp);
    if skip_free {
        // Every remaining passage lands exactly on -x.
        let v = -partial + surv * x as f64;
        return Ok(ValueWithBound::new(v, 1e-13 * v.abs()));
    }
    // Remaining passages land in [-x + min_step, -x].
    let depth_spread = (-walk.min_step()) as f64;
    let v = -partial + surv * (x as f64 + 0.5 * depth_spread);
    Ok(ValueWithBound::new(
        v,
        surv * 0.5 * depth_spread + 1e-13 * v.abs(),
    ))
}

/// The same harmonic construction on the negated walk, which is killed on
/// the nonnegative side of the original one.
pub fn harmonic_value_reversed(
    walk: &WalkSpec,
    x: i64,
    n_max: usize,
    budget: &Budget,
) -> Result<ValueWithBound, FluctError> {
    harmonic_value(&reversed(walk)?, x, n_max, budget)
}

/// Negate every step offset.
pub fn reversed(walk: &WalkSpec) -> Result<WalkSpec, FluctError> {
    Ok(WalkSpec::validate(
        walk.steps().iter().map(|(s, p)| (-s, p.clone())).collect(),
    )?)
}

/// Defect of the mean-value property at `x`: the absolute difference between
/// `V(x)` and the one-step average of `V` over surviving moves.
pub fn harmonicity_residual(
    walk: &WalkSpec,
    x: i64,
    n_max: usize,
    budget: &Budget,
) -> Result<ValueWithBound, FluctError> {
    if x < 1 {
        return Err(FluctError::InvalidArgument(format!(
            "harmonicity is probed at arguments >= 1, got {x}"
        )));
    }
    let here = harmonic_value(walk, x, n_max, budget)?;
    let mut avg = 0.0f64;
    let mut bound = here.bound;
    for (y, p) in walk.float_steps() {
        if x + y < 1 {
            continue;
        }
        let v = harmonic_value(walk, x + y, n_max, budget)?;
        avg += p * v.value;
        bound += p * v.bound;
    }
    Ok(ValueWithBound::new((avg - here.value).abs(), bound))
}

/// Product-form boundary profile: the same `n^{-3/2}` constant as
/// [`z_parts`](crate::fluctuation::constants::z_parts) predicts for the
/// surviving mass at `i` under a barrier at `r`, evaluated instead as
/// `sqrt(2/pi) / sigma^3 * V'(r + 1) * V(r + 1 - i)`.
pub fn harmonic_profile_constant(
    walk: &WalkSpec,
    r: i64,
    i: i64,
    n_max: usize,
    budget: &Budget,
) -> Result<ValueWithBound, FluctError> {
    walk.require_centered()?;
    if r < 0 {
        return Err(FluctError::InvalidArgument(format!(
            "barrier must be nonnegative, got {r}"
        )));
    }
    if i > r {
        return Ok(ValueWithBound::exact(0.0));
    }
    let entry = harmonic_value_reversed(walk, r + 1, n_max, budget)?;
    let depth = harmonic_value(walk, r + 1 - i, n_max, budget)?;
    let sigma = walk.sigma();
    Ok(entry.mul(&depth).scale(SQRT_2_OVER_PI / sigma.powi(3)))
}

/// One lattice cell of the profile cross-validation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProfileCell {
    pub r: i64,
    pub i: i64,
    /// Renewal-potential evaluation of the profile.
    pub z_value: f64,
    pub z_bound: f64,
    /// Harmonic product evaluation of the same constant.
    pub harmonic_value: f64,
    pub harmonic_bound: f64,
    /// Extrapolated DP sequence `n^{3/2} P[tau > n, S_n = i]`, averaged over
    /// one lattice period, absent when the extrapolation refused to converge.
    /// For a walk with period d > 1 this referee includes the lattice point
    /// mass correction, so it is reported as data rather than compared
    /// against the closed evaluations.
    pub dp_extrapolated: Option<f64>,
    /// Extrapolation error estimate attached to `dp_extrapolated`.
    pub dp_error: Option<f64>,
    /// Relative gap between the two closed evaluations.
    pub rel_discrepancy: f64,
    /// Combined error allowance of the two evaluations.
    pub error_bound: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProfileReport {
    pub n_grid: Vec<usize>,
    pub cells: Vec<ProfileCell>,
}

/// Cross-validate the two profile evaluations against the extrapolated DP
/// on the rectangle `r in [0, r_max]`, `i in [i_min, r]`.
pub fn profile_report(
    walk: &WalkSpec,
    r_max: i64,
    i_min: i64,
    n_max: usize,
    budget: &Budget,
) -> Result<ProfileReport, FluctError> {
    walk.require_centered()?;
    if r_max < 0 || i_min > r_max {
        return Err(FluctError::InvalidArgument(format!(
            "empty profile rectangle: r_max {r_max}, i_min {i_min}"
        )));
    }
    let grid = default_grid(n_max & !7);
    let n_top = *grid.last().unwrap();
    let period = walk.period() as usize;
    let law = StepLaw::<f64>::from_walk(walk);
    let mut cells = Vec::new();
    for r in 0..=r_max {
        let parts = z_parts(walk, r, i_min, n_max, budget)?;
        // One DP sweep per barrier captures every lattice point at once.
        let width = (r - i_min + 1) as usize;
        let mut rows: Vec<Vec<f64>> = vec![vec![0.0; n_top + 1]; width];
        constrained_scan(&law, StoppingTime::gt(r), n_top, budget, |n, surv, _| {
            for (k, row) in rows.iter_mut().enumerate() {
                row[n] = surv.mass_at(i_min + k as i64);
            }
        })?;
        for i in i_min..=r {
            let z = parts.value(i)?;
            let harmonic = harmonic_profile_constant(walk, r, i, n_max, budget)?;
            // A periodic lattice empties the off-residue times, so average
            // the scaled mass over one period; for period 1 this is the raw
            // sequence.
            let row = &rows[(i - i_min) as usize];
            let seq: Vec<f64> = grid
                .iter()
                .map(|g| {
                    (0..period)
                        .map(|back| {
                            let m = g - back;
                            row[m] * (m as f64).powf(1.5)
                        })
                        .sum::<f64>()
                        / period as f64
                })
                .collect();
            let (dp_extrapolated, dp_error) = match extrapolate(&grid, &seq, &DEFAULT_EXPONENTS) {
                Ok(out) => (Some(out.limit), Some(out.error_estimate)),
                Err(AsymError::NoConvergence) => (None, None),
                Err(e) => return Err(FluctError::InvalidArgument(e.to_string())),
            };
            let denom = harmonic.value.abs().max(1e-300);
            cells.push(ProfileCell {
                r,
                i,
                z_value: z.value,
                z_bound: z.bound,
                harmonic_value: harmonic.value,
                harmonic_bound: harmonic.bound,
                dp_extrapolated,
                dp_error,
                rel_discrepancy: (z.value - harmonic.value).abs() / denom,
                error_bound: z.bound + harmonic.bound,
            });
        }
    }
    Ok(ProfileReport {
        n_grid: grid,
        cells,
    })
}
