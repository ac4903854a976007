//! Extrapolation along geometric horizon grids.
//!
//! Finite-horizon DP sequences converge to their limits with power-law
//! corrections in `n^{-1/2}`. Evaluating on a doubling grid and eliminating
//! one known exponent per stage (Richardson's scheme adapted to half-integer
//! exponents) turns four horizon values into one limit estimate whose error
//! estimate is the size of the last elimination. The error estimates are
//! heuristic, not rigorous bounds.

pub mod claims;

use crate::numeric::neumaier_sum;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AsymError {
    #[error("horizon grid {0:?} is not geometric with ratio 2")]
    NonGeometricGrid(Vec<usize>),
    #[error("need at least {need} values, got {got}")]
    WindowInsufficient { need: usize, got: usize },
    #[error("elimination stages diverge; no limit extracted")]
    NoConvergence,
    #[error("unknown claim {0:?}")]
    UnknownClaim(String),
    #[error(transparent)]
    Hypothesis(#[from] crate::walkmodel::WalkError),
    #[error(transparent)]
    Dp(#[from] crate::exactdp::DpError),
    #[error("{0}")]
    Fluctuation(String),
}

/// Default exponent ladder: corrections `n^-1/2`, `n^-1`, `n^-3/2`.
pub const DEFAULT_EXPONENTS: [f64; 3] = [0.5, 1.0, 1.5];

/// Default doubling grid reaching `n_max`.
pub fn default_grid(n_max: usize) -> Vec<usize> {
    assert!(n_max >= 8, "grid needs room to double three times");
    vec![n_max / 8, n_max / 4, n_max / 2, n_max]
}

#[derive(Debug, Clone)]
pub struct Extrapolated {
    pub limit: f64,
    /// Heuristic: magnitude of the final elimination step.
    pub error_estimate: f64,
    /// Stage 0 is the input; stage `m` has one fewer entry.
    pub stages: Vec<Vec<f64>>,
}

/// Eliminate the given correction exponents from values sampled on a
/// doubling grid.
pub fn extrapolate(
    grid: &[usize],
    values: &[f64],
    exponents: &[f64],
) -> Result<Extrapolated, AsymError> {
    if grid.len() != values.len() || values.len() < 2 {
        return Err(AsymError::WindowInsufficient {
            need: 2,
            got: values.len().min(grid.len()),
        });
    }
    for pair in grid.windows(2) {
        if pair[0] == 0 || pair[1] != pair[0] * 2 {
            return Err(AsymError::NonGeometricGrid(grid.to_vec()));
        }
    }
    let mut stages: Vec<Vec<f64>> = vec![values.to_vec()];
    let mut current = values.to_vec();
    for e in exponents {
        if current.len() < 2 {
            break;
        }
        let damp = 2f64.powf(-e);
        let next: Vec<f64> = current
            .windows(2)
            .map(|w| (w[1] - damp * w[0]) / (1.0 - damp))
            .collect();
        stages.push(next.clone());
        current = next;
    }
    let limit = *current.last().expect("nonempty");
    // Change of the best entry across the last elimination.
    let mut change = f64::NAN;
    if stages.len() >= 2 {
        change = (limit - stages[stages.len() - 2].last().unwrap()).abs();
    }
    // Divergence heuristic: every stage's change strictly larger than the
    // previous one, ending above the first.
    let changes: Vec<f64> = stages
        .windows(2)
        .map(|pair| (pair[1].last().unwrap() - pair[0].last().unwrap()).abs())
        .collect();
    if changes.len() >= 2 {
        let monotone_up = changes.windows(2).all(|c| c[1] > c[0]);
        if monotone_up && changes.last().unwrap() > &(changes[0] * 2.0) {
            return Err(AsymError::NoConvergence);
        }
    }
    Ok(Extrapolated {
        limit,
        error_estimate: if change.is_nan() { 0.0 } else { change },
        stages,
    })
}

#[derive(Debug, Clone)]
pub struct TailFit {
    /// Partial sum of the given terms.
    pub partial: f64,
    /// Analytic sum of the fitted tail beyond the last term.
    pub tail: f64,
    /// Fitted leading coefficient of `n^-3/2`.
    pub coeff: f64,
    pub total: f64,
    pub error_estimate: f64,
}

/// Sum a sequence whose terms decay like `c n^-3/2 + d n^-2`, fitting the
/// tail on the last decade and adding it analytically.
///
/// `terms[j]` is the term at `n = first_n + j`.
pub fn sum_with_power_tail(terms: &[f64], first_n: usize) -> Result<TailFit, AsymError> {
    if terms.len() < 16 {
        return Err(AsymError::WindowInsufficient {
            need: 16,
            got: terms.len(),
        });
    }
    let partial = neumaier_sum(terms.iter().copied());
    let last_n = first_n + terms.len() - 1;

    let fit_from = |start_n: usize| -> (f64, f64) {
        // Least squares for t_n * n^{3/2} = c + d * n^{-1/2}.
        let (mut s0, mut s1, mut s2, mut sy, mut sxy) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
        for (j, t) in terms.iter().enumerate() {
            let n = first_n + j;
            if n < start_n || n == 0 {
                continue;
            }
            let nf = n as f64;
            let x = nf.powf(-0.5);
            let y = t * nf.powf(1.5);
            s0 += 1.0;
            s1 += x;
            s2 += x * x;
            sy += y;
            sxy += x * y;
        }
        let det = s0 * s2 - s1 * s1;
        if det.abs() < 1e-30 || s0 < 4.0 {
            let c = if s0 > 0.0 { sy / s0 } else { 0.0 };
            return (c, 0.0);
        }
        ((s2 * sy - s1 * sxy) / det, (s0 * sxy - s1 * sy) / det)
    };

    // Euler-Maclaurin tails starting at m = last_n + 1.
    let m = (last_n + 1) as f64;
    let t32 = 2.0 / m.sqrt() + 0.5 * m.powf(-1.5) + 0.125 * m.powf(-2.5);
    let t2 = 1.0 / m + 0.5 / (m * m) + m.powf(-3.0) / 6.0;

    let (c_a, d_a) = fit_from(last_n / 10 + 1);
    let (c_b, d_b) = fit_from(last_n / 4 + 1);
    let tail_a = c_a * t32 + d_a * t2;
    let tail_b = c_b * t32 + d_b * t2;

    Ok(TailFit {
        partial,
        tail: tail_a,
        coeff: c_a,
        total: partial + tail_a,
        error_estimate: (tail_a - tail_b).abs() + 1e-14 * partial.abs(),
    })
}

#[derive(Debug, Clone)]
pub struct ConvolutionLimit {
    pub factor_a: f64,
    pub factor_b: f64,
    pub sum_a: f64,
    pub sum_b: f64,
    pub limit: f64,
    pub error_estimate: f64,
}

/// Limit of `n^{3/2} * sum_k a_k b_{n-k}` for two sequences with
/// `n^{3/2} a_n -> a`, `n^{3/2} b_n -> b` and finite sums `A`, `B`: the limit
/// is `a B + b A`. Sequences are indexed from `n = 0`.
pub fn convolution_limit(a: &[f64], b: &[f64]) -> Result<ConvolutionLimit, AsymError> {
    let scaled_tail = |s: &[f64]| -> Result<f64, AsymError> {
        let n_max = s.len() - 1;
        let grid = default_grid(n_max & !7);
        let values: Vec<f64> = grid
            .iter()
            .map(|n| s[*n] * (*n as f64).powf(1.5))
            .collect();
        Ok(extrapolate(&grid, &values, &DEFAULT_EXPONENTS)?.limit)
    };
    if a.len() < 64 || b.len() < 64 {
        return Err(AsymError::WindowInsufficient {
            need: 64,
            got: a.len().min(b.len()),
        });
    }
    let fa = scaled_tail(a)?;
    let fb = scaled_tail(b)?;
    let sa = sum_with_power_tail(&a[1..], 1)?;
    let sb = sum_with_power_tail(&b[1..], 1)?;
    let total_a = sa.total + a[0];
    let total_b = sb.total + b[0];
    let limit = fa * total_b + fb * total_a;
    let error_estimate = fa.abs() * sb.error_estimate
        + fb.abs() * sa.error_estimate
        + 1e-12 * (fa.abs() + fb.abs());
    Ok(ConvolutionLimit {
        factor_a: fa,
        factor_b: fb,
        sum_a: total_a,
        sum_b: total_b,
        limit,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kills_known_exponents_exactly() {
        let grid = vec![64, 128, 256, 512];
        // 2 + 3 n^{-1/2} - 5 n^{-1} + 7 n^{-3/2}
        let values: Vec<f64> = grid
            .iter()
            .map(|n| {
                let nf = *n as f64;
                2.0 + 3.0 / nf.sqrt() - 5.0 / nf + 7.0 * nf.powf(-1.5)
            })
            .collect();
        let out = extrapolate(&grid, &values, &DEFAULT_EXPONENTS).unwrap();
        assert!((out.limit - 2.0).abs() < 1e-12, "limit {}", out.limit);
        // The estimate is the last stage's change, far above the true error.
        assert!(out.error_estimate < 1e-2);
    }

    #[test]
    fn constant_sequence_is_fixed() {
        let grid = vec![8, 16, 32];
        let out = extrapolate(&grid, &[4.0, 4.0, 4.0], &DEFAULT_EXPONENTS).unwrap();
        assert_eq!(out.limit, 4.0);
        assert_eq!(out.error_estimate, 0.0);
    }

    #[test]
    fn rejects_non_geometric_grids() {
        let err = extrapolate(&[10, 20, 30], &[1.0, 2.0, 3.0], &DEFAULT_EXPONENTS).unwrap_err();
        assert!(matches!(err, AsymError::NonGeometricGrid(_)));
        let err = extrapolate(&[8, 16], &[1.0], &DEFAULT_EXPONENTS).unwrap_err();
        assert!(matches!(err, AsymError::WindowInsufficient { .. }));
    }

    #[test]
    fn flags_divergent_input() {
        let grid = vec![8, 16, 32, 64];
        // Growing oscillation: eliminations amplify instead of shrinking.
        let values = vec![1.0, -2.0, 4.0, -8.0];
        assert!(matches!(
            extrapolate(&grid, &values, &DEFAULT_EXPONENTS),
            Err(AsymError::NoConvergence)
        ));
    }

    #[test]
    fn power_tail_sum_hits_zeta_three_halves() {
        // zeta(3/2) = sum n^{-3/2}.
        let n_max = 4096;
        let terms: Vec<f64> = (1..=n_max).map(|n| (n as f64).powf(-1.5)).collect();
        let fit = sum_with_power_tail(&terms, 1).unwrap();
        let zeta32 = 2.612375348685488;
        assert!(
            (fit.total - zeta32).abs() < 1e-9,
            "total {} vs {}",
            fit.total,
            zeta32
        );
        assert!((fit.coeff - 1.0).abs() < 1e-6);
    }

    #[test]
    fn convolution_limit_matches_direct_large_n_evaluation() {
        // a_n = b_n = (n+1)^{-3/2}: limits a = b = 1, sums A = B = zeta(3/2),
        // so the constant is 2 zeta(3/2). Oracle: direct evaluation of the
        // convolution at a large n, which approaches the same constant.
        let n_terms = 8192;
        let seq: Vec<f64> = (0..=n_terms).map(|n| ((n + 1) as f64).powf(-1.5)).collect();
        let out = convolution_limit(&seq, &seq).unwrap();
        let expect = 2.0 * 2.612375348685488;
        assert!(
            (out.limit - expect).abs() / expect < 2e-3,
            "limit {} vs {}",
            out.limit,
            expect
        );

        let big_n = 100_000usize;
        let a = |k: usize| ((k + 1) as f64).powf(-1.5);
        let direct: f64 = (0..=big_n).map(|k| a(k) * a(big_n - k)).sum();
        let scaled = direct * (big_n as f64).powf(1.5);
        // The direct value at finite n sits below the limit by O(n^{-1/2}).
        assert!(
            (scaled - expect).abs() / expect < 2e-2,
            "direct {} vs {}",
            scaled,
            expect
        );
        assert!((out.limit - scaled).abs() / expect < 2e-2);
    }
}
