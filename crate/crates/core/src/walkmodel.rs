//! Step laws on the integer lattice: validation, moments, exponential tilting.
//!
//! A [`WalkSpec`] is a finitely supported probability measure on the integers
//! with exact rational masses, canonically sorted and deduplicated. Validation
//! enforces that the masses form a probability vector and that the support
//! generates the whole lattice (otherwise every downstream window computation
//! would silently live on a sublattice). Aperiodicity in the strong sense,
//! meaning the support differences also generate the lattice, is recorded as a
//! flag rather than enforced here: exact identities hold without it, but every
//! limit-theorem claim checks it up front and refuses periodic walks.

use crate::numeric::{format_rational, parse_rational, ratio_to_f64, Rational};
use num::bigint::BigInt;
use num::{Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("step masses sum to {got}, expected 1")]
    MassNotOne { got: String },
    #[error("step at offset {offset} has negative mass {mass}")]
    NegativeMass { offset: i64, mass: String },
    #[error("support generates the sublattice {gcd}Z, not the full lattice")]
    NotAdapted { gcd: u64 },
    #[error("support differences generate the sublattice {gcd}Z; lattice limit constants need gcd 1")]
    NotAperiodic { gcd: u64 },
    #[error("fewer than two offsets carry positive mass")]
    DegenerateSupport,
    #[error("walk drift is not positive ({mean}); tilting needs a supercritical walk")]
    NotSupercritical { mean: String },
    #[error("no negative offset carries mass; the moment generating function has no interior minimizer")]
    NoInteriorMinimizer,
    #[error("bad walk configuration: {0}")]
    Config(String),
}

/// Validated step law of an integer-lattice random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec {
    steps: Vec<(i64, Rational)>,
    mean: Rational,
    variance: Rational,
    diff_gcd: u64,
}

impl WalkSpec {
    /// Validate a raw list of `(offset, mass)` pairs. Duplicate offsets are
    /// merged and zero-mass atoms dropped before any check runs.
    pub fn validate(raw: Vec<(i64, Rational)>) -> Result<Self, WalkError> {
        let mut merged: BTreeMap<i64, Rational> = BTreeMap::new();
        for (offset, mass) in raw {
            if mass.is_negative() {
                return Err(WalkError::NegativeMass {
                    offset,
                    mass: format_rational(&mass),
                });
            }
            *merged.entry(offset).or_insert_with(Rational::zero) += mass;
        }
        merged.retain(|_, m| !m.is_zero());
        let steps: Vec<(i64, Rational)> = merged.into_iter().collect();

        let total: Rational = steps.iter().map(|(_, m)| m.clone()).sum();
        if total != Rational::from_integer(BigInt::from(1)) {
            return Err(WalkError::MassNotOne {
                got: format_rational(&total),
            });
        }
        if steps.len() < 2 {
            return Err(WalkError::DegenerateSupport);
        }

        let support_gcd = steps
            .iter()
            .fold(0u64, |g, (s, _)| gcd_u64(g, s.unsigned_abs()));
        if support_gcd != 1 {
            return Err(WalkError::NotAdapted { gcd: support_gcd });
        }
        let base = steps[0].0;
        let diff_gcd = steps
            .iter()
            .fold(0u64, |g, (s, _)| gcd_u64(g, (s - base).unsigned_abs()));

        let mean: Rational = steps
            .iter()
            .map(|(s, m)| Rational::from_integer(BigInt::from(*s)) * m)
            .sum();
        let second: Rational = steps
            .iter()
            .map(|(s, m)| Rational::from_integer(BigInt::from(s * s)) * m)
            .sum();
        let variance = second - &mean * &mean;

        Ok(WalkSpec {
            steps,
            mean,
            variance,
            diff_gcd,
        })
    }

    pub fn steps(&self) -> &[(i64, Rational)] {
        &self.steps
    }

    pub fn min_step(&self) -> i64 {
        self.steps.first().expect("nonempty").0
    }

    pub fn max_step(&self) -> i64 {
        self.steps.last().expect("nonempty").0
    }

    /// Exact drift per step.
    pub fn mean(&self) -> &Rational {
        &self.mean
    }

    /// Exact central second moment per step.
    pub fn variance(&self) -> &Rational {
        &self.variance
    }

    pub fn is_centered(&self) -> bool {
        self.mean.is_zero()
    }

    /// Square root of the variance, as a float.
    pub fn sigma(&self) -> f64 {
        ratio_to_f64(&self.variance).sqrt()
    }

    /// Strong aperiodicity: support differences generate the full lattice.
    pub fn is_aperiodic(&self) -> bool {
        self.diff_gcd == 1
    }

    /// The generator of the sublattice spanned by support differences.
    pub fn period(&self) -> u64 {
        self.diff_gcd
    }

    pub fn require_aperiodic(&self) -> Result<(), WalkError> {
        if self.is_aperiodic() {
            Ok(())
        } else {
            Err(WalkError::NotAperiodic { gcd: self.diff_gcd })
        }
    }

    pub fn require_centered(&self) -> Result<(), WalkError> {
        if self.is_centered() {
            Ok(())
        } else {
            Err(WalkError::Config(format!(
                "walk has drift {}, a centered walk is required",
                format_rational(&self.mean)
            )))
        }
    }

    /// Step masses converted to floats, in offset order.
    pub fn float_steps(&self) -> Vec<(i64, f64)> {
        self.steps
            .iter()
            .map(|(s, m)| (*s, ratio_to_f64(m)))
            .collect()
    }

    /// Stable textual identity, used for hashing and manifests.
    pub fn canonical_string(&self) -> String {
        self.steps
            .iter()
            .map(|(s, m)| format!("{s}:{}", format_rational(m)))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Hex digest identifying the walk in reports.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }

    pub fn from_json_str(text: &str) -> Result<Self, WalkError> {
        let config: WalkConfig =
            serde_json::from_str(text).map_err(|e| WalkError::Config(e.to_string()))?;
        config.build()
    }

    pub fn to_json_string(&self) -> String {
        let config = WalkConfig {
            steps: self
                .steps
                .iter()
                .map(|(s, m)| StepEntry {
                    offset: *s,
                    prob: format_rational(m),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&config).expect("serializable")
    }
}

/// On-disk walk description: offsets with probability strings (`a/b` or a
/// finite decimal).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkConfig {
    pub steps: Vec<StepEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepEntry {
    pub offset: i64,
    pub prob: String,
}

impl WalkConfig {
    pub fn build(&self) -> Result<WalkSpec, WalkError> {
        let mut raw = Vec::with_capacity(self.steps.len());
        for entry in &self.steps {
            let mass = parse_rational(&entry.prob).map_err(WalkError::Config)?;
            raw.push((entry.offset, mass));
        }
        WalkSpec::validate(raw)
    }
}

/// Result of centering a supercritical walk by an exponential change of measure.
#[derive(Debug, Clone)]
pub struct TiltResult {
    /// Tilt parameter, the interior minimizer of the moment generating function.
    pub gamma0: f64,
    /// Minimal value of the moment generating function, in (0, 1).
    pub rho: f64,
    /// Tilted step law; real masses, centered up to the solver tolerance.
    pub tilted_steps: Vec<(i64, f64)>,
    pub tilted_mean: f64,
    pub tilted_variance: f64,
}

/// Center a positive-drift walk: find the interior minimizer `gamma0 < 0` of
/// `g(t) = sum_s p_s exp(t s)`, its minimal value `rho = g(gamma0)`, and the
/// tilted law `p_s exp(gamma0 s) / rho`.
pub fn tilt(walk: &WalkSpec, tol: f64) -> Result<TiltResult, WalkError> {
    if !walk.mean().is_positive() {
        return Err(WalkError::NotSupercritical {
            mean: format_rational(walk.mean()),
        });
    }
    if walk.min_step() >= 0 {
        return Err(WalkError::NoInteriorMinimizer);
    }
    let steps = walk.float_steps();
    let mgf_prime = |t: f64| -> f64 {
        steps
            .iter()
            .map(|(s, p)| p * (*s as f64) * (t * *s as f64).exp())
            .sum()
    };

    // g'(0) = mean > 0; g' -> -inf as t -> -inf because of the negative
    // support, so bracket the root by doubling.
    let mut lo = -1.0f64;
    let mut doublings = 0;
    while mgf_prime(lo) >= 0.0 {
        lo *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(WalkError::NoInteriorMinimizer);
        }
    }
    let mut hi = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mgf_prime(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * lo.abs() {
            break;
        }
    }
    let gamma0 = 0.5 * (lo + hi);
    if mgf_prime(gamma0).abs() > tol.max(1e-9) {
        return Err(WalkError::Config(format!(
            "tilt solver stalled: derivative residual {} above tolerance",
            mgf_prime(gamma0)
        )));
    }

    let rho: f64 = steps
        .iter()
        .map(|(s, p)| p * (gamma0 * *s as f64).exp())
        .sum();
    let tilted_steps: Vec<(i64, f64)> = steps
        .iter()
        .map(|(s, p)| (*s, p * (gamma0 * *s as f64).exp() / rho))
        .collect();
    let tilted_mean: f64 = tilted_steps.iter().map(|(s, p)| p * *s as f64).sum();
    let tilted_second: f64 = tilted_steps.iter().map(|(s, p)| p * (s * s) as f64).sum();

    Ok(TiltResult {
        gamma0,
        rho,
        tilted_steps,
        tilted_mean,
        tilted_variance: tilted_second - tilted_mean * tilted_mean,
    })
}

/// Nonnegative rational test function with finite support on the lattice.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TestFunction {
    values: BTreeMap<i64, Rational>,
}

impl TestFunction {
    pub fn new(values: impl IntoIterator<Item = (i64, Rational)>) -> Result<Self, String> {
        let mut map = BTreeMap::new();
        for (at, value) in values {
            if value.is_negative() {
                return Err(format!("test function value at {at} is negative"));
            }
            if !value.is_zero() {
                map.insert(at, value);
            }
        }
        Ok(TestFunction { values: map })
    }

    pub fn indicator(point: i64) -> Self {
        let mut values = BTreeMap::new();
        values.insert(point, Rational::from_integer(BigInt::from(1)));
        TestFunction { values }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.values.keys().copied()
    }

    pub fn support_range(&self) -> Option<(i64, i64)> {
        let lo = *self.values.keys().next()?;
        let hi = *self.values.keys().next_back()?;
        Some((lo, hi))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn value(&self, at: i64) -> Option<&Rational> {
        self.values.get(&at)
    }

    pub fn value_f64(&self, at: i64) -> f64 {
        self.values.get(&at).map(ratio_to_f64).unwrap_or(0.0)
    }

    pub fn from_json_str(text: &str) -> Result<Self, String> {
        #[derive(Deserialize)]
        struct Entry {
            at: i64,
            value: String,
        }
        #[derive(Deserialize)]
        struct Config {
            values: Vec<Entry>,
        }
        let config: Config = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut pairs = Vec::new();
        for entry in config.values {
            pairs.push((entry.at, parse_rational(&entry.value)?));
        }
        TestFunction::new(pairs)
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::parse_rational as q;

    fn walk(pairs: &[(i64, &str)]) -> Result<WalkSpec, WalkError> {
        WalkSpec::validate(
            pairs
                .iter()
                .map(|(s, m)| (*s, q(m).unwrap()))
                .collect::<Vec<_>>(),
        )
    }

    fn lazy_quarter() -> WalkSpec {
        walk(&[(-1, "1/4"), (0, "1/2"), (1, "1/4")]).unwrap()
    }

    #[test]
    fn accepts_and_canonicalizes_the_symmetric_lazy_walk() {
        let w = lazy_quarter();
        assert_eq!(w.min_step(), -1);
        assert_eq!(w.max_step(), 1);
        assert!(w.is_centered());
        assert_eq!(w.variance(), &q("1/2").unwrap());
        assert!(w.is_aperiodic());
        assert_eq!(w.canonical_string(), "-1:1/4,0:1/2,1:1/4");
    }

    #[test]
    fn merges_duplicates_and_drops_zero_mass() {
        let w = walk(&[(1, "1/8"), (1, "1/8"), (-1, "1/4"), (0, "1/2"), (3, "0")]).unwrap();
        assert_eq!(w.steps().len(), 3);
        assert_eq!(w.max_step(), 1);
        assert_eq!(w.canonical_string(), "-1:1/4,0:1/2,1:1/4");
    }

    #[test]
    fn rejects_bad_mass_vectors() {
        assert!(matches!(
            walk(&[(-1, "1/2"), (1, "1/3")]),
            Err(WalkError::MassNotOne { .. })
        ));
        assert!(matches!(
            walk(&[(-1, "-1/4"), (0, "3/4"), (1, "1/2")]),
            Err(WalkError::NegativeMass { offset: -1, .. })
        ));
        assert!(matches!(walk(&[(0, "1")]), Err(WalkError::DegenerateSupport)));
        assert!(matches!(
            walk(&[(2, "1")]),
            Err(WalkError::DegenerateSupport)
        ));
    }

    #[test]
    fn rejects_sublattice_support() {
        assert!(matches!(
            walk(&[(-2, "1/2"), (2, "1/2")]),
            Err(WalkError::NotAdapted { gcd: 2 })
        ));
        assert!(matches!(
            walk(&[(-3, "1/2"), (3, "1/4"), (6, "1/4")]),
            Err(WalkError::NotAdapted { gcd: 3 })
        ));
    }

    #[test]
    fn periodicity_is_flagged_not_fatal() {
        // Support {-1, +1} generates Z but its differences generate 2Z.
        let w = walk(&[(-1, "1/2"), (1, "1/2")]).unwrap();
        assert!(!w.is_aperiodic());
        assert_eq!(w.period(), 2);
        assert!(matches!(
            w.require_aperiodic(),
            Err(WalkError::NotAperiodic { gcd: 2 })
        ));

        // Same story for {+2, -1}: differences generate 3Z. This walk is used
        // by exactness checks and must validate.
        let skew = walk(&[(2, "1/3"), (-1, "2/3")]).unwrap();
        assert!(skew.is_centered());
        assert_eq!(skew.period(), 3);
        assert!(skew.require_aperiodic().is_err());

        let lazy = lazy_quarter();
        assert!(lazy.require_aperiodic().is_ok());
    }

    #[test]
    fn moments_match_hand_computation() {
        let w = walk(&[(1, "1/2"), (0, "1/5"), (-1, "3/10")]).unwrap();
        assert_eq!(w.mean(), &q("1/5").unwrap());
        assert_eq!(w.variance(), &q("19/25").unwrap());

        let skew = walk(&[(2, "1/3"), (-1, "2/3")]).unwrap();
        assert_eq!(skew.mean(), &q("0").unwrap());
        assert_eq!(skew.variance(), &q("2").unwrap());

        let lazy = lazy_quarter();
        assert!((lazy.sigma() - (0.5f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"steps":[{"offset":-1,"prob":"0.25"},{"offset":0,"prob":"1/2"},{"offset":1,"prob":"1/4"}]}"#;
        let w = WalkSpec::from_json_str(text).unwrap();
        assert_eq!(w, lazy_quarter());
        let again = WalkSpec::from_json_str(&w.to_json_string()).unwrap();
        assert_eq!(again, w);
        assert_eq!(w.hash().len(), 16);
        assert_eq!(w.hash(), again.hash());
    }

    #[test]
    fn bad_json_is_a_config_error() {
        assert!(matches!(
            WalkSpec::from_json_str("{"),
            Err(WalkError::Config(_))
        ));
        assert!(matches!(
            WalkSpec::from_json_str(r#"{"steps":[{"offset":0,"prob":"1/0"}]}"#),
            Err(WalkError::Config(_))
        ));
    }

    #[test]
    fn tilt_matches_closed_forms() {
        // Two-point walk: minimizer solves exp(2t) = q/p.
        let w = walk(&[(1, "6/10"), (-1, "4/10")]).unwrap();
        let t = tilt(&w, 1e-12).unwrap();
        assert!((t.gamma0 - 0.5 * (2.0f64 / 3.0).ln()).abs() < 1e-12);
        assert!((t.rho - 2.0 * (0.24f64).sqrt()).abs() < 1e-12);
        assert!(t.tilted_mean.abs() < 1e-12);
        let total: f64 = t.tilted_steps.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-14);

        // Three-point walk with drift 1/5.
        let w = walk(&[(1, "1/2"), (0, "1/5"), (-1, "3/10")]).unwrap();
        let t = tilt(&w, 1e-12).unwrap();
        assert!((t.gamma0 - 0.5 * (3.0f64 / 5.0).ln()).abs() < 1e-12);
        let rho_expect = 0.2 + 2.0 * (0.15f64).sqrt();
        assert!((t.rho - rho_expect).abs() < 1e-12);
        assert!(t.rho > 0.0 && t.rho < 1.0);
        // Tilted law is symmetric around 0 for this walk.
        let p: BTreeMap<i64, f64> = t.tilted_steps.iter().copied().collect();
        assert!((p[&1] - p[&-1]).abs() < 1e-14);
        assert!((p[&1] - 0.39739).abs() < 1e-5);
        assert!((p[&0] - 0.20521).abs() < 1e-5);
    }

    #[test]
    fn tilt_rejects_unsuitable_walks() {
        let centered = lazy_quarter();
        assert!(matches!(
            tilt(&centered, 1e-12),
            Err(WalkError::NotSupercritical { .. })
        ));
        let no_negative = walk(&[(0, "1/2"), (1, "1/4"), (2, "1/4")]).unwrap();
        assert!(matches!(
            tilt(&no_negative, 1e-12),
            Err(WalkError::NoInteriorMinimizer)
        ));
    }

    #[test]
    fn test_function_io() {
        let phi = TestFunction::from_json_str(r#"{"values":[{"at":1,"value":"1"},{"at":3,"value":"1/2"}]}"#)
            .unwrap();
        assert_eq!(phi.support_range(), Some((1, 3)));
        assert_eq!(phi.value_f64(1), 1.0);
        assert_eq!(phi.value_f64(2), 0.0);
        assert_eq!(phi.value_f64(3), 0.5);
        assert!(TestFunction::from_json_str(r#"{"values":[{"at":0,"value":"-1"}]}"#).is_err());
        let ind = TestFunction::indicator(0);
        assert_eq!(ind.support_range(), Some((0, 0)));
    }
}
