//! Ladder structure of a lattice walk: first passage laws over the four
//! half-line boundaries, their renewal potentials, and the scaled boundary
//! measures appearing as weak limits of the conditioned walk.
//!
//! Everything here reduces to finite lattice data. First passage heights are
//! accumulated by the exact DP; when the walk is skip-free in the crossing
//! direction every post-horizon passage lands on one known point, so the law
//! closes exactly at a finite horizon. Otherwise the unstopped remainder is
//! tracked as an explicit residual and propagated into one-sided bounds.

pub mod constants;
pub mod identity;

use crate::exactdp::{constrained_scan, Budget, DpError, StepLaw, StoppingTime};
use crate::exactdp::LatticeDist;
use crate::numeric::{ValueWithBound, Weight};
use crate::walkmodel::{TestFunction, WalkError, WalkSpec};

#[derive(Debug, thiserror::Error)]
pub enum FluctError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error("unstopped mass {residual:.3e} exceeds tolerance {eps:.3e} at horizon {horizon}")]
    ResidualTooLarge {
        residual: f64,
        eps: f64,
        horizon: usize,
    },
    #[error("renewal input has a unit atom at zero; the potential diverges")]
    AtomAtZeroIsOne,
    #[error("window [{lo}, {hi}] is empty")]
    WindowEmpty { lo: i64, hi: i64 },
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("{0}")]
    InvalidArgument(String),
}

/// The four first passage boundaries of the half-line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    /// First entry into `(0, inf)`.
    StrictAscending,
    /// First entry into `[0, inf)`.
    WeakAscending,
    /// First entry into `(-inf, 0)`.
    StrictDescending,
    /// First entry into `(-inf, 0]`.
    WeakDescending,
}

impl LadderKind {
    pub fn stopping_time(self) -> StoppingTime {
        match self {
            LadderKind::StrictAscending => StoppingTime::gt(0),
            LadderKind::WeakAscending => StoppingTime::ge(0),
            LadderKind::StrictDescending => StoppingTime::lt(0),
            LadderKind::WeakDescending => StoppingTime::le(0),
        }
    }

    pub fn ascending(self) -> bool {
        matches!(self, LadderKind::StrictAscending | LadderKind::WeakAscending)
    }

    pub fn strict(self) -> bool {
        matches!(
            self,
            LadderKind::StrictAscending | LadderKind::StrictDescending
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            LadderKind::StrictAscending => "strict-ascending",
            LadderKind::WeakAscending => "weak-ascending",
            LadderKind::StrictDescending => "strict-descending",
            LadderKind::WeakDescending => "weak-descending",
        }
    }

    /// Window the passage position lives in.
    pub fn hit_window(self, walk: &WalkSpec) -> (i64, i64) {
        match self {
            LadderKind::StrictAscending => (1, walk.max_step()),
            LadderKind::WeakAscending => (0, walk.max_step()),
            LadderKind::StrictDescending => (walk.min_step(), -1),
            LadderKind::WeakDescending => (walk.min_step(), 0),
        }
    }

    /// Landing point of every passage that starts from the last lattice site
    /// before the boundary, reachable only under a skip-free step law.
    fn completion_point(self) -> i64 {
        match self {
            LadderKind::StrictAscending => 1,
            LadderKind::WeakAscending => 0,
            LadderKind::StrictDescending => -1,
            LadderKind::WeakDescending => 0,
        }
    }
}

/// First passage height law accumulated to a horizon.
#[derive(Debug, Clone)]
pub struct LadderLaw<W: Weight> {
    pub kind: LadderKind,
    /// Mass of the passage position over the hit window.
    pub heights: LatticeDist<W>,
    /// Mass that has not crossed by the horizon.
    pub residual: W,
    /// True when `heights` is the complete law (zero residual, possibly
    /// after folding a skip-free remainder onto its known landing point).
    pub completed: bool,
    pub horizon: usize,
}

impl<W: Weight> LadderLaw<W> {
    /// Expected passage height with the residual bracketed over the window
    /// it can still land in.
    pub fn mean(&self, walk: &WalkSpec) -> ValueWithBound {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (i, m) in self.heights.iter() {
            f64::acc_add(&mut sum, &mut comp, &(i as f64 * m.to_f64()));
        }
        let partial = f64::acc_finish(sum, comp);
        let resid = self.residual.to_f64();
        let (w_lo, w_hi) = self.kind.hit_window(walk);
        let mid = partial + resid * 0.5 * (w_lo + w_hi) as f64;
        let half = resid * 0.5 * (w_hi - w_lo) as f64;
        ValueWithBound::new(mid, half + 1e-14 * mid.abs())
    }
}

/// True when the passage law of `kind` closes exactly at any finite horizon:
/// the walk is skip-free toward the boundary (every crossing lands on the
/// single point next to it) and the passage time is almost surely finite.
pub fn completable(walk: &WalkSpec, kind: LadderKind) -> bool {
    use num::Signed;
    let drift_ok = walk.is_centered()
        || (kind.ascending() && walk.mean().is_positive())
        || (!kind.ascending() && walk.mean().is_negative());
    let skip_free = if kind.ascending() {
        walk.max_step() == 1
    } else {
        walk.min_step() == -1
    };
    skip_free && drift_ok
}

/// Horizon that suffices for an internal ladder DP: tiny when the law closes
/// exactly anyway, the caller's horizon otherwise.
pub(crate) fn ladder_horizon(walk: &WalkSpec, kind: LadderKind, n_max: usize) -> usize {
    if completable(walk, kind) {
        n_max.min(128).max(16)
    } else {
        n_max
    }
}

/// Accumulate the first passage law of `kind` up to `n_max` steps.
///
/// When the walk is skip-free toward the boundary and the passage time is
/// almost surely finite, the unstopped remainder is folded onto its forced
/// landing point and the law is exact. Otherwise a residual above `eps`
/// is an error; pass `eps = 1.0` to accept any residual.
pub fn ladder_law<W: Weight>(
    walk: &WalkSpec,
    kind: LadderKind,
    n_max: usize,
    eps: f64,
    budget: &Budget,
) -> Result<LadderLaw<W>, FluctError> {
    let (w_lo, w_hi) = kind.hit_window(walk);
    let law = StepLaw::<W>::from_walk(walk);
    let width = (w_hi - w_lo + 1) as usize;
    let mut acc = vec![W::zero(); width];
    let mut acc_comp = vec![W::zero(); width];
    let mut last_surv = W::one();
    constrained_scan(&law, kind.stopping_time(), n_max, budget, |n, surv, hit| {
        for (i, m) in hit.iter() {
            let k = (i - w_lo) as usize;
            W::acc_add(&mut acc[k], &mut acc_comp[k], m);
        }
        if n == n_max {
            last_surv = surv.total();
        }
    })?;
    let mut masses: Vec<W> = acc
        .into_iter()
        .zip(acc_comp)
        .map(|(s, c)| W::acc_finish(s, c))
        .collect();
    let mut residual = last_surv;
    let mut completed = residual.is_zero();

    if !completed && completable(walk, kind) {
        let at = (kind.completion_point() - w_lo) as usize;
        masses[at] = masses[at].add(&residual);
        residual = W::zero();
        completed = true;
    }

    if !completed {
        let r = residual.to_f64();
        if r > eps {
            return Err(FluctError::ResidualTooLarge {
                residual: r,
                eps,
                horizon: n_max,
            });
        }
    }
    Ok(LadderLaw {
        kind,
        heights: LatticeDist::from_parts(w_lo, masses),
        residual,
        completed,
        horizon: n_max,
    })
}

/// Renewal potential of a one-sided measure: total expected visits
/// `sum_{n >= 0} m^{*n}` on the window between 0 and `edge`.
///
/// The measure must be supported on one closed half-line (an atom at zero is
/// allowed when below 1). Ascending support needs `edge >= 0`, descending
/// `edge <= 0`.
pub fn potential<W: Weight>(
    measure: &LatticeDist<W>,
    edge: i64,
) -> Result<LatticeDist<W>, FluctError> {
    let support: Vec<(i64, W)> = measure
        .iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(i, m)| (i, m.clone()))
        .collect();
    if support.is_empty() {
        return Err(FluctError::SupportViolation(
            "renewal input is the zero measure".into(),
        ));
    }
    let lo_s = support.first().unwrap().0;
    let hi_s = support.last().unwrap().0;
    if lo_s < 0 && hi_s > 0 {
        return Err(FluctError::SupportViolation(format!(
            "renewal input straddles zero: support [{lo_s}, {hi_s}]"
        )));
    }
    let m0 = measure.mass_at(0);
    if m0 >= W::one() {
        return Err(FluctError::AtomAtZeroIsOne);
    }
    let renew = W::one().sub(&m0);
    let ascending = hi_s > 0 || lo_s == 0;
    if ascending && edge < 0 {
        return Err(FluctError::WindowEmpty { lo: 0, hi: edge });
    }
    if !ascending && edge > 0 {
        return Err(FluctError::WindowEmpty { lo: edge, hi: 0 });
    }

    let len = edge.unsigned_abs() as usize + 1;
    let mut u = vec![W::zero(); len];
    u[0] = W::one().div(&renew);
    for k in 1..len {
        let mut sum = W::zero();
        let mut comp = W::zero();
        for (j, m) in &support {
            let d = if ascending { *j } else { -*j } as usize;
            if d == 0 || d > k {
                continue;
            }
            let term = m.mul(&u[k - d]);
            W::acc_add(&mut sum, &mut comp, &term);
        }
        u[k] = W::acc_finish(sum, comp).div(&renew);
    }
    if ascending {
        Ok(LatticeDist::from_parts(0, u))
    } else {
        u.reverse();
        Ok(LatticeDist::from_parts(edge, u))
    }
}

/// Renewal potential of a first passage law together with an upper variant
/// absorbing the DP residual.
#[derive(Debug, Clone)]
pub struct PotentialWithBound {
    pub kind: LadderKind,
    pub values: LatticeDist<f64>,
    pub upper: LatticeDist<f64>,
}

impl PotentialWithBound {
    pub fn value(&self, k: i64) -> f64 {
        self.values.mass_at(k)
    }

    pub fn bound(&self, k: i64) -> f64 {
        (self.upper.mass_at(k) - self.values.mass_at(k)).max(0.0)
    }

    pub fn cumulative(&self, lo: i64, hi: i64) -> ValueWithBound {
        let v = self.values.range_total(lo, hi);
        let up = self.upper.range_total(lo, hi);
        ValueWithBound::new(v, (up - v).max(0.0) + 1e-14 * v.abs())
    }
}

/// Build the potential of a ladder law, with the residual turned into a
/// one-sided bound.
pub fn ladder_potential_with_bound(
    walk: &WalkSpec,
    kind: LadderKind,
    edge: i64,
    n_max: usize,
    budget: &Budget,
) -> Result<PotentialWithBound, FluctError> {
    let horizon = ladder_horizon(walk, kind, n_max);
    let law = ladder_law::<f64>(walk, kind, horizon, 1.0, budget)?;
    potential_with_bound_from_law(&law, edge)
}

/// Same, reusing an already accumulated law.
pub fn potential_with_bound_from_law(
    law: &LadderLaw<f64>,
    edge: i64,
) -> Result<PotentialWithBound, FluctError> {
    let kind = law.kind;
    let values = potential(&law.heights, edge)?;
    let upper = if law.residual == 0.0 {
        values.clone()
    } else {
        // Heuristic majorant: mass nearest the origin compounds fastest on a
        // fixed window, so park the whole residual there.
        let at = kind.completion_point();
        let (lo, mut masses) = match law.heights.window() {
            Some((hlo, hhi)) => {
                let lo = hlo.min(at);
                let masses: Vec<f64> =
                    (lo..=hhi.max(at)).map(|i| law.heights.mass_at(i)).collect();
                (lo, masses)
            }
            None => (at, vec![0.0]),
        };
        masses[(at - lo) as usize] += law.residual;
        potential(&LatticeDist::from_parts(lo, masses), edge)?
    };
    Ok(PotentialWithBound {
        kind,
        values,
        upper,
    })
}

/// Half-lines a conditioned or reflected walk occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupationSide {
    NonPositive,
    StrictPositive,
    NonNegative,
    StrictNegative,
}

impl OccupationSide {
    pub fn label(self) -> &'static str {
        match self {
            OccupationSide::NonPositive => "nonpositive",
            OccupationSide::StrictPositive => "positive",
            OccupationSide::NonNegative => "nonnegative",
            OccupationSide::StrictNegative => "negative",
        }
    }

    pub fn contains(self, k: i64) -> bool {
        match self {
            OccupationSide::NonPositive => k <= 0,
            OccupationSide::StrictPositive => k >= 1,
            OccupationSide::NonNegative => k >= 0,
            OccupationSide::StrictNegative => k <= -1,
        }
    }

    /// Ladder potential dual to conditioning the walk to this side.
    fn dual_kind(self) -> LadderKind {
        match self {
            OccupationSide::NonPositive => LadderKind::WeakDescending,
            OccupationSide::StrictPositive => LadderKind::StrictAscending,
            OccupationSide::NonNegative => LadderKind::WeakAscending,
            OccupationSide::StrictNegative => LadderKind::StrictDescending,
        }
    }
}

/// Common prefactor `1 / (sigma sqrt(2 pi))` of the boundary measures.
pub fn scale_factor(walk: &WalkSpec) -> f64 {
    1.0 / (walk.sigma() * (2.0 * std::f64::consts::PI).sqrt())
}

/// Finitely windowed measure with per-atom bounds, scaled by
/// [`scale_factor`].
#[derive(Debug, Clone)]
pub struct ScaledMeasure {
    pub side: OccupationSide,
    pub lo: i64,
    pub hi: i64,
    pub values: Vec<f64>,
    pub bounds: Vec<f64>,
    pub scale: f64,
}

impl ScaledMeasure {
    pub fn value(&self, k: i64) -> f64 {
        if k < self.lo || k > self.hi {
            return 0.0;
        }
        self.values[(k - self.lo) as usize]
    }

    pub fn bound(&self, k: i64) -> f64 {
        if k < self.lo || k > self.hi {
            return 0.0;
        }
        self.bounds[(k - self.lo) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        (self.lo..=self.hi).map(move |k| (k, self.value(k), self.bound(k)))
    }

    /// Integrate a finitely supported test function. Points off the measure's
    /// side carry no mass; points on the side but beyond the computed window
    /// are an error.
    pub fn apply(&self, phi: &TestFunction) -> Result<ValueWithBound, FluctError> {
        let mut value = 0.0;
        let mut bound = 0.0;
        for (k, w) in phi.iter() {
            if !self.side.contains(k) {
                continue;
            }
            if k < self.lo || k > self.hi {
                return Err(FluctError::InvalidArgument(format!(
                    "test function touches {k}, outside the computed window [{}, {}]",
                    self.lo, self.hi
                )));
            }
            let wf = crate::numeric::ratio_to_f64(w);
            value += wf * self.value(k);
            bound += wf * self.bound(k);
        }
        Ok(ValueWithBound::new(value, bound))
    }

    pub fn total(&self) -> ValueWithBound {
        ValueWithBound::new(
            crate::numeric::neumaier_sum(self.values.iter().copied()),
            crate::numeric::neumaier_sum(self.bounds.iter().copied()),
        )
    }
}

/// Limit measure of the walk conditioned to stay on `side`, with atoms given
/// by scaled cumulative sums of the dual ladder potential, out to distance
/// `depth` from the origin.
pub fn a_measure(
    walk: &WalkSpec,
    side: OccupationSide,
    depth: i64,
    n_max: usize,
    budget: &Budget,
) -> Result<ScaledMeasure, FluctError> {
    walk.require_centered()?;
    if depth < 0 {
        return Err(FluctError::InvalidArgument(format!(
            "depth must be nonnegative, got {depth}"
        )));
    }
    let s = scale_factor(walk);
    let kind = side.dual_kind();
    let edge = match side {
        OccupationSide::NonPositive | OccupationSide::StrictNegative => -depth,
        OccupationSide::StrictPositive | OccupationSide::NonNegative => depth,
    };
    let pot = ladder_potential_with_bound(walk, kind, edge, n_max, budget)?;
    let (lo, hi) = if edge <= 0 { (edge, 0) } else { (0, edge) };
    let mut values = Vec::with_capacity((hi - lo + 1) as usize);
    let mut bounds = Vec::with_capacity((hi - lo + 1) as usize);
    for y in lo..=hi {
        let cum = match side {
            OccupationSide::NonPositive => pot.cumulative(y, 0),
            OccupationSide::NonNegative => pot.cumulative(0, y),
            // Strict sides convolve the counting measure on the open
            // half-line with the potential, which shifts the window onto
            // [0, |y| - 1] rather than (0, |y|]; the two agree only when
            // the potential is flat.
            OccupationSide::StrictPositive => {
                if y == 0 {
                    ValueWithBound::exact(0.0)
                } else {
                    pot.cumulative(0, y - 1)
                }
            }
            OccupationSide::StrictNegative => {
                if y == 0 {
                    ValueWithBound::exact(0.0)
                } else {
                    pot.cumulative(y + 1, 0)
                }
            }
        };
        values.push(s * cum.value);
        bounds.push(s * cum.bound);
    }
    Ok(ScaledMeasure {
        side,
        lo,
        hi,
        values,
        bounds,
        scale: s,
    })
}

/// Limit measure of the first passage position conditioned on a late
/// passage: scaled upper tails of the strict ladder height law.
pub fn b_measure(
    walk: &WalkSpec,
    side: OccupationSide,
    n_max: usize,
    budget: &Budget,
) -> Result<ScaledMeasure, FluctError> {
    b_measure_impl(walk, side, n_max, budget, false)
}

/// Variant reading the strict ladder height law through a one-step lagged
/// cumulative sum instead of the upper tail. Kept as a falsifiable
/// alternative reading; it does not reproduce the passage-time asymptotics.
pub fn b_measure_convolution_form(
    walk: &WalkSpec,
    side: OccupationSide,
    n_max: usize,
    budget: &Budget,
) -> Result<ScaledMeasure, FluctError> {
    b_measure_impl(walk, side, n_max, budget, true)
}

fn b_measure_impl(
    walk: &WalkSpec,
    side: OccupationSide,
    n_max: usize,
    budget: &Budget,
    lagged_cumulative: bool,
) -> Result<ScaledMeasure, FluctError> {
    let kind = match side {
        OccupationSide::StrictPositive => LadderKind::StrictAscending,
        OccupationSide::StrictNegative => LadderKind::StrictDescending,
        other => {
            return Err(FluctError::InvalidArgument(format!(
                "passage-position measure needs a strict side, got {}",
                other.label()
            )))
        }
    };
    let horizon = ladder_horizon(walk, kind, n_max);
    let law = ladder_law::<f64>(walk, kind, horizon, 1.0, budget)?;
    b_measure_from_law(walk, &law, lagged_cumulative)
}

/// Passage-position measure read off an already accumulated strict law.
pub(crate) fn b_measure_from_law(
    walk: &WalkSpec,
    law: &LadderLaw<f64>,
    lagged_cumulative: bool,
) -> Result<ScaledMeasure, FluctError> {
    walk.require_centered()?;
    let kind = law.kind;
    let side = match kind {
        LadderKind::StrictAscending => OccupationSide::StrictPositive,
        LadderKind::StrictDescending => OccupationSide::StrictNegative,
        other => {
            return Err(FluctError::InvalidArgument(format!(
                "passage-position measure needs a strict law, got {}",
                other.label()
            )))
        }
    };
    let s = scale_factor(walk);
    let resid = law.residual;
    let (lo, hi) = kind.hit_window(walk);
    let mut values = Vec::with_capacity((hi - lo + 1) as usize);
    let mut bounds = Vec::with_capacity((hi - lo + 1) as usize);
    for k in lo..=hi {
        let (v, b) = match (side, lagged_cumulative) {
            // Upper tail from k, outward; the unstopped remainder surely
            // lands in the full window, so only the innermost tail is exact.
            (OccupationSide::StrictPositive, false) => {
                let tail = law.heights.range_total(k, hi);
                if k == lo {
                    (tail + resid, 1e-14)
                } else {
                    (tail, resid)
                }
            }
            (OccupationSide::StrictNegative, false) => {
                let tail = law.heights.range_total(lo, k);
                if k == hi {
                    (tail + resid, 1e-14)
                } else {
                    (tail, resid)
                }
            }
            // Lagged cumulative from the boundary, excluding k itself.
            (OccupationSide::StrictPositive, true) => {
                (law.heights.range_total(1, k - 1), if k > lo { resid } else { 0.0 })
            }
            (OccupationSide::StrictNegative, true) => {
                (law.heights.range_total(k + 1, -1), if k < hi { resid } else { 0.0 })
            }
            _ => unreachable!(),
        };
        values.push(s * v);
        bounds.push(s * b);
    }
    Ok(ScaledMeasure {
        side,
        lo,
        hi,
        values,
        bounds,
        scale: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{parse_rational, Rational};
    use crate::walkmodel::WalkSpec;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn lazy() -> WalkSpec {
        WalkSpec::validate(vec![(-1, q("1/4")), (0, q("1/2")), (1, q("1/4"))]).unwrap()
    }

    fn skew() -> WalkSpec {
        WalkSpec::validate(vec![(2, q("1/3")), (-1, q("2/3"))]).unwrap()
    }

    const SQRT_PI: f64 = 1.7724538509055159;

    #[test]
    fn lazy_strict_ascending_law_is_unit_mass_at_one() {
        let law = ladder_law::<Rational>(&lazy(), LadderKind::StrictAscending, 40, 1.0,
            &Budget::default())
        .unwrap();
        assert!(law.completed);
        assert!(law.residual.is_zero());
        assert_eq!(law.heights.mass_at(1), q("1"));
        assert_eq!(law.heights.total(), q("1"));
    }

    #[test]
    fn lazy_weak_descending_law_matches_enumeration() {
        // Independent oracle: exhaustive path enumeration of the first entry
        // into the nonpositive half-line, compared exactly at the horizon,
        // then the completion algebra on top of it.
        let walk = lazy();
        let budget = Budget::default();
        let horizon = 10usize;

        let mut enum_hits = std::collections::BTreeMap::new();
        for target in [-1i64, 0] {
            let mut exact = q("0");
            for n in 1..=horizon {
                exact += crate::exactdp::brute_force_paths(&walk, n, &mut |steps| {
                    // prefix_sums[k] is the position after k + 1 steps.
                    let pos = crate::exactdp::prefix_sums(steps);
                    let tau = pos.iter().position(|p| *p <= 0).map(|k| k + 1);
                    tau == Some(n) && pos[n - 1] == target
                })
                .unwrap();
            }
            enum_hits.insert(target, exact);
        }

        let table = crate::exactdp::constrained_table::<Rational>(
            &walk,
            StoppingTime::le(0),
            horizon,
            &budget,
        )
        .unwrap();
        let dp_hit = |target: i64| -> Rational {
            let mut acc = q("0");
            for row in &table.hit {
                acc += row.mass_at(target);
            }
            acc
        };
        assert_eq!(dp_hit(0), enum_hits[&0]);
        assert_eq!(dp_hit(-1), enum_hits[&-1]);

        // The walk is skip-free downward, so every passage after the horizon
        // lands on the origin: the completed law adds exactly the surviving
        // mass there and nothing at -1.
        let law =
            ladder_law::<Rational>(&walk, LadderKind::WeakDescending, horizon, 1.0, &budget)
                .unwrap();
        assert!(law.completed);
        let survivors = table.survival_prob[horizon].clone();
        assert_eq!(law.heights.mass_at(0), dp_hit(0) + survivors);
        assert_eq!(law.heights.mass_at(-1), dp_hit(-1));
        assert_eq!(law.heights.mass_at(0), q("3/4"));
        assert_eq!(law.heights.mass_at(-1), q("1/4"));
    }

    #[test]
    fn skew_ladder_laws_close_exactly_where_skip_free() {
        // Up-steps of +2 make ascents overshoot, but descents are skip-free.
        let walk = skew();
        let down =
            ladder_law::<Rational>(&walk, LadderKind::StrictDescending, 60, 1.0, &Budget::default())
                .unwrap();
        assert!(down.completed);
        assert_eq!(down.heights.mass_at(-1), q("1"));

        let up =
            ladder_law::<Rational>(&walk, LadderKind::StrictAscending, 60, 1.0, &Budget::default())
                .unwrap();
        assert!(!up.completed);
        assert!(up.residual.to_f64() > 0.0);
        // Heights live on {1, 2} and the accumulated mass plus the residual
        // is exactly one.
        let total = up.heights.total() + up.residual.clone();
        assert_eq!(total, q("1"));
        assert!(up.heights.mass_at(1).to_f64() > 0.0);
        assert!(up.heights.mass_at(2).to_f64() > 0.0);

        let err = ladder_law::<Rational>(
            &walk,
            LadderKind::StrictAscending,
            60,
            1e-6,
            &Budget::default(),
        )
        .unwrap_err();
        assert!(matches!(err, FluctError::ResidualTooLarge { .. }));
    }

    #[test]
    fn lazy_potentials_are_flat() {
        let walk = lazy();
        let up = ladder_law::<Rational>(&walk, LadderKind::StrictAscending, 40, 1.0,
            &Budget::default())
        .unwrap();
        let u = potential(&up.heights, 6).unwrap();
        for k in 0..=6 {
            assert_eq!(u.mass_at(k), q("1"), "strict ascending at {k}");
        }

        let down = ladder_law::<Rational>(&walk, LadderKind::WeakDescending, 40, 1.0,
            &Budget::default())
        .unwrap();
        let u = potential(&down.heights, -5).unwrap();
        for k in -5..=0 {
            assert_eq!(u.mass_at(k), q("4"), "weak descending at {k}");
        }

        let wk_up = ladder_law::<Rational>(&walk, LadderKind::WeakAscending, 40, 1.0,
            &Budget::default())
        .unwrap();
        let u = potential(&wk_up.heights, 5).unwrap();
        for k in 0..=5 {
            assert_eq!(u.mass_at(k), q("4"), "weak ascending at {k}");
        }
    }

    #[test]
    fn potential_counts_expected_visits() {
        // Renewal oracle: expected visits to k by sums of convolution powers,
        // computed directly.
        let m = LatticeDist::from_parts(1, vec![q("1/2"), q("1/3")]);
        let u = potential(&m, 8).unwrap();
        // Direct: u(k) = sum over compositions of k from {1, 2}.
        let mut direct = vec![q("0"); 9];
        direct[0] = q("1");
        for k in 1..=8usize {
            let mut acc = q("0");
            if k >= 1 {
                acc += &direct[k - 1] * q("1/2");
            }
            if k >= 2 {
                acc += &direct[k - 2] * q("1/3");
            }
            direct[k] = acc;
        }
        for k in 0..=8 {
            assert_eq!(u.mass_at(k as i64), direct[k], "at {k}");
        }
    }

    #[test]
    fn potential_rejects_bad_inputs() {
        let straddle = LatticeDist::from_parts(-1, vec![q("1/2"), q("0"), q("1/2")]);
        assert!(matches!(
            potential(&straddle, 3),
            Err(FluctError::SupportViolation(_))
        ));
        let unit_atom = LatticeDist::from_parts(0, vec![q("1")]);
        assert!(matches!(
            potential(&unit_atom, 3),
            Err(FluctError::AtomAtZeroIsOne)
        ));
        let m = LatticeDist::from_parts(1, vec![q("1")]);
        assert!(matches!(
            potential(&m, -2),
            Err(FluctError::WindowEmpty { .. })
        ));
    }

    #[test]
    fn lazy_a_measures_match_closed_forms() {
        let walk = lazy();
        let budget = Budget::default();
        // Conditioned to stay nonpositive: atom at y is 4(|y| + 1)/sqrt(pi).
        let am = a_measure(&walk, OccupationSide::NonPositive, 6, 64, &budget).unwrap();
        for y in -6..=0i64 {
            let expect = 4.0 * ((-y + 1) as f64) / SQRT_PI;
            assert!(
                (am.value(y) - expect).abs() < 1e-12,
                "nonpositive at {y}: {} vs {expect}",
                am.value(y)
            );
        }
        // Conditioned to stay strictly positive: atom at y is y/sqrt(pi).
        let ap = a_measure(&walk, OccupationSide::StrictPositive, 6, 64, &budget).unwrap();
        assert_eq!(ap.value(0), 0.0);
        for y in 1..=6i64 {
            let expect = y as f64 / SQRT_PI;
            assert!((ap.value(y) - expect).abs() < 1e-12, "positive at {y}");
        }
        // Nonnegative side mirrors the nonpositive one for a symmetric walk.
        let an = a_measure(&walk, OccupationSide::NonNegative, 6, 64, &budget).unwrap();
        for y in 0..=6i64 {
            assert!((an.value(y) - am.value(-y)).abs() < 1e-12, "mirror at {y}");
        }
        // Strictly negative mirrors strictly positive.
        let asn = a_measure(&walk, OccupationSide::StrictNegative, 6, 64, &budget).unwrap();
        assert_eq!(asn.value(0), 0.0);
        for y in 1..=6i64 {
            assert!((asn.value(-y) - ap.value(y)).abs() < 1e-12, "neg mirror {y}");
        }
    }

    #[test]
    fn strict_side_measure_matches_harmonic_entry_depths() {
        // Wald applied to the ladder renewal chain: the expected depth of
        // the first entry below `-y` equals the mean ladder height times
        // the expected number of ladder epochs spent crossing, so
        // `a^{*+}(y) * E[H] = s * V'(y)` exactly. The two sides come from
        // independent pipelines (renewal recursion vs. hit accumulation).
        let over =
            WalkSpec::validate(vec![(2, q("1/5")), (1, q("1/5")), (-1, q("3/5"))]).unwrap();
        for walk in [skew(), over] {
            let budget = Budget::default();
            let ap = a_measure(&walk, OccupationSide::StrictPositive, 5, 4096, &budget).unwrap();
            let law =
                ladder_law::<f64>(&walk, LadderKind::StrictAscending, 4096, 1.0, &budget).unwrap();
            let mean = law.mean(&walk);
            let s = scale_factor(&walk);
            let rev = crate::harmonic::reversed(&walk).unwrap();
            for y in 1..=5i64 {
                let v = crate::harmonic::harmonic_value(&rev, y, 4096, &budget).unwrap();
                let lhs = ap.value(y) * mean.value;
                let rhs = s * v.value;
                let slack =
                    ap.bound(y) * mean.value + ap.value(y) * mean.bound + s * v.bound + 1e-10;
                assert!(
                    (lhs - rhs).abs() <= slack,
                    "Wald mismatch at {y} for {}: {lhs} vs {rhs} (slack {slack})",
                    walk.canonical_string()
                );
            }
        }
    }

    #[test]
    fn lazy_b_measure_is_single_scaled_atom() {
        let walk = lazy();
        let b = b_measure(&walk, OccupationSide::StrictPositive, 40, &Budget::default()).unwrap();
        assert_eq!((b.lo, b.hi), (1, 1));
        let expect = 1.0 / SQRT_PI;
        assert!((b.value(1) - expect).abs() < 1e-12, "{}", b.value(1));
        assert!(b.bound(1) < 1e-12);

        // The lagged-cumulative variant vanishes at the innermost point, so
        // the two readings genuinely differ.
        let alt = b_measure_convolution_form(&walk, OccupationSide::StrictPositive, 40,
            &Budget::default())
        .unwrap();
        assert_eq!(alt.value(1), 0.0);
    }

    #[test]
    fn b_measure_tail_total_is_scaled_mean_height() {
        // Summing the upper tails of a positive law reproduces its mean.
        let walk = skew();
        let b = b_measure(&walk, OccupationSide::StrictPositive, 4000, &Budget::default()).unwrap();
        let law =
            ladder_law::<f64>(&walk, LadderKind::StrictAscending, 4000, 1.0, &Budget::default())
                .unwrap();
        let mean = law.mean(&walk);
        let total = b.total();
        let s = scale_factor(&walk);
        assert!(
            (total.value - s * mean.value).abs() <= total.bound + s * mean.bound + 1e-12,
            "tails {} vs scaled mean {}",
            total.value,
            s * mean.value
        );
    }

    #[test]
    fn measure_application_respects_sides_and_windows() {
        let walk = lazy();
        let am = a_measure(&walk, OccupationSide::NonPositive, 4, 64, &Budget::default()).unwrap();
        // Mass on the positive side is zero by definition, not an error.
        let phi = TestFunction::new(vec![(3, q("1"))]).unwrap();
        assert_eq!(am.apply(&phi).unwrap().value, 0.0);
        // On-side but beyond the computed depth is an error.
        let deep = TestFunction::new(vec![(-9, q("1"))]).unwrap();
        assert!(matches!(
            am.apply(&deep),
            Err(FluctError::InvalidArgument(_))
        ));
        let mix = TestFunction::new(vec![(0, q("2")), (-1, q("1/2"))]).unwrap();
        let got = am.apply(&mix).unwrap().value;
        let expect = 2.0 * am.value(0) + 0.5 * am.value(-1);
        assert!((got - expect).abs() < 1e-13);
    }
}
