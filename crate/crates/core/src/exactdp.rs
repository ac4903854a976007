//! Exact dynamic programming over lattice windows.
//!
//! One convolution step advances the law of the walk by a single increment.
//! Windows are never truncated: every reachable state keeps its mass, so in
//! rational mode all identities hold with `==`, and in float mode the only
//! defect is rounding (the convolution inner loop uses compensated
//! accumulation, keeping the mass conservation defect after `N` steps far
//! below `N * 2^-48`).
//!
//! Three sweeps exist: the free walk, the walk stopped at a threshold (rows
//! split into a surviving part and a first-hit part), and the nonnegative
//! chain reflected at the origin. Each sweep has a streaming variant that
//! yields rows without storing the whole history, plus a table variant that
//! collects them. A brute-force path enumerator over exact rational path
//! probabilities serves as the independent oracle for everything else.

use crate::numeric::{Rational, Weight};
use crate::walkmodel::WalkSpec;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum DpError {
    #[error("window of {window} cells at step {step} exceeds the configured cap of {cap}")]
    HorizonTooLarge {
        step: usize,
        window: usize,
        cap: usize,
    },
    #[error("path enumeration would visit {paths} paths, above the cap of {cap}")]
    BudgetExceeded { paths: u128, cap: u128 },
}

/// Resource limits for a DP sweep.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Maximum number of cells in a single row.
    pub max_window: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_window: 1 << 22,
        }
    }
}

/// Comparison flavor of a first passage time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ineq {
    Ge,
    Gt,
    Le,
    Lt,
}

/// First time `n >= 1` at which the walk satisfies `S_n <flavor> threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StoppingTime {
    pub flavor: Ineq,
    pub threshold: i64,
}

impl StoppingTime {
    pub fn ge(threshold: i64) -> Self {
        StoppingTime {
            flavor: Ineq::Ge,
            threshold,
        }
    }
    pub fn gt(threshold: i64) -> Self {
        StoppingTime {
            flavor: Ineq::Gt,
            threshold,
        }
    }
    pub fn le(threshold: i64) -> Self {
        StoppingTime {
            flavor: Ineq::Le,
            threshold,
        }
    }
    pub fn lt(threshold: i64) -> Self {
        StoppingTime {
            flavor: Ineq::Lt,
            threshold,
        }
    }

    /// Does a walk standing at `pos` survive (not trigger) this stopping time?
    pub fn survives(&self, pos: i64) -> bool {
        match self.flavor {
            Ineq::Ge => pos < self.threshold,
            Ineq::Gt => pos <= self.threshold,
            Ineq::Le => pos > self.threshold,
            Ineq::Lt => pos >= self.threshold,
        }
    }

    pub fn label(&self) -> String {
        let f = match self.flavor {
            Ineq::Ge => "ge",
            Ineq::Gt => "gt",
            Ineq::Le => "le",
            Ineq::Lt => "lt",
        };
        format!("{f}{}", self.threshold)
    }
}

/// Step law with masses already converted to the DP scalar.
#[derive(Debug, Clone)]
pub struct StepLaw<W> {
    steps: Vec<(i64, W)>,
    min_step: i64,
    max_step: i64,
}

impl<W: Weight> StepLaw<W> {
    pub fn from_walk(walk: &WalkSpec) -> Self {
        let steps: Vec<(i64, W)> = walk
            .steps()
            .iter()
            .map(|(s, m)| (*s, W::from_ratio(m)))
            .collect();
        Self::from_steps(steps)
    }

    pub fn from_steps(steps: Vec<(i64, W)>) -> Self {
        assert!(!steps.is_empty(), "step law needs at least one step");
        let min_step = steps.iter().map(|(s, _)| *s).min().unwrap();
        let max_step = steps.iter().map(|(s, _)| *s).max().unwrap();
        StepLaw {
            steps,
            min_step,
            max_step,
        }
    }

    pub fn min_step(&self) -> i64 {
        self.min_step
    }
    pub fn max_step(&self) -> i64 {
        self.max_step
    }
    pub fn steps(&self) -> &[(i64, W)] {
        &self.steps
    }
}

impl StepLaw<f64> {
    pub fn from_float_steps(steps: &[(i64, f64)]) -> Self {
        Self::from_steps(steps.to_vec())
    }
}

/// Finitely supported measure on the lattice: masses over a window of
/// consecutive integers.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDist<W> {
    lo: i64,
    masses: Vec<W>,
}

impl<W: Weight> LatticeDist<W> {
    pub fn empty() -> Self {
        LatticeDist {
            lo: 0,
            masses: Vec::new(),
        }
    }

    pub fn delta(at: i64) -> Self {
        LatticeDist {
            lo: at,
            masses: vec![W::one()],
        }
    }

    pub fn from_parts(lo: i64, masses: Vec<W>) -> Self {
        LatticeDist { lo, masses }.trim()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Inclusive window bounds, if any mass is present.
    pub fn window(&self) -> Option<(i64, i64)> {
        if self.masses.is_empty() {
            None
        } else {
            Some((self.lo, self.lo + self.masses.len() as i64 - 1))
        }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn get(&self, i: i64) -> Option<&W> {
        if i < self.lo {
            return None;
        }
        self.masses.get((i - self.lo) as usize)
    }

    pub fn mass_at(&self, i: i64) -> W {
        self.get(i).cloned().unwrap_or_else(W::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &W)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .map(move |(k, v)| (self.lo + k as i64, v))
    }

    /// Compensated total mass.
    pub fn total(&self) -> W {
        let (mut sum, mut comp) = (W::zero(), W::zero());
        for v in &self.masses {
            W::acc_add(&mut sum, &mut comp, v);
        }
        W::acc_finish(sum, comp)
    }

    /// Compensated mass of the inclusive range.
    pub fn range_total(&self, lo: i64, hi: i64) -> W {
        let (mut sum, mut comp) = (W::zero(), W::zero());
        for (i, v) in self.iter() {
            if i >= lo && i <= hi {
                W::acc_add(&mut sum, &mut comp, v);
            }
        }
        W::acc_finish(sum, comp)
    }

    /// Compensated weighted sum, skipping zero masses.
    pub fn weighted_total(&self, mut weight: impl FnMut(i64) -> W) -> W {
        let (mut sum, mut comp) = (W::zero(), W::zero());
        for (i, v) in self.iter() {
            if v.is_zero() {
                continue;
            }
            let term = v.mul(&weight(i));
            W::acc_add(&mut sum, &mut comp, &term);
        }
        W::acc_finish(sum, comp)
    }

    fn trim(mut self) -> Self {
        let leading = self.masses.iter().take_while(|v| v.is_zero()).count();
        if leading == self.masses.len() {
            return LatticeDist::empty();
        }
        let trailing = self.masses.iter().rev().take_while(|v| v.is_zero()).count();
        self.masses.truncate(self.masses.len() - trailing);
        self.masses.drain(..leading);
        self.lo += leading as i64;
        self
    }
}

/// One full convolution step: returns the advanced row before any splitting.
fn convolve<W: Weight>(prev: &LatticeDist<W>, law: &StepLaw<W>) -> LatticeDist<W> {
    if prev.is_empty() {
        return LatticeDist::empty();
    }
    let span = (law.max_step - law.min_step) as usize;
    let new_lo = prev.lo + law.min_step;
    let width = prev.masses.len() + span;
    let mut sum = vec![W::zero(); width];
    let mut comp = vec![W::zero(); width];
    for (s, p) in &law.steps {
        if p.is_zero() {
            continue;
        }
        let offset = (s - law.min_step) as usize;
        let len = prev.masses.len();
        let dst_sum = &mut sum[offset..offset + len];
        let dst_comp = &mut comp[offset..offset + len];
        for ((v, ds), dc) in prev.masses.iter().zip(dst_sum).zip(dst_comp) {
            if W::EXACT && v.is_zero() {
                continue;
            }
            let term = v.mul(p);
            W::acc_add(ds, dc, &term);
        }
    }
    let masses: Vec<W> = sum
        .into_iter()
        .zip(comp)
        .map(|(s, c)| W::acc_finish(s, c))
        .collect();
    LatticeDist { lo: new_lo, masses }.trim()
}

/// Split an advanced row into its surviving part and its first-hit part.
/// Both regions are half-lines, so the cut is a single index.
fn split<W: Weight>(row: LatticeDist<W>, kind: StoppingTime) -> (LatticeDist<W>, LatticeDist<W>) {
    if row.is_empty() {
        return (LatticeDist::empty(), LatticeDist::empty());
    }
    // First position belonging to the right half.
    let (survival_on_left, right_start) = match kind.flavor {
        Ineq::Ge => (true, kind.threshold),
        Ineq::Gt => (true, kind.threshold + 1),
        Ineq::Le => (false, kind.threshold + 1),
        Ineq::Lt => (false, kind.threshold),
    };
    let width = row.masses.len() as i64;
    let cut = (right_start - row.lo).clamp(0, width) as usize;
    let mut left_masses = row.masses;
    let right_masses = left_masses.split_off(cut);
    let left = LatticeDist {
        lo: row.lo,
        masses: left_masses,
    }
    .trim();
    let right = LatticeDist {
        lo: row.lo + cut as i64,
        masses: right_masses,
    }
    .trim();
    if survival_on_left {
        (left, right)
    } else {
        (right, left)
    }
}

fn check_window(step: usize, width: usize, budget: &Budget) -> Result<(), DpError> {
    if width > budget.max_window {
        Err(DpError::HorizonTooLarge {
            step,
            window: width,
            cap: budget.max_window,
        })
    } else {
        Ok(())
    }
}

/// Stream the free walk: `visit(n, law of S_n)` for `n = 0..=n_max`.
pub fn free_scan<W: Weight>(
    law: &StepLaw<W>,
    n_max: usize,
    budget: &Budget,
    mut visit: impl FnMut(usize, &LatticeDist<W>),
) -> Result<(), DpError> {
    let mut row = LatticeDist::delta(0);
    visit(0, &row);
    for n in 1..=n_max {
        row = convolve(&row, law);
        check_window(n, row.len(), budget)?;
        visit(n, &row);
    }
    Ok(())
}

/// Law of `S_n` for a single horizon.
pub fn free_dist<W: Weight>(
    law: &StepLaw<W>,
    n: usize,
    budget: &Budget,
) -> Result<LatticeDist<W>, DpError> {
    let mut out = LatticeDist::delta(0);
    free_scan(law, n, budget, |k, row| {
        if k == n {
            out = row.clone();
        }
    })?;
    Ok(out)
}

/// Stream the stopped walk: `visit(n, surviving law, first-hit law)`.
///
/// Row 0 is the unit mass at the origin, unconditionally: the stopping time
/// ranges over `n >= 1`, so time 0 never triggers it even when the origin
/// lies in the triggering region.
pub fn constrained_scan<W: Weight>(
    law: &StepLaw<W>,
    kind: StoppingTime,
    n_max: usize,
    budget: &Budget,
    mut visit: impl FnMut(usize, &LatticeDist<W>, &LatticeDist<W>),
) -> Result<(), DpError> {
    let mut surv = LatticeDist::delta(0);
    visit(0, &surv, &LatticeDist::empty());
    for n in 1..=n_max {
        let advanced = convolve(&surv, law);
        check_window(n, advanced.len(), budget)?;
        let (s, h) = split(advanced, kind);
        surv = s;
        visit(n, &surv, &h);
    }
    Ok(())
}

/// Joint law table of the walk and a first passage time.
#[derive(Debug, Clone)]
pub struct ConstrainedTable<W> {
    pub kind: StoppingTime,
    /// `survival[n]` carries `P[tau > n, S_n = i]` over `i`.
    pub survival: Vec<LatticeDist<W>>,
    /// `hit[n]` carries `P[tau = n, S_n = i]` over `i`.
    pub hit: Vec<LatticeDist<W>>,
    /// Total surviving mass per step; non-increasing.
    pub survival_prob: Vec<W>,
}

pub fn constrained_table<W: Weight>(
    walk: &WalkSpec,
    kind: StoppingTime,
    n_max: usize,
    budget: &Budget,
) -> Result<ConstrainedTable<W>, DpError> {
    let law = StepLaw::<W>::from_walk(walk);
    let mut survival = Vec::with_capacity(n_max + 1);
    let mut hit = Vec::with_capacity(n_max + 1);
    let mut survival_prob = Vec::with_capacity(n_max + 1);
    constrained_scan(&law, kind, n_max, budget, |_, s, h| {
        survival_prob.push(s.total());
        survival.push(s.clone());
        hit.push(h.clone());
    })?;
    Ok(ConstrainedTable {
        kind,
        survival,
        hit,
        survival_prob,
    })
}

/// Stream the chain reflected at the origin: `X_{n+1} = max(X_n + Y, 0)`,
/// `X_0 = x0`. With `scale = Some(c)` every step multiplies the whole row by
/// `c`, so row `n` holds `c^n * P[X_n = i]`; useful when the raw masses decay
/// geometrically and would underflow.
pub fn reflected_scan<W: Weight>(
    law: &StepLaw<W>,
    x0: i64,
    n_max: usize,
    budget: &Budget,
    scale: Option<&W>,
    mut visit: impl FnMut(usize, &LatticeDist<W>),
) -> Result<(), DpError> {
    assert!(x0 >= 0, "reflected chain starts in the nonnegative half-line");
    let mut row = LatticeDist::delta(x0);
    visit(0, &row);
    for n in 1..=n_max {
        let advanced = convolve(&row, law);
        check_window(n, advanced.len(), budget)?;
        // Fold everything at or below the origin onto the origin; `split`
        // with the `le 0` kind puts the positive part first.
        let (above, at_or_below) = split(
            advanced,
            StoppingTime {
                flavor: Ineq::Le,
                threshold: 0,
            },
        );
        let origin_mass = at_or_below.total();
        let mut masses: Vec<W> = match above.window() {
            None => vec![origin_mass],
            Some((_, hi)) => {
                let mut v = vec![W::zero(); hi as usize + 1];
                v[0] = origin_mass;
                for (i, m) in above.iter() {
                    v[i as usize] = m.clone();
                }
                v
            }
        };
        if let Some(c) = scale {
            for m in &mut masses {
                *m = m.mul(c);
            }
        }
        row = LatticeDist { lo: 0, masses }.trim();
        visit(n, &row);
    }
    Ok(())
}

/// Occupation table of the reflected chain.
pub fn reflected_table<W: Weight>(
    walk: &WalkSpec,
    x0: i64,
    n_max: usize,
    budget: &Budget,
) -> Result<Vec<LatticeDist<W>>, DpError> {
    let law = StepLaw::<W>::from_walk(walk);
    let mut rows = Vec::with_capacity(n_max + 1);
    reflected_scan(&law, x0, n_max, budget, None, |_, row| rows.push(row.clone()))?;
    Ok(rows)
}

/// Default cap on enumerated paths.
pub const BRUTE_FORCE_PATH_CAP: u128 = 1 << 24;

/// Exact probability of a path event by full enumeration.
///
/// The event predicate sees the step offsets `(Y_1, ..., Y_n)`; prefix sums
/// or reflections are the caller's business. Runs in `|support|^n` time.
pub fn brute_force_paths(
    walk: &WalkSpec,
    n: usize,
    event: &mut dyn FnMut(&[i64]) -> bool,
) -> Result<Rational, DpError> {
    let base = walk.steps().len() as u128;
    let paths = base.checked_pow(n as u32).unwrap_or(u128::MAX);
    if paths > BRUTE_FORCE_PATH_CAP {
        return Err(DpError::BudgetExceeded {
            paths,
            cap: BRUTE_FORCE_PATH_CAP,
        });
    }
    let steps = walk.steps();
    let mut offsets = vec![0i64; n];
    let mut total = <Rational as Weight>::zero();
    fn recurse(
        steps: &[(i64, Rational)],
        depth: usize,
        n: usize,
        prob: Rational,
        offsets: &mut Vec<i64>,
        event: &mut dyn FnMut(&[i64]) -> bool,
        total: &mut Rational,
    ) {
        if depth == n {
            if event(offsets) {
                *total += prob;
            }
            return;
        }
        for (s, m) in steps {
            offsets[depth] = *s;
            recurse(steps, depth + 1, n, &prob * m, offsets, event, total);
        }
    }
    recurse(
        steps,
        0,
        n,
        <Rational as Weight>::one(),
        &mut offsets,
        event,
        &mut total,
    );
    Ok(total)
}

/// Prefix sums `S_1..S_n` of a step sequence.
pub fn prefix_sums(offsets: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(offsets.len());
    let mut acc = 0i64;
    for s in offsets {
        acc += s;
        out.push(acc);
    }
    out
}

/// Endpoint of the reflected chain driven by a step sequence.
pub fn reflect_fold(x0: i64, offsets: &[i64]) -> i64 {
    offsets.iter().fold(x0, |x, s| (x + s).max(0))
}
