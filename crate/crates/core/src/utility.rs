//! Piecewise-linear utilities: base types, class memberships, expected-utility
//! gaps, partial greediness and exclusion criteria for the multi-fractional
//! utility class.
//!
//! A utility is stored through its right derivative, which is constant on
//! `(-inf, b_1)`, `[b_1, b_2)`, ..., `[b_n, inf)`, plus one anchor value.
//! Segment `j` is the `j`-th of these intervals.

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::gamma::{EpsilonFn, GammaFn};
use crate::piecewise::{union_knots, PairAreas, PiecewiseFn};
use crate::DEFAULT_TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct UtilityPWL {
    anchor: (f64, f64),
    knots: Vec<f64>,
    slopes: Vec<f64>,
    values: Vec<f64>,
}

impl UtilityPWL {
    /// `slopes` has one entry more than `knots`; all slopes must be non-negative.
    pub fn new(anchor: (f64, f64), knots: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != knots.len() + 1 {
            return Err(Error::InvalidPiecewise("utility needs one slope per segment".into()));
        }
        if !anchor.0.is_finite() || !anchor.1.is_finite() || knots.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPiecewise("knots must be strictly increasing".into()));
        }
        if let Some(j) = slopes.iter().position(|&s| s < 0.0) {
            return Err(Error::ParameterViolation(format!("slope of segment {j} is negative")));
        }
        let mut u = UtilityPWL { anchor, knots, slopes, values: Vec::new() };
        // Integral of the slope from b_1, then re-based on the anchor.
        let mut prefix = Vec::with_capacity(u.knots.len());
        let mut acc = 0.0;
        for (i, &b) in u.knots.iter().enumerate() {
            if i > 0 {
                acc += u.slopes[i] * (b - u.knots[i - 1]);
            }
            prefix.push(acc);
        }
        let offset = anchor.1 - u.raw(&prefix, anchor.0);
        u.values = prefix.iter().map(|p| p + offset).collect();
        Ok(u)
    }

    /// Linear utility with the given slope through `(0, 0)`.
    pub fn linear(slope: f64) -> Result<Self> {
        UtilityPWL::new((0.0, 0.0), Vec::new(), vec![slope])
    }

    fn raw(&self, prefix: &[f64], x: f64) -> f64 {
        match self.segment_index(x) {
            _ if self.knots.is_empty() => self.slopes[0] * x,
            0 => self.slopes[0] * (x - self.knots[0]),
            j => prefix[j - 1] + self.slopes[j] * (x - self.knots[j - 1]),
        }
    }

    pub fn anchor(&self) -> (f64, f64) {
        self.anchor
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn segment_count(&self) -> usize {
        self.slopes.len()
    }

    /// Segment containing `x`.
    pub fn segment_index(&self, x: f64) -> usize {
        self.knots.partition_point(|&b| b <= x)
    }

    /// Left end of segment `j` (`-inf` for the first).
    pub fn segment_start(&self, j: usize) -> f64 {
        if j == 0 {
            f64::NEG_INFINITY
        } else {
            self.knots[j - 1]
        }
    }

    /// Right end of segment `j` (`+inf` for the last).
    pub fn segment_end(&self, j: usize) -> f64 {
        self.knots.get(j).copied().unwrap_or(f64::INFINITY)
    }

    /// A finite point of segment `j`: its start, or one unit left of the
    /// first knot for the unbounded first segment.
    pub fn segment_point(&self, j: usize) -> f64 {
        match (j, self.knots.first()) {
            (0, Some(&b)) => b - 1.0,
            (0, None) => self.anchor.0,
            _ => self.knots[j - 1],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.knots.is_empty() {
            return self.anchor.1 + self.slopes[0] * (x - self.anchor.0);
        }
        match self.segment_index(x) {
            0 => self.values[0] - self.slopes[0] * (self.knots[0] - x),
            j => self.values[j - 1] + self.slopes[j] * (x - self.knots[j - 1]),
        }
    }

    /// Right derivative at `x`.
    pub fn slope_right(&self, x: f64) -> f64 {
        self.slopes[self.segment_index(x)]
    }

    /// Left derivative at `x`.
    pub fn slope_left(&self, x: f64) -> f64 {
        self.slopes[self.knots.partition_point(|&b| b < x)]
    }

    /// Slopes never increase.
    pub fn is_concave(&self) -> bool {
        self.slopes.windows(2).all(|w| w[1] <= w[0])
    }

    /// Same function with knots between equal slopes removed.
    pub fn simplify(&self) -> UtilityPWL {
        let mut knots = Vec::with_capacity(self.knots.len());
        let mut slopes = vec![self.slopes[0]];
        for (i, &b) in self.knots.iter().enumerate() {
            if self.slopes[i + 1] != *slopes.last().unwrap() {
                knots.push(b);
                slopes.push(self.slopes[i + 1]);
            }
        }
        UtilityPWL::new(self.anchor, knots, slopes).expect("simplification keeps validity")
    }
}

/// Builds a utility from the slope on `(-inf, starts[0])` and on each
/// `[starts[k], starts[k+1])`, merging equal neighbours.
fn assemble(anchor: (f64, f64), left: f64, starts: Vec<f64>, slopes: Vec<f64>) -> Result<UtilityPWL> {
    let mut all = vec![left];
    all.extend(slopes);
    Ok(UtilityPWL::new(anchor, starts, all)?.simplify())
}

/// Segments of the common knots of `F - G` that lie left of `t`, truncated at `t`,
/// with a flag telling whether `F < G` there.
fn sign_segments(areas: &PairAreas, t: f64) -> Vec<(f64, f64, bool)> {
    let knots = areas.knots();
    let mut out = Vec::new();
    for k in 0..knots.len() {
        let a = knots[k];
        if a >= t {
            break;
        }
        let b = areas.parts.negative.segment_end(k).min(t);
        out.push((a, b, areas.negative_on(k)));
    }
    out
}

/// Base utility for the multi-fractional order at `t`: slope `gamma(t)` where
/// `G <= F`, slope 1 where `F < G`, both up to `t`, and flat after `t`.
pub fn make_base_mf(t: f64, f: &Distribution, g: &Distribution, gamma: &GammaFn) -> UtilityPWL {
    let areas = PairAreas::new(f, g);
    let gt = gamma.eval(t);
    let segs = sign_segments(&areas, t);
    let mut starts: Vec<f64> = segs.iter().map(|s| s.0).collect();
    let mut slopes: Vec<f64> = segs.iter().map(|s| if s.2 { 1.0 } else { gt }).collect();
    starts.push(t);
    slopes.push(0.0);
    assemble((t, 0.0), gt, starts, slopes).expect("base slopes are valid")
}

/// Base utility for the functional order at `t`: slope 1 where `G <= F`,
/// `1/gamma(x)` where `F < G`, both up to `t`, and flat after `t`.
pub fn make_base_ff(t: f64, f: &Distribution, g: &Distribution, gamma: &GammaFn) -> Result<UtilityPWL> {
    let areas = PairAreas::new(f, g);
    let mut starts = Vec::new();
    let mut slopes = Vec::new();
    for (a, b, negative) in sign_segments(&areas, t) {
        if !negative {
            starts.push(a);
            slopes.push(1.0);
            continue;
        }
        let runs = constant_runs(gamma.carrier(), a, b).ok_or(Error::NonStepGammaOnNegativeRegion { from: a, to: b })?;
        for (x, v) in runs {
            if v <= 0.0 {
                return Err(Error::DivisionByZeroGamma { x });
            }
            starts.push(x);
            slopes.push(1.0 / v);
        }
    }
    starts.push(t);
    slopes.push(0.0);
    assemble((t, 0.0), 1.0, starts, slopes)
}

/// Base utility for functional almost dominance: slope 1 where `G <= F` and
/// `(1 - epsilon(x)) / epsilon(x)` where `F < G`.
pub fn make_base_asd(f: &Distribution, g: &Distribution, epsilon: &EpsilonFn) -> Result<UtilityPWL> {
    let areas = PairAreas::new(f, g);
    let mut starts = Vec::new();
    let mut slopes = Vec::new();
    for (a, b, negative) in sign_segments(&areas, f64::INFINITY) {
        if !negative {
            starts.push(a);
            slopes.push(1.0);
            continue;
        }
        let runs = constant_runs(epsilon.carrier(), a, b).ok_or(Error::NonStepEpsilonOnNegativeRegion { from: a, to: b })?;
        for (x, v) in runs {
            starts.push(x);
            slopes.push((1.0 - v) / v);
        }
    }
    let anchor = (areas.knots().first().copied().unwrap_or(0.0), 0.0);
    assemble(anchor, 1.0, starts, slopes)
}

/// Splits `[a, b)` at the knots of `w` into runs where `w` is constant, or
/// `None` if `w` has a non-zero slope somewhere on `[a, b)`.
fn constant_runs(w: &PiecewiseFn, a: f64, b: f64) -> Option<Vec<(f64, f64)>> {
    let mut cuts = vec![a];
    cuts.extend(w.knots().iter().copied().filter(|&k| k > a && k < b));
    let mut out = Vec::with_capacity(cuts.len());
    for (i, &x) in cuts.iter().enumerate() {
        let y = cuts.get(i + 1).copied().unwrap_or(b);
        if w.slope_at(x) != 0.0 && y > x {
            return None;
        }
        out.push((x, w.eval(x)));
    }
    Some(out)
}

/// `E_G[u] - E_F[u] = int (F - G) du`.
pub fn expected_utility_gap(f: &Distribution, g: &Distribution, u: &UtilityPWL) -> f64 {
    let areas = PairAreas::new(f, g);
    let net = |x: f64| areas.a_pos(x) - areas.a_neg(x);
    let mut gap = 0.0;
    let mut prev = 0.0;
    for j in 0..u.segment_count() {
        let end = net(u.segment_end(j));
        let s = u.slopes[j];
        if s != 0.0 {
            gap += s * (end - prev);
        }
        prev = end;
    }
    gap
}

/// A failed inequality `lhs <= rhs` between a point `x` in segment
/// `x_segment` and a point `y` in segment `y_segment`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub x_segment: usize,
    pub y_segment: usize,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MembershipVerdict {
    pub member: bool,
    pub violation: Option<Violation>,
}

impl MembershipVerdict {
    fn from(violation: Option<Violation>) -> Self {
        MembershipVerdict { member: violation.is_none(), violation }
    }
}

fn within(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs + tol * rhs.abs().max(1.0)
}

/// Running minimum of the slopes (including the current one) and its first argmin.
fn prefix_min(u: &UtilityPWL) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::with_capacity(u.slopes.len());
    for (j, &s) in u.slopes.iter().enumerate() {
        match out.last() {
            Some(&(m, i)) if m <= s => out.push((m, i)),
            _ => out.push((s, j)),
        }
    }
    out
}

/// `bound(j)` is the factor applied to slope `j`; checks
/// `bound(j) * s_j <= min_{i <= j} s_i` for every segment.
fn scan_prefix(u: &UtilityPWL, tol: f64, bound: impl Fn(usize) -> f64) -> Option<Violation> {
    for (j, &(m, i)) in prefix_min(u).iter().enumerate() {
        let lhs = bound(j) * u.slopes[j];
        if !within(lhs, m, tol) {
            return Some(Violation { x_segment: i, y_segment: j, x: u.segment_point(i), y: u.segment_point(j), lhs, rhs: m });
        }
    }
    None
}

/// Membership in the fractional class: `gamma u'(y) <= u'(x)` for all `x <= y`.
pub fn check_membership_fractional(u: &UtilityPWL, gamma: f64) -> MembershipVerdict {
    MembershipVerdict::from(scan_prefix(u, DEFAULT_TOL, |_| gamma))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DpmOptions {
    pub tol: f64,
    /// Compare `gamma(y) u'+(y)` with left derivatives `u'-(x)` instead.
    pub opposite_sides: bool,
}

impl Default for DpmOptions {
    fn default() -> Self {
        DpmOptions { tol: DEFAULT_TOL, opposite_sides: false }
    }
}

/// Membership in `D(gamma)`: `gamma(y) u'(y) <= u'(x)` for all `x <= y`.
/// Since gamma is non-decreasing the supremum over a segment is its left limit
/// at the segment end.
pub fn check_dpm_gamma(u: &UtilityPWL, gamma: &GammaFn) -> MembershipVerdict {
    check_dpm_gamma_with(u, gamma, &DpmOptions::default())
}

pub fn check_dpm_gamma_with(u: &UtilityPWL, gamma: &GammaFn, opts: &DpmOptions) -> MembershipVerdict {
    let sup = |j: usize| gamma.sup_on(u.segment_start(j), u.segment_end(j));
    if let Some(v) = scan_prefix(u, opts.tol, sup) {
        return MembershipVerdict::from(Some(v));
    }
    if opts.opposite_sides {
        // At a knot y = b_j only left derivatives of earlier segments are available.
        let pm = prefix_min(u);
        for j in 1..u.segment_count() {
            let (m, i) = pm[j - 1];
            let lhs = gamma.eval(u.knots[j - 1]) * u.slopes[j];
            if !within(lhs, m, opts.tol) {
                let v = Violation { x_segment: i, y_segment: j, x: u.segment_point(i), y: u.segment_point(j), lhs, rhs: m };
                return MembershipVerdict::from(Some(v));
            }
        }
    }
    MembershipVerdict::from(None)
}

/// Membership in the almost-dominance class: every slope is at most
/// `inf u' * (1 - epsilon(x)) / epsilon(x)` on its segment.
pub fn check_membership_asd(u: &UtilityPWL, epsilon: &EpsilonFn) -> MembershipVerdict {
    let (worst, arg) = *prefix_min(u).last().unwrap();
    for (j, &s) in u.slopes.iter().enumerate() {
        let e = epsilon.sup_on(u.segment_start(j), u.segment_end(j));
        let rhs = worst * (1.0 - e) / e;
        if !within(s, rhs, DEFAULT_TOL) {
            let v = Violation { x_segment: arg, y_segment: j, x: u.segment_point(arg), y: u.segment_point(j), lhs: s, rhs };
            return MembershipVerdict::from(Some(v));
        }
    }
    MembershipVerdict::from(None)
}

/// Ratio of marginal utilities with `0/0 = 1` and `p/0 = inf`.
pub fn slope_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Right-continuous, non-increasing step map `x -> G_par(u; x)`, constant on
/// the segments of the utility.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedinessProfile {
    knots: Vec<f64>,
    values: Vec<f64>,
    constant_initial_segment: bool,
}

impl GreedinessProfile {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Value on each segment; `values()[0]` is the limit at `-inf`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.knots.partition_point(|&b| b <= x)]
    }

    /// Index of global greediness, the limit at `-inf`.
    pub fn global(&self) -> f64 {
        self.values[0]
    }

    /// The utility is constant on its first segment, where the ratio
    /// conventions decide the value.
    pub fn constant_initial_segment(&self) -> bool {
        self.constant_initial_segment
    }
}

/// `G_par(u; x) = sup_{x < y < z} u'(z) / u'(y)`, for every segment at once.
pub fn greediness_profile(u: &UtilityPWL) -> GreedinessProfile {
    let n = u.segment_count();
    let mut values = vec![1.0; n];
    let mut suffix_max = 0.0f64;
    let mut next = 1.0f64;
    for i in (0..n).rev() {
        suffix_max = suffix_max.max(u.slopes[i]);
        next = next.max(slope_ratio(suffix_max, u.slopes[i]));
        values[i] = next;
    }
    GreedinessProfile { knots: u.knots.clone(), values, constant_initial_segment: u.slopes[0] == 0.0 }
}

pub fn partial_greediness(u: &UtilityPWL, x: f64) -> f64 {
    greediness_profile(u).eval(x)
}

pub fn global_greediness(u: &UtilityPWL) -> f64 {
    greediness_profile(u).global()
}

/// One pair of segments `x_segment <= y_segment` in [`ara_bound_report`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AraEntry {
    pub x_segment: usize,
    pub y_segment: usize,
    pub x: f64,
    pub y: f64,
    pub ln_ratio: f64,
    pub ln_gamma: f64,
    pub pass: bool,
}

/// `ln(u'(x) / u'(y)) >= ln gamma(y)` for every ordered pair of segments.
pub fn ara_bound_report(u: &UtilityPWL, gamma: &GammaFn) -> Result<Vec<AraEntry>> {
    if let Some(segment) = u.slopes.iter().position(|&s| s <= 0.0) {
        return Err(Error::NonPositiveSlope { segment });
    }
    let n = u.segment_count();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for j in 0..n {
        let ln_gamma = gamma.sup_on(u.segment_start(j), u.segment_end(j)).ln();
        for i in 0..=j {
            let ln_ratio = (u.slopes[i] / u.slopes[j]).ln();
            out.push(AraEntry {
                x_segment: i,
                y_segment: j,
                x: u.segment_point(i),
                y: u.segment_point(j),
                ln_ratio,
                ln_gamma,
                pass: ln_ratio >= ln_gamma - DEFAULT_TOL,
            });
        }
    }
    Ok(out)
}

/// Weighted sum `sum w_k u_k`; slopes add on the union of the knots.
pub fn combine(terms: &[(f64, UtilityPWL)]) -> Result<UtilityPWL> {
    let first = terms.first().ok_or(Error::EmptyInput)?;
    if let Some((w, _)) = terms.iter().find(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::ParameterViolation(format!("combination weight {w} is negative")));
    }
    let knots = terms.iter().fold(Vec::new(), |acc, (_, u)| union_knots(&acc, &u.knots));
    let mut slopes = Vec::with_capacity(knots.len() + 1);
    for j in 0..=knots.len() {
        let x = if j == 0 { knots.first().map_or(0.0, |b| b - 1.0) } else { knots[j - 1] };
        slopes.push(terms.iter().map(|(w, u)| w * u.slope_right(x)).sum());
    }
    let x0 = first.1.anchor.0;
    let value = terms.iter().map(|(w, u)| w * u.eval(x0)).sum();
    UtilityPWL::new((x0, value), knots, slopes)
}

/// `x -> u(x + c)` for `c >= 0`.
pub fn translate(u: &UtilityPWL, c: f64) -> Result<UtilityPWL> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::ParameterViolation(format!("translation {c} must be non-negative")));
    }
    let knots = u.knots.iter().map(|b| b - c).collect();
    UtilityPWL::new((u.anchor.0 - c, u.anchor.1), knots, u.slopes.clone())
}

/// Structural reason for membership in the multi-fractional utility class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MemberReason {
    /// Concave non-decreasing utilities belong to every fractional class.
    Concave,
    /// Member of the fractional class for the limit of gamma at `+inf`.
    FractionalUpper,
    /// Flat from `t` on and member of the fractional class for `gamma(t)`.
    BaseClass { t: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InconclusiveReason {
    /// The utility is not in `D(gamma)`, so the criteria do not apply.
    NotInDpm(Violation),
    NoCriterionFired,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExclusionVerdict {
    MemberByConstruction(MemberReason),
    /// The greediness bound `1/gamma` is reached where gamma strictly increases;
    /// `x0` is a probe point and `z` the point of increase.
    ExcludedByStrictIncrease { x0: f64, z: f64 },
    /// The bound is touched at two points with distinct gamma values in `(0, 1)`.
    ExcludedByTwoTouches { x0: f64, x1: f64 },
    Inconclusive(InconclusiveReason),
}

/// Membership certificate for a single utility, if one applies.
pub fn certify(u: &UtilityPWL, gamma: &GammaFn) -> Option<MemberReason> {
    if u.is_concave() {
        return Some(MemberReason::Concave);
    }
    if check_membership_fractional(u, gamma.upper()).member {
        return Some(MemberReason::FractionalUpper);
    }
    let flat_from = u.slopes.iter().rposition(|&s| s != 0.0).map(|j| j + 1)?;
    if flat_from < u.segment_count() {
        let t = u.segment_start(flat_from);
        if check_membership_fractional(u, gamma.eval(t)).member {
            return Some(MemberReason::BaseClass { t });
        }
    }
    None
}

/// Certificates for every term of a non-negative combination, or `None` if
/// some term has none.
pub fn certify_combination(terms: &[(f64, UtilityPWL)], gamma: &GammaFn) -> Option<Vec<MemberReason>> {
    terms.iter().map(|(_, u)| certify(u, gamma)).collect()
}

/// Applies the membership certificates and the two exclusion criteria.
pub fn mfsd_exclusion(u: &UtilityPWL, gamma: &GammaFn) -> ExclusionVerdict {
    mfsd_exclusion_with(u, gamma, DEFAULT_TOL)
}

pub fn mfsd_exclusion_with(u: &UtilityPWL, gamma: &GammaFn, tol: f64) -> ExclusionVerdict {
    let dpm = check_dpm_gamma_with(u, gamma, &DpmOptions { tol, opposite_sides: false });
    if let Some(v) = dpm.violation {
        return ExclusionVerdict::Inconclusive(InconclusiveReason::NotInDpm(v));
    }
    if let Some(reason) = certify(u, gamma) {
        return ExclusionVerdict::MemberByConstruction(reason);
    }
    if let Some((x0, z)) = strict_increase_touch(u, gamma, tol) {
        return ExclusionVerdict::ExcludedByStrictIncrease { x0, z };
    }
    if let Some((x0, x1)) = two_touches(u, gamma, tol) {
        return ExclusionVerdict::ExcludedByTwoTouches { x0, x1 };
    }
    ExclusionVerdict::Inconclusive(InconclusiveReason::NoCriterionFired)
}

/// A segment whose slope meets the bound `gamma(z-) s_j = min_{i <= j} s_i`
/// at its right end `z`, where gamma increases strictly.
fn strict_increase_touch(u: &UtilityPWL, gamma: &GammaFn, tol: f64) -> Option<(f64, f64)> {
    let pm = prefix_min(u);
    let n = u.segment_count();
    for j in 0..n.saturating_sub(1) {
        let z = u.segment_end(j);
        let gz = gamma.left_limit(z);
        let (m, i) = pm[j];
        if !(gz > 0.0 && gz < 1.0) || m <= 0.0 || (gz * u.slopes[j] - m).abs() > tol * m.max(1.0) {
            continue;
        }
        let jumps = gamma.eval(z) > gz + tol;
        let rises = gamma.carrier().slope_at(z) > 0.0 && u.slopes[j + 1..].iter().any(|&s| s > 0.0);
        if jumps || rises {
            let x0 = match i {
                0 | 1 => u.knots[0] - 1.0,
                _ => u.knots[i - 2],
            };
            return Some((x0, z));
        }
    }
    None
}

/// Maximal intervals where the profile equals `1/gamma` with gamma constant
/// in `(0, 1)`; returns representatives of the first two with distinct gamma.
fn two_touches(u: &UtilityPWL, gamma: &GammaFn, tol: f64) -> Option<(f64, f64)> {
    let profile = greediness_profile(u);
    let grid = union_knots(profile.knots(), gamma.knots());
    let cells = grid.len() + 1;
    let start = |k: usize| if k == 0 { f64::NEG_INFINITY } else { grid[k - 1] };
    let end = |k: usize| grid.get(k).copied().unwrap_or(f64::INFINITY);
    let mut touches: Vec<(f64, f64, f64)> = Vec::new();
    for k in 0..cells {
        let (a, b) = (start(k), end(k));
        let probe = if a.is_finite() { a } else { b - 1.0 };
        let gv = gamma.eval(probe);
        let flat = if a.is_finite() { gamma.carrier().slope_at(a) == 0.0 } else { true };
        let gp = profile.eval(probe);
        if !flat || !(gv > 0.0 && gv < 1.0) || !gp.is_finite() || (gp - 1.0 / gv).abs() > tol * gp {
            continue;
        }
        match touches.last_mut() {
            Some(last) if last.1 == a && last.2 == gv => last.1 = b,
            _ => touches.push((a, b, gv)),
        }
    }
    let rep = |(a, b, _): (f64, f64, f64)| match (a.is_finite(), b.is_finite()) {
        (false, _) => b - 1.0,
        (_, false) => a + 1.0,
        _ => 0.5 * (a + b),
    };
    let first = *touches.first()?;
    let other = touches.iter().find(|t| t.2 != first.2)?;
    Some((rep(first), rep(*other)))
}
