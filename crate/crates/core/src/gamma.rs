//! Gamma and epsilon functions, and the minimal dominating gamma of a pair.

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::piecewise::{PairAreas, PiecewiseFn};
use crate::poly::Poly;
use crate::DEFAULT_TOL;

/// Slack for monotonicity and range checks on validated carriers.
const SHAPE_EPS: f64 = 1e-12;

/// Non-decreasing right-continuous function into `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaFn {
    carrier: PiecewiseFn,
    lower: f64,
    upper: f64,
}

/// Checks monotonicity and range; the function extends by its boundary values.
pub fn validate_gamma(g: PiecewiseFn) -> Result<GammaFn> {
    if g.max_degree() > 1 {
        return Err(Error::InvalidPiecewise("gamma pieces must be linear".into()));
    }
    let in_range = |x: f64, v: f64| {
        if (-SHAPE_EPS..=1.0 + SHAPE_EPS).contains(&v) {
            Ok(())
        } else {
            Err(Error::RangeViolation { x, value: v })
        }
    };
    let first = g.knots().first().copied().unwrap_or(0.0);
    in_range(first, g.left_value())?;
    for (k, p) in g.pieces().iter().enumerate() {
        let x = g.knots()[k];
        if g.jumps()[k] < -SHAPE_EPS {
            return Err(Error::NotMonotone { x });
        }
        if p.coef(1) < -SHAPE_EPS {
            return Err(Error::NotMonotone { x });
        }
        in_range(x, p.coef(0))?;
        let w = g.segment_width(k);
        if w.is_finite() {
            in_range(x + w, p.eval(w))?;
        } else if p.coef(1) != 0.0 {
            return Err(Error::RangeViolation { x, value: f64::INFINITY });
        }
    }
    let lower = g.left_value();
    let upper = g.pieces().last().map(|p| p.coef(0)).unwrap_or(lower);
    Ok(GammaFn { carrier: g, lower, upper })
}

impl GammaFn {
    pub fn constant(c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::GammaOutOfRange(c));
        }
        Ok(GammaFn { carrier: PiecewiseFn::constant(c), lower: c, upper: c })
    }

    /// Step function: `left` on `(-inf, knots[0])`, `values[k]` from `knots[k]`.
    pub fn step(left: f64, knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_gamma(PiecewiseFn::step(left, knots, values)?)
    }

    pub fn carrier(&self) -> &PiecewiseFn {
        &self.carrier
    }

    pub fn knots(&self) -> &[f64] {
        self.carrier.knots()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.carrier.eval(x)
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        self.carrier.left_limit(x)
    }

    /// Limit at `-inf`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Limit at `+inf`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Supremum over `[a, b)`: the left limit at `b` (gamma is non-decreasing).
    pub fn sup_on(&self, a: f64, b: f64) -> f64 {
        if b.is_finite() {
            self.left_limit(b).max(self.eval(a))
        } else {
            self.upper
        }
    }

    pub fn is_step(&self) -> bool {
        self.carrier.is_step()
    }

    /// Pointwise product with a constant in `[0, 1]`.
    pub fn scaled(&self, c: f64) -> Result<GammaFn> {
        validate_gamma(self.carrier.scale(c))
    }
}

/// Right-continuous piecewise-linear function into the open interval `(0, 1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonFn {
    carrier: PiecewiseFn,
}

pub fn validate_epsilon(e: PiecewiseFn) -> Result<EpsilonFn> {
    if e.max_degree() > 1 {
        return Err(Error::InvalidPiecewise("epsilon pieces must be linear".into()));
    }
    let open = |x: f64, v: f64| {
        if v > 0.0 && v < 0.5 {
            Ok(())
        } else {
            Err(Error::RangeViolation { x, value: v })
        }
    };
    let first = e.knots().first().copied().unwrap_or(0.0);
    open(first, e.left_value())?;
    for (k, p) in e.pieces().iter().enumerate() {
        let x = e.knots()[k];
        open(x, p.coef(0))?;
        let w = e.segment_width(k);
        if w.is_finite() {
            open(x + w, p.eval(w))?;
        } else if p.coef(1) != 0.0 {
            return Err(Error::RangeViolation { x, value: f64::INFINITY });
        }
    }
    Ok(EpsilonFn { carrier: e })
}

impl EpsilonFn {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 0.5) {
            return Err(Error::EpsilonOutOfRange(c));
        }
        Ok(EpsilonFn { carrier: PiecewiseFn::constant(c) })
    }

    pub fn step(left: f64, knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_epsilon(PiecewiseFn::step(left, knots, values)?)
    }

    pub fn carrier(&self) -> &PiecewiseFn {
        &self.carrier
    }

    pub fn knots(&self) -> &[f64] {
        self.carrier.knots()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.carrier.eval(x)
    }

    /// Supremum over `[a, b)`.
    pub fn sup_on(&self, a: f64, b: f64) -> f64 {
        self.carrier.bounds_on(a, b).1
    }

    pub fn is_step(&self) -> bool {
        self.carrier.is_step()
    }
}

/// Outcome of a minimal-constant computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConstantBound {
    Value(f64),
    /// The required constant leaves the admissible range.
    Infeasible(f64),
}

impl ConstantBound {
    pub fn value(self) -> Option<f64> {
        match self {
            ConstantBound::Value(v) => Some(v),
            ConstantBound::Infeasible(_) => None,
        }
    }

    /// The computed constant, feasible or not.
    pub fn raw(self) -> f64 {
        match self {
            ConstantBound::Value(v) | ConstantBound::Infeasible(v) => v,
        }
    }
}

fn ratio(neg: f64, pos: f64) -> f64 {
    if neg <= 0.0 {
        0.0
    } else if pos <= 0.0 {
        f64::INFINITY
    } else {
        neg / pos
    }
}

/// `sup_t A-(t)/A+(t)` and a point attaining it. The ratio is monotone on
/// each segment of the common knots, so knots suffice.
fn ratio_sup(areas: &PairAreas) -> (f64, f64) {
    let mut best = (0.0, f64::NEG_INFINITY);
    for &x in areas.knots() {
        let r = ratio(areas.a_neg(x), areas.a_pos(x));
        if r > best.0 {
            best = (r, x);
        }
    }
    best
}

/// Smallest constant `gamma` with `A- <= gamma A+` everywhere.
pub fn min_constant_gamma(f: &Distribution, g: &Distribution) -> ConstantBound {
    let (sup, _) = ratio_sup(&PairAreas::new(f, g));
    if sup > 1.0 + DEFAULT_TOL {
        ConstantBound::Infeasible(sup)
    } else {
        ConstantBound::Value(sup.min(1.0))
    }
}

/// Smallest constant `epsilon` for which the almost-dominance inequality holds:
/// `A-(inf) / (A-(inf) + A+(inf))`, infeasible from 1/2 on.
pub fn min_constant_epsilon(f: &Distribution, g: &Distribution) -> ConstantBound {
    let areas = PairAreas::new(f, g);
    let (neg, pos) = (areas.neg.total, areas.pos.total);
    if neg + pos == 0.0 {
        return ConstantBound::Value(0.0);
    }
    let e = neg / (neg + pos);
    if e >= 0.5 {
        ConstantBound::Infeasible(e)
    } else {
        ConstantBound::Value(e)
    }
}

/// Number of chords per segment when the running ratio is quadratic.
const CHORDS: usize = 16;

/// Pointwise-smallest non-decreasing gamma under which `F` precedes `G` in
/// the multi-fractional order: the running supremum of `A-(s)/A+(s)`.
pub fn min_gamma(f: &Distribution, g: &Distribution) -> Result<GammaFn> {
    let areas = PairAreas::new(f, g);
    let (sup, at) = ratio_sup(&areas);
    if sup > 1.0 + DEFAULT_TOL {
        return Err(Error::NotSSDOrdered { t: at, ratio: sup });
    }
    let mut out = Builder::default();
    let mut m = 0.0;
    let knots = areas.knots();
    for k in 0..knots.len() {
        if !areas.negative_on(k) {
            continue;
        }
        let h = areas.parts.negative.segment_width(k);
        if !h.is_finite() {
            continue;
        }
        let (a, b) = (knots[k], knots[k] + h);
        let c = areas.pos.func.pieces()[k].coef(0);
        let r = areas.neg.func.pieces()[k].scale(1.0 / c);
        let r_end = r.eval(h);
        if r_end <= m {
            continue;
        }
        let s_star = if r.eval(0.0) >= m {
            0.0
        } else {
            r.sub(&Poly::constant(m)).roots_in(0.0, h).first().copied().unwrap_or(0.0)
        };
        if r.degree().unwrap_or(0) <= 1 {
            out.push(a + s_star, r.shift(s_star));
            out.push(b, Poly::constant(r_end));
            m = r_end;
        } else {
            let step = (h - s_star) / CHORDS as f64;
            let concave = r.coef(2) < 0.0;
            let mut top = r_end;
            for i in 0..CHORDS {
                let s0 = s_star + step * i as f64;
                let s1 = if i + 1 == CHORDS { h } else { s0 + step };
                // Chords lie above a convex piece; tangents at the midpoint lie
                // above a concave one and meet at the sub-interval ends.
                let line = if concave {
                    let mid = 0.5 * (s0 + s1);
                    let d = r.derivative().eval(mid);
                    Poly::linear(r.eval(mid) + d * (s0 - mid), d)
                } else {
                    let (v0, v1) = (r.eval(s0), r.eval(s1));
                    Poly::linear(v0, (v1 - v0) / (s1 - s0))
                };
                let (v0, v1) = (line.eval(0.0), line.eval(s1 - s0));
                top = v1;
                if v1 <= 1.0 {
                    out.push(a + s0, line);
                } else if v0 >= 1.0 {
                    out.push(a + s0, Poly::constant(1.0));
                } else {
                    let cut = a + s0 + (1.0 - v0) / line.coef(1);
                    out.push(a + s0, line);
                    out.push(cut, Poly::constant(1.0));
                }
            }
            m = top.min(1.0);
            out.push(b, Poly::constant(m));
        }
    }
    let carrier = PiecewiseFn::new(0.0, out.knots, out.pieces)?.simplify();
    validate_gamma(carrier)
}

#[derive(Default)]
struct Builder {
    knots: Vec<f64>,
    pieces: Vec<Poly>,
}

impl Builder {
    fn push(&mut self, x: f64, p: Poly) {
        if self.knots.last() == Some(&x) {
            *self.pieces.last_mut().unwrap() = p;
        } else {
            self.knots.push(x);
            self.pieces.push(p);
        }
    }
}
