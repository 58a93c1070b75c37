//! Right-continuous piecewise polynomial functions with finitely many knots.
//!
//! A [`PiecewiseFn`] is constant on `(-inf, k0)` and polynomial on every
//! segment `[k_i, k_{i+1})`, the last segment running to `+inf`. Pieces are
//! stored in the local coordinate `s = x - k_i`. Jumps at knots are stored
//! alongside so that values read from a wire format round-trip unchanged.

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Values this close to zero are treated as zero when classifying signs.
pub const SIGN_EPS: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseFn {
    left: f64,
    knots: Vec<f64>,
    jumps: Vec<f64>,
    pieces: Vec<Poly>,
}

impl PiecewiseFn {
    pub fn constant(v: f64) -> Self {
        PiecewiseFn { left: v, knots: Vec::new(), jumps: Vec::new(), pieces: Vec::new() }
    }

    /// Builds from the left-tail value and one polynomial per knot; jumps are
    /// derived from the pieces.
    pub fn new(left: f64, knots: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        check_layout(left, &knots, pieces.len())?;
        if pieces.iter().flat_map(|p| p.coefficients()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidPiecewise("non-finite coefficient".into()));
        }
        let mut f = PiecewiseFn { left, knots, jumps: Vec::new(), pieces };
        f.jumps = (0..f.knots.len()).map(|k| f.pieces[k].coef(0) - f.limit_before(k)).collect();
        Ok(f)
    }

    /// Builds a piecewise-linear function from jumps and right slopes: at each
    /// knot the value jumps by `jumps[k]` and then grows at `slopes[k]`.
    pub fn from_jumps(left: f64, knots: Vec<f64>, jumps: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        check_layout(left, &knots, jumps.len())?;
        if slopes.len() != knots.len() {
            return Err(Error::InvalidPiecewise("slopes and knots differ in length".into()));
        }
        if jumps.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPiecewise("non-finite jump or slope".into()));
        }
        let mut pieces = Vec::with_capacity(knots.len());
        let mut before = left;
        for k in 0..knots.len() {
            let v = before + jumps[k];
            pieces.push(Poly::linear(v, slopes[k]));
            if k + 1 < knots.len() {
                before = v + slopes[k] * (knots[k + 1] - knots[k]);
            }
        }
        Ok(PiecewiseFn { left, knots, jumps, pieces })
    }

    /// Step function taking `values[k]` on `[knots[k], knots[k+1])`.
    pub fn step(left: f64, knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let pieces = values.into_iter().map(Poly::constant).collect();
        PiecewiseFn::new(left, knots, pieces)
    }

    /// Continuous piecewise-linear interpolation through `(xs[i], ys[i])`,
    /// constant before the first and after the last node.
    pub fn interpolate(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::InvalidPiecewise("interpolation nodes mismatch".into()));
        }
        let mut pieces = Vec::with_capacity(xs.len());
        for i in 0..xs.len() {
            if i + 1 < xs.len() {
                let slope = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                pieces.push(Poly::linear(ys[i], slope));
            } else {
                pieces.push(Poly::constant(ys[i]));
            }
        }
        PiecewiseFn::new(ys[0], xs.to_vec(), pieces)
    }

    pub fn left_value(&self) -> f64 {
        self.left
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    /// Right end of segment `k` (`+inf` for the last one).
    pub fn segment_end(&self, k: usize) -> f64 {
        self.knots.get(k + 1).copied().unwrap_or(f64::INFINITY)
    }

    /// Width of segment `k` (`+inf` for the last one).
    pub fn segment_width(&self, k: usize) -> f64 {
        self.segment_end(k) - self.knots[k]
    }

    /// Index of the segment containing `x` (`None` on the left tail).
    pub fn segment_index(&self, x: f64) -> Option<usize> {
        self.knots.partition_point(|&k| k <= x).checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.segment_index(x) {
            None => self.left,
            Some(k) => self.pieces[k].eval(x - self.knots[k]),
        }
    }

    /// Left limit `f(x-)`.
    pub fn left_limit(&self, x: f64) -> f64 {
        let k = self.knots.partition_point(|&k| k < x);
        if k == 0 {
            self.left
        } else {
            self.pieces[k - 1].eval(x - self.knots[k - 1])
        }
    }

    /// Limit of segment `k`'s piece at its right end, i.e. `f(k_{k+1}-)`.
    fn limit_before(&self, k: usize) -> f64 {
        if k == 0 {
            self.left
        } else {
            self.pieces[k - 1].eval(self.knots[k] - self.knots[k - 1])
        }
    }

    /// Right derivative at `x`.
    pub fn slope_at(&self, x: f64) -> f64 {
        match self.segment_index(x) {
            None => 0.0,
            Some(k) => self.pieces[k].derivative().eval(x - self.knots[k]),
        }
    }

    /// Highest polynomial degree over all pieces.
    pub fn max_degree(&self) -> usize {
        self.pieces.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    /// True when every piece is constant.
    pub fn is_step(&self) -> bool {
        self.pieces.iter().all(Poly::is_constant)
    }

    /// Same function represented on the union of its knots and `grid`.
    pub fn refine(&self, grid: &[f64]) -> PiecewiseFn {
        let all = union_knots(&self.knots, grid);
        if all.len() == self.knots.len() {
            return self.clone();
        }
        let mut jumps = Vec::with_capacity(all.len());
        let mut pieces = Vec::with_capacity(all.len());
        let mut own = 0;
        for &x in &all {
            if own < self.knots.len() && self.knots[own] == x {
                jumps.push(self.jumps[own]);
                pieces.push(self.pieces[own].clone());
                own += 1;
            } else {
                jumps.push(0.0);
                pieces.push(match own.checked_sub(1) {
                    None => Poly::constant(self.left),
                    Some(j) => self.pieces[j].shift(x - self.knots[j]),
                });
            }
        }
        PiecewiseFn { left: self.left, knots: all, jumps, pieces }
    }

    /// Pointwise combination on the union of both knot sets.
    pub fn zip_with(
        &self,
        other: &PiecewiseFn,
        op: impl Fn(&Poly, &Poly) -> Poly,
        left: impl Fn(f64, f64) -> f64,
    ) -> PiecewiseFn {
        let a = self.refine(&other.knots);
        let b = other.refine(&self.knots);
        let pieces = a.pieces.iter().zip(&b.pieces).map(|(p, q)| op(p, q)).collect();
        PiecewiseFn::new(left(a.left, b.left), a.knots, pieces)
            .expect("combination of valid functions is valid")
    }

    pub fn add(&self, other: &PiecewiseFn) -> PiecewiseFn {
        self.zip_with(other, Poly::add, |a, b| a + b)
    }

    pub fn sub(&self, other: &PiecewiseFn) -> PiecewiseFn {
        self.zip_with(other, Poly::sub, |a, b| a - b)
    }

    pub fn mul(&self, other: &PiecewiseFn) -> PiecewiseFn {
        self.zip_with(other, Poly::mul, |a, b| a * b)
    }

    pub fn scale(&self, k: f64) -> PiecewiseFn {
        let pieces = self.pieces.iter().map(|p| p.scale(k)).collect();
        PiecewiseFn::new(self.left * k, self.knots.clone(), pieces).expect("scaling keeps validity")
    }

    /// Translate: returns `x -> f(x - c)`.
    pub fn shifted(&self, c: f64) -> PiecewiseFn {
        PiecewiseFn {
            left: self.left,
            knots: self.knots.iter().map(|k| k + c).collect(),
            jumps: self.jumps.clone(),
            pieces: self.pieces.clone(),
        }
    }

    /// Drops knots across which the function continues with the same polynomial.
    pub fn simplify(&self) -> PiecewiseFn {
        let mut knots: Vec<f64> = Vec::new();
        let mut pieces: Vec<Poly> = Vec::new();
        for (k, &x) in self.knots.iter().enumerate() {
            let p = &self.pieces[k];
            let redundant = match pieces.last() {
                None => p.is_constant() && p.coef(0) == self.left,
                Some(prev) => {
                    let continued = prev.shift(x - *knots.last().unwrap());
                    continued.coefficients().len() == p.coefficients().len()
                        && continued
                            .coefficients()
                            .iter()
                            .zip(p.coefficients())
                            .all(|(a, b)| (a - b).abs() <= 1e-15 * (1.0 + b.abs()))
                }
            };
            if !redundant {
                knots.push(x);
                pieces.push(p.clone());
            }
        }
        PiecewiseFn::new(self.left, knots, pieces).expect("simplified function is valid")
    }

    /// Infimum and supremum over the half-open interval `[a, b)`.
    pub fn bounds_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut take = |v: f64| {
            lo = lo.min(v);
            hi = hi.max(v);
        };
        if self.knots.is_empty() || a < self.knots[0] {
            take(self.left);
        }
        for k in 0..self.knots.len() {
            let (ka, kb) = (self.knots[k], self.segment_end(k));
            let (from, to) = (ka.max(a), kb.min(b));
            if from >= to {
                continue;
            }
            let p = &self.pieces[k];
            let (s0, s1) = (from - ka, to - ka);
            take(p.eval(s0));
            if s1.is_finite() {
                take(p.eval(s1));
                for s in p.critical_points_in(s0, s1) {
                    take(p.eval(s));
                }
            } else if !p.is_constant() {
                let lead = *p.coefficients().last().unwrap();
                take(if lead > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY });
            }
        }
        (lo, hi)
    }
}

fn check_layout(left: f64, knots: &[f64], n: usize) -> Result<()> {
    if !left.is_finite() {
        return Err(Error::InvalidPiecewise("non-finite left tail".into()));
    }
    if n != knots.len() {
        return Err(Error::InvalidPiecewise("pieces and knots differ in length".into()));
    }
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::InvalidPiecewise("non-finite knot".into()));
    }
    if knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidPiecewise("knots must be strictly increasing".into()));
    }
    Ok(())
}

/// Sorted union of two sorted knot lists (exact equality merges).
pub fn union_knots(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Positive and negative parts of a piecewise-linear difference.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedParts {
    pub positive: PiecewiseFn,
    pub negative: PiecewiseFn,
}

/// Splits a piecewise-linear `d` into `(d)+` and `(d)-`, inserting knots at
/// interior sign changes.
pub fn signed_parts_of(d: &PiecewiseFn) -> Result<SignedParts> {
    if d.max_degree() > 1 {
        return Err(Error::InvalidPiecewise("signed parts need linear pieces".into()));
    }
    let mut roots = Vec::new();
    for (k, p) in d.pieces().iter().enumerate() {
        let (c0, c1) = (p.coef(0), p.coef(1));
        if c1 != 0.0 {
            let r = -c0 / c1;
            if r > 0.0 && r < d.segment_width(k) {
                roots.push(d.knots()[k] + r);
            }
        }
    }
    let refined = d.refine(&roots);
    let mut pos = Vec::with_capacity(refined.knots().len());
    let mut neg = Vec::with_capacity(refined.knots().len());
    for (k, p) in refined.pieces().iter().enumerate() {
        let x = refined.knots()[k];
        let p = if roots.contains(&x) { Poly::linear(0.0, p.coef(1)) } else { p.clone() };
        match piece_sign(&p, refined.segment_width(k)) {
            1 => {
                pos.push(p);
                neg.push(Poly::zero());
            }
            -1 => {
                neg.push(p.scale(-1.0));
                pos.push(Poly::zero());
            }
            _ => {
                pos.push(Poly::zero());
                neg.push(Poly::zero());
            }
        }
    }
    let left = refined.left_value();
    let knots = refined.knots().to_vec();
    Ok(SignedParts {
        positive: PiecewiseFn::new(left.max(0.0), knots.clone(), pos)?,
        negative: PiecewiseFn::new((-left).max(0.0), knots, neg)?,
    })
}

/// Sign of a linear piece that has no interior root: +1, -1 or 0.
fn piece_sign(p: &Poly, width: f64) -> i8 {
    let v = if width.is_finite() {
        p.eval(0.5 * width)
    } else if p.coef(0).abs() > SIGN_EPS {
        p.coef(0)
    } else {
        p.coef(1)
    };
    if v > SIGN_EPS {
        1
    } else if v < -SIGN_EPS {
        -1
    } else {
        0
    }
}

/// Signed parts of `F - G`.
pub fn signed_parts(f: &Distribution, g: &Distribution) -> SignedParts {
    signed_parts_of(&f.carrier().sub(g.carrier())).expect("CDF differences are piecewise linear")
}

/// Antiderivative from `-inf` together with its total over the real line.
#[derive(Clone, Debug, PartialEq)]
pub struct CumArea {
    pub func: PiecewiseFn,
    pub total: f64,
}

impl CumArea {
    pub fn at(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            self.total
        } else {
            self.func.eval(t)
        }
    }
}

/// `t -> int_{-inf}^t f(x) dx` for non-negative `f`.
pub fn cum_area(f: &PiecewiseFn) -> Result<CumArea> {
    if f.left_value() != 0.0 {
        return Err(Error::NonIntegrableTail);
    }
    let mut acc = 0.0;
    let mut pieces = Vec::with_capacity(f.knots().len());
    for (k, p) in f.pieces().iter().enumerate() {
        let area = p.integral();
        pieces.push(Poly::constant(acc).add(&area));
        let w = f.segment_width(k);
        if w.is_finite() {
            acc += area.eval(w);
        }
    }
    let total = match f.pieces().last() {
        Some(p) if !p.is_zero() => f64::INFINITY,
        _ => acc,
    };
    Ok(CumArea { func: PiecewiseFn::new(0.0, f.knots().to_vec(), pieces)?, total })
}

// Eight-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
const GL_WEIGHTS: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

/// `int_0^h f(s) / w(s) ds` for linear `f` and positive linear `w`.
fn integrate_ratio(f: &Poly, w: &Poly, h: f64) -> f64 {
    let (w0, w1) = (w.coef(0), w.coef(1));
    if w1 == 0.0 {
        return f.integral().eval(h) / w0;
    }
    let u = w1 * h / w0;
    if u.abs() < 0.05 {
        let half = 0.5 * h;
        GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(&n, wt)| {
                let (a, b) = (half * (1.0 - n), half * (1.0 + n));
                wt * (f.eval(a) / w.eval(a) + f.eval(b) / w.eval(b))
            })
            .sum::<f64>()
            * half
    } else {
        let (a, b) = (f.coef(0), f.coef(1));
        (b / w1) * h + (a - b * w0 / w1) / w1 * u.ln_1p()
    }
}

/// Cumulative `int_{-inf}^x f / w` evaluated at each knot of the common grid
/// (the union of both knot sets and `extra`), plus the total over the line.
pub fn weighted_cumulative(f: &PiecewiseFn, w: &PiecewiseFn, extra: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if f.left_value() != 0.0 {
        return Err(Error::NonIntegrableTail);
    }
    if f.max_degree() > 1 || w.max_degree() > 1 {
        return Err(Error::InvalidPiecewise("weighted area needs linear pieces".into()));
    }
    let grid = union_knots(&union_knots(f.knots(), w.knots()), extra);
    let fr = f.refine(&grid);
    let wr = w.refine(&grid);
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    let mut total = 0.0;
    for k in 0..grid.len() {
        values.push(acc);
        let fp = &fr.pieces()[k];
        if fp.is_zero() {
            continue;
        }
        let h = fr.segment_width(k);
        if !h.is_finite() {
            total = f64::INFINITY;
            continue;
        }
        let wp = &wr.pieces()[k];
        let (w_start, w_end) = (wp.eval(0.0), wp.eval(h));
        if w_start <= 0.0 || w_end <= 0.0 {
            let x = if w_start <= 0.0 { grid[k] } else { grid[k] + h };
            return Err(Error::DivisionByZeroGamma { x });
        }
        acc += integrate_ratio(fp, wp, h);
    }
    if total == 0.0 {
        total = acc;
    }
    Ok((grid, values, total))
}

/// `int_{-inf}^t f(x) / w(x) dx`; `t` may be `+inf`.
pub fn weighted_area_fn(f: &PiecewiseFn, w: &PiecewiseFn, t: f64) -> Result<f64> {
    if t == f64::INFINITY {
        return weighted_cumulative(f, w, &[]).map(|r| r.2);
    }
    let (grid, values, _) = weighted_cumulative(f, w, &[t])?;
    let k = grid.partition_point(|&x| x < t);
    Ok(values[k])
}

/// `int_{-inf}^t f(x) / gamma(x) dx`.
pub fn weighted_area(f: &PiecewiseFn, gamma: &crate::gamma::GammaFn, t: f64) -> Result<f64> {
    weighted_area_fn(f, gamma.carrier(), t)
}

/// Points where `d` changes sign, in increasing order. Each point is the
/// start of the region carrying the new sign.
pub fn sign_changes(parts: &SignedParts) -> Vec<f64> {
    let p = &parts.positive;
    let n = &parts.negative;
    let sign_of = |pp: &Poly, nn: &Poly| -> i8 {
        if !pp.is_zero() {
            1
        } else if !nn.is_zero() {
            -1
        } else {
            0
        }
    };
    let mut current = if p.left_value() > 0.0 {
        1
    } else if n.left_value() > 0.0 {
        -1
    } else {
        0
    };
    let mut out = Vec::new();
    for k in 0..p.knots().len() {
        let s = sign_of(&p.pieces()[k], &n.pieces()[k]);
        if s != 0 {
            if current != 0 && s != current {
                out.push(p.knots()[k]);
            }
            current = s;
        }
    }
    out
}

/// Sign changes of `F - G`; the first element is the first crossing point.
pub fn crossings(f: &Distribution, g: &Distribution) -> Vec<f64> {
    sign_changes(&signed_parts(f, g))
}

/// Signed parts of `F - G` and their cumulative areas `A+`, `A-`.
#[derive(Clone, Debug)]
pub struct PairAreas {
    pub parts: SignedParts,
    pub pos: CumArea,
    pub neg: CumArea,
}

impl PairAreas {
    pub fn new(f: &Distribution, g: &Distribution) -> Self {
        let parts = signed_parts(f, g);
        let pos = cum_area(&parts.positive).expect("positive part of a CDF difference is integrable");
        let neg = cum_area(&parts.negative).expect("negative part of a CDF difference is integrable");
        PairAreas { parts, pos, neg }
    }

    /// Common knots of the signed parts (input knots plus sign-change roots).
    pub fn knots(&self) -> &[f64] {
        self.parts.positive.knots()
    }

    pub fn a_pos(&self, t: f64) -> f64 {
        self.pos.at(t)
    }

    pub fn a_neg(&self, t: f64) -> f64 {
        self.neg.at(t)
    }

    /// True when `F < G` somewhere on segment `k` of the common knots.
    pub fn negative_on(&self, k: usize) -> bool {
        !self.parts.negative.pieces()[k].is_zero()
    }
}
