//! Deciders for the six dominance orders.
//!
//! Every decider reduces its order to `lhs(t) <= rhs(t)` for all `t` and
//! scans the margin `rhs - lhs` segment by segment. On each segment the margin
//! is a polynomial of degree at most three, or monotone for the functional
//! order, so segment ends and stationary points are a complete candidate set.

use std::fmt;

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::gamma::{EpsilonFn, GammaFn};
use crate::piecewise::{crossings, weighted_cumulative, PairAreas, PiecewiseFn};
use crate::DEFAULT_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Fsd,
    Ssd,
    Frac,
    Mfsd,
    Ffsd,
    Easd,
}

impl Order {
    pub const ALL: [Order; 6] = [Order::Fsd, Order::Ssd, Order::Frac, Order::Mfsd, Order::Ffsd, Order::Easd];

    pub fn tag(self) -> &'static str {
        match self {
            Order::Fsd => "FSD",
            Order::Ssd => "SSD",
            Order::Frac => "FRAC",
            Order::Mfsd => "MFSD",
            Order::Ffsd => "FFSD",
            Order::Easd => "EASD",
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Both sides of the defining inequality at one candidate point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    /// Point where the margin is attained; `None` for single-inequality orders.
    pub witness_t: Option<f64>,
    /// Smallest value of `rhs - lhs` over all `t`.
    pub margin: f64,
    pub order: Order,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    /// Short-circuit the fractional decider for equal-mean crossing pairs.
    pub equal_mean_shortcut: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { tol: DEFAULT_TOL, equal_mean_shortcut: false }
    }
}

struct Candidate {
    diag: Diagnostic,
    margin: f64,
}

/// Scans `rhs - lhs`; both functions must have constant right tails.
fn scan(lhs: &PiecewiseFn, rhs: &PiecewiseFn, order: Order, tol: f64) -> Verdict {
    let m = rhs.sub(lhs);
    let knots = m.knots();
    let mut cands: Vec<Candidate> = Vec::new();
    let at = |t: f64| Diagnostic { t, lhs: lhs.eval(t), rhs: rhs.eval(t) };
    if let Some(&k0) = knots.first() {
        let t = k0 - 1.0;
        cands.push(Candidate { diag: at(t), margin: m.left_value() });
    } else {
        cands.push(Candidate { diag: at(0.0), margin: m.left_value() });
    }
    for (k, p) in m.pieces().iter().enumerate() {
        let a = knots[k];
        let h = m.segment_width(k);
        cands.push(Candidate { diag: at(a), margin: p.eval(0.0) });
        if !h.is_finite() {
            continue;
        }
        for s in p.critical_points_in(0.0, h) {
            cands.push(Candidate { diag: at(a + s), margin: p.eval(s) });
        }
        let b = a + h;
        let end = p.eval(h);
        let at_b = m.eval(b);
        let t = if end < at_b - tol {
            // The infimum is a left limit; report a point just before the knot.
            let slope = p.derivative().eval(h).abs();
            let eta = (0.5 * h).min(1e-6 * end.abs() / (slope + f64::MIN_POSITIVE));
            b - eta.max(4.0 * f64::EPSILON * b.abs())
        } else {
            b
        };
        let diag = if t == b {
            Diagnostic { t: b, lhs: lhs.left_limit(b), rhs: rhs.left_limit(b) }
        } else {
            at(t)
        };
        cands.push(Candidate { diag, margin: end });
    }
    let margin = cands.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let near: Vec<&Candidate> = cands.iter().filter(|c| c.margin <= margin + tol).collect();
    let witness = near
        .iter()
        .find(|c| c.diag.lhs > tol)
        .or_else(|| near.first())
        .map(|c| c.diag.t);
    Verdict {
        holds: margin >= -tol,
        witness_t: witness,
        margin,
        order,
        diagnostics: cands.into_iter().map(|c| c.diag).collect(),
    }
}

/// First order: `G(x) <= F(x)` for all `x`.
pub fn check_fsd(f: &Distribution, g: &Distribution) -> Verdict {
    check_fsd_with(f, g, &CheckOptions::default())
}

pub fn check_fsd_with(f: &Distribution, g: &Distribution, opts: &CheckOptions) -> Verdict {
    scan(g.carrier(), f.carrier(), Order::Fsd, opts.tol)
}

/// Second order: `A-(t) <= A+(t)` for all `t`.
pub fn check_ssd(f: &Distribution, g: &Distribution) -> Verdict {
    check_ssd_with(f, g, &CheckOptions::default())
}

pub fn check_ssd_with(f: &Distribution, g: &Distribution, opts: &CheckOptions) -> Verdict {
    let areas = PairAreas::new(f, g);
    scan(&areas.neg.func, &areas.pos.func, Order::Ssd, opts.tol)
}

/// Fractional order with constant `gamma`: `A-(t) <= gamma A+(t)`.
pub fn check_fractional(f: &Distribution, g: &Distribution, gamma: f64) -> Result<Verdict> {
    check_fractional_with(f, g, gamma, &CheckOptions::default())
}

pub fn check_fractional_with(f: &Distribution, g: &Distribution, gamma: f64, opts: &CheckOptions) -> Result<Verdict> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let areas = PairAreas::new(f, g);
    if opts.equal_mean_shortcut && gamma < 1.0 && (f.mean() - g.mean()).abs() <= opts.tol && !crossings(f, g).is_empty() {
        // Equal means force A-(inf) = A+(inf), which no gamma < 1 can cover.
        let t = *areas.knots().last().expect("a crossing pair has knots");
        let (lhs, rhs) = (areas.a_neg(t), gamma * areas.a_pos(t));
        return Ok(Verdict {
            holds: false,
            witness_t: Some(t),
            margin: (gamma - 1.0) * areas.pos.total,
            order: Order::Frac,
            diagnostics: vec![Diagnostic { t, lhs, rhs }],
        });
    }
    Ok(scan(&areas.neg.func, &areas.pos.func.scale(gamma), Order::Frac, opts.tol))
}

/// Multi-fractional order: `A-(t) <= gamma(t) A+(t)`.
pub fn check_mfsd(f: &Distribution, g: &Distribution, gamma: &GammaFn) -> Verdict {
    check_mfsd_with(f, g, gamma, &CheckOptions::default())
}

pub fn check_mfsd_with(f: &Distribution, g: &Distribution, gamma: &GammaFn, opts: &CheckOptions) -> Verdict {
    let areas = PairAreas::new(f, g);
    let rhs = gamma.carrier().mul(&areas.pos.func);
    scan(&areas.neg.func, &rhs, Order::Mfsd, opts.tol)
}

/// Functional fractional order: `int_{-inf}^t (F-G)- / gamma <= A+(t)`.
pub fn check_ffsd(f: &Distribution, g: &Distribution, gamma: &GammaFn) -> Result<Verdict> {
    check_ffsd_with(f, g, gamma, &CheckOptions::default())
}

pub fn check_ffsd_with(f: &Distribution, g: &Distribution, gamma: &GammaFn, opts: &CheckOptions) -> Result<Verdict> {
    let areas = PairAreas::new(f, g);
    let (grid, lhs, _) = weighted_cumulative(&areas.parts.negative, gamma.carrier(), areas.knots())?;
    // Between grid points one side is constant and the other increases, so
    // the margin is monotone there.
    let mut diagnostics = Vec::with_capacity(grid.len() + 1);
    diagnostics.push(Diagnostic { t: grid.first().map_or(0.0, |k| k - 1.0), lhs: 0.0, rhs: 0.0 });
    for (&t, &l) in grid.iter().zip(&lhs) {
        diagnostics.push(Diagnostic { t, lhs: l, rhs: areas.a_pos(t) });
    }
    let margin = diagnostics.iter().map(|d| d.rhs - d.lhs).fold(f64::INFINITY, f64::min);
    let near: Vec<&Diagnostic> = diagnostics.iter().filter(|d| d.rhs - d.lhs <= margin + opts.tol).collect();
    let witness = near.iter().find(|d| d.lhs > opts.tol).or_else(|| near.first()).map(|d| d.t);
    Ok(Verdict { holds: margin >= -opts.tol, witness_t: witness, margin, order: Order::Ffsd, diagnostics })
}

/// Functional almost dominance: `int (F-G)- / epsilon <= int |F-G|`.
pub fn check_easd(f: &Distribution, g: &Distribution, epsilon: &EpsilonFn) -> Verdict {
    check_easd_with(f, g, epsilon, &CheckOptions::default())
}

pub fn check_easd_with(f: &Distribution, g: &Distribution, epsilon: &EpsilonFn, opts: &CheckOptions) -> Verdict {
    let areas = PairAreas::new(f, g);
    let (grid, _, lhs) = weighted_cumulative(&areas.parts.negative, epsilon.carrier(), &[])
        .expect("epsilon is bounded away from zero");
    let rhs = areas.pos.total + areas.neg.total;
    let margin = rhs - lhs;
    let t = grid.last().copied().unwrap_or(0.0);
    Verdict {
        holds: margin >= -opts.tol,
        witness_t: None,
        margin,
        order: Order::Easd,
        diagnostics: vec![Diagnostic { t, lhs, rhs }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::dirac;

    fn identical_means() -> (Distribution, Distribution) {
        let f = Distribution::from_pieces(&[(1.0, 0.5, 0.0), (3.0, 0.5, 0.0)]).unwrap();
        (f, dirac(2.0))
    }

    fn witness_pair() -> (Distribution, Distribution) {
        let f = Distribution::from_pieces(&[(-0.5, 0.5, 0.0), (0.5, 0.5, 0.0)]).unwrap();
        let g = Distribution::from_pieces(&[(0.0, 0.75, 0.0), (0.5, 0.25, 0.0)]).unwrap();
        (f, g)
    }

    #[test]
    fn fsd_on_diracs_and_failing_pair() {
        assert!(check_fsd(&dirac(1.0), &dirac(2.0)).holds);
        let (f, g) = identical_means();
        let v = check_fsd(&f, &g);
        assert!(!v.holds);
        let w = v.witness_t.unwrap();
        assert!((2.0..3.0).contains(&w));
        assert_eq!(v.margin, -0.5);
    }

    #[test]
    fn ssd_binds_at_the_last_atom() {
        let (f, g) = identical_means();
        let v = check_ssd(&f, &g);
        assert!(v.holds);
        assert_eq!(v.margin, 0.0);
        assert!(!check_ssd(&g, &f).holds);
    }

    #[test]
    fn fractional_fails_below_one() {
        let (f, g) = identical_means();
        for gamma in [0.0, 0.25, 0.5, 0.9, 0.99] {
            let v = check_fractional(&f, &g, gamma).unwrap();
            assert!(!v.holds);
            assert_eq!(v.witness_t, Some(3.0));
        }
        assert!(check_fractional(&f, &g, 1.0).unwrap().holds);
        assert!(matches!(check_fractional(&f, &g, 1.2), Err(Error::GammaOutOfRange(_))));
    }

    #[test]
    fn shortcut_matches_general_path() {
        let (f, g) = identical_means();
        let opts = CheckOptions { equal_mean_shortcut: true, ..CheckOptions::default() };
        let short = check_fractional_with(&f, &g, 0.9, &opts).unwrap();
        let full = check_fractional(&f, &g, 0.9).unwrap();
        assert_eq!(short.holds, full.holds);
        assert_eq!(short.witness_t, full.witness_t);
    }

    #[test]
    fn mfsd_with_interpolating_gamma_is_binding() {
        let (f, g) = identical_means();
        let gamma = crate::gamma::validate_gamma(
            PiecewiseFn::from_jumps(0.0, vec![2.0, 3.0], vec![0.0, 0.0], vec![1.0, 0.0]).unwrap(),
        )
        .unwrap();
        let v = check_mfsd(&f, &g, &gamma);
        assert!(v.holds);
        assert!(v.margin.abs() <= 1e-12);
        let w = v.witness_t.unwrap();
        assert!(w > 2.0 && w <= 3.0);
    }

    #[test]
    fn ffsd_constant_weights() {
        let (f, g) = witness_pair();
        let v = check_ffsd(&f, &g, &GammaFn::constant(0.5).unwrap()).unwrap();
        assert!(v.holds);
        assert!(v.margin.abs() < 1e-15);
        let v = check_ffsd(&f, &g, &GammaFn::constant(0.4).unwrap()).unwrap();
        assert!(!v.holds);
        assert!((v.margin + 0.0625).abs() < 1e-15);
        assert_eq!(v.witness_t, Some(0.5));
    }

    #[test]
    fn ffsd_rejects_vanishing_gamma_after_crossing() {
        let (f, g) = witness_pair();
        let zero = GammaFn::constant(0.0).unwrap();
        assert!(matches!(check_ffsd(&f, &g, &zero), Err(Error::DivisionByZeroGamma { .. })));
    }

    #[test]
    fn easd_constant_and_step_epsilon() {
        let (f, g) = witness_pair();
        assert!(check_easd(&f, &g, &EpsilonFn::constant(0.34).unwrap()).holds);
        assert!(!check_easd(&f, &g, &EpsilonFn::constant(0.3).unwrap()).holds);
        let e = EpsilonFn::step(0.3, vec![0.25], vec![0.45]).unwrap();
        let v = check_easd(&f, &g, &e);
        assert!(v.holds);
        let lhs = v.diagnostics[0].lhs;
        assert!((lhs - (0.0625 / 0.3 + 0.0625 / 0.45)).abs() < 1e-15);
    }
}
