//! Helpers shared by the integration tests: random instances and reference
//! computations that work on atoms directly instead of piecewise carriers.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdorder::{validate_gamma, DiscretePMF, Distribution, EpsilonFn, GammaFn, PiecewiseFn, Poly, UtilityPWL};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random atoms on a quarter-unit lattice in `[-3, 3]`.
pub fn random_pmf(rng: &mut ChaCha8Rng, max_atoms: usize) -> DiscretePMF {
    let n = rng.gen_range(1..=max_atoms);
    let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-12..=12) as f64 * 0.25).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let w: Vec<f64> = xs.iter().map(|_| rng.gen_range(1..=8) as f64).collect();
    let total: f64 = w.iter().sum();
    let mut atoms: Vec<(f64, f64)> = xs.iter().zip(&w).map(|(&x, &m)| (x, m / total)).collect();
    let head: f64 = atoms[..atoms.len() - 1].iter().map(|a| a.1).sum();
    atoms.last_mut().unwrap().1 = 1.0 - head;
    DiscretePMF::new(atoms).unwrap()
}

pub fn random_step(rng: &mut ChaCha8Rng, max_atoms: usize) -> Distribution {
    random_pmf(rng, max_atoms).to_distribution()
}

pub fn random_pair(rng: &mut ChaCha8Rng, max_atoms: usize) -> (Distribution, Distribution) {
    (random_step(rng, max_atoms), random_step(rng, max_atoms))
}

/// Random pair with `F <=_SSD G`, found by rejection against the reference areas.
pub fn random_ssd_pair(rng: &mut ChaCha8Rng, max_atoms: usize) -> (Distribution, Distribution) {
    loop {
        let (f, g) = random_pair(rng, max_atoms);
        let r = StepAreas::new(&f, &g);
        if r.grid.iter().all(|&t| r.a_neg(t) <= r.a_pos(t) + 1e-12) {
            return (f, g);
        }
    }
}

/// Non-decreasing step gamma with values in `[lo, hi]`.
pub fn random_step_gamma(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> GammaFn {
    let n = rng.gen_range(0..=3);
    let mut knots: Vec<f64> = (0..n).map(|_| rng.gen_range(-12..=12) as f64 * 0.25 + 0.125).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut vals: Vec<f64> = (0..=knots.len()).map(|_| rng.gen_range(lo..=hi)).collect();
    vals.sort_by(f64::total_cmp);
    GammaFn::step(vals[0], knots, vals[1..].to_vec()).unwrap()
}

/// Step epsilon with values in `[lo, hi]`, not necessarily monotone.
pub fn random_step_epsilon(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> EpsilonFn {
    let n = rng.gen_range(0..=3);
    let mut knots: Vec<f64> = (0..n).map(|_| rng.gen_range(-12..=12) as f64 * 0.25 + 0.125).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let vals: Vec<f64> = (0..=knots.len()).map(|_| rng.gen_range(lo..=hi)).collect();
    EpsilonFn::step(vals[0], knots, vals[1..].to_vec()).unwrap()
}

/// Random strictly increasing utility satisfying `gamma(y) u'(y) <= u'(x)`
/// for `x <= y`: each slope is drawn below the running minimum over the
/// largest gamma value on its segment.
pub fn random_dpm_utility(rng: &mut ChaCha8Rng, gamma: &GammaFn) -> UtilityPWL {
    let n = rng.gen_range(0..=6);
    let mut knots: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut slopes = Vec::with_capacity(knots.len() + 1);
    let mut running = rng.gen_range(0.5..2.0);
    slopes.push(running);
    for j in 0..knots.len() {
        let end = knots.get(j + 1).copied().unwrap_or(f64::INFINITY);
        let cap = running / gamma.sup_on(knots[j], end).max(1e-3);
        // Touch the bound now and then.
        let s = cap.min(5.0) * if rng.gen_bool(0.2) { 1.0 } else { rng.gen_range(0.05..1.0) };
        running = running.min(s);
        slopes.push(s);
    }
    UtilityPWL::new((0.0, 0.0), knots, slopes).unwrap()
}

/// `gamma` multiplied by `factor` from `from` on.
pub fn shrink_after(gamma: &GammaFn, from: f64, factor: f64) -> GammaFn {
    let c = gamma.carrier();
    let mut knots: Vec<f64> = c.knots().iter().copied().filter(|&k| k < from).collect();
    let mut pieces: Vec<Poly> = knots.iter().map(|&k| c.pieces()[c.segment_index(k).unwrap()].clone()).collect();
    let tail = c.refine(&[from]);
    for (k, &x) in tail.knots().iter().enumerate() {
        if x >= from {
            knots.push(x);
            pieces.push(tail.pieces()[k].scale(factor));
        }
    }
    validate_gamma(PiecewiseFn::new(c.left_value(), knots, pieces).unwrap()).unwrap()
}

/// Atom locations of a step CDF with cumulative mass after each.
fn cumulative(f: &Distribution) -> Vec<(f64, f64)> {
    let mut acc = 0.0;
    f.atoms()
        .expect("step distribution")
        .into_iter()
        .map(|(x, m)| {
            acc += m;
            (x, acc)
        })
        .collect()
}

fn cdf_at(c: &[(f64, f64)], x: f64) -> f64 {
    let k = c.partition_point(|a| a.0 <= x);
    if k == 0 {
        0.0
    } else if k == c.len() {
        1.0
    } else {
        c[k - 1].1
    }
}

/// Reference `A+`, `A-` for two step CDFs: `F - G` is constant between
/// consecutive atoms, so the areas are sums of rectangles.
pub struct StepAreas {
    pub grid: Vec<f64>,
    /// `F - G` on `[grid[i], grid[i+1])`.
    pub diff: Vec<f64>,
}

impl StepAreas {
    pub fn new(f: &Distribution, g: &Distribution) -> Self {
        let (cf, cg) = (cumulative(f), cumulative(g));
        let mut grid: Vec<f64> = cf.iter().chain(&cg).map(|a| a.0).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let diff = grid.iter().map(|&x| cdf_at(&cf, x) - cdf_at(&cg, x)).collect();
        StepAreas { grid, diff }
    }

    fn area(&self, t: f64, part: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.grid.len().saturating_sub(1) {
            let (a, b) = (self.grid[i], self.grid[i + 1]);
            if t <= a {
                break;
            }
            acc += part(self.diff[i]) * (b.min(t) - a);
        }
        acc
    }

    pub fn a_pos(&self, t: f64) -> f64 {
        self.area(t, |d| d.max(0.0))
    }

    pub fn a_neg(&self, t: f64) -> f64 {
        self.area(t, |d| (-d).max(0.0))
    }

    /// `int_{-inf}^t (F-G)- / w` for a step weight `w`, by splitting each
    /// rectangle at a fine set of probe points where `w` is read.
    pub fn weighted_neg(&self, t: f64, w: impl Fn(f64) -> f64, w_knots: &[f64]) -> f64 {
        let mut cuts: Vec<f64> = self.grid.iter().chain(w_knots).copied().collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut acc = 0.0;
        for win in cuts.windows(2) {
            let (a, b) = (win[0], win[1].min(t));
            if b <= a {
                continue;
            }
            let k = self.grid.partition_point(|&g| g <= a);
            if k == 0 || k > self.diff.len() {
                continue;
            }
            let d = (-self.diff[k - 1]).max(0.0);
            if d > 0.0 {
                acc += d * (b - a) / w(a);
            }
        }
        acc
    }

    /// All knots together with the extra points, sorted.
    pub fn probe_points(&self, extra: &[f64]) -> Vec<f64> {
        let mut pts: Vec<f64> = self.grid.iter().chain(extra).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Reference multi-fractional verdict for step CDFs and step gamma: on each
/// cell of the joint grid the margin is linear, so cell ends suffice.
pub fn reference_mfsd(f: &Distribution, g: &Distribution, gamma: &GammaFn, tol: f64) -> bool {
    let r = StepAreas::new(f, g);
    let pts = r.probe_points(gamma.knots());
    for w in pts.windows(2) {
        let gv = gamma.eval(w[0]);
        for t in [w[0], w[1]] {
            if r.a_neg(t) > gv * r.a_pos(t) + tol {
                return false;
            }
        }
    }
    let last = *pts.last().unwrap();
    r.a_neg(last) <= gamma.upper() * r.a_pos(last) + tol
}

/// Reference almost-dominance verdict for step CDFs and step epsilon.
pub fn reference_easd(f: &Distribution, g: &Distribution, eps: &EpsilonFn, tol: f64) -> bool {
    let r = StepAreas::new(f, g);
    let end = *r.grid.last().unwrap();
    let lhs = r.weighted_neg(end, |x| eps.eval(x), eps.knots());
    lhs <= r.a_pos(end) + r.a_neg(end) + tol
}

/// Reference functional verdict: the margin is monotone between joint knots.
pub fn reference_ffsd(f: &Distribution, g: &Distribution, gamma: &GammaFn, tol: f64) -> bool {
    let r = StepAreas::new(f, g);
    let pts = r.probe_points(gamma.knots());
    pts.iter().all(|&t| r.weighted_neg(t, |x| gamma.eval(x), gamma.knots()) <= r.a_pos(t) + tol)
}
