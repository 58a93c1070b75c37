//! Ready-made instances: pairs of distributions, gamma functions and
//! utilities with known verdicts.

use crate::distributions::{dirac, Distribution};
use crate::error::{Error, Result};
use crate::gamma::{validate_gamma, GammaFn};
use crate::piecewise::PiecewiseFn;
use crate::poly::Poly;
use crate::utility::UtilityPWL;

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ParameterViolation(what.to_string()))
    }
}

/// Two atoms of mass 1/2 at `mu - eps` and `mu + eps` against a point mass
/// at `mu`, with the gamma that rises linearly from 0 to 1 on `[mu, mu + eps]`.
pub fn example_identical_means(mu: f64, eps: f64) -> Result<(Distribution, Distribution, GammaFn)> {
    require(mu.is_finite() && eps > 0.0 && mu > eps, "need mu > eps > 0")?;
    let f = Distribution::from_pieces(&[(mu - eps, 0.5, 0.0), (mu + eps, 0.5, 0.0)])?;
    let g = dirac(mu);
    let carrier = PiecewiseFn::new(0.0, vec![mu, mu + eps], vec![Poly::linear(0.0, 1.0 / eps), Poly::constant(1.0)])?;
    Ok((f, g, validate_gamma(carrier)?))
}

/// Step gamma: 0 before `t1`, `gamma_mid` on `[t1, t2)`, 1 from `t2` on.
pub fn example_local_interpolation(t1: f64, t2: f64, gamma_mid: f64) -> Result<GammaFn> {
    require(t1 < t2, "need t1 < t2")?;
    require(gamma_mid > 0.0 && gamma_mid < 1.0, "need gamma_mid in (0, 1)")?;
    GammaFn::step(0.0, vec![t1, t2], vec![gamma_mid, 1.0])
}

/// Pair whose area ratio equals a chosen rational `m/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquaresInstance {
    pub f: Distribution,
    pub g: Distribution,
    pub m: u64,
    pub n: u64,
    /// Side of the square the construction lives in.
    pub side: f64,
    /// Width of one cell, `side / (m n)`.
    pub cell: f64,
    /// Left end of the construction.
    pub t_star: f64,
}

/// Simplest fraction `p/q` strictly between `lo` and `hi`, with `0 <= lo < hi <= 1`.
pub fn simplest_rational(lo: f64, hi: f64) -> Result<(u64, u64)> {
    if !(lo >= 0.0 && lo < hi && hi <= 1.0) {
        return Err(Error::NoValidRational { lo, hi });
    }
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, 1u64);
    for _ in 0..1_000_000 {
        let (p, q) = (a + c, b + d);
        let v = p as f64 / q as f64;
        if v <= lo {
            a = p;
            b = q;
        } else if v >= hi {
            c = p;
            d = q;
        } else {
            return Ok((p, q));
        }
    }
    Err(Error::NoValidRational { lo, hi })
}

/// Builds the two-cell pair for the ratio `m/n` inside a square of side `side`
/// starting at `t_star`.
fn squares(m: u64, n: u64, side: f64, t_star: f64) -> Result<SquaresInstance> {
    let (mut m, mut n) = (m, n);
    let mut k = 1;
    // Scale until the taller column fits below 1.
    while ((m + n) * k) as f64 * side / ((m * k * n * k) as f64) >= 1.0 {
        k += 1;
        if k > 1_000_000 {
            return Err(Error::NoValidRational { lo: m as f64 / n as f64, hi: m as f64 / n as f64 });
        }
    }
    m *= k;
    n *= k;
    let cell = side / (m * n) as f64;
    let f = Distribution::from_pieces(&[(t_star, n as f64 * cell, 0.0), (t_star + 2.0 * cell, 1.0 - n as f64 * cell, 0.0)])?;
    let g = Distribution::from_pieces(&[
        (t_star + cell, (m + n) as f64 * cell, 0.0),
        (t_star + 2.0 * cell, 1.0 - (m + n) as f64 * cell, 0.0),
    ])?;
    Ok(SquaresInstance { f, g, m, n, side, cell, t_star })
}

/// Pair that is multi-fractionally ordered under `g` but not fractionally
/// ordered under the constant `gamma_target < g(t0)`.
///
/// When `g` is flat on a left neighbourhood of `t0` the construction ends
/// inside it; otherwise it starts at `t0`, where `g` can only be larger.
pub fn example_squares(gamma_target: f64, g: &GammaFn, t0: f64) -> Result<SquaresInstance> {
    let g0 = g.eval(t0);
    require((0.0..1.0).contains(&gamma_target) && g0 > gamma_target, "need 0 <= gamma_target < g(t0)")?;
    let carrier = g.carrier().simplify();
    let (side, t_star) = match carrier.segment_index(t0) {
        None => (0.75, t0 - 0.75),
        Some(k) if carrier.pieces()[k].is_constant() && t0 > carrier.knots()[k] => {
            let side = 0.75 * (t0 - carrier.knots()[k]).min(1.0);
            (side, t0 - side)
        }
        Some(k) => {
            let room = carrier.segment_end(k) - t0;
            (0.75 * room.min(1.0), t0)
        }
    };
    let (m, n) = simplest_rational(gamma_target, 0.5 * (gamma_target + g0))?;
    squares(m, n, side, t_star)
}

/// Reverse construction: fractionally ordered under `gamma_target` but not
/// multi-fractionally ordered under `g`, which is below `gamma_target` at `t0`.
pub fn example_squares_reverse(gamma_target: f64, g: &GammaFn, t0: f64) -> Result<SquaresInstance> {
    let g0 = g.eval(t0);
    require(gamma_target > g0 && gamma_target <= 1.0, "need g(t0) < gamma_target <= 1")?;
    let (m, n) = simplest_rational(g0, gamma_target)?;
    let side = 0.75;
    let probe = squares(m, n, side, 0.0)?;
    squares(m, n, side, t0 - 2.0 * probe.cell)
}

/// Single-crossing pair with `A+ = c` and `A- = g(t) c`.
pub fn example_strict_inclusion(t: f64, g: &GammaFn, c: f64) -> Result<(Distribution, Distribution)> {
    require(c > 0.0 && c < 1.0, "need c in (0, 1)")?;
    let r = c.sqrt();
    let gt = g.eval(t);
    require(r + r * gt < 1.0, "need sqrt(c) (1 + g(t)) < 1")?;
    let f = Distribution::from_pieces(&[(t - r, r, 0.0), (t + r, 1.0 - r, 0.0)])?;
    let top = r + r * gt;
    let g = Distribution::from_pieces(&[(t, top, 0.0), (t + r, 1.0 - top, 0.0)])?;
    Ok((f, g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaVariant {
    Mf,
    Ff,
}

fn theta_tilde(theta: f64) -> f64 {
    1.0 - (1.0 - theta).exp()
}

/// Pieces of the multi-fractional theta utility: a linear part `v` and a base
/// part `w` that is flat from `theta` on, with `u = v + w`.
pub fn theta_mf_components(theta: f64) -> Result<(UtilityPWL, UtilityPWL)> {
    require(theta > 1.0 && theta.is_finite(), "need theta > 1")?;
    let gt = theta_tilde(theta);
    let v = UtilityPWL::new((0.0, 0.0), Vec::new(), vec![gt])?;
    let w = UtilityPWL::new((0.0, 0.0), vec![gt, theta], vec![gt, 1.0, 0.0])?;
    Ok((v, w))
}

/// Theta family of utilities with a matching gamma.
///
/// `Mf` (`theta > 1`): slopes `2g, 1 + g, g` with `g = 1 - e^(1 - theta)`, and
/// gamma interpolating `1 - e^(1 - x)` from 1 on. `Ff` (`0 < theta < 1`):
/// a staircase for the marginal utility `x` on `[theta, sqrt(theta))`, with
/// gamma `clamp(x, 0, 1)`.
pub fn example_theta_family(theta: f64, variant: ThetaVariant, grid: usize) -> Result<(UtilityPWL, GammaFn)> {
    require(grid >= 2, "need grid >= 2")?;
    match variant {
        ThetaVariant::Mf => {
            require(theta > 1.0 && theta.is_finite(), "need theta > 1")?;
            let gt = theta_tilde(theta);
            let u = UtilityPWL::new((0.0, 0.0), vec![gt, theta], vec![2.0 * gt, 1.0 + gt, gt])?;
            let mut xs: Vec<f64> = (0..grid).map(|i| 1.0 + (theta - 1.0) * i as f64 / grid as f64).collect();
            xs.push(theta);
            xs.extend((1..=grid).map(|i| theta + 10.0 * i as f64 / grid as f64));
            let ys: Vec<f64> = xs.iter().map(|&x| theta_tilde(x)).collect();
            Ok((u, validate_gamma(PiecewiseFn::interpolate(&xs, &ys)?)?))
        }
        ThetaVariant::Ff => {
            require(theta > 0.0 && theta < 1.0, "need theta in (0, 1)")?;
            let root = theta.sqrt();
            let mut nodes: Vec<f64> = (0..grid).map(|k| theta + k as f64 * (root - theta) / grid as f64).collect();
            nodes.push(root);
            let mut knots = vec![0.0];
            let mut slopes = vec![1.0, root];
            knots.extend(&nodes);
            slopes.push(theta);
            slopes.extend(&nodes[2..]);
            slopes.push(theta);
            let u = UtilityPWL::new((0.0, 0.0), knots, slopes)?;
            let gamma = validate_gamma(PiecewiseFn::new(0.0, vec![0.0, 1.0], vec![Poly::linear(0.0, 1.0), Poly::constant(1.0)])?)?;
            Ok((u, gamma))
        }
    }
}

/// Utility and step gamma whose greediness profile touches `1/gamma` on
/// `(-inf, -2)` and on `[0, 1)`.
pub fn example_two_touch() -> (UtilityPWL, GammaFn) {
    let u = UtilityPWL::new((0.0, 0.0), vec![-2.0, -1.0, 1.0], vec![1.0, 2.0, 0.8, 1.0]).expect("fixed slopes are valid");
    let gamma = GammaFn::step(0.5, vec![0.0], vec![0.8]).expect("fixed steps are valid");
    (u, gamma)
}
