//! Cumulative distribution functions with finite piecewise-linear representation.

use crate::error::{Error, Result};
use crate::piecewise::PiecewiseFn;
use crate::poly::Poly;
use crate::DEFAULT_TOL;

/// A right-continuous, non-decreasing CDF that is 0 before its first knot and
/// exactly 1 from its last knot on.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    carrier: PiecewiseFn,
    mean: f64,
    left_support: f64,
}

impl Distribution {
    /// Validates `carrier` as a CDF.
    pub fn new(carrier: PiecewiseFn) -> Result<Self> {
        Distribution::new_with(carrier, DEFAULT_TOL)
    }

    /// As [`Distribution::new`], with tolerance `tol` on jumps, slopes and
    /// the final value.
    pub fn new_with(carrier: PiecewiseFn, tol: f64) -> Result<Self> {
        validate_cdf(&carrier, tol)?;
        let mean = mean_of(&carrier);
        let left_support = left_support_of(&carrier);
        Ok(Distribution { carrier, mean, left_support })
    }

    /// From `(x, jump, slope_after)` pieces, the wire layout.
    pub fn from_pieces(pieces: &[(f64, f64, f64)]) -> Result<Self> {
        Distribution::from_pieces_with(pieces, DEFAULT_TOL)
    }

    pub fn from_pieces_with(pieces: &[(f64, f64, f64)], tol: f64) -> Result<Self> {
        let knots = pieces.iter().map(|p| p.0).collect();
        let jumps = pieces.iter().map(|p| p.1).collect();
        let slopes = pieces.iter().map(|p| p.2).collect();
        Distribution::new_with(PiecewiseFn::from_jumps(0.0, knots, jumps, slopes)?, tol)
    }

    pub fn carrier(&self) -> &PiecewiseFn {
        &self.carrier
    }

    pub fn breakpoints(&self) -> &[f64] {
        self.carrier.knots()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.carrier.eval(x)
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        self.carrier.left_limit(x)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// First point where the CDF becomes positive.
    pub fn left_support(&self) -> f64 {
        self.left_support
    }

    /// True when every piece is flat (a discrete distribution).
    pub fn is_step(&self) -> bool {
        self.carrier.is_step()
    }

    /// Atoms `(location, mass)` of a step CDF.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        if !self.is_step() {
            return None;
        }
        Some(
            self.carrier
                .knots()
                .iter()
                .zip(self.carrier.jumps())
                .filter(|(_, j)| **j > 0.0)
                .map(|(x, j)| (*x, *j))
                .collect(),
        )
    }
}

fn validate_cdf(f: &PiecewiseFn, tol: f64) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidDistribution(msg));
    if f.max_degree() > 1 {
        return bad("pieces must be linear".into());
    }
    if f.left_value() != 0.0 {
        return bad("CDF must vanish left of the first breakpoint".into());
    }
    if f.knots().is_empty() {
        return bad("CDF needs at least one breakpoint".into());
    }
    for (k, p) in f.pieces().iter().enumerate() {
        let x = f.knots()[k];
        if f.jumps()[k] < -tol {
            return bad(format!("negative jump at x = {x}"));
        }
        if p.coef(1) < -tol {
            return bad(format!("negative slope after x = {x}"));
        }
        let start = p.coef(0);
        let w = f.segment_width(k);
        let end = if w.is_finite() { p.eval(w) } else { start };
        for v in [start, end] {
            if v < -tol || v > 1.0 + tol {
                return bad(format!("value {v} outside [0, 1] near x = {x}"));
            }
        }
    }
    let last = f.pieces().last().unwrap();
    if last.coef(1) != 0.0 {
        return bad("CDF must be flat after its last breakpoint".into());
    }
    if (last.coef(0) - 1.0).abs() > tol {
        return bad(format!("final value {} differs from 1", last.coef(0)));
    }
    Ok(())
}

/// `int x dF` over jumps and linear pieces.
fn mean_of(f: &PiecewiseFn) -> f64 {
    let mut m = 0.0;
    for (k, p) in f.pieces().iter().enumerate() {
        let a = f.knots()[k];
        m += f.jumps()[k] * a;
        let slope = p.coef(1);
        if slope != 0.0 {
            let h = f.segment_width(k);
            m += slope * h * (a + 0.5 * h);
        }
    }
    m
}

fn left_support_of(f: &PiecewiseFn) -> f64 {
    for (k, p) in f.pieces().iter().enumerate() {
        if p.coef(0) > 0.0 || p.coef(1) > 0.0 {
            return f.knots()[k];
        }
    }
    f.knots()[0]
}

/// Empirical CDF with mass `1/n` per sample; ties merge.
pub fn from_samples(xs: &[f64]) -> Result<Distribution> {
    if xs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut knots = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for x in sorted {
        if knots.last() == Some(&x) {
            *counts.last_mut().unwrap() += 1;
        } else {
            knots.push(x);
            counts.push(1);
        }
    }
    let mut cum = 0usize;
    let mut pieces = Vec::with_capacity(knots.len());
    for c in &counts {
        cum += c;
        pieces.push(Poly::constant(cum as f64 / n));
    }
    Distribution::new(PiecewiseFn::new(0.0, knots, pieces)?)
}

/// Unit mass at `a`.
pub fn dirac(a: f64) -> Distribution {
    Distribution {
        carrier: PiecewiseFn::step(0.0, vec![a], vec![1.0]).expect("finite location"),
        mean: a,
        left_support: a,
    }
}

/// The CDF `x -> F(x - c)`.
pub fn shift(f: &Distribution, c: f64) -> Distribution {
    Distribution {
        carrier: f.carrier.shifted(c),
        mean: f.mean + c,
        left_support: f.left_support + c,
    }
}

/// Pointwise convex combination of CDFs.
pub fn mixture(components: &[Distribution], weights: &[f64]) -> Result<Distribution> {
    if components.is_empty() {
        return Err(Error::EmptyInput);
    }
    if components.len() != weights.len() {
        return Err(Error::WeightMismatch(format!(
            "{} components but {} weights",
            components.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::WeightMismatch("weights must be non-negative".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::WeightMismatch(format!("weights sum to {sum}")));
    }
    if components.len() == 1 {
        return Ok(components[0].clone());
    }
    let mut acc = PiecewiseFn::constant(0.0);
    for (c, &w) in components.iter().zip(weights) {
        acc = acc.add(&c.carrier.scale(w));
    }
    Distribution::new(acc)
}

/// Finite discrete probability mass function.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePMF {
    atoms: Vec<(f64, f64)>,
}

impl DiscretePMF {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyInput);
        }
        if atoms.iter().any(|(x, m)| !x.is_finite() || !m.is_finite()) {
            return Err(Error::NonFinite);
        }
        if atoms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidDistribution("atom locations must be strictly increasing".into()));
        }
        if atoms.iter().any(|(_, m)| *m <= 0.0) {
            return Err(Error::InvalidDistribution("atom masses must be positive".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(DiscretePMF { atoms })
    }

    pub fn dirac(a: f64) -> Self {
        DiscretePMF { atoms: vec![(a, 1.0)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(x, m)| x * m).sum()
    }

    /// Step CDF with the final value pinned to exactly 1.
    pub fn to_distribution(&self) -> Distribution {
        let knots: Vec<f64> = self.atoms.iter().map(|a| a.0).collect();
        let mut cum = 0.0;
        let mut pieces: Vec<Poly> = self
            .atoms
            .iter()
            .map(|a| {
                cum += a.1;
                Poly::constant(cum)
            })
            .collect();
        *pieces.last_mut().unwrap() = Poly::constant(1.0);
        let carrier = PiecewiseFn::new(0.0, knots, pieces).expect("strictly increasing atoms");
        Distribution::new(carrier).expect("pmf masses are validated")
    }

    /// Applies a map to every atom location, merging collisions.
    pub fn map(&self, phi: impl Fn(f64) -> f64) -> Result<Self> {
        merge_atoms(self.atoms.iter().map(|(x, m)| (phi(*x), *m)).collect())
    }
}

fn merge_atoms(mut raw: Vec<(f64, f64)>) -> Result<DiscretePMF> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (x, m) in raw {
        match atoms.last_mut() {
            Some(last) if last.0 == x => last.1 += m,
            _ => atoms.push((x, m)),
        }
    }
    DiscretePMF::new(atoms)
}

/// Distribution of the sum of independent variables.
pub fn convolve(f: &DiscretePMF, z: &DiscretePMF) -> DiscretePMF {
    let raw = f
        .atoms
        .iter()
        .flat_map(|(x, p)| z.atoms.iter().map(move |(y, q)| (x + y, p * q)))
        .collect();
    merge_atoms(raw).expect("product masses stay positive and sum to 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_cdf_merges_ties() {
        let f = from_samples(&[2.0, 2.0, 4.0, 8.0]).unwrap();
        assert_eq!(f.breakpoints(), &[2.0, 4.0, 8.0]);
        assert_eq!(f.carrier().jumps(), &[0.5, 0.25, 0.25]);
        assert_eq!(f.eval(8.0), 1.0);
        assert_eq!(from_samples(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn single_sample_is_dirac() {
        assert_eq!(from_samples(&[5.0]).unwrap(), dirac(5.0));
    }

    #[test]
    fn means_and_supports() {
        let f = from_samples(&[1.0, 3.0]).unwrap();
        assert_eq!(f.mean(), 2.0);
        assert_eq!(f.left_support(), 1.0);
        let u = Distribution::from_pieces(&[(0.0, 0.0, 0.5), (2.0, 0.0, 0.0)]).unwrap();
        assert!((u.mean() - 1.0).abs() < 1e-15);
        assert_eq!(u.left_support(), 0.0);
    }

    #[test]
    fn shifting_a_dirac() {
        assert_eq!(shift(&dirac(2.0), 1.0), dirac(3.0));
        let f = from_samples(&[1.0, 3.0]).unwrap();
        assert_eq!(shift(&f, 0.0), f);
    }

    #[test]
    fn mixture_of_diracs() {
        let m = mixture(&[dirac(0.0), dirac(2.0)], &[0.5, 0.5]).unwrap();
        assert_eq!(m.eval(0.0), 0.5);
        assert_eq!(m.eval(2.0), 1.0);
        assert!(matches!(mixture(&[dirac(0.0)], &[0.5, 0.5]), Err(Error::WeightMismatch(_))));
    }

    #[test]
    fn binomial_convolution() {
        let coin = DiscretePMF::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let two = convolve(&coin, &coin);
        assert_eq!(two.atoms(), &[(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)]);
        assert_eq!(convolve(&coin, &DiscretePMF::dirac(0.0)), coin);
        assert_eq!(convolve(&DiscretePMF::dirac(1.0), &DiscretePMF::dirac(2.0)), DiscretePMF::dirac(3.0));
    }

    #[test]
    fn invalid_cdfs_are_rejected() {
        assert!(Distribution::from_pieces(&[(0.0, 0.5, 0.0)]).is_err());
        assert!(Distribution::from_pieces(&[(0.0, 1.0, 0.0), (1.0, -0.5, 0.0)]).is_err());
        assert!(Distribution::from_pieces(&[(0.0, 1.0, 0.1)]).is_err());
    }
}
