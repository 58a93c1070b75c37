//! Dense real polynomials of small degree.
//!
//! Pieces of a [`PiecewiseFn`](crate::PiecewiseFn) are stored as polynomials in
//! the local coordinate `s = x - knot`, so every operation here works on a
//! single segment.

/// Polynomial with coefficients in ascending order, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    coef: Vec<f64>,
}

impl Poly {
    pub fn new(coef: Vec<f64>) -> Self {
        let mut p = Poly { coef };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coef: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn linear(c0: f64, c1: f64) -> Self {
        Poly::new(vec![c0, c1])
    }

    fn trim(&mut self) {
        while self.coef.last() == Some(&0.0) {
            self.coef.pop();
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// Coefficient of `s^i` (zero beyond the stored degree).
    pub fn coef(&self, i: usize) -> f64 {
        self.coef.get(i).copied().unwrap_or(0.0)
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coef.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coef.len() <= 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coef.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coef
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at `s = 0`.
    pub fn integral(&self) -> Poly {
        let mut coef = Vec::with_capacity(self.coef.len() + 1);
        coef.push(0.0);
        coef.extend(self.coef.iter().enumerate().map(|(i, &c)| c / (i + 1) as f64));
        Poly::new(coef)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coef.len().max(other.coef.len());
        Poly::new((0..n).map(|i| self.coef(i) + other.coef(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coef.len().max(other.coef.len());
        Poly::new((0..n).map(|i| self.coef(i) - other.coef(i)).collect())
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.coef.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coef = vec![0.0; self.coef.len() + other.coef.len() - 1];
        for (i, a) in self.coef.iter().enumerate() {
            for (j, b) in other.coef.iter().enumerate() {
                coef[i + j] += a * b;
            }
        }
        Poly::new(coef)
    }

    /// Re-centre: returns `q` with `q(s) = p(s + d)`.
    pub fn shift(&self, d: f64) -> Poly {
        if d == 0.0 || self.coef.len() <= 1 {
            return self.clone();
        }
        // Horner composition with (s + d).
        let mut q: Vec<f64> = Vec::with_capacity(self.coef.len());
        for &c in self.coef.iter().rev() {
            let mut next = vec![0.0; q.len() + 1];
            for (i, &qi) in q.iter().enumerate() {
                next[i + 1] += qi;
                next[i] += qi * d;
            }
            next[0] += c;
            q = next;
        }
        Poly::new(q)
    }

    /// Real roots in the closed interval `[lo, hi]`, ascending.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !(lo <= hi) {
            return Vec::new();
        }
        let mut roots = match self.degree() {
            None | Some(0) => Vec::new(),
            Some(1) => vec![-self.coef[0] / self.coef[1]],
            Some(2) => quadratic_roots(self.coef[2], self.coef[1], self.coef[0]),
            Some(_) => self.bracketed_roots(lo, hi),
        };
        roots.retain(|r| r.is_finite() && *r >= lo && *r <= hi);
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        roots
    }

    /// Roots via monotone sub-intervals between critical points.
    fn bracketed_roots(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut marks = vec![lo];
        marks.extend(self.derivative().roots_in(lo, hi));
        marks.push(hi);
        let mut roots = Vec::new();
        for w in marks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                roots.push(a);
            }
            if fb == 0.0 {
                roots.push(b);
            }
            if fa * fb < 0.0 {
                roots.push(bisect(|s| self.eval(s), a, b, fa));
            }
        }
        roots
    }

    /// Minimum over `[lo, hi]` (both finite): `(argmin, value)`.
    pub fn min_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (lo, self.eval(lo));
        let mut consider = |s: f64| {
            let v = self.eval(s);
            if v < best.1 {
                best = (s, v);
            }
        };
        consider(hi);
        for s in self.critical_points_in(lo, hi) {
            consider(s);
        }
        best
    }

    /// Stationary points in `(lo, hi)`; also includes the vertex of a
    /// quadratic derivative so near-double roots are never missed.
    pub fn critical_points_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let d = self.derivative();
        let mut pts = d.roots_in(lo, hi);
        if d.degree() == Some(2) {
            let v = -d.coef[1] / (2.0 * d.coef[2]);
            if v > lo && v < hi {
                pts.push(v);
            }
        }
        pts.retain(|s| *s > lo && *s < hi);
        pts
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
