//! Trigonometric quintic B-spline basis on a uniform mesh.
//!
//! On each of its six support intervals, `T_m(x)` is a homogeneous degree-5
//! polynomial in the half-angle sines `sin((x - x_j)/2)`, `j = m-3..=m+3`,
//! divided by
//!
//! ```text
//! Theta = sin(5h/2) sin(2h) sin(3h/2) sin(h) sin(h/2).
//! ```
//!
//! The pieces are generated once from the trigonometric B-spline recurrence
//! and kept in expanded form as sums of monomials
//! `prod_j sin^a_j(theta_j) cos^b_j(theta_j)`. Derivatives are obtained by
//! exact product-rule differentiation of those monomials
//! (`d/dx sin(theta_j) = cos(theta_j)/2`, `d/dx cos(theta_j) = -sin(theta_j)/2`),
//! so evaluation of any order up to four is a closed-form sum.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::mesh::UniformMesh;

/// Highest derivative order carried by the basis.
pub const MAX_ORDER: usize = 4;

/// Knot offsets `-3..=3` relative to the basis centre.
const OFFSETS: usize = 7;

/// Exponents `(sin, cos)` of each half-angle factor, indexed by offset + 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Monomial([(u8, u8); OFFSETS]);

impl Monomial {
    const ONE: Monomial = Monomial([(0, 0); OFFSETS]);

    fn times_sin(mut self, offset: i32) -> Self {
        self.0[(offset + 3) as usize].0 += 1;
        self
    }
}

type Poly = BTreeMap<Monomial, f64>;

#[derive(Debug, Clone)]
struct Term {
    coef: f64,
    mono: Monomial,
}

fn compact(poly: Poly) -> Vec<Term> {
    poly.into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|(mono, coef)| Term { coef, mono })
        .collect()
}

fn differentiate(terms: &[Term]) -> Vec<Term> {
    let mut out = Poly::new();
    for t in terms {
        for k in 0..OFFSETS {
            let (s, c) = t.mono.0[k];
            if s > 0 {
                let mut m = t.mono;
                m.0[k] = (s - 1, c + 1);
                *out.entry(m).or_insert(0.0) += 0.5 * s as f64 * t.coef;
            }
            if c > 0 {
                let mut m = t.mono;
                m.0[k] = (s + 1, c - 1);
                *out.entry(m).or_insert(0.0) -= 0.5 * c as f64 * t.coef;
            }
        }
    }
    compact(out)
}

/// Numerator of the order-`k` trigonometric B-spline starting at knot
/// offset `i`, restricted to the interval `[x_q, x_{q+1}]`.
///
/// With uniform knots both branches of the recurrence share the denominator
/// `sin((k-1)h/2)`, so numerators combine with integer coefficients and the
/// product of all denominators is `Theta`.
fn recurrence_numerator(i: i32, k: i32, q: i32) -> Poly {
    if k == 1 {
        let mut p = Poly::new();
        if i == q {
            p.insert(Monomial::ONE, 1.0);
        }
        return p;
    }
    let mut out = Poly::new();
    // sin((x - x_i)/2) * N_{i,k-1}
    for (m, c) in recurrence_numerator(i, k - 1, q) {
        *out.entry(m.times_sin(i)).or_insert(0.0) += c;
    }
    // sin((x_{i+k} - x)/2) * N_{i+1,k-1} = -sin((x - x_{i+k})/2) * N_{i+1,k-1}
    for (m, c) in recurrence_numerator(i + 1, k - 1, q) {
        *out.entry(m.times_sin(i + k)).or_insert(0.0) -= c;
    }
    out
}

/// `Theta = sin(5h/2) sin(2h) sin(3h/2) sin(h) sin(h/2)`.
pub fn theta(h: f64) -> f64 {
    (1..=5).map(|j| (j as f64 * h / 2.0).sin()).product()
}

/// The centred basis function and its first four derivatives in closed form.
///
/// Evaluation is translation invariant, so one instance serves every
/// `T_m` of a mesh.
#[derive(Debug, Clone)]
pub struct TrigQuinticBasis {
    mesh: UniformMesh,
    theta: f64,
    /// `pieces[order][q + 3]` holds the numerator on `[x_q, x_{q+1}]`.
    pieces: Vec<[Vec<Term>; 6]>,
}

impl TrigQuinticBasis {
    pub fn new(mesh: &UniformMesh) -> Result<Self> {
        let h = mesh.spacing();
        let theta = theta(h);
        let factors_positive = (1..=5).all(|j| (j as f64 * h / 2.0).sin() > 0.0);
        if !factors_positive || !theta.is_finite() {
            return Err(Error::ThetaDegenerate { h });
        }
        let base: [Vec<Term>; 6] =
            std::array::from_fn(|q| compact(recurrence_numerator(-3, 6, q as i32 - 3)));
        let mut pieces = Vec::with_capacity(MAX_ORDER + 1);
        pieces.push(base);
        for order in 1..=MAX_ORDER {
            let prev = &pieces[order - 1];
            let next: [Vec<Term>; 6] = std::array::from_fn(|q| differentiate(&prev[q]));
            pieces.push(next);
        }
        Ok(Self {
            mesh: *mesh,
            theta,
            pieces,
        })
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Order-`order` derivative of `T_m` at `x`.
    pub fn value(&self, m: i64, x: f64, order: usize) -> Result<f64> {
        let max = self.mesh.intervals() as i64 + 2;
        if !(-2..=max).contains(&m) {
            return Err(Error::BasisIndex { m, max });
        }
        self.local_value(x - self.mesh.knot(m), order)
    }

    /// Order-`order` derivative of the basis centred at the origin, at
    /// local coordinate `s = x - x_m`.
    pub fn local_value(&self, s: f64, order: usize) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(Error::InvalidOrder(order));
        }
        let h = self.mesh.spacing();
        if !(s > -3.0 * h && s < 3.0 * h) {
            return Ok(0.0);
        }
        let q = ((s / h).floor() as i32).clamp(-3, 2);
        Ok(self.eval_piece(order, q, s))
    }

    /// Evaluates piece `q` at `s` regardless of which interval `s` lies in;
    /// used for one-sided limits at knots.
    fn eval_piece(&self, order: usize, q: i32, s: f64) -> f64 {
        let h = self.mesh.spacing();
        // powers[k][p] = (sin^p, cos^p) of theta_k = (s - (k-3) h)/2
        let mut sin_pow = [[1.0f64; 6]; OFFSETS];
        let mut cos_pow = [[1.0f64; 6]; OFFSETS];
        for k in 0..OFFSETS {
            let angle = (s - (k as f64 - 3.0) * h) / 2.0;
            let (sv, cv) = angle.sin_cos();
            for p in 1..6 {
                sin_pow[k][p] = sin_pow[k][p - 1] * sv;
                cos_pow[k][p] = cos_pow[k][p - 1] * cv;
            }
        }
        let sum: f64 = self.pieces[order][(q + 3) as usize]
            .iter()
            .map(|t| {
                let mut v = t.coef;
                for (k, &(a, b)) in t.mono.0.iter().enumerate() {
                    if a > 0 {
                        v *= sin_pow[k][a as usize];
                    }
                    if b > 0 {
                        v *= cos_pow[k][b as usize];
                    }
                }
                v
            })
            .sum();
        sum / self.theta
    }

    /// Left and right limits of the order-`order` derivative at local knot
    /// `j` (interior support knots are `j = -2..=2`).
    pub fn one_sided_limits(&self, j: i32, order: usize) -> Result<(f64, f64)> {
        if order > MAX_ORDER {
            return Err(Error::InvalidOrder(order));
        }
        if !(-2..=2).contains(&j) {
            return Err(Error::BasisIndex { m: j as i64, max: 2 });
        }
        let s = j as f64 * self.mesh.spacing();
        Ok((self.eval_piece(order, j - 1, s), self.eval_piece(order, j, s)))
    }

    /// Largest magnitude of the order-`order` derivative over the support,
    /// sampled at knots and interval midpoints.
    pub fn max_magnitude(&self, order: usize) -> f64 {
        let h = self.mesh.spacing();
        let mut best = 0.0f64;
        for q in -3..=2 {
            for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let s = (q as f64 + frac) * h;
                best = best.max(self.eval_piece(order, q, s).abs());
            }
        }
        best
    }

    /// Nodal stencil weights read off the basis at the knots.
    pub fn stencil_weights(&self) -> StencilWeights {
        let h = self.mesh.spacing();
        // raw[k][j + 2] = T^(k)_{m+j}(x_m) = T^(k)_0(-j h)
        let mut raw = [[0.0; 5]; MAX_ORDER + 1];
        for (k, row) in raw.iter_mut().enumerate() {
            for (idx, w) in row.iter_mut().enumerate() {
                let j = idx as f64 - 2.0;
                *w = self.local_value(-j * h, k).expect("order in range");
            }
        }
        let even = |r: &[f64; 5]| [(r[0] + r[4]) / 2.0, (r[1] + r[3]) / 2.0, r[2]];
        let odd = |r: &[f64; 5]| [(r[4] - r[0]) / 2.0, (r[3] - r[1]) / 2.0];
        let [a1, a2, a3] = even(&raw[0]);
        let [a4, a5] = odd(&raw[1]);
        let [a6, a7, a8] = even(&raw[2]);
        let [c9, c10] = odd(&raw[3]);
        let [a11, a12, a13] = even(&raw[4]);
        StencilWeights::from_alpha(
            h,
            self.theta,
            [a1, a2, a3, a4, a5, a6, a7, a8, c9, -c10, a11, a12, a13],
        )
    }
}

/// The thirteen nodal weights `alpha_1..alpha_13`.
///
/// Nodal values at knot `m` in terms of the parameters `p_{m-2}..p_{m+2}`:
///
/// ```text
/// order 0: ( a1,   a2,  a3,   a2,  a1)
/// order 1: (-a4,  -a5,   0,   a5,  a4)
/// order 2: ( a6,   a7,  a8,   a7,  a6)
/// order 3: (-a9,  a10,   0, -a10,  a9)
/// order 4: (a11,  a12, a13,  a12, a11)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilWeights {
    h: f64,
    theta: f64,
    alpha: [f64; 13],
    rows: [[f64; 5]; MAX_ORDER + 1],
}

impl StencilWeights {
    pub fn from_alpha(h: f64, theta: f64, alpha: [f64; 13]) -> Self {
        let a = |i: usize| alpha[i - 1];
        let rows = [
            [a(1), a(2), a(3), a(2), a(1)],
            [-a(4), -a(5), 0.0, a(5), a(4)],
            [a(6), a(7), a(8), a(7), a(6)],
            [-a(9), a(10), 0.0, -a(10), a(9)],
            [a(11), a(12), a(13), a(12), a(11)],
        ];
        Self {
            h,
            theta,
            alpha,
            rows,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `alpha(1)..=alpha(13)`, one-based like the usual tabulation.
    pub fn alpha(&self, i: usize) -> f64 {
        self.alpha[i - 1]
    }

    pub fn alphas(&self) -> &[f64; 13] {
        &self.alpha
    }

    /// Weights of `p_{m-2}..p_{m+2}` for the order-`order` nodal value.
    pub fn row(&self, order: usize) -> &[f64; 5] {
        &self.rows[order]
    }

    pub fn apply(&self, order: usize, params: &[f64]) -> f64 {
        self.rows[order]
            .iter()
            .zip(params)
            .map(|(w, p)| w * p)
            .sum()
    }
}

/// Stencil weights for spacing `h` on any uniform mesh.
pub fn stencil_weights(h: f64) -> Result<StencilWeights> {
    if !(h > 0.0) || h >= crate::mesh::MAX_SPACING {
        return Err(Error::ThetaDegenerate { h });
    }
    // Only the spacing matters; a unit-origin mesh with 8 intervals carries it.
    let mesh = UniformMesh::new(0.0, 8.0 * h, 8)?;
    Ok(TrigQuinticBasis::new(&mesh)?.stencil_weights())
}
