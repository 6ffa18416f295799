//! Collocation of the Crank-Nicolson, Taylor-linearised system at the knots.
//!
//! Unknowns are interleaved `delta_0, gamma_0, delta_1, gamma_1, ...` so the
//! assembled matrix has five sub- and five super-diagonals. The four ghost
//! parameters of each species are eliminated through the boundary plan.

use crate::banded::BandedMatrix;
use crate::basis::{StencilWeights, MAX_ORDER};
use crate::error::{Error, Result};
use crate::problem::{BoundaryPlan, ProblemSetup, RdCoefficients, Side, Species};

/// Sub- and super-diagonal count of the assembled system.
pub const BANDWIDTH: usize = 5;

/// Spline parameters of both species over the extended index range `-2..=N+2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    delta: Vec<f64>,
    gamma: Vec<f64>,
}

impl StateVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            delta: vec![0.0; n + 5],
            gamma: vec![0.0; n + 5],
        }
    }

    /// Builds a state from the stored arrays, position `k` holding index `k - 2`.
    pub fn from_parts(delta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if delta.len() < 5 {
            return Err(Error::DimensionMismatch {
                expected: 5,
                found: delta.len(),
            });
        }
        if gamma.len() != delta.len() {
            return Err(Error::DimensionMismatch {
                expected: delta.len(),
                found: gamma.len(),
            });
        }
        Ok(Self {
            n: delta.len() - 5,
            delta,
            gamma,
        })
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn species(&self, s: Species) -> &[f64] {
        match s {
            Species::U => &self.delta,
            Species::V => &self.gamma,
        }
    }

    pub fn species_mut(&mut self, s: Species) -> &mut [f64] {
        match s {
            Species::U => &mut self.delta,
            Species::V => &mut self.gamma,
        }
    }

    /// Parameter with extended index `i` in `-2..=N+2`.
    ///
    /// # Panics
    /// If `i` is out of range.
    pub fn param(&self, s: Species, i: i64) -> f64 {
        self.species(s)[(i + 2) as usize]
    }

    pub fn set_param(&mut self, s: Species, i: i64, value: f64) {
        self.species_mut(s)[(i + 2) as usize] = value;
    }
}

/// Nodal values and derivatives of both species at the knots `0..=N`.
///
/// `u[k][m]` is the `k`-th derivative of `U` at knot `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub u: [Vec<f64>; MAX_ORDER + 1],
    pub v: [Vec<f64>; MAX_ORDER + 1],
}

impl NodalField {
    pub fn get(&self, s: Species, order: usize) -> &[f64] {
        match s {
            Species::U => &self.u[order],
            Species::V => &self.v[order],
        }
    }
}

/// Order-`order` nodal values of one species from its extended parameters.
pub fn nodal_species(params: &[f64], w: &StencilWeights, order: usize) -> Vec<f64> {
    params.windows(5).map(|p| w.apply(order, p)).collect()
}

pub fn nodal_values(state: &StateVector, w: &StencilWeights) -> NodalField {
    NodalField {
        u: std::array::from_fn(|k| nodal_species(&state.delta, w, k)),
        v: std::array::from_fn(|k| nodal_species(&state.gamma, w, k)),
    }
}

/// `beta_1..beta_8` of one collocation node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedReaction {
    pub beta: [f64; 8],
}

impl LinearizedReaction {
    /// One-based access.
    pub fn beta(&self, i: usize) -> f64 {
        self.beta[i - 1]
    }
}

/// Linearisation about the nodal values `(u, v)` of the current level.
///
/// `beta_1`, `beta_2` multiply `U`, `V` at the new level in the `U` equation
/// and `beta_3`, `beta_4` the old level; `beta_5..beta_8` likewise for `V`.
pub fn compute_beta(c: &RdCoefficients, u: f64, v: f64, dt: f64) -> LinearizedReaction {
    let r = 1.0 / dt;
    let (uv, uu, vv) = (u * v, u * u, v * v);
    LinearizedReaction {
        beta: [
            r - c.b1 / 2.0 - c.d1 * uv - c.e1 * v / 2.0 - c.m1 * vv / 2.0,
            -c.c1 / 2.0 - c.d1 * uu / 2.0 - c.e1 * u / 2.0 - c.m1 * uv,
            r + c.b1 / 2.0 - c.m1 * vv / 2.0,
            c.c1 / 2.0 - c.d1 * uu / 2.0,
            -c.b2 / 2.0 - c.d2 * uv - c.e2 * v / 2.0 - c.m2 * vv / 2.0,
            r - c.c2 / 2.0 - c.d2 * uu / 2.0 - c.e2 * u / 2.0 - c.m2 * uv,
            c.b2 / 2.0 - c.m2 * vv / 2.0,
            r + c.c2 / 2.0 - c.d2 * uu / 2.0,
        ],
    }
}

/// `nu_1..nu_40` of one collocation node.
///
/// Four blocks of ten: new-level `U` row, old-level `U` row, new-level `V`
/// row, old-level `V` row. Inside a block entry `2j` multiplies
/// `delta_{m-2+j}` and `2j + 1` multiplies `gamma_{m-2+j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowStencil {
    pub nu: [f64; 40],
}

impl RowStencil {
    /// One-based access.
    pub fn nu(&self, i: usize) -> f64 {
        self.nu[i - 1]
    }

    pub fn lhs_u(&self) -> &[f64] {
        &self.nu[0..10]
    }

    pub fn rhs_u(&self) -> &[f64] {
        &self.nu[10..20]
    }

    pub fn lhs_v(&self) -> &[f64] {
        &self.nu[20..30]
    }

    pub fn rhs_v(&self) -> &[f64] {
        &self.nu[30..40]
    }
}

pub fn compute_nu(b: &LinearizedReaction, w: &StencilWeights, a1: f64, a2: f64) -> RowStencil {
    let val = w.row(0);
    let sec = w.row(2);
    let be = b.beta;
    let mut nu = [0.0; 40];
    for j in 0..5 {
        let (p, s) = (val[j], sec[j]);
        nu[2 * j] = be[0] * p - a1 / 2.0 * s;
        nu[2 * j + 1] = be[1] * p;
        nu[10 + 2 * j] = be[2] * p + a1 / 2.0 * s;
        nu[10 + 2 * j + 1] = be[3] * p;
        nu[20 + 2 * j] = be[4] * p;
        nu[20 + 2 * j + 1] = be[5] * p - a2 / 2.0 * s;
        nu[30 + 2 * j] = be[6] * p;
        nu[30 + 2 * j + 1] = be[7] * p + a2 / 2.0 * s;
    }
    RowStencil { nu }
}

/// Two ghost parameters as affine functions of the three nearest interior ones.
///
/// `coef[g]` maps interior parameters `(p_0, p_1, p_2)` at the left end, or
/// `(p_{N-2}, p_{N-1}, p_N)` at the right, to ghost `g` via
/// `coef[g][0..3] . p + coef[g][3]`. Ghost order is `(p_{-2}, p_{-1})` on the
/// left and `(p_{N+1}, p_{N+2})` on the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostAffine {
    pub coef: [[f64; 4]; 2],
}

impl GhostAffine {
    pub fn eval(&self, interior: [f64; 3]) -> [f64; 2] {
        self.coef.map(|c| c[0] * interior[0] + c[1] * interior[1] + c[2] * interior[2] + c[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostMap {
    // [species][side]
    maps: [[GhostAffine; 2]; 2],
}

fn species_index(s: Species) -> usize {
    match s {
        Species::U => 0,
        Species::V => 1,
    }
}

fn side_index(s: Side) -> usize {
    match s {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl GhostMap {
    pub fn affine(&self, species: Species, side: Side) -> &GhostAffine {
        &self.maps[species_index(species)][side_index(side)]
    }

    /// Overwrites the ghost parameters of `state` from its interior ones.
    pub fn apply(&self, state: &mut StateVector) {
        let n = state.n;
        for s in [Species::U, Species::V] {
            let p = state.species_mut(s);
            let left = self.affine(s, Side::Left).eval([p[2], p[3], p[4]]);
            p[0] = left[0];
            p[1] = left[1];
            let right = self.affine(s, Side::Right).eval([p[n], p[n + 1], p[n + 2]]);
            p[n + 3] = right[0];
            p[n + 4] = right[1];
        }
    }
}

pub fn build_ghost_map(plan: &BoundaryPlan, w: &StencilWeights) -> Result<GhostMap> {
    let mut maps = [[GhostAffine { coef: [[0.0; 4]; 2] }; 2]; 2];
    for s in [Species::U, Species::V] {
        for side in [Side::Left, Side::Right] {
            let pair = plan.pair(s, side);
            // ghost and interior stencil positions within the five-point row
            let (gpos, ipos): ([usize; 2], [usize; 3]) = match side {
                Side::Left => ([0, 1], [2, 3, 4]),
                Side::Right => ([3, 4], [0, 1, 2]),
            };
            let rows = pair.map(|bc| w.row(bc.order as usize));
            let m = [
                [rows[0][gpos[0]], rows[0][gpos[1]]],
                [rows[1][gpos[0]], rows[1][gpos[1]]],
            ];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let scale = m[0][0].hypot(m[0][1]) * m[1][0].hypot(m[1][1]);
            if !(det.abs() >= 1e-12 * scale) || scale == 0.0 {
                return Err(Error::DegenerateBoundaryPair {
                    species: s.name(),
                    side: side.name(),
                    orders: pair.map(|bc| bc.order),
                });
            }
            let inv = [
                [m[1][1] / det, -m[0][1] / det],
                [-m[1][0] / det, m[0][0] / det],
            ];
            // right-hand side of condition r: target - sum_i row[ipos[i]] p_i
            let rhs: [[f64; 4]; 2] = std::array::from_fn(|r| {
                [
                    -rows[r][ipos[0]],
                    -rows[r][ipos[1]],
                    -rows[r][ipos[2]],
                    pair[r].target,
                ]
            });
            let coef: [[f64; 4]; 2] =
                std::array::from_fn(|g| std::array::from_fn(|k| inv[g][0] * rhs[0][k] + inv[g][1] * rhs[1][k]));
            maps[species_index(s)][side_index(side)] = GhostAffine { coef };
        }
    }
    Ok(GhostMap { maps })
}

/// Largest boundary-condition defect over the plan for `state`.
///
/// Each defect `|stencil . p - target|` is divided by the magnitude of the
/// terms being summed, `sum |w_j p_j| + |target|`, when that exceeds one; high
/// order stencils on fine meshes carry weights of order `h^-3` and their
/// rounding error grows with them.
pub fn boundary_residual(plan: &BoundaryPlan, w: &StencilWeights, state: &StateVector) -> f64 {
    let n = state.n;
    plan.conditions()
        .iter()
        .map(|bc| {
            let p = state.species(bc.species);
            let window = match bc.side {
                Side::Left => &p[0..5],
                Side::Right => &p[n..n + 5],
            };
            let row = w.row(bc.order as usize);
            let size: f64 = row.iter().zip(window).map(|(a, b)| (a * b).abs()).sum::<f64>()
                + bc.target.abs();
            (w.apply(bc.order as usize, window) - bc.target).abs() / size.max(1.0)
        })
        .fold(0.0, f64::max)
}

/// The system `A x = rhs` for the interior parameters at the new level.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: BandedMatrix,
    pub rhs: Vec<f64>,
}

/// Column of interior parameter `i` (`0..=N`) of species `s`.
#[inline]
pub fn column(i: usize, s: Species) -> usize {
    2 * i + species_index(s)
}

/// Relative size below which an eliminated row counts as structurally empty.
const NULL_ROW: f64 = 1e-10;

struct Eliminator<'a> {
    n: usize,
    gm: &'a GhostMap,
}

impl Eliminator<'_> {
    /// Adds `coef * p_idx` of species `s` to a row whose columns start at
    /// `base`, substituting ghosts; returns the constant moved out of the row.
    fn add(&self, row: &mut [f64; 10], base: i64, idx: i64, s: Species, coef: f64) -> f64 {
        let n = self.n as i64;
        let mut put = |i: i64, c: f64| row[(2 * i + species_index(s) as i64 - base) as usize] += c;
        if (0..=n).contains(&idx) {
            put(idx, coef);
            return 0.0;
        }
        let (map, g, first) = if idx < 0 {
            (self.gm.affine(s, Side::Left), (idx + 2) as usize, 0)
        } else {
            (self.gm.affine(s, Side::Right), (idx - n - 1) as usize, n - 2)
        };
        let cg = map.coef[g];
        for k in 0..3 {
            put(first + k as i64, coef * cg[k]);
        }
        coef * cg[3]
    }
}

/// Builds `A x = rhs` for the interior parameters at the new level.
///
/// When both the value and the second derivative of a species are fixed at
/// an end, its collocation row there vanishes after elimination; it is then
/// replaced by keeping the fourth derivative at that knot equal to its
/// current value.
pub fn assemble(
    setup: &ProblemSetup,
    state: &StateVector,
    w: &StencilWeights,
    dt: f64,
    gm: &GhostMap,
) -> Result<SystemMatrices> {
    let n = state.n;
    if n != setup.mesh.intervals() {
        return Err(Error::DimensionMismatch {
            expected: setup.mesh.intervals() + 5,
            found: state.delta.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
    }
    let c = &setup.coefficients;
    let u = nodal_species(&state.delta, w, 0);
    let v = nodal_species(&state.gamma, w, 0);
    let size = 2 * n + 2;
    let mut a = BandedMatrix::zeros(size, BANDWIDTH, BANDWIDTH);
    let mut rhs = vec![0.0; size];
    let elim = Eliminator { n, gm };
    for m in 0..=n {
        let beta = compute_beta(c, u[m], v[m], dt);
        let nu = compute_nu(&beta, w, c.a1, c.a2);
        let base = 2 * m as i64 - 4;
        for (s, row, lhs, old, feed) in [
            (Species::U, 2 * m, nu.lhs_u(), nu.rhs_u(), c.n1),
            (Species::V, 2 * m + 1, nu.lhs_v(), nu.rhs_v(), c.n2),
        ] {
            let mut acc = feed;
            for j in 0..5 {
                acc += old[2 * j] * state.delta[m + j] + old[2 * j + 1] * state.gamma[m + j];
            }
            let mut entries = [0.0; 10];
            let mut scale = 0.0f64;
            for j in 0..5 {
                let idx = m as i64 - 2 + j as i64;
                for (sp, coef) in [(Species::U, lhs[2 * j]), (Species::V, lhs[2 * j + 1])] {
                    scale = scale.max(coef.abs());
                    if coef != 0.0 {
                        acc -= elim.add(&mut entries, base, idx, sp, coef);
                    }
                }
            }
            let size = entries.iter().fold(0.0f64, |x, e| x.max(e.abs()));
            if (m == 0 || m == n) && size <= NULL_ROW * scale {
                entries = [0.0; 10];
                let params = state.species(s);
                acc = w.apply(4, &params[m..m + 5]);
                for (j, &coef) in w.row(4).iter().enumerate() {
                    acc -= elim.add(&mut entries, base, m as i64 - 2 + j as i64, s, coef);
                }
            }
            for (k, &e) in entries.iter().enumerate() {
                if e != 0.0 {
                    a.add(row, (base + k as i64) as usize, e);
                }
            }
            rhs[row] = acc;
        }
    }
    Ok(SystemMatrices { a, rhs })
}

/// Scatters an interleaved interior solution into a state and rebuilds the ghosts.
pub fn state_from_solution(x: &[f64], gm: &GhostMap) -> Result<StateVector> {
    if x.len() < 2 || x.len() % 2 != 0 {
        return Err(Error::DimensionMismatch {
            expected: x.len() + x.len() % 2,
            found: x.len(),
        });
    }
    let n = x.len() / 2 - 1;
    let mut state = StateVector::zeros(n);
    for i in 0..=n {
        state.delta[i + 2] = x[column(i, Species::U)];
        state.gamma[i + 2] = x[column(i, Species::V)];
    }
    gm.apply(&mut state);
    Ok(state)
}

/// Interleaved interior parameters of `state`.
pub fn interior_vector(state: &StateVector) -> Vec<f64> {
    let n = state.n;
    let mut x = vec![0.0; 2 * n + 2];
    for i in 0..=n {
        x[column(i, Species::U)] = state.delta[i + 2];
        x[column(i, Species::V)] = state.gamma[i + 2];
    }
    x
}
