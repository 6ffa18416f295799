//! Initial spline fit and Crank-Nicolson time stepping.

use crate::banded::{BandedLu, BandedMatrix};
use crate::basis::{StencilWeights, TrigQuinticBasis};
use crate::discretize::{
    assemble, boundary_residual, build_ghost_map, interior_vector, nodal_species,
    state_from_solution, GhostMap, StateVector,
};
use crate::error::{Error, Result};
use crate::problem::{ProblemSetup, Side, Species};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Sorted, within `[0, t_end]`.
    pub snapshot_times: Vec<f64>,
    pub probe_points: Vec<f64>,
}

impl SolverConfig {
    pub fn new(
        dt: f64,
        t_end: f64,
        mut snapshot_times: Vec<f64>,
        probe_points: Vec<f64>,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        if !(t_end >= dt) || !t_end.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "t_end must be at least dt ({dt}), got {t_end}"
            )));
        }
        if let Some(t) = snapshot_times
            .iter()
            .find(|t| !(**t >= 0.0 && **t <= t_end))
        {
            return Err(Error::InvalidConfig(format!(
                "snapshot time {t} is outside [0, {t_end}]"
            )));
        }
        if probe_points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("probe points must be finite".into()));
        }
        snapshot_times.sort_by(f64::total_cmp);
        snapshot_times.dedup();
        Ok(Self {
            dt,
            t_end,
            snapshot_times,
            probe_points,
        })
    }

    /// `ceil(t_end / dt)`, ignoring round-off just above an integer.
    pub fn step_count(&self) -> usize {
        let r = self.t_end / self.dt;
        let k = r.round();
        if (r - k).abs() <= 1e-9 * k.max(1.0) {
            k as usize
        } else {
            r.ceil() as usize
        }
    }

    /// Time after step `k` (`0..=step_count`); the last one is exactly `t_end`.
    pub fn time_at(&self, k: usize) -> f64 {
        if k >= self.step_count() {
            self.t_end
        } else {
            k as f64 * self.dt
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub x: f64,
    /// `(t, u, v)` after every step, starting at `t = 0`.
    pub samples: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub knots: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub probes: Vec<ProbeSeries>,
    /// Nodal values at `t_end`.
    pub last: Snapshot,
    /// Nodal values one step before `t_end`.
    pub previous: Snapshot,
    pub steps: usize,
    pub final_state: StateVector,
    /// Largest boundary-condition residual seen after any step.
    pub max_boundary_residual: f64,
}

/// Interpolating spline state of the initial data.
///
/// Per species the unknowns `p_{-2}..p_{N+2}` satisfy the two boundary rows at
/// each end and the order-zero stencil equal to the samples at every knot.
/// A value condition at an end already fixes the end knot, so there the knot
/// row is replaced by interpolation at the neighbouring half-knot.
pub fn fit_initial(setup: &ProblemSetup, w: &StencilWeights) -> Result<StateVector> {
    let mesh = &setup.mesh;
    let n = mesh.intervals();
    let h = mesh.spacing();
    let (u0, v0) = setup.initial.sample(mesh)?;
    let basis = TrigQuinticBasis::new(mesh)?;
    // weights of p_{-2}..p_3 at x_0 + h/2; reversed they serve x_N - h/2
    let half: Vec<f64> = (-2..=3)
        .map(|i| basis.local_value((0.5 - i as f64) * h, 0))
        .collect::<Result<_>>()?;
    let mut state = StateVector::zeros(n);
    for (s, samples) in [(Species::U, &u0), (Species::V, &v0)] {
        let profile = match s {
            Species::U => &setup.initial.u,
            Species::V => &setup.initial.v,
        };
        let sample_at = |x: f64| {
            profile.eval(x).map_err(|source| Error::InitialCondition {
                species: s.name(),
                x,
                source,
            })
        };
        let size = n + 5;
        let mut a = BandedMatrix::zeros(size, 4, 4);
        let mut b = vec![0.0; size];
        let mut put = |row: usize, first: usize, weights: &[f64], target: f64| {
            for (k, &wk) in weights.iter().enumerate() {
                a.set(row, first + k, wk);
            }
            b[row] = target;
        };
        let left = setup.boundary.pair(s, Side::Left);
        let right = setup.boundary.pair(s, Side::Right);
        for (r, bc) in left.iter().enumerate() {
            put(r, 0, w.row(bc.order as usize), bc.target);
        }
        for m in 0..=n {
            put(m + 2, m, w.row(0), samples[m]);
        }
        if left.iter().any(|bc| bc.order == 0) {
            put(2, 0, &half, sample_at(mesh.x0() + h / 2.0)?);
        }
        if right.iter().any(|bc| bc.order == 0) {
            let rev: Vec<f64> = half.iter().rev().copied().collect();
            put(n + 2, n - 1, &rev, sample_at(mesh.x_end() - h / 2.0)?);
        }
        for (r, bc) in right.iter().enumerate() {
            put(n + 3 + r, n, w.row(bc.order as usize), bc.target);
        }
        let p = a.factor()?.solve(&b)?;
        state.species_mut(s).copy_from_slice(&p);
    }
    Ok(state)
}

/// One step of length `dt` from `state`.
pub fn step(
    state: &StateVector,
    setup: &ProblemSetup,
    w: &StencilWeights,
    dt: f64,
    gm: &GhostMap,
) -> Result<StateVector> {
    let sys = assemble(setup, state, w, dt, gm)?;
    let x = sys.a.factor()?.solve(&sys.rhs)?;
    state_from_solution(&x, gm)
}

type LuCache = Option<(u64, BandedLu)>;

/// One step, reusing the factorisation while the matrix cannot change.
fn advance(
    setup: &ProblemSetup,
    w: &StencilWeights,
    gm: &GhostMap,
    cache: &mut LuCache,
    state: &StateVector,
    dt: f64,
) -> Result<StateVector> {
    let sys = assemble(setup, state, w, dt, gm)?;
    let x = if setup.coefficients.is_linear() {
        let key = dt.to_bits();
        if cache.as_ref().map(|c| c.0) != Some(key) {
            *cache = Some((key, sys.a.factor()?));
        }
        cache.as_ref().expect("just filled").1.solve(&sys.rhs)?
    } else {
        sys.a.factor()?.solve(&sys.rhs)?
    };
    let next = state_from_solution(&x, gm)?;
    if next.delta().iter().chain(next.gamma()).all(|x| x.is_finite()) {
        Ok(next)
    } else {
        Err(Error::InvalidConfig("solution became non-finite".into()))
    }
}

/// A problem advanced one step at a time.
#[derive(Debug, Clone)]
pub struct Simulation {
    setup: ProblemSetup,
    basis: TrigQuinticBasis,
    w: StencilWeights,
    gm: GhostMap,
    cache: LuCache,
    state: StateVector,
    t: f64,
    steps: usize,
}

impl Simulation {
    /// Fits the initial data; the clock starts at zero.
    pub fn new(setup: ProblemSetup) -> Result<Self> {
        setup.validate()?;
        let basis = TrigQuinticBasis::new(&setup.mesh)?;
        let w = basis.stencil_weights();
        let gm = build_ghost_map(&setup.boundary, &w)?;
        let state = fit_initial(&setup, &w)?;
        Ok(Self {
            setup,
            basis,
            w,
            gm,
            cache: None,
            state,
            t: 0.0,
            steps: 0,
        })
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        let next = advance(&self.setup, &self.w, &self.gm, &mut self.cache, &self.state, dt)
            .map_err(|e| Error::Step {
                step: self.steps + 1,
                t: self.t + dt,
                source: Box::new(e),
            })?;
        self.state = next;
        self.t += dt;
        self.steps += 1;
        Ok(())
    }

    /// Steps of at most `dt` until `t`, landing on it exactly.
    pub fn advance_to(&mut self, t: f64, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !dt.is_finite() || !t.is_finite() {
            return Err(Error::InvalidConfig(format!("cannot advance to {t} with dt = {dt}")));
        }
        if t <= self.t {
            return Ok(());
        }
        let start = self.t;
        let r = (t - start) / dt;
        let k = r.round();
        let count = if (r - k).abs() <= 1e-9 * k.max(1.0) { k.max(1.0) } else { r.ceil() } as usize;
        for k in 1..=count {
            let target = if k == count { t } else { start + k as f64 * dt };
            self.step(target - self.t)?;
            self.t = target;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn setup(&self) -> &ProblemSetup {
        &self.setup
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// Nodal values at the current time.
    pub fn nodal(&self) -> Snapshot {
        snapshot(self.t, &self.state, &self.w)
    }

    pub fn evaluate(&self, x: f64) -> Result<(f64, f64)> {
        evaluate_at(&self.basis, &self.state, x)
    }

    pub fn boundary_residual(&self) -> f64 {
        boundary_residual(&self.setup.boundary, &self.w, &self.state)
    }
}

/// Spline values `(U(x), V(x))` of `state`.
pub fn evaluate_at(basis: &TrigQuinticBasis, state: &StateVector, x: f64) -> Result<(f64, f64)> {
    let mesh = basis.mesh();
    let n = mesh.intervals() as i64;
    let centre = ((x - mesh.x0()) / mesh.spacing()).floor() as i64;
    let (mut u, mut v) = (0.0, 0.0);
    for i in (centre - 3).max(-2)..=(centre + 3).min(n + 2) {
        let t = basis.value(i, x, 0)?;
        u += t * state.param(Species::U, i);
        v += t * state.param(Species::V, i);
    }
    Ok((u, v))
}

fn snapshot(t: f64, state: &StateVector, w: &StencilWeights) -> Snapshot {
    Snapshot {
        t,
        u: nodal_species(state.delta(), w, 0),
        v: nodal_species(state.gamma(), w, 0),
    }
}

/// Integrates from the fitted initial data to `config.t_end`.
pub fn run(setup: &ProblemSetup, config: &SolverConfig) -> Result<Trajectory> {
    let basis = TrigQuinticBasis::new(&setup.mesh)?;
    let w = basis.stencil_weights();
    let gm = build_ghost_map(&setup.boundary, &w)?;
    let mut state = fit_initial(setup, &w)?;
    let steps = config.step_count();

    // step index at which each requested snapshot is taken
    let wanted: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|&t| ((t / config.dt).round() as usize).min(steps))
        .collect();
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut probes: Vec<ProbeSeries> = config
        .probe_points
        .iter()
        .map(|&x| ProbeSeries {
            x,
            samples: Vec::with_capacity(steps + 1),
        })
        .collect();
    let mut record = |k: usize, t: f64, state: &StateVector, probes: &mut Vec<ProbeSeries>| -> Result<()> {
        for _ in wanted.iter().filter(|&&s| s == k) {
            snapshots.push(snapshot(t, state, &w));
        }
        for p in probes.iter_mut() {
            let (u, v) = evaluate_at(&basis, state, p.x)?;
            p.samples.push((t, u, v));
        }
        Ok(())
    };
    record(0, 0.0, &state, &mut probes)?;

    let mut cache = None;
    let mut previous = snapshot(0.0, &state, &w);
    let mut max_residual = 0.0f64;
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = config.time_at(k);
        let h = t_next - t;
        let next = advance(setup, &w, &gm, &mut cache, &state, h).map_err(|e| Error::Step {
                step: k,
                t: t_next,
                source: Box::new(e),
            })?;
        if k == steps {
            previous = snapshot(t, &state, &w);
        }
        state = next;
        t = t_next;
        max_residual = max_residual.max(boundary_residual(&setup.boundary, &w, &state));
        record(k, t, &state, &mut probes)?;
    }

    Ok(Trajectory {
        knots: setup.mesh.knots(),
        snapshots,
        probes,
        last: snapshot(t, &state, &w),
        previous,
        steps,
        final_state: state,
        max_boundary_residual: max_residual,
    })
}

/// Interior parameters of a state in the solver's interleaved order.
pub fn packed(state: &StateVector) -> Vec<f64> {
    interior_vector(state)
}
