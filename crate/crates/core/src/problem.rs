//! Reaction-diffusion problem definitions and the built-in model presets.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, ExprError, Expression};
use crate::mesh::UniformMesh;
use crate::stepper::SolverConfig;

/// Named real parameters, e.g. model constants or solver overrides.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Linear,
    Brusselator,
    Schnakenberg,
    GrayScott,
}

impl Model {
    pub const ALL: [Model; 4] = [
        Model::Linear,
        Model::Brusselator,
        Model::Schnakenberg,
        Model::GrayScott,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Linear => "linear",
            Model::Brusselator => "brusselator",
            Model::Schnakenberg => "schnakenberg",
            Model::GrayScott => "gray-scott",
        }
    }

    /// Constants of the coefficient table row, in table order.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Model::Linear => &["a", "b", "d"],
            Model::Brusselator => &["eps1", "eps2", "A", "B"],
            Model::Schnakenberg => &["gamma", "a", "b", "d"],
            Model::GrayScott => &["eps1", "eps2", "f", "k"],
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Model::Linear),
            "brusselator" => Ok(Model::Brusselator),
            "schnakenberg" => Ok(Model::Schnakenberg),
            "gray-scott" | "grayscott" | "gray_scott" => Ok(Model::GrayScott),
            _ => Err(Error::UnknownModel(s.to_string())),
        }
    }
}

/// Coefficients of the general two-species system. `a*` diffuse, `b*`/`c*`
/// are linear in `U`/`V`, `d*` multiply `U^2 V`, `e*` `U V`, `m*` `U V^2`,
/// and `n*` are constant sources.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RdCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub e1: f64,
    pub e2: f64,
    pub m1: f64,
    pub m2: f64,
    pub n1: f64,
    pub n2: f64,
}

impl RdCoefficients {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.a1, self.a2, self.b1, self.b2, self.c1, self.c2, self.d1, self.d2, self.e1,
            self.e2, self.m1, self.m2, self.n1, self.n2,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficient("coefficients must be finite".into()));
        }
        if self.a1 < 0.0 || self.a2 < 0.0 {
            return Err(Error::InvalidCoefficient(format!(
                "diffusion coefficients must be non-negative (a1 = {}, a2 = {})",
                self.a1, self.a2
            )));
        }
        Ok(())
    }

    /// True when no `U^2 V`, `U V` or `U V^2` term is present.
    pub fn is_linear(&self) -> bool {
        [self.d1, self.d2, self.e1, self.e2, self.m1, self.m2]
            .iter()
            .all(|&c| c == 0.0)
    }

    /// Non-diffusive right-hand sides `(F(u, v), G(u, v))`.
    pub fn reaction(&self, u: f64, v: f64) -> (f64, f64) {
        let f = self.b1 * u
            + self.c1 * v
            + self.d1 * u * u * v
            + self.e1 * u * v
            + self.m1 * u * v * v
            + self.n1;
        let g = self.b2 * u
            + self.c2 * v
            + self.d2 * u * u * v
            + self.e2 * u * v
            + self.m2 * u * v * v
            + self.n2;
        (f, g)
    }
}

/// Free-function form of [`RdCoefficients::reaction`].
pub fn reaction_eval(c: &RdCoefficients, u: f64, v: f64) -> (f64, f64) {
    c.reaction(u, v)
}

/// Coefficient table row of `model` with its named constants substituted.
pub fn coefficients_from_table(model: Model, params: &Params) -> Result<RdCoefficients> {
    let names = model.parameter_names();
    if let Some(extra) = params.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(Error::UnknownParameter {
            model: model.name().into(),
            name: extra.clone(),
        });
    }
    let get = |name: &str| {
        params.get(name).copied().ok_or_else(|| Error::MissingParameter {
            model: model.name().into(),
            name: name.into(),
        })
    };
    let c = match model {
        Model::Linear => {
            let (a, b, d) = (get("a")?, get("b")?, get("d")?);
            RdCoefficients {
                a1: d,
                a2: d,
                b1: -a,
                c1: 1.0,
                c2: -b,
                ..Default::default()
            }
        }
        Model::Brusselator => {
            let (e1, e2, a, b) = (get("eps1")?, get("eps2")?, get("A")?, get("B")?);
            RdCoefficients {
                a1: e1,
                a2: e2,
                b1: -(b + 1.0),
                b2: b,
                d1: 1.0,
                d2: -1.0,
                n1: a,
                ..Default::default()
            }
        }
        Model::Schnakenberg => {
            let (gamma, a, b, d) = (get("gamma")?, get("a")?, get("b")?, get("d")?);
            RdCoefficients {
                a1: 1.0,
                a2: d,
                b1: -gamma,
                d1: gamma,
                d2: -gamma,
                n1: gamma * a,
                n2: gamma * b,
                ..Default::default()
            }
        }
        Model::GrayScott => {
            let (e1, e2, f, k) = (get("eps1")?, get("eps2")?, get("f")?, get("k")?);
            RdCoefficients {
                a1: e1,
                a2: e2,
                b1: -f,
                c2: -(f + k),
                m1: -1.0,
                m2: 1.0,
                n1: f,
                ..Default::default()
            }
        }
    };
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    U,
    V,
}

impl Species {
    pub fn name(self) -> &'static str {
        match self {
            Species::U => "U",
            Species::V => "V",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// `d^order species / dx^order = target` at one end of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub species: Species,
    pub side: Side,
    pub order: u8,
    pub target: f64,
}

impl BoundaryCondition {
    pub fn new(species: Species, side: Side, order: u8, target: f64) -> Self {
        Self {
            species,
            side,
            order,
            target,
        }
    }
}

/// Two conditions of distinct order for each species at each end.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPlan {
    conditions: Vec<BoundaryCondition>,
}

impl BoundaryPlan {
    pub fn new(conditions: Vec<BoundaryCondition>) -> Result<Self> {
        if conditions.len() != 8 {
            return Err(Error::InvalidBoundaryPlan(format!(
                "expected 8 conditions, got {}",
                conditions.len()
            )));
        }
        for bc in &conditions {
            if bc.order > 3 {
                return Err(Error::InvalidBoundaryPlan(format!(
                    "derivative order {} is outside 0..=3",
                    bc.order
                )));
            }
            if !bc.target.is_finite() {
                return Err(Error::InvalidBoundaryPlan("targets must be finite".into()));
            }
        }
        let plan = Self { conditions };
        for species in [Species::U, Species::V] {
            for side in [Side::Left, Side::Right] {
                let at: Vec<_> = plan
                    .conditions
                    .iter()
                    .filter(|c| c.species == species && c.side == side)
                    .collect();
                if at.len() != 2 {
                    return Err(Error::InvalidBoundaryPlan(format!(
                        "{} at the {} end has {} conditions, expected 2",
                        species.name(),
                        side.name(),
                        at.len()
                    )));
                }
                if at[0].order == at[1].order {
                    return Err(Error::InvalidBoundaryPlan(format!(
                        "{} at the {} end repeats derivative order {}",
                        species.name(),
                        side.name(),
                        at[0].order
                    )));
                }
            }
        }
        Ok(plan)
    }

    /// Same pair of `(order, target)` conditions at both ends, per species.
    pub fn symmetric(u: [(u8, f64); 2], v: [(u8, f64); 2]) -> Result<Self> {
        let mut c = Vec::with_capacity(8);
        for side in [Side::Left, Side::Right] {
            for (species, pair) in [(Species::U, u), (Species::V, v)] {
                for (order, target) in pair {
                    c.push(BoundaryCondition::new(species, side, order, target));
                }
            }
        }
        Self::new(c)
    }

    pub fn conditions(&self) -> &[BoundaryCondition] {
        &self.conditions
    }

    /// The two conditions for `species` at `side`, in declaration order.
    pub fn pair(&self, species: Species, side: Side) -> [BoundaryCondition; 2] {
        let mut it = self
            .conditions
            .iter()
            .filter(|c| c.species == species && c.side == side)
            .copied();
        let first = it.next().expect("validated plan");
        let second = it.next().expect("validated plan");
        [first, second]
    }
}

/// A scalar profile `x -> value` used as initial data.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    Expr(Expression),
    Closure(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Profile {
    pub fn closure(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Closure(Arc::new(f))
    }

    pub fn parse(source: &str) -> std::result::Result<Self, ExprError> {
        Ok(Profile::Expr(expr::parse(source)?))
    }

    pub fn eval(&self, x: f64) -> std::result::Result<f64, ExprError> {
        match self {
            Profile::Constant(c) => Ok(*c),
            Profile::Expr(e) => e.evaluate(x),
            Profile::Closure(f) => {
                let v = f(x);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ExprError::Domain(format!("non-finite value at x = {x}")))
                }
            }
        }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Expr(e) => write!(f, "Expr({e})"),
            Profile::Closure(_) => f.write_str("Closure(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InitialCondition {
    pub u: Profile,
    pub v: Profile,
}

impl InitialCondition {
    pub fn new(u: Profile, v: Profile) -> Self {
        Self { u, v }
    }

    /// Samples both profiles at every knot of `mesh`.
    pub fn sample(&self, mesh: &UniformMesh) -> Result<(Vec<f64>, Vec<f64>)> {
        let knots = mesh.knots();
        let sample = |p: &Profile, species: &'static str| {
            knots
                .iter()
                .map(|&x| {
                    p.eval(x)
                        .map_err(|source| Error::InitialCondition { species, x, source })
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok((sample(&self.u, "U")?, sample(&self.v, "V")?))
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub coefficients: RdCoefficients,
    pub mesh: UniformMesh,
    pub boundary: BoundaryPlan,
    pub initial: InitialCondition,
    pub label: String,
}

impl ProblemSetup {
    pub fn validate(&self) -> Result<()> {
        self.coefficients.validate()?;
        self.initial.sample(&self.mesh)?;
        Ok(())
    }
}

/// A complete problem with the solver settings it is usually run with.
#[derive(Debug, Clone)]
pub struct Preset {
    pub model: Model,
    pub params: Params,
    pub setup: ProblemSetup,
    pub solver: SolverConfig,
}

/// Exact solution of the linear test system
/// `U_t = d U_xx - a U + V`, `V_t = d V_xx - b V`.
pub fn analytic_linear(x: f64, t: f64, a: f64, b: f64, d: f64) -> (f64, f64) {
    let ea = (-(a + d) * t).exp();
    let eb = (-(b + d) * t).exp();
    let c = x.cos();
    ((ea + eb) * c, (a - b) * eb * c)
}

fn default_params(model: Model) -> Params {
    let pairs: &[(&str, f64)] = match model {
        Model::Linear => &[("a", 0.1), ("b", 0.01), ("d", 1.0)],
        Model::Brusselator => &[("eps1", 1e-4), ("eps2", 1e-4), ("A", 1.0), ("B", 3.4)],
        Model::Schnakenberg => &[
            ("gamma", 1e4),
            ("a", 0.126779),
            ("b", 0.792366),
            ("d", 10.0),
        ],
        // feed 9 multiplies (1 - U), decay 0.4 multiplies V: f + k = 0.4
        Model::GrayScott => &[("eps1", 1.0), ("eps2", 0.01), ("f", 9.0), ("k", 0.4 - 9.0)],
    };
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

struct Layout {
    x0: f64,
    x_end: f64,
    n: usize,
    dt: f64,
    t_end: f64,
    snapshots: Vec<f64>,
    probes: Vec<f64>,
}

fn default_layout(model: Model) -> Layout {
    match model {
        Model::Linear => Layout {
            x0: 0.0,
            x_end: PI / 2.0,
            n: 512,
            dt: 0.01,
            t_end: 1.0,
            snapshots: vec![1.0],
            probes: vec![0.0],
        },
        Model::Brusselator => Layout {
            x0: 0.0,
            x_end: 1.0,
            n: 200,
            dt: 0.01,
            t_end: 15.0,
            snapshots: vec![3.0, 6.0, 10.8, 13.8],
            probes: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
        },
        Model::Schnakenberg => Layout {
            x0: -1.0,
            x_end: 1.0,
            n: 100,
            dt: 5e-5,
            t_end: 2.5,
            snapshots: vec![2.5],
            probes: vec![0.0],
        },
        Model::GrayScott => Layout {
            x0: -50.0,
            x_end: 50.0,
            n: 400,
            dt: 0.2,
            t_end: 1000.0,
            snapshots: vec![100.0, 500.0, 1000.0],
            probes: vec![0.0],
        },
    }
}

fn initial_condition(model: Model, p: &Params, x0: f64, x_end: f64) -> InitialCondition {
    match model {
        Model::Linear => {
            let (a, b) = (p["a"], p["b"]);
            InitialCondition::new(
                Profile::closure(|x| 2.0 * x.cos()),
                Profile::closure(move |x| (a - b) * x.cos()),
            )
        }
        Model::Brusselator => InitialCondition::new(
            Profile::Constant(0.5),
            Profile::closure(|x| 1.0 + 5.0 * x),
        ),
        Model::Schnakenberg => {
            let fourier = |x: f64| -> f64 {
                (1..=25)
                    .map(|j| (2.0 * PI * j as f64 * x).cos() / j as f64)
                    .sum()
            };
            InitialCondition::new(
                Profile::closure(move |x| 0.919145 + 0.001 * fourier(x)),
                Profile::closure(move |x| 0.937903 + 0.001 * fourier(x)),
            )
        }
        Model::GrayScott => {
            let half = (x_end - x0) / 2.0;
            let bump = move |x: f64| (PI * (x - half) / (2.0 * half)).sin().powi(100);
            InitialCondition::new(
                Profile::closure(move |x| 1.0 - 0.5 * bump(x)),
                Profile::closure(move |x| 0.25 * bump(x)),
            )
        }
    }
}

fn boundary_plan(model: Model) -> BoundaryPlan {
    let plan = match model {
        Model::Linear => {
            let mut c = Vec::with_capacity(8);
            for s in [Species::U, Species::V] {
                c.push(BoundaryCondition::new(s, Side::Left, 1, 0.0));
                c.push(BoundaryCondition::new(s, Side::Left, 3, 0.0));
                c.push(BoundaryCondition::new(s, Side::Right, 0, 0.0));
                c.push(BoundaryCondition::new(s, Side::Right, 2, 0.0));
            }
            BoundaryPlan::new(c)
        }
        Model::Brusselator => BoundaryPlan::symmetric([(2, 0.0), (3, 0.0)], [(2, 0.0), (3, 0.0)]),
        Model::Schnakenberg => BoundaryPlan::symmetric([(1, 0.0), (3, 0.0)], [(1, 0.0), (3, 0.0)]),
        Model::GrayScott => BoundaryPlan::symmetric([(0, 1.0), (1, 0.0)], [(0, 0.0), (1, 0.0)]),
    };
    plan.expect("preset boundary plans are valid")
}

/// Solver-level override keys accepted by [`preset`] besides model constants.
pub const SOLVER_KEYS: [&str; 3] = ["n", "dt", "t_end"];

/// Builds the standard configuration of `model`, with `overrides` replacing
/// model constants (see [`Model::parameter_names`]) or the solver keys
/// `n`, `dt`, `t_end`.
pub fn preset(model: Model, overrides: &Params) -> Result<Preset> {
    let mut params = default_params(model);
    let mut layout = default_layout(model);
    for (key, &value) in overrides {
        match key.as_str() {
            "n" => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "n must be a non-negative integer, got {value}"
                    )));
                }
                layout.n = value as usize;
            }
            "dt" => layout.dt = value,
            "t_end" => layout.t_end = value,
            k if params.contains_key(k) => {
                params.insert(k.to_string(), value);
            }
            _ => {
                return Err(Error::UnknownParameter {
                    model: model.name().into(),
                    name: key.clone(),
                })
            }
        }
    }
    let coefficients = coefficients_from_table(model, &params)?;
    let mesh = UniformMesh::new(layout.x0, layout.x_end, layout.n)?;
    let setup = ProblemSetup {
        coefficients,
        mesh,
        boundary: boundary_plan(model),
        initial: initial_condition(model, &params, layout.x0, layout.x_end),
        label: model.name().to_string(),
    };
    let snapshots = layout
        .snapshots
        .into_iter()
        .filter(|&t| t <= layout.t_end)
        .collect();
    let solver = SolverConfig::new(layout.dt, layout.t_end, snapshots, layout.probes)?;
    Ok(Preset {
        model,
        params,
        setup,
        solver,
    })
}
