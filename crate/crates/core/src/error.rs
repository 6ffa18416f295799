use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate domain: right endpoint {x_end} must exceed left endpoint {x0}")]
    DegenerateDomain { x0: f64, x_end: f64 },

    #[error("mesh needs at least 8 intervals, got {0}")]
    TooFewIntervals(usize),

    #[error("mesh too coarse: spacing h = {h} must be below 2*pi/5")]
    DomainTooCoarse { h: f64 },

    #[error("derivative order {0} is outside 0..=4")]
    InvalidOrder(usize),

    #[error("basis normalisation vanishes for h = {h}")]
    ThetaDegenerate { h: f64 },

    #[error("basis index {m} is outside the extended knot range -2..={max}")]
    BasisIndex { m: i64, max: i64 },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("model {model} does not take parameter `{name}`")]
    UnknownParameter { model: String, name: String },

    #[error("model {model} requires parameter `{name}`")]
    MissingParameter { model: String, name: String },

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid boundary plan: {0}")]
    InvalidBoundaryPlan(String),

    #[error("boundary conditions of orders {orders:?} for {species} at the {side} end do not determine the ghost parameters")]
    DegenerateBoundaryPair {
        species: &'static str,
        side: &'static str,
        orders: [u8; 2],
    },

    #[error("matrix is singular at column {column}")]
    Singular { column: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("initial condition for {species} failed at x = {x}: {source}")]
    InitialCondition {
        species: &'static str,
        x: f64,
        source: ExprError,
    },

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("step {step} (t = {t}) failed: {source}")]
    Step {
        step: usize,
        t: f64,
        source: Box<Error>,
    },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("zero denominator in relative error")]
    ZeroDenominator,

    #[error("need at least two peaks to estimate a period, found {found}")]
    InsufficientPeaks { found: usize },

    #[error("model {0} has no analytic solution")]
    NoAnalyticSolution(String),
}
