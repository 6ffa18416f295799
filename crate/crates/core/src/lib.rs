//! Trigonometric quintic B-spline collocation for one-dimensional
//! two-species reaction-diffusion systems
//!
//! ```text
//! U_t = a1 U_xx + b1 U + c1 V + d1 U^2 V + e1 U V + m1 U V^2 + n1
//! V_t = a2 V_xx + b2 U + c2 V + d2 U^2 V + e2 U V + m2 U V^2 + n2
//! ```
//!
//! Space is discretised by collocation at the knots of a uniform mesh with
//! trigonometric quintic B-splines; time by Crank-Nicolson with a Taylor
//! linearisation of the nonlinear terms, so every step is one banded solve.
//!
//! The usual entry point is [`problem::preset`] followed by [`stepper::run`]:
//!
//! ```no_run
//! use tqb_core::problem::{preset, Model, Params};
//! use tqb_core::stepper::run;
//!
//! let p = preset(Model::Brusselator, &Params::new()).unwrap();
//! let traj = run(&p.setup, &p.solver).unwrap();
//! println!("{} snapshots", traj.snapshots.len());
//! ```

pub mod banded;
pub mod basis;
pub mod cli;
pub mod diagnostics;
pub mod discretize;
pub mod error;
pub mod expr;
pub mod mesh;
pub mod problem;
pub mod selftest;
pub mod stepper;

pub use error::{Error, Result};
