//! Reliable enclosure of solutions to constraint models.
//!
//! The pipeline relaxes a (possibly nonlinear) constraint model into an
//! interval linear program, computes per-variable bounds with a floating-point
//! simplex, certifies those bounds with directed-rounding dual arithmetic, and
//! combines the result with interval Gaussian elimination on the thin
//! equations. Every box returned by the top-level solver is guaranteed to
//! contain all solutions of the input model despite rounding errors.

pub mod cli;
pub mod fp;
pub mod gauss;
pub mod interval;
pub mod model;
pub mod oracle;
pub mod rat;
pub mod relax;
pub mod safebound;
pub mod simplex;
pub mod strategy;

pub use interval::Interval;
pub use model::Model;
pub use relax::{IntervalLinearProgram, LinearForm, Row};
pub use safebound::VarBox;
pub use strategy::{solve, SolveOptions, SolveResult, SolverMode};
