//! Log-optimal stake allocation for a single event with mutually exclusive
//! outcomes.
//!
//! Given subjective probabilities and decimal odds (or state prices), the
//! solver computes the cash fraction, per-outcome stakes, terminal wealth
//! levels, and expected log growth of the growth-optimal bet. The optimum has
//! a closed form: sort outcomes by edge ratio `p_i / q_i`, keep adding
//! outcomes while the ratio exceeds the current cash level, then stake
//! `x_i = max(p_i - c q_i, 0)` on every outcome.
//!
//! The crate is organized around four modules:
//!
//! - [`market`]: validated market and strategy types plus the objective.
//! - [`solver`]: the greedy closed-form solver and its building blocks.
//! - [`oracle`]: independent maximizers (exhaustive support enumeration,
//!   lattice search, projected gradient ascent) used to cross-check the
//!   solver, plus seeded instance generators.
//! - [`sim`]: seeded Monte Carlo estimation of the growth rate.

// Validation uses negated comparisons like `!(x > 0.0)` so NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod market;
pub mod oracle;
pub mod sim;
pub mod solver;

pub use market::{MarketError, MarketEvent, Strategy, ValidationWarning, WealthVector};
pub use oracle::{OracleError, OracleMethod, OracleReport};
pub use sim::{SimError, SimulationResult, StrategyComparison};
pub use solver::{FixedSupportSolution, GreedyStep, KellySolution, SolverError};
