//! Exhaustive pure Nash equilibrium enumeration for constraint games.
//!
//! A constraint game gives every player a set of variables it controls and a
//! goal expressed as a constraint problem; optionally an objective to minimize
//! or maximize, and hard constraints shared by everybody. Two complete
//! solvers are provided: [`enum1`], the naive generate-and-test baseline, and
//! [`conga`], which prunes with best-response tables and never-best-response
//! counters. [`oracle`] holds brute-force references over the expanded
//! normal form.

pub mod conga;
pub mod csp;
pub mod enum1;
pub mod error;
pub mod game;
pub mod games;
pub mod oracle;

/// Integer values of every variable.
pub type Value = i64;

pub use error::{CspError, GameError, OracleError, ParseError};
pub use game::{
    DeviationScope, Eval, Game, GameBuilder, PlayerId, PlayerStrategy, SolveResult, SolveStats, StrategyProfile,
    StrategySpace,
};
