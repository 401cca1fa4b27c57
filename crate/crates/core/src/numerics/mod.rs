//! Exact arithmetic and the linear-programming oracle.

pub mod rational;
pub mod simplex;

pub use rational::{
    format_rational, int, max_of, min_of, parse_rational, rat, rational_of_decimal, simplest_between, snap_f64,
    to_f64, tolerance_rational, within, ParseRationalError, Rational, SNAP_TOLERANCE,
};
pub use simplex::{solve_lp, Bounds, LinearProgram, LpError, LpOutcome, PreparedRegion, Region, Relation, Sense};
