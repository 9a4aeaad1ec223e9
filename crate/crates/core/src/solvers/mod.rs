//! User-centric solvers for max-effort coverage.

mod greedy;
mod lp;
mod max;
mod rounding;
pub mod simplex;

pub use greedy::solve_greedy;
pub use lp::{solve_lp, LpSolution};
pub use max::{analytic_busy_fractions, sniffer_busy_fractions, solve_max};
pub use rounding::{
    normalized_row, pair_step, repetition_rng, round_once, round_probrand, round_row,
    DEFAULT_REPETITIONS,
};
