//! Game-theoretic computations over normal-form games.

mod linalg;
mod normal_form;
mod simplex;
mod support;
mod zero_sum;

pub use linalg::solve_linear;
pub use normal_form::{
    best_response, epsilon_nash_check, induced_normal_form, BestResponse, DEFAULT_EPS, MixedStrategy, NashCheck,
    NormalFormGame, PureLabel,
};
pub use simplex::{maximize, LpSolution};
pub use support::{support_enumeration_2p, SupportEnumeration, DEFAULT_MAX_SUPPORT_SIZE};
pub use zero_sum::{is_skew_symmetric, parse_matrix, symmetric_nash_skew, zero_sum_solve, ZeroSumSolution};

/// Feasibility tolerance inside the simplex.
pub const LP_FEASIBILITY_TOL: f64 = 1e-9;
/// Allowed gap between the two players' LP values.
pub const DUALITY_GAP_TOL: f64 = 1e-7;
/// Regret below which a profile counts as an equilibrium.
pub const NASH_REGRET_TOL: f64 = 1e-7;
/// Distance below which two equilibria are the same.
pub const EQUILIBRIUM_DEDUP_TOL: f64 = 1e-6;
