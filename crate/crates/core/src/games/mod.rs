//! Constructors for the example games.
//!
//! Action sets that stand for complexity classes are realized as explicit
//! finite families: constant guesses for constant-time programs, constants
//! plus an exact bit counter for linear-time programs, and LP equilibrium
//! solving versus cheaper heuristics for the matrix-game pair.

use std::collections::BTreeMap;

use crate::graph::SbnGraph;

mod letsplay;
mod nocount;

pub use letsplay::{
    audit_member, builtin_b_members, gen_skew_symmetric, make_letsplay, FamilyMember, SkewSymmetricGame,
    SubgameAudit, BR_AUDIT_TOL,
};
pub use nocount::{
    best_constant_guess, bit_strings, make_nocount, make_nocount_with, make_two_player_nocount,
    make_two_player_nocount_with, ConstantGuess, LengthPmf, TailPolicy, TruncatedExponential, DEFAULT_N_CAP,
};

/// A constructed game plus notes on what each strategy family stands for.
#[derive(Clone, Debug)]
pub struct GameBundle {
    pub graph: SbnGraph,
    pub notes: BTreeMap<String, String>,
}
