//! Strategic Bayesian networks: Bayesian networks in which some nodes'
//! conditional distributions are chosen by players.
//!
//! The crate covers the data model ([`graph`], [`cpd`], [`value`]),
//! structural checks ([`validate`]), binding profiles into ordinary networks
//! ([`bind`]), sampling and exact expectation ([`inference`]), reduction to an
//! extensive-form tree ([`reduction`]), normal-form and zero-sum solvers
//! ([`solver`]) and constructors for the example games ([`games`]).

pub mod bind;
pub mod cpd;
pub mod error;
pub mod exact;
pub mod format;
pub mod games;
pub mod graph;
pub mod inference;
pub mod reduction;
pub mod rng;
pub mod solver;
pub mod validate;
pub mod value;

pub use bind::{bind, enumerate_profiles, BoundNetwork, StrategyProfile};
pub use cpd::{Cpd, ProbRow};
pub use error::{Result, SbnError};
pub use graph::{Node, NodeId, NodeKind, PlayerId, ProbabilityMode, SbnGraph, Strategy, StrategyFamily};
pub use validate::{topological_order, validate, ValidationReport, ViolationKind};
pub use value::{Domain, Value};
