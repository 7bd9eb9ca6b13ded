//! Deciding number conservation and classifying rules.
//!
//! [`decompose`] runs the flow characterization backwards: it recovers `g`
//! from the uniform neighborhoods and the cyclic extension from the residual,
//! and either returns the certificate or names the first check that failed.
//! [`check_conservation_window`] is the independent, brute-force side: it
//! steps every small configuration and compares sums. [`enumerate_rnca`]
//! searches the space of flow certificates for a given alphabet.

mod conservation;
mod decompose;
mod enumerate;

use thiserror::Error;

use crate::rule::RuleError;
use crate::state::State;

pub use conservation::{check_conservation_window, ConservationReport, SweepMode, SweepViolation, DEFAULT_SWEEP_BUDGET};
pub use decompose::{decompose, extract_direct_flow, DecompositionResult, DirectFlow, Verdict, Violation};
pub use enumerate::{
    enumerate_rnca, enumerate_rnca_with_budget, lemma2_closure_check, normalized_subsets, verify_small_triviality, verify_small_triviality_with_budget,
    FlowWitness, SmallTrivialityReport, DEFAULT_SEARCH_BUDGET,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("f(x,y,y,y,y) - x is not divisible by 4 for (x, y) = ({x}, {y})")]
    NonDivisibleFlow { x: State, y: State },
    #[error("direct flow is not antisymmetric at ({x}, {y})")]
    AntisymmetryViolation { x: State, y: State },
    #[error("work of {needed} exceeds the budget of {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("window must be at least 1x1, got {width}x{height}")]
    EmptyWindow { width: u32, height: u32 },
    #[error(transparent)]
    Rule(#[from] RuleError),
}
