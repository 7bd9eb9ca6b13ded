//! Rotation-symmetric number-conserving cellular automata (RNCA) on the von
//! Neumann neighborhood.

pub mod analysis;
pub mod circuit;
pub mod config;
pub mod flow;
pub mod render;
pub mod rule;
pub mod rulefile;
pub mod simulate;
pub mod state;
pub mod widgets;

pub use config::{step, BBox, Cell, Configuration};
pub use flow::{FlowLaw, FlowSpec};
pub use rule::{
    build_rule, canonical_rule, mirror_rule, normalize_states, rotation_symmetry_check, AffineMap, Rule,
    RuleError,
};
pub use state::{Neighborhood, State, StateSet};
