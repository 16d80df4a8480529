//! Exact simulation of discrete-time anyonic quantum walks.

pub mod entanglement;
pub mod error;
pub mod fusion;
pub mod kraus;
pub mod models;
pub mod observables;
pub mod pathsum;
pub mod walk;

pub use error::{Error, Result};
pub use fusion::{BraidWord, FusionSpace, Generator};
pub use models::AnyonModel;
pub use observables::PositionDistribution;
pub use walk::{evolve, Boundary, Closure, Trajectory, WalkConfig, WalkState};
