//! Stochastic timed Petri nets with continuous resources.
//!
//! The crate models nets whose transitions are timed actions: firing
//! consumes input tokens, runs for a sampled duration while producing or
//! consuming continuous resources at constant rates, and deposits output
//! tokens on completion. Inhibitor arcs block firings and suspend running
//! instances. On top of single-run execution sit Monte Carlo batches with
//! correlation analysis, closed-form availability under redundancy, and
//! hierarchical net composition.

pub mod compose;
pub mod io;
pub mod mc;
pub mod model;
pub mod reach;
pub mod reliability;
pub mod sim;
pub mod tower;
pub mod validate;

pub use model::{ConflictPolicy, DurationDistribution, GoalPredicate, Net, Place, Resource, Transition};
pub use sim::{simulate, Outcome, SimConfig, Trace};
pub use validate::{validate_net, ValidationReport};
