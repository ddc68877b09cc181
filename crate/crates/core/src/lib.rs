//! Vehicle routing with service levels.
//!
//! A customer-selection routing problem: up to `m` capacitated routes leave a
//! depot, every customer is served at most once, each customer group must
//! receive a minimum share of its service weight, and the objective is travel
//! cost plus the profit of customers left unserved.
//!
//! The crate is organised around the solver pipeline:
//!
//! * [`instance`] parses, generates and reduces problem instances.
//! * [`solution`] holds the two-chromosome representation, the Split decoder,
//!   cost evaluation, feasibility checking and the edge-based distance.
//! * [`localsearch`] is the education/repair procedure.
//! * [`genetic`] is the population-based driver.
//! * [`pricing`] is a standalone ng-route labeling engine for column
//!   generation, driven by caller-supplied duals.

pub mod genetic;
pub mod instance;
pub mod localsearch;
pub mod pricing;
pub mod solution;

pub use genetic::{run, RunOutcome, SearchParams};
pub use instance::{parse_instance, serialize_instance, Instance, InstanceError, InstanceFormat};
pub use solution::{is_feasible, split, PenaltyState, Route, Solution};
