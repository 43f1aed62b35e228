//! Exact verification of cross-domain performance bounds on small tabular
//! MDP pairs: closed-form policy evaluation, occupancy measures, the
//! dynamics-discrepancy and value-difference bounds, the offline-dataset
//! bound, and the telescoping decompositions they rest on. Everything is
//! computed by direct linear solves; no sampling happens inside the oracle.

pub mod audit;
pub mod bounds;
pub mod error;
pub mod policy;
pub mod telescoping;
pub mod values;

pub use audit::{run_bound_audit, write_audit_csv, AuditConfig, AuditRow};
pub use bounds::{check_dynamics_bound, check_offline_bound, check_value_bound, BehaviorSpec, BoundReport};
pub use error::TheoryError;
pub use policy::TabularPolicy;
pub use telescoping::{check_g_bound, check_telescoping, GBoundReport, TelescopingConstant, TelescopingReport};
pub use values::{exact_values, occupancy, policy_evaluation_iterative, value_iteration_optimal, OccupancyMeasure, ValueTriple};

/// Slack tolerance for bound satisfaction.
pub const BOUND_TOL: f64 = 1e-9;
/// Residual tolerance for telescoping equalities.
pub const EQUALITY_TOL: f64 = 1e-8;
