//! Numerical checks of the inequalities, one report per instance.
mod checks;
mod report;
mod suite;
pub use checks::*;
pub use report::{CheckReport, Relation, Witness, EQ_ABS_TOL, INEQ_REL_TOL};
pub use suite::{run_instance, run_suite, to_csv, CheckSummary, Failure, Grids, SuiteConfig, SuiteSummary, CSV_HEADER};
