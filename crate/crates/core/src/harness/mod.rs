//! Experiment drivers: scenarios, per-step error reports and their CSV form,
//! cached reference solutions, order studies and timing.

mod reference;
mod report;
mod run;
mod scenario;

pub use reference::{
    load_or_make_reference, make_reference, reference_path, run_order_study, steps_for, OrderRow,
    OrderStudy, Reference, ReferenceHeader, ReferenceKey,
};
pub use report::{least_squares_slope, read_csv, write_csv, ErrorReport, Record, StateColumns, Summary};
pub use run::{bench, initial_state, run_energy_drift, simulate, trajectory_error, BenchSummary};
pub use scenario::{Scenario, SystemKind, DEFAULT_STEPS, LONG_STEPS};
