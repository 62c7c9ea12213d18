//! Simulation scenarios, frequentist comparators and the harness that
//! recomputes the reference tables.

pub mod comparators;
pub mod power;
pub mod scenario;
pub mod tables;

pub use comparators::{classical_ks_test, wilcoxon_test, TestOutcome, DEFAULT_PERMUTATIONS};
pub use power::{estimate_power, estimate_power_cached, scenario_data, PowerErrors, PowerOptions, PowerResult};
pub use scenario::{example_case, power_case, scenario_by_key, Scenario};
pub use tables::{reproduce_table, robustness_settings, TableId, TableOptions, TableRow, SWEEP_SIZES};
