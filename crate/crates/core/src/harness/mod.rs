//! Parameter sweeps over random-Hamiltonian ensembles and their outputs.

pub mod aggregate;
pub mod results;
pub mod spec;
pub mod sweep;

pub use aggregate::{aggregate, GroupSummary, Stat, Table};
pub use results::{determinism_hash, ResultRow, Sidecar, SCHEMA_VERSION};
pub use spec::{Job, SweepSpec};
pub use sweep::{measure, run_sweep, write_outputs, Measurement};
