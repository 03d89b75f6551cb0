//! The worker-count environment override. Kept in its own binary because it
//! mutates process-wide state.

mod common;

use qrc::harness::spec::WORKERS_ENV;
use qrc::harness::{determinism_hash, run_sweep, SweepSpec};

#[test]
fn environment_overrides_spec_worker_count() {
    let mut spec = SweepSpec::from_toml_str(common::TINY_SPEC).unwrap();
    spec.workers = Some(1);
    let reference = determinism_hash(&run_sweep(&spec).unwrap(), spec.task.tau_max);

    std::env::set_var(WORKERS_ENV, "3");
    assert_eq!(spec.resolve_workers().unwrap(), 3);
    assert_eq!(determinism_hash(&run_sweep(&spec).unwrap(), spec.task.tau_max), reference);

    std::env::set_var(WORKERS_ENV, "zero");
    assert!(spec.resolve_workers().is_err());
    assert!(run_sweep(&spec).is_err());

    std::env::remove_var(WORKERS_ENV);
    assert_eq!(spec.resolve_workers().unwrap(), 1);
}
