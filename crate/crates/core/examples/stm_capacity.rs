//! Short-term memory capacity and its per-delay profile.
//!
//! cargo run --release --example stm_capacity

use qrc::memory::{run_stm_task, StmTask};
use qrc::reservoir::ReservoirConfig;

fn main() -> qrc::error::Result<()> {
    let task = StmTask::default();
    for j0 in [0.1, 0.3, 0.5] {
        let cfg = ReservoirConfig { j0, coupling_seed: 7, ..Default::default() };
        let report = run_stm_task(&cfg, &task)?;
        let head: Vec<String> = report.per_delay[..8].iter().map(|c| format!("{c:.3}")).collect();
        println!("J0 = {j0}: C_STM {:.3}, C^0..7 = {}", report.total, head.join(" "));
    }
    Ok(())
}
