//! Entanglement build-up after each input for a few coupling strengths.
//!
//! cargo run --release --example negativity_trace

use qrc::entanglement::negativity_trace_from;
use qrc::reservoir::{uniform_inputs, ReservoirConfig};

fn main() -> qrc::error::Result<()> {
    let inputs = uniform_inputs(60, 1);
    for j0 in [0.1, 0.3, 0.5] {
        let cfg = ReservoirConfig { j0, coupling_seed: 3, ..Default::default() };
        let trace = negativity_trace_from(&cfg, &inputs, 50)?;
        let input_qubit = trace.series(&[1]).expect("1|23 split");
        println!("J0 = {j0}: mean N_d over all splits {:.4}", trace.time_average);
        let period = cfg.v_multiplex + 1;
        let line: Vec<String> = input_qubit[..period].iter().map(|v| format!("{v:.3}")).collect();
        println!("  N_d(1|23) over one input interval: {}", line.join(" "));
    }
    Ok(())
}
