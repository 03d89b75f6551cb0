//! The raw multiplexed <σz> readout for a short input sequence.
//!
//! cargo run --release --example reservoir_readout

use qrc::reservoir::{run_sequence, uniform_inputs, ReservoirConfig};

fn main() -> qrc::error::Result<()> {
    let cfg = ReservoirConfig { j0: 0.3, coupling_seed: 1, ..Default::default() };
    let inputs = uniform_inputs(5, 9);
    let out = run_sequence(&cfg, &inputs, false)?;
    for (k, (s, r)) in inputs.iter().zip(&out.records).enumerate() {
        let first: Vec<String> = r.features.chunks(cfg.n_qubits).map(|c| format!("{:+.3}", c[0])).collect();
        println!("input {k}: s = {s:.3}, <σz> of qubit 1 per sub-step: {}", first.join(" "));
    }
    Ok(())
}
