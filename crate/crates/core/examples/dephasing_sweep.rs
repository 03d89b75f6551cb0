//! Memory capacity and entanglement as pure dephasing is switched on.
//!
//! cargo run --release --example dephasing_sweep

use qrc::harness::{measure, SweepSpec};
use qrc::reservoir::ReservoirConfig;

fn main() -> anyhow::Result<()> {
    let spec = SweepSpec::from_toml_str(
        r#"
name = "dephasing"
base_seed = 1
ensemble_size = 1
[grid]
n_qubits = [3]
j0 = [0.2]
[measurements]
dimension = false
"#,
    )?;
    for j0 in [0.2, 0.5] {
        println!("J0 = {j0}");
        for gamma in [0.0, 0.05, 0.1, 0.2] {
            let mut c = 0.0;
            let mut nd = 0.0;
            let seeds = 5;
            for seed in 0..seeds {
                let cfg = ReservoirConfig { j0, gamma, coupling_seed: seed, ..Default::default() };
                let m = measure(&spec, &cfg, 100 + seed)?;
                c += m.stm.expect("stm on").total / seeds as f64;
                nd += m.mean_negativity.expect("negativity on") / seeds as f64;
            }
            println!("  gamma {gamma:<5} C_STM {c:.3}  N_d {nd:.4}");
        }
    }
    Ok(())
}
