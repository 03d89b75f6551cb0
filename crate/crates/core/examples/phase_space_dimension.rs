//! Covariance dimension of the reservoir trajectory in generalized Bloch space.
//!
//! cargo run --release --example phase_space_dimension

use qrc::dimension::{reservoir_dimension, DimensionParams};
use qrc::reservoir::{uniform_inputs, ReservoirConfig};

fn main() -> qrc::error::Result<()> {
    let inputs = uniform_inputs(1000, 2);
    for n_qubits in [3, 4] {
        for j0 in [0.1, 0.3, 0.5] {
            let cfg = ReservoirConfig { n_qubits, j0, coupling_seed: 5, ..Default::default() };
            let est = reservoir_dimension(&cfg, &inputs, 500, &DimensionParams::default())?;
            println!("N = {n_qubits}, J0 = {j0}: D_c {:.2} of {} ({:.3})", est.d_c, est.d_max, est.fraction);
        }
    }
    Ok(())
}
