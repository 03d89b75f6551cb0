//! A small declarative sweep written to CSV + JSON, then summarized per grid point.
//!
//! cargo run --release --example sweep_and_aggregate -- [output-dir]

use qrc::harness::aggregate::write_summary;
use qrc::harness::{aggregate, run_sweep, write_outputs, SweepSpec, Table};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("qrc-example").display().to_string());
    let spec = SweepSpec::from_toml_str(
        r#"
name = "small"
base_seed = 11
ensemble_size = 4
[grid]
n_qubits = [3]
j0 = [0.1, 0.3, 0.5]
[analysis]
dimension_steps = 300
"#,
    )?;
    let rows = run_sweep(&spec)?;
    let files = write_outputs(std::path::Path::new(&out), &spec, &rows)?;
    println!("wrote {} and {}", files.csv.display(), files.sidecar.display());

    let table = Table::read(std::fs::File::open(&files.csv)?)?;
    let keys = ["n_qubits", "j0"];
    let groups = aggregate(&table, &keys)?;
    for g in &groups {
        let c = g.stat("c_stm").expect("c_stm");
        let nd = g.stat("mean_negativity").expect("negativity");
        println!("J0 {}: C_STM {:.2} ± {:.2}, N_d {:.4} ({} rows)", g.key[1], c.mean, c.std, nd.mean, g.count);
    }
    let summary = std::path::Path::new(&out).join("small_summary.csv");
    write_summary(std::fs::File::create(&summary)?, &keys, &groups)?;
    println!("summary in {}", summary.display());
    Ok(())
}
