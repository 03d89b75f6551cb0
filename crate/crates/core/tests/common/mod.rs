#![allow(dead_code)]

/// A sweep small enough for a few seconds of runtime.
pub const TINY_SPEC: &str = r#"
name = "tiny"
base_seed = 99
ensemble_size = 2

[grid]
n_qubits = [3]
j0 = [0.2, 0.4]
gamma = [0.0, 0.1]

[task]
tau_max = 5
washout = 100
train = 300
test = 200

[analysis]
negativity_steps = 20
dimension_steps = 200
n_anchors = 40
"#;
