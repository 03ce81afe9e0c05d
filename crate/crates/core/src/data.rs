//! Bundled inputs: the one-qubit model `Z + x X` and its `R_y` ansatz.

pub const MODEL_HAMILTONIAN_JSON: &str = include_str!("../data/model.json");
pub const Y_ROTATION_ANSATZ_JSON: &str = include_str!("../data/y_rotation.json");
