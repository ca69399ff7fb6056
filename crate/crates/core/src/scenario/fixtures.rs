//! Bundled scenarios.

/// Qubit with the diagonal and σ_x eigencontexts, σ_z flow, state |0⟩.
pub const QUBIT_DEMO: &str = include_str!("../../fixtures/qubit_demo.json");

/// Qutrit with a fine context and one coarsening, a complex Hamiltonian and
/// a mixed state.
pub const QUTRIT_DEMO: &str = include_str!("../../fixtures/qutrit_demo.json");

/// The qutrit demo with one section entry shifted by 0.1.
pub const CORRUPTED_AXIOMS: &str = include_str!("../../fixtures/corrupted_axioms.json");

/// Cabello's 18 rays in 9 orthogonal bases of ℂ⁴; every ray lies in exactly
/// two bases, so no global section exists.
pub const CABELLO18: &str = include_str!("../../fixtures/cabello18.json");

pub const ALL: [(&str, &str); 4] = [
    ("qubit_demo", QUBIT_DEMO),
    ("qutrit_demo", QUTRIT_DEMO),
    ("corrupted_axioms", CORRUPTED_AXIOMS),
    ("cabello18", CABELLO18),
];
