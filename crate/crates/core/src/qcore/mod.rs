//! Dense linear algebra, state containers, Pauli algebra and distance
//! primitives.
//!
//! Basis convention: qubit 0 is the most significant bit of a basis index.
//! In encoding-decoding circuits the logical block occupies qubits `0..k`.

mod matrix;
mod pauli;
mod state;

pub use matrix::ComplexMatrix;
pub(crate) use matrix::{apply_1q_left, apply_1q_right_adjoint, apply_1q_vec, to_2x2};
pub use pauli::{
    from_pauli_expectations, pauli_expectations, pauli_expectations_pure, pauli_matrix, Pauli, PauliAction,
    PauliString,
};
pub use state::{
    ancilla_zero_block, bloch_vector, fidelity_with_pure, from_bloch, hs_distance, postselect_ancillas, purity,
    trace_distance, trace_norm_distance, BlochVector, DensityMatrix, HERMITIAN_TOL, POSTSELECTION_FLOOR, PSD_FLOOR,
    TRACE_TOL,
};

pub use num_complex::Complex64 as C64;
