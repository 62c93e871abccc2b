//! Clifford gates, random layered encoders and exhaustive stabilizer-state
//! enumeration.

mod cache;
mod encoder;
mod gates;
mod stabilizer;

pub use cache::{load_or_build_table, read_table_cache, write_table_cache};
pub use encoder::{encoder_unitary, sample_encoder, sample_layered, EncoderSpec, Layer, MAX_ENCODER_QUBITS};
pub use gates::{single_qubit_clifford, xx_rotation, NUM_SINGLE_QUBIT_CLIFFORDS, SINGLE_QUBIT_CLIFFORD_WORDS};
pub use stabilizer::{
    canonicalize_phase, enumerate_stabilizer_states, for_each_stabilizer_state, gaussian_binomial2,
    is_stabilizer_state, stabilizer_state_count, states_of_dimension, StabilizerTable, MAX_TABLE_QUBITS,
};
pub(crate) use stabilizer::pauli_support;
