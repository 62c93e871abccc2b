//! Nonstabilizerness measures.

mod rom;
mod simplex;
mod sre;

pub use rom::{
    rom_column_generation, rom_exact, rom_single_qubit_oracle, InitialColumns, LpProblem, RomResult, RomStatus,
    StabilizerSource, MAX_COLUMN_GENERATION_QUBITS,
};
pub use sre::{sre, sre2, sre_depolarizing_analytic, witness_w2};
