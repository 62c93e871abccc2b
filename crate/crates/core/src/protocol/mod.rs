//! Encode, noise, decode and postselect: single trajectories, ensembles over
//! random encoders, and the no-click magic-state protocol.

mod config;
mod distill;
mod ensemble;
mod trajectory;

pub use config::{MeanWeighting, Measures, NoiseModel, ProtocolConfig, MAX_ROM_LOGICAL_QUBITS};
pub use distill::{no_click_distill, NoClick};
pub use ensemble::{
    ensemble_run, ensemble_run_with, post_error_layer_rom, trajectory_seed, AlphaBetaXiMoments, EnsembleSummary,
    Estimate,
};
pub use trajectory::{
    decompose_alpha_beta_xi, master_inequality_check, run_trajectory, AlphaBetaMeans, AlphaBetaXi, MasterInequality,
    TrajectoryRecord,
};
