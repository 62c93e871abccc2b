use serde::{Deserialize, Serialize};

use crate::channels::{
    amplitude_damping, depolarizing_global, depolarizing_local, gadc, mixed_error, z_rotation, GlobalDepolarizing,
    KrausChannel,
};
use crate::clifford::MAX_ENCODER_QUBITS;
use crate::error::{Error, Result};

/// Noise layer applied between encoding and decoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    AmplitudeDamping { p: f64 },
    Gadc { p: f64, eta: f64 },
    DepolarizingLocal { p: f64 },
    DepolarizingGlobal { p: f64 },
    /// Amplitude damping followed by `e^{-i alpha Z/2}` on every qubit.
    Mixed { p: f64, alpha: f64 },
    Coherent { alpha: f64 },
    /// Arbitrary single-qubit channel applied to every qubit.
    Custom { channel: KrausChannel },
}

pub(crate) enum NoiseLayer {
    Local(KrausChannel),
    Global(GlobalDepolarizing),
}

impl NoiseModel {
    pub(crate) fn build(&self) -> Result<NoiseLayer> {
        Ok(match self {
            NoiseModel::AmplitudeDamping { p } => NoiseLayer::Local(amplitude_damping(*p)?),
            NoiseModel::Gadc { p, eta } => NoiseLayer::Local(gadc(*p, *eta)?),
            NoiseModel::DepolarizingLocal { p } => NoiseLayer::Local(depolarizing_local(*p)?),
            NoiseModel::DepolarizingGlobal { p } => NoiseLayer::Global(depolarizing_global(*p)?),
            NoiseModel::Mixed { p, alpha } => NoiseLayer::Local(mixed_error(*p, *alpha)?),
            NoiseModel::Coherent { alpha } => NoiseLayer::Local(z_rotation(*alpha)?),
            NoiseModel::Custom { channel } => {
                if channel.n_qubits_acted() != 1 {
                    return Err(Error::InvalidParameter("custom noise must be a single-qubit channel".into()));
                }
                NoiseLayer::Local(channel.clone())
            }
        })
    }
}

/// Optional per-trajectory measures. The decoding fidelity is always recorded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measures {
    pub rom: bool,
    pub sre: bool,
    pub witness: bool,
    pub distances: bool,
    pub alpha_beta_xi: bool,
}

impl Measures {
    pub fn fidelity_only() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        Self { rom: true, sre: true, witness: true, distances: true, alpha_beta_xi: true }
    }
}

/// Convention for the ensemble mean state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanWeighting {
    /// Plain average of the normalized postselected states.
    #[default]
    Equal,
    /// `E[Lambda_U] / E[s_U]`, i.e. states weighted by their postselection
    /// probability.
    SuccessWeighted,
}

/// Largest logical register for which trajectory ROM is available.
pub const MAX_ROM_LOGICAL_QUBITS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub n_qubits: usize,
    pub n_logical: usize,
    pub noise: NoiseModel,
    pub n_samples: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub measures: Measures,
    #[serde(default)]
    pub weighting: MeanWeighting,
}

impl ProtocolConfig {
    pub fn new(n_qubits: usize, n_logical: usize, noise: NoiseModel, n_samples: usize, master_seed: u64) -> Self {
        Self {
            n_qubits,
            n_logical,
            noise,
            n_samples,
            master_seed,
            measures: Measures::default(),
            weighting: MeanWeighting::default(),
        }
    }

    pub fn with_measures(mut self, measures: Measures) -> Self {
        self.measures = measures;
        self
    }

    pub fn with_weighting(mut self, weighting: MeanWeighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn code_rate(&self) -> f64 {
        self.n_logical as f64 / self.n_qubits as f64
    }

    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n_qubits, self.n_logical);
        if n == 0 || n % 2 == 1 {
            return Err(Error::InvalidParameter(format!("N = {n} must be even and positive")));
        }
        if n > MAX_ENCODER_QUBITS {
            return Err(Error::Capacity(format!("N = {n} exceeds {MAX_ENCODER_QUBITS}")));
        }
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("need 1 <= k < N, got k = {k}, N = {n}")));
        }
        if self.measures.rom && (k > MAX_ROM_LOGICAL_QUBITS || n > 6) {
            return Err(Error::Capacity(format!(
                "trajectory ROM needs k <= {MAX_ROM_LOGICAL_QUBITS} and N <= 6, got k = {k}, N = {n}"
            )));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        self.noise.build().map(|_| ())
    }
}
