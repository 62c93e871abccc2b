use serde::{Deserialize, Serialize};

use super::config::{MeanWeighting, ProtocolConfig};
use super::trajectory::{
    master_inequality_check, noisy_pure_state, run_with_context, AlphaBetaMeans, TrajectoryContext, TrajectoryRecord,
};
use crate::clifford::{enumerate_stabilizer_states, sample_layered, StabilizerTable, MAX_TABLE_QUBITS};
use crate::error::{Error, Result};
use crate::magic::rom_exact;
use crate::par::{map_indexed, Execution};
use crate::qcore::{ComplexMatrix, DensityMatrix};

/// Sample mean with its standard error (sample standard deviation over `sqrt(n)`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, n }
    }

    /// `|mean - target| <= z * stderr + slack`
    pub fn within(&self, target: f64, z: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= z * self.stderr + slack
    }
}

/// Moments of the `alpha/beta/xi` split together with the audit of its
/// defining identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaXiMoments {
    pub alpha: Estimate,
    pub beta: Estimate,
    pub xi_trace_norm: Estimate,
    /// `E[|alpha_U - alpha| / s_U]`
    pub alpha_deviation: Estimate,
    /// `E[|beta_U - beta| / s_U]`
    pub beta_deviation: Estimate,
    /// `E[||xi_U||_1 / s_U]`
    pub xi_relative: Estimate,
    /// Largest of `|alpha_U + beta_U - s_U|`, `|tr xi_U|`, `|tr(rho_ideal xi_U)|`.
    pub max_identity_defect: f64,
    pub master_inequality_violations: usize,
    /// Largest `lhs - rhs` of the bound (negative when it holds everywhere).
    pub master_inequality_max_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config: ProtocolConfig,
    pub n_used: usize,
    pub n_excluded: usize,
    /// Mean of per-encoder fidelities.
    pub quenched_fidelity: Estimate,
    /// `E[<0_L|Lambda_U|0_L>] / E[s_U]`, the Monte Carlo counterpart of the annealed average.
    pub ratio_of_means_fidelity: f64,
    pub success_probability: Estimate,
    /// Mean state under `config.weighting`.
    pub mean_state: DensityMatrix,
    /// `tr(rho_bar^2)` of the plug-in mean state.
    pub mean_state_purity: f64,
    /// Jackknife bias-corrected mean-state purity with its jackknife standard error.
    pub mean_state_purity_jackknife: Estimate,
    pub mean_rom: Option<Estimate>,
    pub rom_of_mean: Option<f64>,
    pub mean_sre: Option<Estimate>,
    pub mean_w2: Option<Estimate>,
    /// `E ||rho_U - rho_bar||_2`
    pub hs_concentration: Option<Estimate>,
    /// `E ||rho_U - rho_bar||_1`
    pub trace_concentration: Option<Estimate>,
    pub alpha_beta_xi: Option<AlphaBetaXiMoments>,
    pub records: Vec<TrajectoryRecord>,
}

/// `splitmix64` finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-trajectory seed derived from the master seed and the index.
pub fn trajectory_seed(master_seed: u64, index: usize) -> u64 {
    mix64(mix64(master_seed).wrapping_add((index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn purity_of(m: &ComplexMatrix) -> f64 {
    m.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

fn collect(xs: &[TrajectoryRecord], f: impl Fn(&TrajectoryRecord) -> Option<f64>) -> Option<Estimate> {
    let v: Option<Vec<f64>> = xs.iter().map(f).collect();
    v.map(|v| Estimate::from_samples(&v))
}

pub fn ensemble_run(config: &ProtocolConfig) -> Result<EnsembleSummary> {
    ensemble_run_with(config, Execution::Parallel)
}

/// Runs `config.n_samples` independent trajectories and aggregates them in
/// index order, so the summary does not depend on `exec` or the thread count.
pub fn ensemble_run_with(config: &ProtocolConfig, exec: Execution) -> Result<EnsembleSummary> {
    config.validate()?;
    let table = if config.measures.rom { Some(enumerate_stabilizer_states(config.n_logical)?) } else { None };
    let ctx = TrajectoryContext::new(config, table.as_ref())?;
    let outcomes = map_indexed(config.n_samples, exec, |i| {
        run_with_context(&ctx, i, trajectory_seed(config.master_seed, i))
    });
    let mut records = Vec::with_capacity(outcomes.len());
    let mut excluded = 0usize;
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(Error::PostselectionImpossible(_)) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyEnsemble { excluded });
    }
    summarize(config, records, excluded, table.as_ref())
}

fn summarize(
    config: &ProtocolConfig,
    records: Vec<TrajectoryRecord>,
    n_excluded: usize,
    table: Option<&StabilizerTable>,
) -> Result<EnsembleSummary> {
    let n = records.len();
    let nf = n as f64;
    let dl = 1usize << config.n_logical;
    let fids: Vec<f64> = records.iter().map(|r| r.fidelity).collect();
    let ss: Vec<f64> = records.iter().map(|r| r.s_u).collect();
    let s_total: f64 = ss.iter().sum();

    let mut rho_sum = ComplexMatrix::zeros(dl, dl);
    let mut lambda_sum = ComplexMatrix::zeros(dl, dl);
    for r in &records {
        rho_sum = &rho_sum + r.rho_l.matrix();
        lambda_sum = &lambda_sum + &r.lambda;
    }
    let ratio_of_means_fidelity = lambda_sum[(0, 0)].re / s_total;
    let (mean_mat, jack): (ComplexMatrix, Vec<f64>) = match config.weighting {
        MeanWeighting::Equal => {
            let mean = rho_sum.scale_real(1.0 / nf);
            let jack = if n > 1 {
                records
                    .iter()
                    .map(|r| purity_of(&(&rho_sum - r.rho_l.matrix()).scale_real(1.0 / (nf - 1.0))))
                    .collect()
            } else {
                vec![]
            };
            (mean, jack)
        }
        MeanWeighting::SuccessWeighted => {
            let mean = lambda_sum.scale_real(1.0 / s_total);
            let jack = if n > 1 {
                records
                    .iter()
                    .map(|r| purity_of(&(&lambda_sum - &r.lambda).scale_real(1.0 / (s_total - r.s_u))))
                    .collect()
            } else {
                vec![]
            };
            (mean, jack)
        }
    };
    let mean_state = DensityMatrix::from_matrix_unchecked(mean_mat)?;
    let mean_state_purity = purity_of(mean_state.matrix());
    let mean_state_purity_jackknife = if jack.is_empty() {
        Estimate { mean: mean_state_purity, stderr: 0.0, n }
    } else {
        let jm = jack.iter().sum::<f64>() / nf;
        let var = jack.iter().map(|x| (x - jm).powi(2)).sum::<f64>() * (nf - 1.0) / nf;
        Estimate { mean: nf * mean_state_purity - (nf - 1.0) * jm, stderr: var.sqrt(), n }
    };

    let m = config.measures;
    let mean_rom = if m.rom { collect(&records, |r| r.rom) } else { None };
    let rom_of_mean = match (m.rom, table) {
        (true, Some(t)) => Some(rom_exact(&mean_state, t)?.value),
        _ => None,
    };
    let mean_sre = if m.sre { collect(&records, |r| r.sre) } else { None };
    let mean_w2 = if m.witness { collect(&records, |r| r.w2) } else { None };
    let (hs_concentration, trace_concentration) = if m.distances {
        let diffs: Vec<ComplexMatrix> = records.iter().map(|r| r.rho_l.matrix() - mean_state.matrix()).collect();
        let hs: Vec<f64> = diffs.iter().map(|d| d.frobenius_norm()).collect();
        let tr: Vec<f64> = diffs.iter().map(|d| d.hermitian_trace_norm()).collect();
        (Some(Estimate::from_samples(&hs)), Some(Estimate::from_samples(&tr)))
    } else {
        (None, None)
    };
    let alpha_beta_xi = if m.alpha_beta_xi { Some(decomposition_moments(&records, dl)?) } else { None };

    Ok(EnsembleSummary {
        config: config.clone(),
        n_used: n,
        n_excluded,
        quenched_fidelity: Estimate::from_samples(&fids),
        ratio_of_means_fidelity,
        success_probability: Estimate::from_samples(&ss),
        mean_state,
        mean_state_purity,
        mean_state_purity_jackknife,
        mean_rom,
        rom_of_mean,
        mean_sre,
        mean_w2,
        hs_concentration,
        trace_concentration,
        alpha_beta_xi,
        records,
    })
}

fn decomposition_moments(records: &[TrajectoryRecord], dl: usize) -> Result<AlphaBetaXiMoments> {
    let decs: Vec<_> = records
        .iter()
        .map(|r| r.decomposition.clone().ok_or_else(|| Error::InvalidParameter("missing decomposition".into())))
        .collect::<Result<_>>()?;
    let alphas: Vec<f64> = decs.iter().map(|d| d.alpha).collect();
    let betas: Vec<f64> = decs.iter().map(|d| d.beta).collect();
    let alpha = Estimate::from_samples(&alphas);
    let beta = Estimate::from_samples(&betas);
    let means = AlphaBetaMeans { alpha: alpha.mean, beta: beta.mean };
    let ideal = DensityMatrix::zero_state(dl.trailing_zeros() as usize);
    let mut violations = 0;
    let mut max_gap = f64::NEG_INFINITY;
    let mut max_defect = 0.0f64;
    for (r, d) in records.iter().zip(&decs) {
        let check = master_inequality_check(r, means, &ideal)?;
        if !check.satisfied {
            violations += 1;
        }
        max_gap = max_gap.max(check.lhs - check.rhs);
        max_defect = max_defect.max((d.alpha + d.beta - r.s_u).abs()).max(d.xi_trace).max(d.xi_overlap);
    }
    let rel = |f: &dyn Fn(&TrajectoryRecord, &super::trajectory::AlphaBetaXi) -> f64| {
        let v: Vec<f64> = records.iter().zip(&decs).map(|(r, d)| f(r, d)).collect();
        Estimate::from_samples(&v)
    };
    Ok(AlphaBetaXiMoments {
        alpha_deviation: rel(&|r, d| (d.alpha - means.alpha).abs() / r.s_u),
        beta_deviation: rel(&|r, d| (d.beta - means.beta).abs() / r.s_u),
        xi_relative: rel(&|r, d| d.xi_trace_norm / r.s_u),
        xi_trace_norm: Estimate::from_samples(&decs.iter().map(|d| d.xi_trace_norm).collect::<Vec<_>>()),
        alpha,
        beta,
        max_identity_defect: max_defect,
        master_inequality_violations: violations,
        master_inequality_max_gap: max_gap,
    })
}

/// Mean robustness of the full encoded state right after the noise layer,
/// before decoding. `N` may be odd here (one qubit idles in each entangling layer).
pub fn post_error_layer_rom(config: &ProtocolConfig, table: &StabilizerTable, exec: Execution) -> Result<Estimate> {
    let n = config.n_qubits;
    if n == 0 || n > MAX_TABLE_QUBITS {
        return Err(Error::Capacity(format!("full-system ROM needs 1 <= N <= {MAX_TABLE_QUBITS}, got {n}")));
    }
    if table.n_qubits() != n {
        return Err(Error::Dimension(format!("table on {} qubits for N = {n}", table.n_qubits())));
    }
    if config.n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let noise = config.noise.build()?;
    let values = map_indexed(config.n_samples, exec, |i| -> Result<f64> {
        let enc = sample_layered(n, trajectory_seed(config.master_seed, i))?;
        let psi = enc.image_of_basis(0);
        let sigma = noisy_pure_state(&noise, &psi, n)?;
        let sigma = (&sigma + &sigma.adjoint()).scale_real(0.5);
        Ok(rom_exact(&DensityMatrix::from_matrix_unchecked(sigma)?, table)?.value)
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&values))
}
