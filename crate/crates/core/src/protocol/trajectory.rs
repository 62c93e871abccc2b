use serde::{Deserialize, Serialize};

use super::config::{NoiseLayer, ProtocolConfig};
use crate::channels::{apply_on_qubit, ops_2x2};
use crate::clifford::{sample_encoder, EncoderSpec, StabilizerTable};
use crate::error::{Error, Result};
use crate::magic::{rom_exact, sre2, witness_w2};
use crate::qcore::{ComplexMatrix, DensityMatrix, C64, POSTSELECTION_FLOOR};

/// `Lambda_U = alpha I/d + beta rho_ideal + xi`, with the residual `xi`
/// traceless and orthogonal to `rho_ideal`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaXi {
    pub alpha: f64,
    pub beta: f64,
    pub xi_trace_norm: f64,
    /// `|tr xi|`, zero up to rounding.
    pub xi_trace: f64,
    /// `|tr(rho_ideal xi)|`, zero up to rounding.
    pub xi_overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub seed: u64,
    /// Postselection probability `tr Lambda_U`.
    pub s_u: f64,
    /// Unnormalized postselected logical block `Lambda_U(rho_0)`.
    pub lambda: ComplexMatrix,
    pub rho_l: DensityMatrix,
    pub fidelity: f64,
    pub rom: Option<f64>,
    pub sre: Option<f64>,
    pub w2: Option<f64>,
    pub decomposition: Option<AlphaBetaXi>,
}

pub(crate) struct TrajectoryContext<'a> {
    pub config: &'a ProtocolConfig,
    pub noise: NoiseLayer,
    pub table: Option<&'a StabilizerTable>,
    pub ideal: DensityMatrix,
}

impl<'a> TrajectoryContext<'a> {
    pub fn new(config: &'a ProtocolConfig, table: Option<&'a StabilizerTable>) -> Result<Self> {
        config.validate()?;
        if config.measures.rom {
            match table {
                Some(t) if t.n_qubits() == config.n_logical => {}
                _ => return Err(Error::InvalidParameter("ROM measure needs the logical stabilizer table".into())),
            }
        }
        Ok(Self { config, noise: config.noise.build()?, table, ideal: DensityMatrix::zero_state(config.n_logical) })
    }
}

/// `C(|psi><psi|)` for the product noise layer on `n` qubits.
pub(crate) fn noisy_pure_state(noise: &NoiseLayer, psi: &[C64], n: usize) -> Result<ComplexMatrix> {
    let pure = ComplexMatrix::outer(psi, psi);
    match noise {
        NoiseLayer::Global(g) => g.apply_matrix(&pure),
        NoiseLayer::Local(ch) => {
            let ops = ops_2x2(ch);
            let mut m = pure;
            for q in 0..n {
                m = apply_on_qubit(&ops, &m, q, n);
            }
            Ok(m)
        }
    }
}

/// `Lambda[l, l'] = <l,0_A| U^dag sigma U |l',0_A>`.
fn decoded_block(encoder: &EncoderSpec, sigma: &ComplexMatrix, k: usize) -> Vec<C64> {
    let n = encoder.n_qubits();
    let dl = 1usize << k;
    let cols: Vec<Vec<C64>> = (0..dl).map(|l| encoder.image_of_basis(l << (n - k))).collect();
    let sv: Vec<Vec<C64>> = cols.iter().map(|v| sigma.mul_vec(v)).collect();
    let mut out = vec![C64::new(0.0, 0.0); dl * dl];
    for a in 0..dl {
        for b in 0..dl {
            out[a * dl + b] = cols[a].iter().zip(&sv[b]).map(|(x, y)| x.conj() * y).sum();
        }
    }
    out
}

pub(crate) fn run_with_context(ctx: &TrajectoryContext<'_>, index: usize, seed: u64) -> Result<TrajectoryRecord> {
    let cfg = ctx.config;
    let (n, k) = (cfg.n_qubits, cfg.n_logical);
    let dl = 1usize << k;
    let encoder = sample_encoder(n, seed)?;
    let psi = encoder.image_of_basis(0);
    let sigma = noisy_pure_state(&ctx.noise, &psi, n)?;
    let mut lambda = ComplexMatrix::from_vec(dl, dl, decoded_block(&encoder, &sigma, k))?;
    // symmetrize away rounding so downstream Hermitian routines see exact symmetry
    lambda = (&lambda + &lambda.adjoint()).scale_real(0.5);
    let s_u = lambda.trace().re;
    if s_u < POSTSELECTION_FLOOR {
        return Err(Error::PostselectionImpossible(s_u));
    }
    let rho_l = DensityMatrix::from_matrix_unchecked(lambda.scale_real(1.0 / s_u))?;
    let fidelity = rho_l.matrix()[(0, 0)].re.clamp(0.0, 1.0);
    let m = cfg.measures;
    let rom = match (m.rom, ctx.table) {
        (true, Some(t)) => Some(rom_exact(&rho_l, t)?.value),
        _ => None,
    };
    let sre = if m.sre { Some(sre2(&rho_l)?) } else { None };
    let w2 = if m.witness { Some(witness_w2(&rho_l)?) } else { None };
    let decomposition = if m.alpha_beta_xi {
        let (alpha, beta, xi) = decompose_alpha_beta_xi(&lambda, &ctx.ideal)?;
        Some(AlphaBetaXi {
            alpha,
            beta,
            xi_trace_norm: xi.hermitian_trace_norm(),
            xi_trace: xi.trace().norm(),
            xi_overlap: ctx.ideal.matrix().matmul(&xi).trace().norm(),
        })
    } else {
        None
    };
    Ok(TrajectoryRecord { index, seed, s_u, lambda, rho_l, fidelity, rom, sre, w2, decomposition })
}

/// Encodes `|0...0>` with the encoder drawn from `seed`, applies the noise
/// layer, decodes and postselects the ancillas on `|0...0>`.
pub fn run_trajectory(config: &ProtocolConfig, seed: u64, table: Option<&StabilizerTable>) -> Result<TrajectoryRecord> {
    let ctx = TrajectoryContext::new(config, table)?;
    run_with_context(&ctx, 0, seed)
}

/// Splits an unnormalized logical output into `alpha I/d + beta rho_ideal + xi`.
pub fn decompose_alpha_beta_xi(
    lambda_out: &ComplexMatrix,
    rho_ideal: &DensityMatrix,
) -> Result<(f64, f64, ComplexMatrix)> {
    let d = rho_ideal.dim();
    if d < 2 {
        return Err(Error::InvalidParameter("decomposition needs a logical dimension of at least 2".into()));
    }
    if lambda_out.rows() != d || lambda_out.cols() != d {
        return Err(Error::Dimension(format!("{}x{} output vs logical dim {d}", lambda_out.rows(), lambda_out.cols())));
    }
    let purity: f64 = rho_ideal.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum();
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState("reference state must be pure".into()));
    }
    let df = d as f64;
    let s = lambda_out.trace().re;
    let t = rho_ideal.matrix().matmul(lambda_out).trace().re;
    let alpha = df * (s - t) / (df - 1.0);
    let beta = (df * t - s) / (df - 1.0);
    let mut xi = lambda_out.clone();
    xi.axpy(C64::new(-beta, 0.0), rho_ideal.matrix());
    for i in 0..d {
        xi[(i, i)] -= alpha / df;
    }
    Ok((alpha, beta, xi))
}

/// Outcome of the per-trajectory concentration bound
/// `||rho_U - rho_bar||_1 <= (2(|alpha_U - alpha| + |beta_U - beta|) + ||xi_U||_1) / s_U`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasterInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Ensemble means entering the bound; `rho_bar = (alpha I/d + beta rho_ideal)/(alpha + beta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaBetaMeans {
    pub alpha: f64,
    pub beta: f64,
}

impl AlphaBetaMeans {
    pub fn mean_state(&self, rho_ideal: &DensityMatrix) -> ComplexMatrix {
        let d = rho_ideal.dim();
        let s = self.alpha + self.beta;
        let mut m = rho_ideal.matrix().scale_real(self.beta / s);
        for i in 0..d {
            m[(i, i)] += C64::new(self.alpha / (s * d as f64), 0.0);
        }
        m
    }
}

pub fn master_inequality_check(
    record: &TrajectoryRecord,
    means: AlphaBetaMeans,
    rho_ideal: &DensityMatrix,
) -> Result<MasterInequality> {
    let dec = record
        .decomposition
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("record lacks the alpha/beta/xi decomposition".into()))?;
    let lhs = (record.rho_l.matrix() - &means.mean_state(rho_ideal)).hermitian_trace_norm();
    let rhs = (2.0 * ((dec.alpha - means.alpha).abs() + (dec.beta - means.beta).abs()) + dec.xi_trace_norm) / record.s_u;
    Ok(MasterInequality { lhs, rhs, satisfied: lhs <= rhs + 1e-9 })
}
