use serde::{Deserialize, Serialize};

use crate::channels::{amplitude_damping, selective_apply};
use crate::error::{check_probability, Result};
use crate::qcore::{ComplexMatrix, DensityMatrix, C64};

/// Result of the no-click protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoClick {
    /// Heralded single-qubit state, phase fixed so the first amplitude is real.
    pub state: Vec<C64>,
    /// Probability of the no-click (`K_0`) branch.
    pub probability: f64,
    /// Probabilities of the `+` and `-` X-basis outcomes within the branch.
    pub outcome_probabilities: [f64; 2],
    /// Trace distance between the corrected states of the two outcomes.
    pub outcome_mismatch: f64,
}

/// Dominant column of a rank-one density matrix as a state vector.
fn rank_one_vector(m: &ComplexMatrix) -> Vec<C64> {
    let d = m.rows();
    let j = (0..d).max_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re)).unwrap_or(0);
    let norm = m[(j, j)].re.sqrt();
    let mut v: Vec<C64> = (0..d).map(|i| m[(i, j)] / norm).collect();
    crate::clifford::canonicalize_phase(&mut v);
    v
}

/// Prepares a Bell pair, keeps the no-click branch of amplitude damping on
/// the system qubit, measures it in the X basis and applies a Z correction
/// to the partner on the `-` outcome.
pub fn no_click_distill(p: f64) -> Result<NoClick> {
    check_probability("p", p)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let bell = [C64::new(h, 0.0), z, z, C64::new(h, 0.0)];
    let rho = DensityMatrix::from_pure(&bell)?;
    let branch = selective_apply(&amplitude_damping(p)?, &rho, &[0], &[0])?;
    let probability = branch.trace().re;
    let mut outs: Vec<ComplexMatrix> = Vec::with_capacity(2);
    let mut probs = [0.0; 2];
    for (o, sign) in [1.0, -1.0].into_iter().enumerate() {
        // <b|_S M |b>_S with |b> = (|0> + sign |1>)/sqrt2 on the system qubit
        let mut red = ComplexMatrix::zeros(2, 2);
        for a in 0..2 {
            for c in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for s1 in 0..2 {
                    for s2 in 0..2 {
                        let w = if (s1 + s2) % 2 == 1 { sign } else { 1.0 } * 0.5;
                        acc += branch[(s1 * 2 + a, s2 * 2 + c)] * w;
                    }
                }
                red[(a, c)] = acc;
            }
        }
        if o == 1 {
            red[(0, 1)] = -red[(0, 1)];
            red[(1, 0)] = -red[(1, 0)];
        }
        let pr = red.trace().re;
        probs[o] = pr / probability;
        outs.push(red.scale_real(1.0 / pr));
    }
    let outcome_mismatch = 0.5 * (&outs[0] - &outs[1]).hermitian_trace_norm();
    Ok(NoClick { state: rank_one_vector(&outs[0]), probability, outcome_probabilities: probs, outcome_mismatch })
}
