//! Noise models as Kraus channels, and their local application to
//! multi-qubit density matrices.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::qcore::{apply_1q_left, apply_1q_right_adjoint, to_2x2, ComplexMatrix, DensityMatrix, Pauli};

pub const COMPLETENESS_TOL: f64 = 1e-12;
/// Kraus operators with Frobenius norm below this are dropped by [`compose`].
pub const PRUNE_TOL: f64 = 1e-14;

/// A CPTP map `rho -> sum_i K_i rho K_i^dag` on `n_qubits_acted` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausChannel {
    n_qubits_acted: usize,
    kraus_ops: Vec<ComplexMatrix>,
    label: String,
    params: Vec<(String, f64)>,
}

impl KrausChannel {
    pub fn new(kraus_ops: Vec<ComplexMatrix>, label: impl Into<String>, params: Vec<(String, f64)>) -> Result<Self> {
        let first = kraus_ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one Kraus operator".into()))?;
        let dim = first.rows();
        if !dim.is_power_of_two() {
            return Err(Error::Dimension(format!("Kraus dimension {dim} is not a power of two")));
        }
        for k in &kraus_ops {
            if k.rows() != dim || k.cols() != dim {
                return Err(Error::Dimension("Kraus operators of unequal shape".into()));
            }
            if !k.is_finite() {
                return Err(Error::InvalidParameter("non-finite Kraus operator".into()));
            }
        }
        let ch = Self { n_qubits_acted: dim.trailing_zeros() as usize, kraus_ops, label: label.into(), params };
        let defect = ch.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::InvalidParameter(format!(
                "Kraus set of '{}' is not trace preserving (defect {defect:e})",
                ch.label
            )));
        }
        Ok(ch)
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits_acted: n_qubits,
            kraus_ops: vec![ComplexMatrix::identity(1 << n_qubits)],
            label: "identity".into(),
            params: vec![],
        }
    }

    pub fn n_qubits_acted(&self) -> usize {
        self.n_qubits_acted
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }

    /// `max |sum_i K_i^dag K_i - I|`
    pub fn completeness_defect(&self) -> f64 {
        let dim = 1 << self.n_qubits_acted;
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for k in &self.kraus_ops {
            acc.axpy(C64::new(1.0, 0.0), &k.adjoint().matmul(k));
        }
        acc.max_abs_diff(&ComplexMatrix::identity(dim))
    }

    /// Applies the channel to a state of exactly `n_qubits_acted` qubits.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits() != self.n_qubits_acted {
            return Err(Error::Dimension(format!(
                "{}-qubit channel on {}-qubit state",
                self.n_qubits_acted,
                rho.n_qubits()
            )));
        }
        let dim = rho.dim();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for k in &self.kraus_ops {
            out.axpy(C64::new(1.0, 0.0), &k.matmul(rho.matrix()).matmul(&k.adjoint()));
        }
        DensityMatrix::from_matrix_unchecked(out)
    }

    fn ensure_single_qubit(&self) -> Result<()> {
        if self.n_qubits_acted != 1 {
            return Err(Error::Dimension(format!(
                "local application needs a single-qubit channel, '{}' acts on {}",
                self.label, self.n_qubits_acted
            )));
        }
        Ok(())
    }
}

/// Global depolarizing map `rho -> p I / 2^N + (1 - p) rho`, stored as an
/// affine map rather than a `4^N`-element Kraus set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalDepolarizing {
    p: f64,
}

impl GlobalDepolarizing {
    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        self.apply_matrix(rho.matrix())
            .and_then(DensityMatrix::from_matrix_unchecked)
            .expect("square power-of-two input")
    }

    pub(crate) fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = m.rows();
        let mut out = m.scale_real(1.0 - self.p);
        let shift = self.p * m.trace().re / d as f64;
        for i in 0..d {
            out[(i, i)] += shift;
        }
        Ok(out)
    }
}

pub fn depolarizing_global(p: f64) -> Result<GlobalDepolarizing> {
    check_probability("p", p)?;
    Ok(GlobalDepolarizing { p })
}

/// Single-qubit Pauli channel `{sqrt(1-3p/4) I, sqrt(p/4) X, sqrt(p/4) Y, sqrt(p/4) Z}`.
/// Coincides with [`depolarizing_global`] only on one qubit.
pub fn depolarizing_local(p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let w0 = (1.0 - 0.75 * p).sqrt();
    let w = (0.25 * p).sqrt();
    let ops = vec![
        Pauli::I.matrix().scale_real(w0),
        Pauli::X.matrix().scale_real(w),
        Pauli::Y.matrix().scale_real(w),
        Pauli::Z.matrix().scale_real(w),
    ];
    KrausChannel::new(ops, "depolarizing", vec![("p".into(), p)])
}

fn ad_ops(p: f64) -> [ComplexMatrix; 2] {
    [
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - p).sqrt()]]),
        ComplexMatrix::from_real_rows(&[&[0.0, p.sqrt()], &[0.0, 0.0]]),
    ]
}

/// Amplitude damping: `K0 = diag(1, sqrt(1-p))`, `K1 = sqrt(p) |0><1|`.
pub fn amplitude_damping(p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    KrausChannel::new(ad_ops(p).to_vec(), "amplitude_damping", vec![("p".into(), p)])
}

/// Generalized amplitude damping with temperature parameter `eta`; `eta = 1`
/// is zero-temperature amplitude damping. Zero-weight operators are dropped.
pub fn gadc(p: f64, eta: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    check_probability("eta", eta)?;
    let [k0, k1] = ad_ops(p);
    let k2 = ComplexMatrix::from_real_rows(&[&[(1.0 - p).sqrt(), 0.0], &[0.0, 1.0]]);
    let k3 = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[p.sqrt(), 0.0]]);
    let (a, b) = (eta.sqrt(), (1.0 - eta).sqrt());
    let ops: Vec<_> = [k0.scale_real(a), k1.scale_real(a), k2.scale_real(b), k3.scale_real(b)]
        .into_iter()
        .filter(|k| k.frobenius_norm() >= PRUNE_TOL)
        .collect();
    KrausChannel::new(ops, "gadc", vec![("p".into(), p), ("eta".into(), eta)])
}

/// `e^{-i alpha Z / 2}` as a 2x2 matrix.
pub fn z_rotation_matrix(alpha: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = C64::from_polar(1.0, -alpha / 2.0);
    m[(1, 1)] = C64::from_polar(1.0, alpha / 2.0);
    m
}

pub fn z_rotation(alpha: f64) -> Result<KrausChannel> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
    }
    KrausChannel::new(vec![z_rotation_matrix(alpha)], "z_rotation", vec![("alpha".into(), alpha)])
}

/// Amplitude damping followed by a coherent Z rotation: `K~_i = e^{-i alpha Z/2} K_i`.
pub fn mixed_error(p: f64, alpha: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha}")));
    }
    let r = z_rotation_matrix(alpha);
    let ops = ad_ops(p).iter().map(|k| r.matmul(k)).collect();
    KrausChannel::new(ops, "mixed_error", vec![("p".into(), p), ("alpha".into(), alpha)])
}

/// `second o first` as an eager Kraus product, pruning negligible operators.
pub fn compose(first: &KrausChannel, second: &KrausChannel) -> Result<KrausChannel> {
    if first.n_qubits_acted != second.n_qubits_acted {
        return Err(Error::Dimension("composing channels on different qubit counts".into()));
    }
    let mut ops = Vec::with_capacity(first.kraus_ops.len() * second.kraus_ops.len());
    for b in &second.kraus_ops {
        for a in &first.kraus_ops {
            let k = b.matmul(a);
            if k.frobenius_norm() >= PRUNE_TOL {
                ops.push(k);
            }
        }
    }
    let mut params = first.params.clone();
    params.extend(second.params.iter().cloned());
    KrausChannel::new(ops, format!("{}*{}", second.label, first.label), params)
}

fn check_targets(targets: &[usize], n: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::IndexOutOfRange(format!("target qubit {t} on {n} qubits")));
        }
        if targets[..i].contains(&t) {
            return Err(Error::InvalidParameter(format!("duplicate target qubit {t}")));
        }
    }
    Ok(())
}

/// Applies a single-qubit channel to one qubit of a raw `2^n` matrix.
pub(crate) fn apply_on_qubit(ops: &[[[C64; 2]; 2]], m: &ComplexMatrix, q: usize, n: usize) -> ComplexMatrix {
    if ops.len() == 1 {
        let mut out = m.clone();
        apply_1q_left(&mut out, &ops[0], q, n);
        apply_1q_right_adjoint(&mut out, &ops[0], q, n);
        return out;
    }
    let mut acc = ComplexMatrix::zeros(m.rows(), m.cols());
    for op in ops {
        let mut t = m.clone();
        apply_1q_left(&mut t, op, q, n);
        apply_1q_right_adjoint(&mut t, op, q, n);
        acc.axpy(C64::new(1.0, 0.0), &t);
    }
    acc
}

pub(crate) fn ops_2x2(channel: &KrausChannel) -> Vec<[[C64; 2]; 2]> {
    channel.kraus_ops.iter().map(to_2x2).collect()
}

/// Tensor-product channel acting independently on each target qubit.
pub fn apply_local(channel: &KrausChannel, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix> {
    channel.ensure_single_qubit()?;
    let n = rho.n_qubits();
    check_targets(targets, n)?;
    let ops = ops_2x2(channel);
    let mut m = rho.matrix().clone();
    for &q in targets {
        m = apply_on_qubit(&ops, &m, q, n);
    }
    DensityMatrix::from_matrix_unchecked(m)
}

/// Applies the channel to every qubit.
pub fn apply_all(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let targets: Vec<usize> = (0..rho.n_qubits()).collect();
    apply_local(channel, rho, &targets)
}

/// Single Kraus branch `K_j rho K_j^dag` with `K_j = (x)_t K_{j_t}` on the targets.
/// The trace of the result is the branch probability.
pub fn selective_apply(
    channel: &KrausChannel,
    rho: &DensityMatrix,
    targets: &[usize],
    kraus_indices: &[usize],
) -> Result<ComplexMatrix> {
    channel.ensure_single_qubit()?;
    let n = rho.n_qubits();
    check_targets(targets, n)?;
    if targets.len() != kraus_indices.len() {
        return Err(Error::InvalidParameter(format!(
            "{} Kraus indices for {} targets",
            kraus_indices.len(),
            targets.len()
        )));
    }
    let ops = ops_2x2(channel);
    let mut m = rho.matrix().clone();
    for (&q, &j) in targets.iter().zip(kraus_indices) {
        let op = ops
            .get(j)
            .ok_or_else(|| Error::IndexOutOfRange(format!("Kraus index {j} of {}", ops.len())))?;
        apply_1q_left(&mut m, op, q, n);
        apply_1q_right_adjoint(&mut m, op, q, n);
    }
    Ok(m)
}
