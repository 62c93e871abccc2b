use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as PSD; absorbs rounding from ~4N gate layers.
pub const PSD_FLOOR: f64 = -1e-9;

/// Hermitian, unit-trace, positive semidefinite `2^N x 2^N` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(mat)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Checks only the shape; callers guarantee the physical invariants
    /// (channel outputs, normalized postselected blocks).
    pub fn from_matrix_unchecked(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() || !mat.rows().is_power_of_two() {
            return Err(Error::Dimension(format!(
                "density matrix must be 2^N square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let n_qubits = mat.rows().trailing_zeros() as usize;
        Ok(Self { n_qubits, mat })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mat.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let h = self.mat.hermiticity_defect();
        if h > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {h:e})")));
        }
        let tr = self.mat.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < PSD_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(())
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector norm^2 {norm} != 1")));
        }
        Self::from_matrix_unchecked(ComplexMatrix::outer(psi, psi))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        Self { n_qubits: n, mat: ComplexMatrix::identity(d).scale_real(1.0 / d as f64) }
    }

    /// `|x><x|` for a computational basis index `x`.
    pub fn basis(n: usize, x: usize) -> Self {
        let d = 1usize << n;
        let mut mat = ComplexMatrix::zeros(d, d);
        mat[(x, x)] = C64::new(1.0, 0.0);
        Self { n_qubits: n, mat }
    }

    pub fn zero_state(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// Tensor product `self (x) other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { n_qubits: self.n_qubits + other.n_qubits, mat: self.mat.kron(&other.mat) }
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension("mixing states of different size".into()));
        }
        let mut mat = self.mat.scale_real(w);
        mat.axpy(C64::new(1.0 - w, 0.0), &other.mat);
        Ok(Self { n_qubits: self.n_qubits, mat })
    }

    /// `U rho U^dag`
    pub fn conjugate(&self, u: &ComplexMatrix) -> Self {
        Self { n_qubits: self.n_qubits, mat: u.matmul(&self.mat).matmul(&u.adjoint()) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.mat.hermitian_eigenvalues()[0]
    }
}

/// Single-qubit Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl BlochVector {
    pub fn new(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let v = Self { rx, ry, rz };
        if !(rx.is_finite() && ry.is_finite() && rz.is_finite()) || v.norm_sqr() > 1.0 + 1e-9 {
            return Err(Error::InvalidState(format!("Bloch vector ({rx}, {ry}, {rz}) outside the unit ball")));
        }
        Ok(v)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.rx * self.rx + self.ry * self.ry + self.rz * self.rz
    }

    pub fn l1_norm(&self) -> f64 {
        self.rx.abs() + self.ry.abs() + self.rz.abs()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        ((self.rx - other.rx).powi(2) + (self.ry - other.ry).powi(2) + (self.rz - other.rz).powi(2)).sqrt()
    }
}

pub fn bloch_vector(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.n_qubits() != 1 {
        return Err(Error::Dimension(format!("Bloch vector needs one qubit, got {}", rho.n_qubits())));
    }
    let m = rho.matrix();
    let r = |p: Pauli| PauliString::new(vec![p]).matrix().matmul(m).trace().re;
    Ok(BlochVector { rx: r(Pauli::X), ry: r(Pauli::Y), rz: r(Pauli::Z) })
}

pub fn from_bloch(v: BlochVector) -> Result<DensityMatrix> {
    let v = BlochVector::new(v.rx, v.ry, v.rz)?;
    let h = 0.5;
    let mat = ComplexMatrix::from_vec(
        2,
        2,
        vec![
            C64::new(h * (1.0 + v.rz), 0.0),
            C64::new(h * v.rx, -h * v.ry),
            C64::new(h * v.rx, h * v.ry),
            C64::new(h * (1.0 - v.rz), 0.0),
        ],
    )?;
    DensityMatrix::from_matrix_unchecked(mat)
}

fn same_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("{} vs {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `(1/2) sum |eig(a - b)|`
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    Ok(0.5 * trace_norm_distance(a, b)?)
}

/// Unhalved trace norm `||a - b||_1`.
pub fn trace_norm_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    same_dims(a, b)?;
    Ok((a.matrix() - b.matrix()).hermitian_trace_norm())
}

/// Hilbert-Schmidt (Frobenius) distance `||a - b||_2`.
pub fn hs_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    same_dims(a, b)?;
    Ok((a.matrix() - b.matrix()).frobenius_norm())
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    rho.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// `<psi|rho|psi>`
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &[C64]) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::Dimension(format!("state of length {} vs dim {}", psi.len(), rho.dim())));
    }
    Ok(rho.matrix().sandwich(psi, psi).re)
}

/// Success probabilities below this are treated as a measure-zero branch.
pub const POSTSELECTION_FLOOR: f64 = 1e-14;

/// Unnormalized block `<0_A| M |0_A>` with the logical block on qubits `0..k`
/// and the ancillas on the trailing qubits.
pub fn ancilla_zero_block(m: &ComplexMatrix, n: usize, k: usize) -> Result<ComplexMatrix> {
    if k > n || m.rows() != 1usize << n {
        return Err(Error::Dimension(format!("cannot keep {k} of {n} qubits")));
    }
    let shift = n - k;
    let dl = 1usize << k;
    Ok(ComplexMatrix::from_fn(dl, dl, |i, j| m[(i << shift, j << shift)]))
}

/// Projects the ancilla block onto `|0...0>` and renormalizes. Returns the
/// logical state and the success probability.
pub fn postselect_ancillas(rho: &DensityMatrix, n_logical: usize) -> Result<(DensityMatrix, f64)> {
    let block = ancilla_zero_block(rho.matrix(), rho.n_qubits(), n_logical)?;
    let s = block.trace().re;
    if s < POSTSELECTION_FLOOR {
        return Err(Error::PostselectionImpossible(s));
    }
    Ok((DensityMatrix::from_matrix_unchecked(block.scale_real(1.0 / s))?, s))
}
