use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use super::state::DensityMatrix;
use crate::error::{Error, Result};

/// Single-qubit Pauli letter. The discriminant is the base-4 digit used in
/// Pauli-string indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_digit(d: usize) -> Self {
        Self::ALL[d & 3]
    }

    pub fn matrix(self) -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let data = match self {
            Pauli::I => vec![one, o, o, one],
            Pauli::X => vec![o, one, one, o],
            Pauli::Y => vec![o, -i, i, o],
            Pauli::Z => vec![one, o, o, -one],
        };
        ComplexMatrix::from_vec(2, 2, data).expect("2x2")
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn phases(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Tensor product of Pauli letters with +1 phase. Qubit 0 is the most
/// significant base-4 digit of [`PauliString::index`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n] }
    }

    pub fn from_index(index: usize, n: usize) -> Result<Self> {
        if n >= 32 || index >= 1usize << (2 * n) {
            return Err(Error::IndexOutOfRange(format!("Pauli index {index} for {n} qubits")));
        }
        let letters = (0..n).map(|q| Pauli::from_digit(index >> (2 * (n - 1 - q)))).collect();
        Ok(Self { letters })
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn index(&self) -> usize {
        self.letters.iter().fold(0, |acc, &p| acc * 4 + p as usize)
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks and phase data describing the action `P|x> = i^{n_y} (-1)^{|x & z|} |x ^ x_mask>`.
    pub fn action(&self) -> PauliAction {
        PauliAction::from_letters(&self.letters)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.letters
            .iter()
            .fold(ComplexMatrix::identity(1), |acc, p| acc.kron(&p.matrix()))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidParameter(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<_>>()?;
        Ok(Self { letters })
    }
}

/// Bit-level description of a Pauli string's action on computational basis states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    /// Number of Y letters mod 4; the global factor is `i^y_count`.
    pub y_count: u8,
}

impl PauliAction {
    pub fn from_letters(letters: &[Pauli]) -> Self {
        let n = letters.len();
        let mut x_mask = 0;
        let mut z_mask = 0;
        let mut y_count = 0u8;
        for (q, &p) in letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if p.flips() {
                x_mask |= bit;
            }
            if p.phases() {
                z_mask |= bit;
            }
            if p == Pauli::Y {
                y_count = (y_count + 1) & 3;
            }
        }
        Self { x_mask, z_mask, y_count }
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        let mut x_mask = 0;
        let mut z_mask = 0;
        let mut y_count = 0u8;
        for q in 0..n {
            let p = Pauli::from_digit(index >> (2 * (n - 1 - q)));
            let bit = 1usize << (n - 1 - q);
            if p.flips() {
                x_mask |= bit;
            }
            if p.phases() {
                z_mask |= bit;
            }
            if p == Pauli::Y {
                y_count = (y_count + 1) & 3;
            }
        }
        Self { x_mask, z_mask, y_count }
    }

    #[inline]
    pub fn global_phase(&self) -> C64 {
        match self.y_count {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// `P|x> = phase(x) |x ^ x_mask>`
    #[inline]
    pub fn phase_on(&self, x: usize) -> C64 {
        let ph = self.global_phase();
        if (x & self.z_mask).count_ones() % 2 == 1 {
            -ph
        } else {
            ph
        }
    }

    /// `<psi|P|psi>`
    pub fn expectation_pure(&self, psi: &[C64]) -> C64 {
        psi.iter()
            .enumerate()
            .map(|(x, &a)| psi[x ^ self.x_mask].conj() * self.phase_on(x) * a)
            .sum()
    }
}

pub fn pauli_matrix(p: &PauliString) -> ComplexMatrix {
    p.matrix()
}

/// `tr(rho P_j)` for every Pauli string index `j` in base-4 order.
pub fn pauli_expectations(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let defect = rho.matrix().hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::InvalidState(format!("non-Hermitian input (defect {defect:e})")));
    }
    Ok(pauli_expectations_raw(rho.matrix(), rho.n_qubits()))
}

/// Real parts of `tr(M P_j)` for an arbitrary square matrix on `n` qubits.
pub(crate) fn pauli_expectations_raw(m: &ComplexMatrix, n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    let count = 1usize << (2 * n);
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let act = PauliAction::from_index(j, n);
        // tr(M P) = sum_x <x|M P|x> = sum_x phase(x) M[x, x ^ m]
        let mut acc = C64::new(0.0, 0.0);
        for x in 0..dim {
            let v = m[(x, x ^ act.x_mask)];
            if (x & act.z_mask).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        out.push((acc * act.global_phase()).re);
    }
    out
}

/// Pauli-expectation vector of a pure state `|psi>`.
pub fn pauli_expectations_pure(psi: &[C64]) -> Vec<f64> {
    let n = psi.len().trailing_zeros() as usize;
    (0..1usize << (2 * n))
        .map(|j| PauliAction::from_index(j, n).expectation_pure(psi).re)
        .collect()
}

/// Rebuilds `2^-N sum_j e_j P_j` from a Pauli-expectation vector.
pub fn from_pauli_expectations(expectations: &[f64], n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim, dim);
    let norm = 1.0 / dim as f64;
    for (j, &e) in expectations.iter().enumerate() {
        if e == 0.0 {
            continue;
        }
        let act = PauliAction::from_index(j, n);
        // P = sum_x phase(x) |x ^ m><x|
        for x in 0..dim {
            m[(x ^ act.x_mask, x)] += act.phase_on(x) * (e * norm);
        }
    }
    m
}
