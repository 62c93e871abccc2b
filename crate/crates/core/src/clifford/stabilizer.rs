use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qcore::{pauli_expectations_pure, PauliAction};

/// Largest qubit count for which a full table is materialized.
pub const MAX_TABLE_QUBITS: usize = 4;

/// `|S_N| = 2^N prod_{i=1}^N (2^i + 1)`.
pub fn stabilizer_state_count(n: usize) -> u128 {
    (1..=n as u32).fold(1u128 << n, |acc, i| acc * ((1u128 << i) + 1))
}

/// Number of `d`-dimensional subspaces of `F_2^n` (Gaussian binomial at q = 2).
pub fn gaussian_binomial2(n: usize, d: usize) -> u128 {
    if d > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..d {
        num *= (1u128 << (n - i)) - 1;
        den *= (1u128 << (i + 1)) - 1;
    }
    num / den
}

/// States contributed by affine subspaces of dimension `d`:
/// `[n choose d]_2 * 2^(n-d) * 2^(d(d+3)/2)`.
pub fn states_of_dimension(n: usize, d: usize) -> u128 {
    gaussian_binomial2(n, d) * (1u128 << (n - d)) * (1u128 << (d * (d + 3) / 2))
}

fn combinations(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, d, &mut Vec::new(), &mut out);
    out
}

/// Visits every pure `n`-qubit stabilizer state exactly once, in a fixed
/// order, as a dense phase-canonical vector
/// `|psi> ~ sum_{x in A} i^{l(x)} (-1)^{q(x)} |x>` over affine subspaces `A`
/// (reduced row-echelon generators, coset representative zero on pivots),
/// quadratic forms `q` and linear forms `l`.
pub fn for_each_stabilizer_state(n: usize, mut visit: impl FnMut(&[C64])) {
    let dim = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    let mut points: Vec<usize> = Vec::with_capacity(dim);
    for d in 0..=n {
        let amp = 1.0 / ((1usize << d) as f64).sqrt();
        let n_pairs = d * d.saturating_sub(1) / 2;
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        for pivots in combinations(n, d) {
            let non_pivots: Vec<usize> = (0..n).filter(|q| !pivots.contains(q)).collect();
            // free slots: (row, position) with position a non-pivot after the row's pivot
            let free: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(r, &p)| non_pivots.iter().filter(move |&&q| q > p).map(move |&q| (r, q)))
                .collect();
            for fill in 0..1usize << free.len() {
                let mut gens: Vec<usize> = pivots.iter().map(|&p| bit(p)).collect();
                for (b, &(r, q)) in free.iter().enumerate() {
                    if (fill >> b) & 1 == 1 {
                        gens[r] |= bit(q);
                    }
                }
                for coset in 0..1usize << non_pivots.len() {
                    let x0 = non_pivots
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| (coset >> b) & 1 == 1)
                        .fold(0usize, |acc, (_, &q)| acc | bit(q));
                    points.clear();
                    for u in 0..1usize << d {
                        let x = (0..d).filter(|&i| (u >> i) & 1 == 1).fold(x0, |acc, i| acc ^ gens[i]);
                        points.push(x);
                    }
                    for quad in 0..1usize << n_pairs {
                        for lin in 0..1usize << d {
                            for imag in 0..1usize << d {
                                psi.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                                for (u, &x) in points.iter().enumerate() {
                                    let mut sign = (u & lin).count_ones();
                                    for (k, &(i, j)) in pairs.iter().enumerate() {
                                        if (quad >> k) & 1 == 1 && (u >> i) & 1 == 1 && (u >> j) & 1 == 1 {
                                            sign += 1;
                                        }
                                    }
                                    let s = if sign % 2 == 1 { -amp } else { amp };
                                    psi[x] = if (u & imag).count_ones() % 2 == 1 {
                                        C64::new(0.0, s)
                                    } else {
                                        C64::new(s, 0.0)
                                    };
                                }
                                canonicalize_phase(&mut psi);
                                visit(&psi);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Rescales so the first nonzero amplitude is real positive.
pub fn canonicalize_phase(psi: &mut [C64]) {
    if let Some(first) = psi.iter().find(|z| z.norm() > 1e-12).copied() {
        let ph = first.conj() / first.norm();
        psi.iter_mut().for_each(|z| *z *= ph);
    }
}

/// Signed Pauli support `{(j, tr(psi P_j))}` of a stabilizer state.
pub(crate) fn pauli_support(psi: &[C64], n: usize) -> Vec<(u32, i8)> {
    let support: Vec<usize> = (0..psi.len()).filter(|&x| psi[x].norm_sqr() > 1e-12).collect();
    let mut out = Vec::with_capacity(1 << n);
    for j in 0..1usize << (2 * n) {
        let act = PauliAction::from_index(j, n);
        let e: f64 = support
            .iter()
            .map(|&x| (psi[x ^ act.x_mask].conj() * act.phase_on(x) * psi[x]).re)
            .sum();
        if e > 0.5 {
            out.push((j as u32, 1));
        } else if e < -0.5 {
            out.push((j as u32, -1));
        }
    }
    out
}

/// All pure stabilizer states of `n` qubits with their signed Pauli columns.
#[derive(Clone, Debug)]
pub struct StabilizerTable {
    n_qubits: usize,
    states: Vec<Vec<C64>>,
    /// Row-major `|S_N| x 4^N`, entries in {-1, 0, 1}.
    pauli_columns: Vec<i8>,
    support: Vec<Vec<(u32, i8)>>,
}

impl StabilizerTable {
    pub(crate) fn from_states(n: usize, states: Vec<Vec<C64>>) -> Self {
        let width = 1usize << (2 * n);
        let mut pauli_columns = vec![0i8; states.len() * width];
        let mut support = Vec::with_capacity(states.len());
        for (i, psi) in states.iter().enumerate() {
            let s = pauli_support(psi, n);
            for &(j, v) in &s {
                pauli_columns[i * width + j as usize] = v;
            }
            support.push(s);
        }
        Self { n_qubits: n, states, pauli_columns, support }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<C64>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[C64] {
        &self.states[i]
    }

    /// Row `i` of the integer Pauli-column matrix (length `4^N`).
    pub fn pauli_column(&self, i: usize) -> &[i8] {
        let w = 1usize << (2 * self.n_qubits);
        &self.pauli_columns[i * w..(i + 1) * w]
    }

    /// Nonzero entries of [`Self::pauli_column`], i.e. the signed stabilizer group.
    pub fn support(&self, i: usize) -> &[(u32, i8)] {
        &self.support[i]
    }

    pub(crate) fn supports(&self) -> &[Vec<(u32, i8)>] {
        &self.support
    }
}

pub fn enumerate_stabilizer_states(n: usize) -> Result<StabilizerTable> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    if n > MAX_TABLE_QUBITS {
        return Err(Error::Capacity(format!(
            "{n}-qubit stabilizer table ({} states) exceeds the table limit of {MAX_TABLE_QUBITS}; \
             use column generation with a streaming source",
            stabilizer_state_count(n)
        )));
    }
    let mut states = Vec::with_capacity(stabilizer_state_count(n) as usize);
    for_each_stabilizer_state(n, |psi| states.push(psi.to_vec()));
    Ok(StabilizerTable::from_states(n, states))
}

/// True iff exactly `2^N` Pauli expectations are `+-1` and the rest vanish.
pub fn is_stabilizer_state(psi: &[C64]) -> Result<bool> {
    if !psi.len().is_power_of_two() {
        return Err(Error::Dimension(format!("state length {} is not 2^N", psi.len())));
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state vector norm^2 {norm} != 1")));
    }
    let e = pauli_expectations_pure(psi);
    let mut unit = 0;
    for x in &e {
        if (x.abs() - 1.0).abs() < 1e-8 {
            unit += 1;
        } else if x.abs() >= 1e-8 {
            return Ok(false);
        }
    }
    Ok(unit == psi.len())
}
