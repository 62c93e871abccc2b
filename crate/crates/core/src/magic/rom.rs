//! Robustness of magic as an l1-minimizing linear program over stabilizer
//! states, in the Pauli-expectation basis.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::simplex::{L1Simplex, SolveStatus};
use crate::clifford::{for_each_stabilizer_state, pauli_support, StabilizerTable};
use crate::error::{Error, Result};
use crate::qcore::{bloch_vector, from_pauli_expectations, pauli_expectations, DensityMatrix, C64};

/// Largest system accepted by [`rom_column_generation`].
pub const MAX_COLUMN_GENERATION_QUBITS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RomStatus {
    Optimal,
    ToleranceLimited,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RomResult {
    pub value: f64,
    /// `(stabilizer index, signed weight)`, sorted by index.
    pub decomposition: Vec<(usize, f64)>,
    pub status: RomStatus,
    /// Largest violation of the Pauli equality constraints.
    pub residual: f64,
}

impl RomResult {
    pub fn weight_sum(&self) -> f64 {
        self.decomposition.iter().map(|(_, x)| x).sum()
    }

    /// True when no decomposition weight is negative beyond `tol`.
    pub fn is_convex(&self, tol: f64) -> bool {
        self.decomposition.iter().all(|&(_, x)| x >= -tol)
    }
}

/// The LP `min sum_i |x_i|` s.t. `sum_i x_i b_i = rhs`, borrowing its columns.
#[derive(Clone, Debug)]
pub struct LpProblem<'a> {
    n_qubits: usize,
    columns: Vec<Cow<'a, [(u32, i8)]>>,
    rhs: Vec<f64>,
}

impl<'a> LpProblem<'a> {
    pub fn new(rho: &DensityMatrix, table: &'a StabilizerTable) -> Result<Self> {
        if table.n_qubits() != rho.n_qubits() {
            return Err(Error::Dimension(format!(
                "state on {} qubits, table on {}",
                rho.n_qubits(),
                table.n_qubits()
            )));
        }
        let rhs = pauli_expectations(rho)?;
        let columns = table.supports().iter().map(|c| Cow::Borrowed(c.as_slice())).collect();
        Ok(Self { n_qubits: rho.n_qubits(), columns, rhs })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    /// Sparse signed column `i`.
    pub fn column(&self, i: usize) -> &[(u32, i8)] {
        &self.columns[i]
    }

    /// Writes the problem in CPLEX LP text format with split variables
    /// `xp_i`, `xm_i` and one equality row per Pauli string.
    pub fn write_lp(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "\\ robustness of magic, {} qubits", self.n_qubits)?;
        writeln!(out, "Minimize")?;
        write!(out, " obj:")?;
        for i in 0..self.columns.len() {
            write!(out, " + xp_{i} + xm_{i}")?;
            if i % 8 == 7 {
                writeln!(out)?;
            }
        }
        writeln!(out)?;
        writeln!(out, "Subject To")?;
        let mut rows: Vec<Vec<(usize, i8)>> = vec![Vec::new(); self.rhs.len()];
        for (i, col) in self.columns.iter().enumerate() {
            for &(r, s) in col.iter() {
                rows[r as usize].push((i, s));
            }
        }
        for (r, entries) in rows.iter().enumerate() {
            write!(out, " p{r}:")?;
            if entries.is_empty() {
                write!(out, " 0 xp_0")?;
            }
            for (t, &(i, s)) in entries.iter().enumerate() {
                let (a, b) = if s > 0 { ('+', '-') } else { ('-', '+') };
                write!(out, " {a} xp_{i} {b} xm_{i}")?;
                if t % 8 == 7 {
                    writeln!(out)?;
                }
            }
            writeln!(out, " = {:.17e}", self.rhs[r])?;
        }
        writeln!(out, "End")
    }
}

fn finish(lp: &L1Simplex<'_>, status: SolveStatus, index_of: impl Fn(usize) -> usize) -> RomResult {
    let local = lp.solution();
    let residual = lp.residual(&local);
    let mut decomposition: Vec<(usize, f64)> = local.into_iter().map(|(j, x)| (index_of(j), x)).collect();
    decomposition.sort_by_key(|&(i, _)| i);
    let value = decomposition.iter().map(|(_, x)| x.abs()).sum();
    RomResult {
        value,
        decomposition,
        status: match status {
            SolveStatus::Optimal => RomStatus::Optimal,
            SolveStatus::IterationLimit => RomStatus::ToleranceLimited,
        },
        residual,
    }
}

/// Exact robustness of magic over every stabilizer state in `table`.
pub fn rom_exact(rho: &DensityMatrix, table: &StabilizerTable) -> Result<RomResult> {
    let problem = LpProblem::new(rho, table)?;
    let mut lp = L1Simplex::new(problem.rhs, problem.columns);
    let keys = start_keys(table.n_qubits());
    let mut start = vec![usize::MAX; keys.len()];
    for i in 0..table.len() {
        if let Some(&slot) = keys.get(&amplitude_key(table.state(i))) {
            start[slot] = i;
        }
    }
    let status = if start.iter().all(|&i| i != usize::MAX) { lp.solve_from_basis(&start)? } else { lp.solve()? };
    Ok(finish(&lp, status, |j| j))
}

/// `max(1, |r_x| + |r_y| + |r_z|)`: the single-qubit robustness, exact
/// because the single-qubit stabilizer polytope is the octahedron.
pub fn rom_single_qubit_oracle(rho: &DensityMatrix) -> Result<f64> {
    if rho.n_qubits() != 1 {
        return Err(Error::Dimension(format!("oracle needs 1 qubit, got {}", rho.n_qubits())));
    }
    Ok(bloch_vector(rho)?.l1_norm().max(1.0))
}

/// Candidate columns for [`rom_column_generation`].
#[derive(Clone, Copy, Debug)]
pub enum StabilizerSource<'a> {
    /// A precomputed table; decomposition indices refer to table rows.
    Table(&'a StabilizerTable),
    /// On-the-fly enumeration; indices follow [`for_each_stabilizer_state`] order.
    Stream { n_qubits: usize },
}

impl StabilizerSource<'_> {
    fn n_qubits(&self) -> usize {
        match self {
            StabilizerSource::Table(t) => t.n_qubits(),
            StabilizerSource::Stream { n_qubits } => *n_qubits,
        }
    }
}

/// Initial restricted column set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitialColumns {
    /// Products of single-qubit octahedron vertices (`6^N` states); their
    /// computational-basis subset decomposes the maximally mixed state.
    #[default]
    ProductFrame,
    /// Products of `|0>, |1>, |+>, |+i>` (`4^N` states), exactly a basis of
    /// the operator space.
    MinimalBasis,
}

fn amplitude_key(psi: &[C64]) -> Vec<(i64, i64)> {
    psi.iter().map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64)).collect()
}

/// Products of `|0>, |1>, |+>, |+i>`: their Pauli vectors are linearly
/// independent, so they form a nonsingular starting basis.
fn start_keys(n: usize) -> HashMap<Vec<(i64, i64)>, usize> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    let singles = [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(s, 0.0), c(s, 0.0)],
        [c(s, 0.0), c(0.0, s)],
    ];
    product_keys(n, &singles).into_iter().enumerate().map(|(i, k)| (k, i)).collect()
}

fn product_keys(n: usize, singles: &[[C64; 2]]) -> Vec<Vec<(i64, i64)>> {
    let mut states: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0)]];
    for _ in 0..n {
        states = states
            .iter()
            .flat_map(|v| {
                singles.iter().map(move |q| {
                    let mut out = Vec::with_capacity(v.len() * 2);
                    for a in v {
                        out.push(a * q[0]);
                        out.push(a * q[1]);
                    }
                    out
                })
            })
            .collect();
    }
    states
        .into_iter()
        .map(|mut v| {
            crate::clifford::canonicalize_phase(&mut v);
            amplitude_key(&v)
        })
        .collect()
}

fn initial_keys(n: usize, init: InitialColumns) -> HashSet<Vec<(i64, i64)>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    let singles: Vec<[C64; 2]> = match init {
        InitialColumns::ProductFrame => vec![
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(s, 0.0), c(s, 0.0)],
            [c(s, 0.0), c(-s, 0.0)],
            [c(s, 0.0), c(0.0, s)],
            [c(s, 0.0), c(0.0, -s)],
        ],
        InitialColumns::MinimalBasis => vec![
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(s, 0.0), c(s, 0.0)],
            [c(s, 0.0), c(0.0, s)],
        ],
    };
    product_keys(n, &singles).into_iter().collect()
}

/// Visits `(index, state, pauli support)` for every candidate.
fn scan(source: StabilizerSource<'_>, mut visit: impl FnMut(usize, &[C64], Option<&[(u32, i8)]>)) {
    match source {
        StabilizerSource::Table(t) => {
            for i in 0..t.len() {
                visit(i, t.state(i), Some(t.support(i)));
            }
        }
        StabilizerSource::Stream { n_qubits } => {
            let mut i = 0usize;
            for_each_stabilizer_state(n_qubits, |psi| {
                visit(i, psi, None);
                i += 1;
            });
        }
    }
}

/// Robustness of magic by column generation: solves restricted LPs and adds
/// stabilizer states whose dual constraint `|y . b_s| <= 1` is violated.
pub fn rom_column_generation(
    rho: &DensityMatrix,
    source: StabilizerSource<'_>,
    init: InitialColumns,
) -> Result<RomResult> {
    let n = source.n_qubits();
    if n != rho.n_qubits() {
        return Err(Error::Dimension(format!("state on {} qubits, source on {n}", rho.n_qubits())));
    }
    if n > MAX_COLUMN_GENERATION_QUBITS {
        return Err(Error::Capacity(format!("column generation supports N <= {MAX_COLUMN_GENERATION_QUBITS}")));
    }
    column_generation(pauli_expectations(rho)?, source, init)
}

fn column_generation(rhs: Vec<f64>, source: StabilizerSource<'_>, init: InitialColumns) -> Result<RomResult> {
    let n = source.n_qubits();
    let keys = initial_keys(n, init);
    let basis_keys = start_keys(n);
    let mut start = vec![usize::MAX; basis_keys.len()];
    let mut index_of: Vec<usize> = Vec::new();
    let mut columns: Vec<Cow<'_, [(u32, i8)]>> = Vec::new();
    scan(source, |i, psi, support| {
        let key = amplitude_key(psi);
        if keys.contains(&key) {
            if let Some(&slot) = basis_keys.get(&key) {
                start[slot] = columns.len();
            }
            index_of.push(i);
            columns.push(match support {
                Some(s) => Cow::Owned(s.to_vec()),
                None => Cow::Owned(pauli_support(psi, n)),
            });
        }
    });
    let mut included: HashSet<usize> = index_of.iter().copied().collect();
    let mut lp = L1Simplex::new(rhs, columns);
    let batch = 4 * (1usize << (2 * n));
    let max_rounds = 500;
    let crash = start.iter().all(|&i| i != usize::MAX);
    let mut status = SolveStatus::Optimal;
    for round in 0..max_rounds {
        // the first restricted problem goes through the dual phase; later
        // rounds re-optimize the previous basis
        status = if crash && round == 0 { lp.solve_from_basis(&start)? } else { lp.solve()? };
        if status == SolveStatus::IterationLimit {
            break;
        }
        let y = lp.phase_two_duals();
        let ymat = from_pauli_expectations(&y, n).scale_real((1usize << n) as f64);
        let mut violators: Vec<(f64, usize, Vec<(u32, i8)>)> = Vec::new();
        scan(source, |i, psi, support| {
            if included.contains(&i) {
                return;
            }
            let score = match support {
                Some(s) => s.iter().map(|&(r, v)| y[r as usize] * f64::from(v)).sum::<f64>(),
                None => quadratic_form(&ymat, psi),
            };
            if score.abs() > 1.0 + 1e-9 {
                let s = match support {
                    Some(s) => s.to_vec(),
                    None => pauli_support(psi, n),
                };
                violators.push((score.abs(), i, s));
            }
        });
        if violators.is_empty() {
            let map: HashMap<usize, usize> = index_of.iter().copied().enumerate().collect();
            return Ok(finish(&lp, status, |j| map[&j]));
        }
        violators.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        violators.truncate(batch);
        for (_, i, s) in violators {
            included.insert(i);
            index_of.push(i);
            lp.add_column(Cow::Owned(s));
        }
    }
    let map: HashMap<usize, usize> = index_of.iter().copied().enumerate().collect();
    let mut res = finish(&lp, status, |j| map[&j]);
    res.status = RomStatus::ToleranceLimited;
    Ok(res)
}

/// `Re <psi|M|psi>` restricted to the support of `psi`.
fn quadratic_form(m: &crate::qcore::ComplexMatrix, psi: &[C64]) -> f64 {
    let support: Vec<usize> = (0..psi.len()).filter(|&x| psi[x].norm_sqr() > 1e-12).collect();
    let mut acc = C64::new(0.0, 0.0);
    for &a in &support {
        for &b in &support {
            acc += psi[a].conj() * m[(a, b)] * psi[b];
        }
    }
    acc.re
}
