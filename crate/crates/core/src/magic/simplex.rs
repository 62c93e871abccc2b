//! Dense revised simplex for the signed-decomposition LP
//!
//! ```text
//! minimize   sum_j (x+_j + x-_j)
//! subject to sum_j (x+_j - x-_j) b_j = rhs,   x+, x- >= 0
//! ```
//!
//! with sparse columns `b_j` whose entries are +-1. The basis inverse is kept
//! explicitly and column-major (rows are Pauli strings, at most `4^N`), with
//! rank-one pivot updates and periodic refactorization.
//!
//! From a crash basis the dual simplex does most of the work, with cost
//! shifting and a Harris ratio test. The primal simplex then removes the
//! shifts. Its pricing keeps the most negative reduced costs and picks the
//! entering variable by steepest edge among them; a run of degenerate
//! pivots switches to Bland's rule until progress resumes.
//!
//! Stabilizer decompositions are highly degenerate, so each solve first runs
//! with every basic value shifted up slightly and then restores the exact
//! right-hand side. Because every basic column may take either sign,
//! restoring it never breaks feasibility: negative basic values are
//! repaired by a sign flip.

use std::borrow::Cow;

use crate::error::{Error, Result};

pub(crate) type SparseColumn<'a> = Cow<'a, [(u32, i8)]>;

const PRICE_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 500;
const CANDIDATES: usize = 48;
const DEGENERATE_RUN_FOR_BLAND: usize = 30;
const PERTURBATION: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    /// Structural column `j`; `true` for the `x+` half.
    Col(usize, bool),
    Art(usize),
}

impl Var {
    fn order_key(self) -> usize {
        match self {
            Var::Col(j, plus) => 2 * j + usize::from(!plus),
            Var::Art(i) => usize::MAX - i,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SolveStatus {
    Optimal,
    IterationLimit,
}

pub(crate) struct L1Simplex<'a> {
    m: usize,
    /// Right-hand side in use: `target` or its perturbation.
    rhs: Vec<f64>,
    target: Vec<f64>,
    columns: Vec<SparseColumn<'a>>,
    art_sign: Vec<f64>,
    /// Temporary cost offsets `c_j = 1 + shift_j` used by the dual phase.
    shift: Vec<f64>,
    basis: Vec<Var>,
    basic_col: Vec<u8>, // bit 0: x+ basic, bit 1: x- basic
    /// `B^-1` stored column-major: entry `(i, k)` at `k * m + i`.
    binv: Vec<f64>,
    xb: Vec<f64>,
    phase_one_done: bool,
    pivots_since_refactor: usize,
    pub(crate) iterations: usize,
    iteration_cap: usize,
}

impl<'a> L1Simplex<'a> {
    pub(crate) fn new(rhs: Vec<f64>, columns: Vec<SparseColumn<'a>>) -> Self {
        let m = rhs.len();
        let target = rhs.clone();
        let art_sign: Vec<f64> = rhs.iter().map(|&r| if r < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = art_sign[i];
        }
        let xb = rhs.iter().map(|r| r.abs()).collect();
        let basic_col = vec![0; columns.len()];
        let shift = vec![0.0; columns.len()];
        Self {
            m,
            rhs,
            target,
            columns,
            art_sign,
            shift,
            basis: (0..m).map(Var::Art).collect(),
            basic_col,
            binv,
            xb,
            phase_one_done: false,
            pivots_since_refactor: 0,
            iterations: 0,
            iteration_cap: 50 * m + 20_000,
        }
    }

    pub(crate) fn add_column(&mut self, col: SparseColumn<'a>) {
        self.columns.push(col);
        self.basic_col.push(0);
        self.shift.push(0.0);
    }

    /// Replaces every structural basic variable with a negative value by its
    /// opposite-sign twin, which negates the matching row of `B^-1`.
    fn repair_signs(&mut self) {
        let m = self.m;
        for i in 0..m {
            if self.xb[i] >= 0.0 {
                continue;
            }
            if let Var::Col(j, plus) = self.basis[i] {
                self.set_basic(Var::Col(j, plus), false);
                self.basis[i] = Var::Col(j, !plus);
                self.set_basic(Var::Col(j, !plus), true);
                self.xb[i] = -self.xb[i];
                for k in 0..m {
                    self.binv[k * m + i] = -self.binv[k * m + i];
                }
            }
        }
    }

    /// Switches the working right-hand side and recomputes `x_B`.
    fn use_rhs(&mut self, rhs: Vec<f64>) -> Result<()> {
        self.rhs = rhs;
        self.refactor()?;
        self.repair_signs();
        Ok(())
    }

    /// Raises every basic value by a small distinct amount, so the current
    /// basis stays feasible and keeps its duals. Artificials are shifted only
    /// when `artificials` is set, since a redundant row cannot absorb it.
    fn perturb(&mut self, artificials: bool) -> Result<()> {
        self.use_rhs(self.target.clone())?;
        let mut rhs = self.target.clone();
        for (&v, eps) in self.basis.iter().zip(offsets(self.m, 1)) {
            if artificials || matches!(v, Var::Col(..)) {
                for (r, a) in self.dense_column(v).into_iter().enumerate() {
                    rhs[r] += eps * a;
                }
            }
        }
        self.use_rhs(rhs)
    }

    fn cost(&self, v: Var, phase_one: bool) -> f64 {
        match (v, phase_one) {
            (Var::Art(_), true) => 1.0,
            (Var::Art(_), false) => 0.0,
            (Var::Col(..), true) => 0.0,
            (Var::Col(j, _), false) => 1.0 + self.shift[j],
        }
    }

    fn set_basic(&mut self, v: Var, on: bool) {
        if let Var::Col(j, plus) = v {
            let bit = if plus { 1 } else { 2 };
            if on {
                self.basic_col[j] |= bit;
            } else {
                self.basic_col[j] &= !bit;
            }
        }
    }

    /// `y = c_B^T B^-1`
    pub(crate) fn duals(&self, phase_one: bool) -> Vec<f64> {
        let m = self.m;
        let cb: Vec<f64> = self.basis.iter().map(|&v| self.cost(v, phase_one)).collect();
        self.binv.chunks_exact(m).map(|col| col.iter().zip(&cb).map(|(a, c)| a * c).sum()).collect()
    }

    /// `B^-1 a_v`
    fn ftran(&self, v: Var) -> Vec<f64> {
        let m = self.m;
        let mut d = vec![0.0; m];
        match v {
            Var::Col(j, plus) => {
                let sgn = if plus { 1.0 } else { -1.0 };
                for &(r, s) in self.columns[j].iter() {
                    let w = sgn * f64::from(s);
                    let col = &self.binv[r as usize * m..(r as usize + 1) * m];
                    for (di, &b) in d.iter_mut().zip(col) {
                        *di += b * w;
                    }
                }
            }
            Var::Art(r) => {
                for (di, &b) in d.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                    *di = b * self.art_sign[r];
                }
            }
        }
        d
    }

    fn pivot(&mut self, row: usize, entering: Var, d: &[f64]) {
        let m = self.m;
        let t = self.xb[row] / d[row];
        for i in 0..m {
            if i != row {
                self.xb[i] -= t * d[i];
                if self.xb[i].abs() < 1e-13 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[row] = t;
        let inv = 1.0 / d[row];
        for col in self.binv.chunks_exact_mut(m) {
            let p = col[row] * inv;
            if p != 0.0 {
                for (x, &di) in col.iter_mut().zip(d) {
                    *x -= di * p;
                }
            }
            col[row] = p;
        }
        let leaving = self.basis[row];
        self.set_basic(leaving, false);
        self.basis[row] = entering;
        self.set_basic(entering, true);
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            // a singular refactorization keeps the updated inverse
            let _ = self.refactor();
        }
    }

    fn dense_column(&self, v: Var) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        match v {
            Var::Col(j, plus) => {
                let sgn = if plus { 1.0 } else { -1.0 };
                for &(r, s) in self.columns[j].iter() {
                    a[r as usize] += sgn * f64::from(s);
                }
            }
            Var::Art(r) => a[r] = self.art_sign[r],
        }
        a
    }

    /// Recomputes `B^-1` by Gauss-Jordan elimination and `x_B = B^-1 rhs`.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        // column-major basis matrix, augmented with identity
        let mut a = vec![0.0; m * m];
        for (k, &v) in self.basis.iter().enumerate() {
            for (r, val) in self.dense_column(v).into_iter().enumerate() {
                a[r * m + k] = val;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (piv, best) = (c..m)
                .map(|r| (r, a[r * m + c].abs()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("nonempty");
            if best < 1e-12 {
                return Err(Error::Lp("singular basis during refactorization".into()));
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let p = 1.0 / a[c * m + c];
            for k in 0..m {
                a[c * m + k] *= p;
                inv[c * m + k] *= p;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        // a is now identity: inv = B^-1 (row-major) with rows indexed by basis position
        let xb: Vec<f64> = (0..m)
            .map(|i| {
                let x: f64 = (0..m).map(|k| inv[i * m + k] * self.rhs[k]).sum();
                if x.abs() < 1e-13 {
                    0.0
                } else {
                    x
                }
            })
            .collect();
        self.xb = xb;
        for i in 0..m {
            for k in 0..m {
                self.binv[k * m + i] = inv[i * m + k];
            }
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn price(&self, y: &[f64], phase_one: bool, bland: bool) -> Option<(Var, f64)> {
        let mut best: Option<(Var, f64)> = None;
        for (j, col) in self.columns.iter().enumerate() {
            let c = if phase_one { 0.0 } else { 1.0 + self.shift[j] };
            let v: f64 = col.iter().map(|&(r, s)| y[r as usize] * f64::from(s)).sum();
            let basic = self.basic_col[j];
            for (plus, dj) in [(true, c - v), (false, c + v)] {
                let bit = if plus { 1 } else { 2 };
                if basic & bit != 0 || dj >= -PRICE_TOL {
                    continue;
                }
                if bland {
                    return Some((Var::Col(j, plus), dj));
                }
                if best.map_or(true, |(_, b)| dj < b) {
                    best = Some((Var::Col(j, plus), dj));
                }
            }
        }
        best
    }

    /// Full pricing that keeps the most negative reduced costs and picks the
    /// entering variable among them by exact steepest-edge weights.
    fn price_steepest(&self, y: &[f64], phase_one: bool) -> Option<(Var, f64)> {
        let mut live: Vec<(Var, f64)> = Vec::new();
        for (j, col) in self.columns.iter().enumerate() {
            let c = if phase_one { 0.0 } else { 1.0 + self.shift[j] };
            let w: f64 = col.iter().map(|&(r, s)| y[r as usize] * f64::from(s)).sum();
            let basic = self.basic_col[j];
            for (plus, dj) in [(true, c - w), (false, c + w)] {
                let bit = if plus { 1 } else { 2 };
                if basic & bit == 0 && dj < -PRICE_TOL {
                    live.push((Var::Col(j, plus), dj));
                }
            }
        }
        if live.len() > CANDIDATES {
            live.select_nth_unstable_by(CANDIDATES, |a, b| a.1.total_cmp(&b.1));
            live.truncate(CANDIDATES);
        }
        live.into_iter()
            .map(|(v, d)| {
                let col = self.ftran(v);
                let w = 1.0 + col.iter().map(|x| x * x).sum::<f64>();
                (v, d, d * d / w)
            })
            .max_by(|a, b| a.2.total_cmp(&b.2).then(b.0.order_key().cmp(&a.0.order_key())))
            .map(|(v, d, _)| (v, d))
    }

    fn ratio_test(&self, d: &[f64], bland: bool, prefer_art: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &di) in d.iter().enumerate() {
            if di <= PIVOT_TOL {
                continue;
            }
            let t = self.xb[i].max(0.0) / di;
            match best {
                None => best = Some((i, t)),
                Some((bi, bt)) => {
                    if t < bt - 1e-12 {
                        best = Some((i, t));
                    } else if t <= bt + 1e-12 {
                        let (cur, cand) = (self.basis[bi], self.basis[i]);
                        let better = if prefer_art && matches!(cand, Var::Art(_)) != matches!(cur, Var::Art(_)) {
                            matches!(cand, Var::Art(_))
                        } else if bland {
                            cand.order_key() < cur.order_key()
                        } else {
                            di > d[bi]
                        };
                        if better {
                            best = Some((i, t.min(bt)));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self, phase_one: bool) -> Result<SolveStatus> {
        let cap = self.iterations + self.iteration_cap;
        let mut degenerate_run = 0usize;
        let mut verified = false;
        loop {
            if self.iterations >= cap {
                return Ok(SolveStatus::IterationLimit);
            }
            let bland = degenerate_run >= DEGENERATE_RUN_FOR_BLAND;
            let y = self.duals(phase_one);
            let priced = if bland { self.price(&y, phase_one, true) } else { self.price_steepest(&y, phase_one) };
            let Some((entering, _)) = priced else {
                if verified {
                    return Ok(SolveStatus::Optimal);
                }
                // confirm optimality on a fresh factorization
                self.refactor()?;
                verified = true;
                continue;
            };
            verified = false;
            let d = self.ftran(entering);
            let row = self
                .ratio_test(&d, bland, phase_one)
                .ok_or_else(|| Error::Lp("unbounded direction in a bounded program".into()))?;
            let step = self.xb[row] / d[row];
            if step.abs() < 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, entering, &d);
            self.iterations += 1;
        }
    }

    fn drive_out_artificials(&mut self) {
        let m = self.m;
        for row in 0..m {
            if !matches!(self.basis[row], Var::Art(_)) {
                continue;
            }
            let brow: Vec<f64> = (0..m).map(|k| self.binv[k * m + row]).collect();
            let mut pick: Option<(usize, f64)> = None;
            for (j, col) in self.columns.iter().enumerate() {
                if self.basic_col[j] != 0 {
                    continue;
                }
                let alpha: f64 = col.iter().map(|&(r, s)| brow[r as usize] * f64::from(s)).sum();
                if alpha.abs() > 1e-7 && pick.map_or(true, |(_, a)| alpha.abs() > a.abs()) {
                    pick = Some((j, alpha));
                    if alpha.abs() > 0.5 {
                        break;
                    }
                }
            }
            // None: redundant row, the artificial stays basic at zero
            if let Some((j, _)) = pick {
                let v = Var::Col(j, true);
                let d = self.ftran(v);
                self.pivot(row, v, &d);
            }
        }
    }

    /// Starts from a basis of structural columns, all with positive sign, and
    /// runs the dual simplex before the primal clean-up of [`Self::solve`].
    /// Such a basis is always dual feasible: every column has `+1` in the
    /// identity row, so `y = e_0` prices every column at exactly zero. Small
    /// random cost shifts break that tie. On a singular choice this falls
    /// back to the primal method from artificials.
    pub(crate) fn solve_from_basis(&mut self, cols: &[usize]) -> Result<SolveStatus> {
        if cols.len() != self.m {
            return Err(Error::Lp(format!("{} starting columns for {} rows", cols.len(), self.m)));
        }
        let saved = (self.basis.clone(), self.binv.clone(), self.xb.clone(), self.rhs.clone());
        self.basis = cols.iter().map(|&j| Var::Col(j, true)).collect();
        self.rhs = self.target.clone();
        if self.refactor().is_err() {
            (self.basis, self.binv, self.xb, self.rhs) = saved;
            return self.solve();
        }
        self.basic_col.iter_mut().for_each(|b| *b = 0);
        for i in 0..self.m {
            self.set_basic(self.basis[i], true);
        }
        self.phase_one_done = true;
        self.shift = offsets(self.columns.len(), 2);
        self.run_dual()?;
        self.shift.iter_mut().for_each(|s| *s = 0.0);
        self.solve()
    }

    /// Raises the shifts of nonbasic columns until no reduced cost is negative.
    fn make_dual_feasible(&mut self, y: &[f64]) {
        let extra = offsets(self.columns.len(), 3);
        for (j, col) in self.columns.iter().enumerate() {
            if self.basic_col[j] != 0 {
                continue;
            }
            let g: f64 = col.iter().map(|&(r, s)| y[r as usize] * f64::from(s)).sum();
            let d = 1.0 + self.shift[j] - g.abs();
            if d < 0.0 {
                self.shift[j] += extra[j] - d;
            }
        }
    }

    fn run_dual(&mut self) -> Result<SolveStatus> {
        let m = self.m;
        let cap = self.iterations + self.iteration_cap;
        let y = self.duals(false);
        self.make_dual_feasible(&y);
        let mut verified = false;
        loop {
            if self.iterations >= cap {
                return Ok(SolveStatus::IterationLimit);
            }
            // leaving row by dual steepest edge
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let x = self.xb[i];
                if x < -FEAS_TOL && matches!(self.basis[i], Var::Col(..)) {
                    let w: f64 = (0..m).map(|k| self.binv[k * m + i].powi(2)).sum();
                    let score = x * x / w;
                    if leave.map_or(true, |(_, s)| score > s) {
                        leave = Some((i, score));
                    }
                }
            }
            let Some((r, _)) = leave else {
                if verified {
                    return Ok(SolveStatus::Optimal);
                }
                self.refactor()?;
                verified = true;
                continue;
            };
            verified = false;
            let rho: Vec<f64> = (0..m).map(|k| self.binv[k * m + r]).collect();
            let y = self.duals(false);
            // (variable, reduced cost, pivot row entry)
            let mut cands: Vec<(Var, f64, f64)> = Vec::new();
            for j in 0..self.columns.len() {
                let basic = self.basic_col[j];
                if basic == 3 {
                    continue;
                }
                let (mut a, mut g) = (0.0, 0.0);
                for &(row, sg) in self.columns[j].iter() {
                    let sg = f64::from(sg);
                    a += rho[row as usize] * sg;
                    g += y[row as usize] * sg;
                }
                let slack = 1.0 + self.shift[j] - g.abs();
                if basic == 0 && slack < 0.0 {
                    // restore dual feasibility lost to rounding
                    self.shift[j] -= slack;
                }
                let c = 1.0 + self.shift[j];
                for (plus, alpha, d) in [(true, a, c - g), (false, -a, c + g)] {
                    let bit = if plus { 1 } else { 2 };
                    if basic & bit == 0 && alpha < -PIVOT_TOL {
                        cands.push((Var::Col(j, plus), d, alpha));
                    }
                }
            }
            // Harris two-pass ratio test
            let bound = cands.iter().map(|&(_, d, a)| (d + DUAL_TOL) / -a).fold(f64::INFINITY, f64::min);
            let Some(&(q, dq, aq)) = cands
                .iter()
                .filter(|&&(_, d, a)| d / -a <= bound)
                .max_by(|x, y| y.2.total_cmp(&x.2).then(y.0.order_key().cmp(&x.0.order_key())))
            else {
                return Err(Error::Lp("dual simplex found no entering column".into()));
            };
            // shift costs so that no reduced cost turns negative after the step
            let theta = dq.max(0.0) / -aq;
            for &(v, d, a) in &cands {
                let after = d + theta * a;
                if after < 0.0 {
                    let Var::Col(j, _) = v else { unreachable!() };
                    self.shift[j] -= after;
                }
            }
            let d = self.ftran(q);
            if d[r] > -PIVOT_TOL {
                // the updated inverse drifted from the row used in pricing
                self.refactor()?;
                continue;
            }
            self.pivot(r, q, &d);
            self.iterations += 1;
        }
    }

    /// Runs phase one (once) and phase two from the current basis.
    pub(crate) fn solve(&mut self) -> Result<SolveStatus> {
        if !self.phase_one_done {
            self.perturb(true)?;
            let st = self.run(true)?;
            if st == SolveStatus::IterationLimit {
                return Ok(st);
            }
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.xb)
                .filter(|(v, _)| matches!(v, Var::Art(_)))
                .map(|(_, x)| x)
                .sum();
            if infeas > 1e-5 {
                return Err(Error::Lp(format!("infeasible decomposition (phase-one residual {infeas:e})")));
            }
            self.drive_out_artificials();
            self.phase_one_done = true;
        }
        self.perturb(false)?;
        let st = self.run(false)?;
        if st == SolveStatus::IterationLimit {
            return Ok(st);
        }
        self.use_rhs(self.target.clone())?;
        self.run(false)
    }

    pub(crate) fn phase_two_duals(&self) -> Vec<f64> {
        self.duals(false)
    }

    /// Net weight `x+_j - x-_j` of every structural column with nonzero value.
    pub(crate) fn solution(&self) -> Vec<(usize, f64)> {
        let mut w: Vec<(usize, f64)> = Vec::new();
        for (&v, &x) in self.basis.iter().zip(&self.xb) {
            if let Var::Col(j, plus) = v {
                if x.abs() > FEAS_TOL * 1e-3 {
                    w.push((j, if plus { x } else { -x }));
                }
            }
        }
        w.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(w.len());
        for (j, x) in w {
            match merged.last_mut() {
                Some((lj, lx)) if *lj == j => *lx += x,
                _ => merged.push((j, x)),
            }
        }
        merged
    }

    pub(crate) fn residual(&self, solution: &[(usize, f64)]) -> f64 {
        let mut acc = vec![0.0; self.m];
        for &(j, x) in solution {
            for &(r, s) in self.columns[j].iter() {
                acc[r as usize] += x * f64::from(s);
            }
        }
        acc.iter().zip(&self.target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Distinct pseudo-random shifts of order [`PERTURBATION`].
fn offsets(m: usize, stream: u64) -> Vec<f64> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ stream.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    (0..m)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            PERTURBATION * (0.5 + u)
        })
        .collect()
}
