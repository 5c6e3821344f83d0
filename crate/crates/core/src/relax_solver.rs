//! Node relaxations and the dual active-set engines that solve them.
//!
//! Both engines are written once against [`Decider`]. The online solver
//! substitutes the parameter first, so every quantity is a plain number and
//! decisions are direct comparisons. The certifier keeps every quantity affine
//! in `theta` and resolves the same decisions by splitting regions.

use crate::error::{Error, Result};
use crate::poly_geom::QuadForm;
use crate::problems::{Kind, MpProblem};
use crate::tol;
use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

/// Branching fixings of a node: binaries pinned to zero and to one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fixings {
    pub zero: Vec<usize>,
    pub one: Vec<usize>,
}

impl Fixings {
    pub fn level(&self) -> usize {
        self.zero.len() + self.one.len()
    }

    pub fn value_of(&self, var: usize) -> Option<f64> {
        if self.zero.contains(&var) {
            Some(0.0)
        } else if self.one.contains(&var) {
            Some(1.0)
        } else {
            None
        }
    }

    pub fn with(&self, var: usize, value: u8) -> Fixings {
        let mut f = self.clone();
        let list = if value == 0 { &mut f.zero } else { &mut f.one };
        list.push(var);
        list.sort_unstable();
        f
    }
}

/// How the parameter enters a relaxation.
#[derive(Debug, Clone, Copy)]
pub enum Param<'a> {
    /// Substituted at a point; every block has a single column.
    At(&'a [f64]),
    /// Kept symbolic; blocks have `n_theta + 1` columns, constant last.
    Symbolic,
}

/// Resolves `expr(theta) > tol`, where `expr` is `[coefficients..., constant]`.
pub trait Decider {
    fn positive(&mut self, expr: &[f64], tol: f64) -> Result<bool>;
}

/// Decider for substituted relaxations, whose expressions are constants.
#[derive(Debug, Default, Clone, Copy)]
pub struct AtPoint;

impl Decider for AtPoint {
    fn positive(&mut self, expr: &[f64], tol: f64) -> Result<bool> {
        debug_assert_eq!(expr.len(), 1);
        Ok(expr[0] > tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
}

/// Relaxation of one node with fixed variables substituted out.
///
/// Row order: original rows, then lower box rows, then upper box rows of the
/// still-free binaries. Row ids are global: original row `i` is `i`, the box
/// rows of the `j`-th binary are `m + j` (lower) and `m + n_b + j` (upper).
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub cols: usize,
    pub n: usize,
    pub free: Vec<usize>,
    pub x_fixed: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub row_ids: Vec<usize>,
    pub hessian: Option<DMatrix<f64>>,
    pub lin: DMatrix<f64>,
    full_hessian: Option<DMatrix<f64>>,
    full_lin: DMatrix<f64>,
}

pub fn build_relaxation(p: &MpProblem, fix: &Fixings, param: Param) -> Relaxation {
    let (n, m, d, nb) = (p.n(), p.m(), p.n_theta(), p.n_b);
    let cols = match param {
        Param::At(_) => 1,
        Param::Symbolic => d + 1,
    };
    let mut x_fixed = DVector::zeros(n);
    let mut fixed = vec![false; n];
    for &v in &fix.zero {
        fixed[v] = true;
    }
    for &v in &fix.one {
        fixed[v] = true;
        x_fixed[v] = 1.0;
    }
    let free: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
    let nf = free.len();

    let base_h = match param {
        Param::At(theta) => DMatrix::from_column_slice(m, 1, p.rhs_at(theta).as_slice()),
        Param::Symbolic => {
            let mut blk = DMatrix::zeros(m, d + 1);
            blk.columns_mut(0, d).copy_from(&p.w);
            blk.column_mut(d).copy_from(&p.b);
            blk
        }
    };
    let a_fixed = &p.a * &x_fixed;
    let free_binaries: Vec<(usize, usize)> = p
        .binary_indices
        .iter()
        .enumerate()
        .filter(|(_, &v)| !fixed[v])
        .map(|(j, &v)| (j, v))
        .collect();
    let rows = m + 2 * free_binaries.len();
    let mut g = DMatrix::zeros(rows, nf);
    let mut h = DMatrix::zeros(rows, cols);
    let mut row_ids = Vec::with_capacity(rows);
    let local = |v: usize| free.binary_search(&v).unwrap();
    for i in 0..m {
        for (k, &v) in free.iter().enumerate() {
            g[(i, k)] = p.a[(i, v)];
        }
        h.row_mut(i).copy_from(&base_h.row(i));
        h[(i, cols - 1)] -= a_fixed[i];
        row_ids.push(i);
    }
    for (t, &(j, v)) in free_binaries.iter().enumerate() {
        g[(m + t, local(v))] = -1.0;
        row_ids.push(m + j);
    }
    let off = m + free_binaries.len();
    for (t, &(j, v)) in free_binaries.iter().enumerate() {
        g[(off + t, local(v))] = 1.0;
        h[(off + t, cols - 1)] = 1.0;
        row_ids.push(m + nb + j);
    }

    let mut full_lin = DMatrix::zeros(n, cols);
    let full_hessian = match p.kind {
        Kind::Milp => {
            full_lin.column_mut(cols - 1).copy_from(p.c.as_ref().unwrap());
            None
        }
        Kind::Miqp => {
            match param {
                Param::At(theta) => full_lin.column_mut(0).copy_from(&p.linear_cost_at(theta)),
                Param::Symbolic => {
                    if let Some(ft) = &p.f_theta {
                        full_lin.columns_mut(0, d).copy_from(ft);
                    }
                    full_lin.column_mut(d).copy_from(p.f.as_ref().unwrap());
                }
            }
            p.h.clone()
        }
    };
    let mut lin = full_lin.select_rows(&free);
    let hessian = full_hessian.as_ref().map(|hf| {
        let hx = hf * &x_fixed;
        for (k, &v) in free.iter().enumerate() {
            lin[(k, cols - 1)] += hx[v];
        }
        hf.select_rows(&free).select_columns(&free)
    });
    Relaxation { cols, n, free, x_fixed, g, h, row_ids, hessian, lin, full_hessian, full_lin }
}

/// Result of running an engine on a relaxation.
#[derive(Debug, Clone)]
pub struct EngineOutcome {
    pub status: Status,
    /// Local row indices, ascending.
    pub active: Vec<usize>,
    /// Free-variable solution block (`n_free x cols`).
    pub x: DMatrix<f64>,
    pub iterations: u64,
}

impl Relaxation {
    pub fn n_rows(&self) -> usize {
        self.g.nrows()
    }

    pub fn local_row(&self, id: usize) -> Option<usize> {
        self.row_ids.binary_search(&id).ok()
    }

    pub fn global_rows(&self, local: &[usize]) -> Vec<usize> {
        local.iter().map(|&i| self.row_ids[i]).collect()
    }

    /// Full-length solution block with fixed variables restored.
    pub fn full_x(&self, x_free: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(self.n, self.cols);
        x.column_mut(self.cols - 1).copy_from(&self.x_fixed);
        for (k, &v) in self.free.iter().enumerate() {
            x.row_mut(v).copy_from(&x_free.row(k));
        }
        x
    }

    /// Objective as a function of the parameter for a full solution block.
    pub fn objective(&self, x: &DMatrix<f64>) -> QuadForm {
        let d = self.cols - 1;
        let f = x.columns(0, d);
        let g = x.column(d);
        let lt = self.full_lin.columns(0, d);
        let l = self.full_lin.column(d);
        let mut q = lt.transpose() * f;
        q = (&q + q.transpose()) * 0.5;
        let mut r = f.transpose() * l + lt.transpose() * g;
        let mut s = l.dot(&g);
        if let Some(hf) = &self.full_hessian {
            let hfm = hf * f;
            let hg = hf * g;
            q += f.transpose() * &hfm * 0.5;
            r += f.transpose() * &hg;
            s += 0.5 * g.dot(&hg);
        }
        QuadForm { q: (&q + q.transpose()) * 0.5, r, s }
    }

    fn violations(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        &self.g * x - &self.h
    }

    /// Builds and factors the KKT matrix of an equality-constrained QP.
    fn kkt(&self, hq: &DMatrix<f64>, active: &[usize]) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        let nf = self.free.len();
        let k = active.len();
        let mut kkt = DMatrix::zeros(nf + k, nf + k);
        kkt.view_mut((0, 0), (nf, nf)).copy_from(hq);
        for (t, &i) in active.iter().enumerate() {
            for j in 0..nf {
                kkt[(j, nf + t)] = self.g[(i, j)];
                kkt[(nf + t, j)] = self.g[(i, j)];
            }
        }
        let scale = kkt.amax().max(1.0);
        let lu = kkt.lu();
        let u = lu.u();
        if (0..nf + k).any(|i| u[(i, i)].abs() < 1e-12 * scale) {
            return Err(Error::DegenerateWorkingSet);
        }
        Ok(lu)
    }

    /// Primal and dual solution of the equality-constrained problem on
    /// `active` (local rows). For an LP the rows must form a square basis.
    pub fn kkt_solution(&self, active: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let nf = self.free.len();
        match &self.hessian {
            Some(hq) => {
                let lu = self.kkt(hq, active)?;
                let mut rhs = DMatrix::zeros(nf + active.len(), self.cols);
                rhs.view_mut((0, 0), (nf, self.cols)).copy_from(&(-&self.lin));
                for (t, &i) in active.iter().enumerate() {
                    rhs.row_mut(nf + t).copy_from(&self.h.row(i));
                }
                let sol = lu.solve(&rhs).ok_or(Error::DegenerateWorkingSet)?;
                Ok((sol.rows(0, nf).into_owned(), sol.rows(nf, active.len()).into_owned()))
            }
            None => {
                if active.len() != nf {
                    return Err(Error::DegenerateWorkingSet);
                }
                let b = self.g.select_rows(active);
                let x = b.clone().lu().solve(&self.h.select_rows(active)).ok_or(Error::DegenerateWorkingSet)?;
                let c = self.lin.column(self.cols - 1).into_owned();
                let lam = b.transpose().lu().solve(&(-c)).ok_or(Error::DegenerateWorkingSet)?;
                let mut lam_blk = DMatrix::zeros(nf, self.cols);
                lam_blk.column_mut(self.cols - 1).copy_from(&lam);
                Ok((x, lam_blk))
            }
        }
    }
}

fn row_expr(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    m.row(i).iter().copied().collect()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn iteration_limit(r: &Relaxation) -> usize {
    200 + 20 * (r.n_rows() + r.free.len())
}

/// Most violated row outside `skip`, ties to the lowest id. In `first` mode the
/// lowest violated row is returned instead.
fn most_violated<D: Decider>(v: &DMatrix<f64>, skip: &[bool], first: bool, dec: &mut D) -> Result<Option<usize>> {
    let mut best: Option<(usize, Vec<f64>)> = None;
    for i in 0..v.nrows() {
        if skip[i] {
            continue;
        }
        let vi = row_expr(v, i);
        if !dec.positive(&vi, tol::FEAS)? {
            continue;
        }
        match &best {
            None => {
                if first {
                    return Ok(Some(i));
                }
                best = Some((i, vi));
            }
            Some((_, vb)) => {
                if dec.positive(&diff(&vi, vb), tol::TIE)? {
                    best = Some((i, vi));
                }
            }
        }
    }
    Ok(best.map(|b| b.0))
}

/// Runs the engine matching the relaxation's objective.
pub fn run_engine<D: Decider>(r: &Relaxation, warm: Option<&[usize]>, dec: &mut D) -> Result<EngineOutcome> {
    if r.free.is_empty() {
        let x = DMatrix::zeros(0, r.cols);
        for i in 0..r.n_rows() {
            let neg: Vec<f64> = r.h.row(i).iter().map(|v| -v).collect();
            if dec.positive(&neg, tol::FEAS)? {
                return Ok(EngineOutcome { status: Status::Infeasible, active: vec![], x, iterations: 0 });
            }
        }
        return Ok(EngineOutcome { status: Status::Optimal, active: vec![], x, iterations: 0 });
    }
    match &r.hessian {
        Some(hq) => qp_engine(r, hq, warm, dec),
        None => lp_engine(r, dec),
    }
}

/// Finds a dual feasible basis: rows `B` with `G_B' lambda = -c`, `lambda >= 0`.
/// Independent of the parameter. Returns the basis and the pivot count.
fn lp_phase_one(r: &Relaxation) -> Result<(Vec<usize>, u64)> {
    let nf = r.free.len();
    let rows = r.n_rows();
    let c = r.lin.column(r.cols - 1);
    let width = rows + nf + 1;
    let mut t = DMatrix::<f64>::zeros(nf, width);
    let mut basic = vec![0usize; nf];
    for k in 0..nf {
        let sign = if -c[k] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..rows {
            t[(k, i)] = sign * r.g[(i, k)];
        }
        t[(k, rows + k)] = 1.0;
        t[(k, width - 1)] = -sign * c[k];
        basic[k] = rows + k;
    }
    // Crash: a singleton row whose (sign-adjusted) column is +e_k starts
    // basic. Scanning backwards prefers the binary box rows.
    for k in 0..nf {
        let unit = (0..rows).rev().find(|&i| {
            t[(k, i)] == 1.0 && r.g.row(i).iter().filter(|v| **v != 0.0).count() == 1
        });
        if let Some(i) = unit {
            t[(k, rows + k)] = 0.0;
            basic[k] = i;
        }
    }
    let is_art = |j: usize| j >= rows && j < rows + nf;
    let mut pivots = 0u64;
    let pivot = |t: &mut DMatrix<f64>, pr: usize, pc: usize| {
        let pv = t[(pr, pc)];
        for j in 0..width {
            t[(pr, j)] /= pv;
        }
        for k in 0..nf {
            if k != pr {
                let factor = t[(k, pc)];
                if factor != 0.0 {
                    for j in 0..width {
                        let delta = factor * t[(pr, j)];
                        t[(k, j)] -= delta;
                    }
                }
            }
        }
    };
    let limit = 100 + 50 * width;
    for _ in 0..limit {
        // Reduced cost of column j: minus the sum over rows with an artificial basic.
        let mut enter = None;
        for j in 0..rows {
            if basic.contains(&j) {
                continue;
            }
            let dj: f64 = -(0..nf).filter(|&k| is_art(basic[k])).map(|k| t[(k, j)]).sum::<f64>();
            if dj < -1e-11 {
                enter = Some(j);
                break;
            }
        }
        let Some(j) = enter else { break };
        let mut leave: Option<(usize, f64)> = None;
        for k in 0..nf {
            if t[(k, j)] > 1e-11 {
                let ratio = t[(k, width - 1)] / t[(k, j)];
                let better = match leave {
                    None => true,
                    Some((lk, lr)) => ratio < lr - 1e-13 || (ratio <= lr + 1e-13 && basic[k] < basic[lk]),
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
        }
        let Some((k, _)) = leave else { return Err(Error::UnboundedRelaxation) };
        pivot(&mut t, k, j);
        basic[k] = j;
        pivots += 1;
    }
    let infeasibility: f64 = (0..nf).filter(|&k| is_art(basic[k])).map(|k| t[(k, width - 1)]).sum();
    if infeasibility > 1e-9 {
        return Err(Error::UnboundedRelaxation);
    }
    for k in 0..nf {
        if is_art(basic[k]) {
            let col = (0..rows).find(|&j| !basic.contains(&j) && t[(k, j)].abs() > 1e-9);
            let Some(j) = col else { return Err(Error::DegenerateWorkingSet) };
            pivot(&mut t, k, j);
            basic[k] = j;
            pivots += 1;
        }
    }
    basic.sort_unstable();
    Ok((basic, pivots))
}

/// Dual simplex from a dual feasible basis. The ratio test only involves the
/// cost vector, so only the choice of the entering row depends on `theta`.
fn lp_engine<D: Decider>(r: &Relaxation, dec: &mut D) -> Result<EngineOutcome> {
    let (mut basis, mut iterations) = lp_phase_one(r)?;
    let c = r.lin.column(r.cols - 1).into_owned();
    let rows = r.n_rows();
    let mut degenerate = 0usize;
    for _ in 0..iteration_limit(r) {
        let b = r.g.select_rows(&basis);
        let x = b.clone().lu().solve(&r.h.select_rows(&basis)).ok_or(Error::DegenerateWorkingSet)?;
        let lut = b.transpose().lu();
        let lam = lut.solve(&(-&c)).ok_or(Error::DegenerateWorkingSet)?;
        let mut in_basis = vec![false; rows];
        for &i in &basis {
            in_basis[i] = true;
        }
        let v = r.violations(&x);
        let Some(p) = most_violated(&v, &in_basis, degenerate > 50, dec)? else {
            return Ok(EngineOutcome { status: Status::Optimal, active: basis, x, iterations });
        };
        let gp = r.g.row(p).transpose();
        let dir = lut.solve(&gp).ok_or(Error::DegenerateWorkingSet)?;
        let mut leave: Option<(usize, f64)> = None;
        for j in 0..basis.len() {
            if dir[j] > tol::PIVOT {
                let t = lam[j].max(0.0) / dir[j];
                if leave.is_none_or(|(_, lt)| t < lt - 1e-12 * lt.abs().max(1.0)) {
                    leave = Some((j, t));
                }
            }
        }
        let Some((j, t)) = leave else {
            return Ok(EngineOutcome { status: Status::Infeasible, active: basis, x, iterations });
        };
        degenerate = if t <= 1e-12 { degenerate + 1 } else { 0 };
        basis[j] = p;
        basis.sort_unstable();
        iterations += 1;
    }
    Err(Error::IterationLimit(iteration_limit(r)))
}

/// Goldfarb-Idnani dual active-set method. Step directions depend only on the
/// constraint normals, so every iterate stays affine in `theta`.
fn qp_engine<D: Decider>(r: &Relaxation, hq: &DMatrix<f64>, warm: Option<&[usize]>, dec: &mut D) -> Result<EngineOutcome> {
    if hq.clone().cholesky().is_none() {
        return Err(Error::HNotPositiveDefinite);
    }
    let nf = r.free.len();
    let rows = r.n_rows();
    let mut active: Vec<usize> = Vec::new();
    let mut iterations = 0u64;
    if let Some(ids) = warm {
        for &id in ids {
            if let Some(i) = r.local_row(id) {
                let mut trial = active.clone();
                trial.push(i);
                trial.sort_unstable();
                if r.kkt(hq, &trial).is_ok() {
                    active = trial;
                }
            }
        }
    }
    let (mut x, mut lam) = r.kkt_solution(&active)?;
    // Restore dual feasibility by dropping the most negative multiplier.
    loop {
        let mut worst: Option<(usize, Vec<f64>)> = None;
        for t in 0..active.len() {
            let lt = row_expr(&lam, t);
            let neg: Vec<f64> = lt.iter().map(|v| -v).collect();
            if !dec.positive(&neg, tol::DUAL)? {
                continue;
            }
            match &worst {
                None => worst = Some((t, lt)),
                Some((_, lw)) => {
                    if dec.positive(&diff(lw, &lt), tol::TIE)? {
                        worst = Some((t, lt));
                    }
                }
            }
        }
        let Some((t, _)) = worst else { break };
        active.remove(t);
        iterations += 1;
        (x, lam) = r.kkt_solution(&active)?;
    }

    let limit = iteration_limit(r);
    while (iterations as usize) < limit {
        let mut skip = vec![false; rows];
        for &i in &active {
            skip[i] = true;
        }
        let v = r.violations(&x);
        let Some(p) = most_violated(&v, &skip, false, dec)? else {
            return Ok(EngineOutcome { status: Status::Optimal, active, x, iterations });
        };
        let gp: DVector<f64> = r.g.row(p).transpose();
        let mut lam_p = RowDVector::<f64>::zeros(r.cols);
        loop {
            let lu = r.kkt(hq, &active)?;
            let mut rhs = DVector::zeros(nf + active.len());
            rhs.rows_mut(0, nf).copy_from(&gp);
            let sol = lu.solve(&rhs).ok_or(Error::DegenerateWorkingSet)?;
            let z = sol.rows(0, nf).into_owned();
            let rr = sol.rows(nf, active.len()).into_owned();
            let zero_step = z.amax() <= tol::PIVOT * gp.amax().max(1.0);
            let cands: Vec<usize> = (0..active.len()).filter(|&t| rr[t] > tol::PIVOT).collect();
            if zero_step && cands.is_empty() {
                return Ok(EngineOutcome { status: Status::Infeasible, active, x, iterations });
            }
            let mut partial: Option<(usize, Vec<f64>)> = None;
            for &t in &cands {
                let tt: Vec<f64> = lam.row(t).iter().map(|v| v / rr[t]).collect();
                match &partial {
                    None => partial = Some((t, tt)),
                    Some((_, tb)) => {
                        if dec.positive(&diff(tb, &tt), tol::TIE)? {
                            partial = Some((t, tt));
                        }
                    }
                }
            }
            let full: Option<Vec<f64>> = if zero_step {
                None
            } else {
                let curv = gp.dot(&z);
                Some(row_expr(&v, p).iter().map(|vi| vi / curv).collect())
            };
            let take_full = match (&full, &partial) {
                (Some(_), None) => true,
                (None, _) => false,
                (Some(t2), Some((_, t1))) => !dec.positive(&diff(t2, t1), tol::TIE)?,
            };
            let step = RowDVector::from_row_slice(if take_full { full.as_ref().unwrap() } else { &partial.as_ref().unwrap().1 });
            x -= &z * &step;
            lam -= &rr * &step;
            lam_p += &step;
            iterations += 1;
            if take_full {
                let pos = active.partition_point(|&i| i < p);
                active.insert(pos, p);
                (x, lam) = r.kkt_solution(&active)?;
                break;
            }
            let (t, _) = partial.unwrap();
            active.remove(t);
            lam = lam.remove_row(t);
            if (iterations as usize) >= limit {
                break;
            }
        }
    }
    Err(Error::IterationLimit(limit))
}

/// Solution of one node relaxation at a parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxResult {
    pub status: Status,
    pub x: DVector<f64>,
    /// `+inf` when infeasible.
    pub j: f64,
    /// Global row ids of the final working set.
    pub active_set: Vec<usize>,
    pub iterations: u64,
}

pub fn solve_relaxation(p: &MpProblem, fix: &Fixings, theta: &[f64], warm: Option<&[usize]>) -> Result<RelaxResult> {
    let r = build_relaxation(p, fix, Param::At(theta));
    let out = run_engine(&r, warm, &mut AtPoint)?;
    let xb = r.full_x(&out.x);
    let x = xb.column(0).into_owned();
    let j = match out.status {
        Status::Optimal => r.objective(&xb).s,
        Status::Infeasible => f64::INFINITY,
    };
    Ok(RelaxResult { status: out.status, x, j, active_set: r.global_rows(&out.active), iterations: out.iterations })
}

/// Free binaries with neither box row in the working set, in binary order.
/// Empty means the relaxed solution is integral.
pub fn branch_candidates(p: &MpProblem, fix: &Fixings, active_set: &[usize]) -> Vec<usize> {
    let (m, nb) = (p.m(), p.n_b);
    p.binary_indices
        .iter()
        .enumerate()
        .filter(|(j, &v)| {
            fix.value_of(v).is_none() && !active_set.contains(&(m + j)) && !active_set.contains(&(m + nb + j))
        })
        .map(|(_, &v)| v)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_geom::Polyhedron;
    use crate::problems::{random_instance, Metadata};
    use itertools::Itertools;
    use rand::{Rng, SeedableRng};

    fn scalar_milp() -> MpProblem {
        // min x s.t. -x <= -theta, x binary
        MpProblem {
            kind: Kind::Milp,
            n_c: 0,
            n_b: 1,
            binary_indices: vec![0],
            h: None,
            f: None,
            f_theta: None,
            c: Some(DVector::from_vec(vec![1.0])),
            a: DMatrix::from_row_slice(1, 1, &[-1.0]),
            b: DVector::from_vec(vec![0.0]),
            w: DMatrix::from_row_slice(1, 1, &[-1.0]),
            theta0: Polyhedron::from_box(&[-1.0], &[1.0]),
            metadata: Metadata::default(),
        }
    }

    #[test]
    fn scalar_lp_relaxation() {
        let p = scalar_milp();
        let r = solve_relaxation(&p, &Fixings::default(), &[0.3], None).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[0] - 0.3).abs() < 1e-12 && (r.j - 0.3).abs() < 1e-12);
        assert_eq!(r.active_set, vec![0]);
        let fixed = Fixings { zero: vec![0], one: vec![] };
        let r = solve_relaxation(&p, &fixed, &[0.3], None).unwrap();
        assert_eq!(r.status, Status::Infeasible);
        assert_eq!(r.j, f64::INFINITY);
    }

    #[test]
    fn row_layout() {
        let p = random_instance(Kind::Milp, 2, 1, 4, 1, 3);
        let r = build_relaxation(&p, &Fixings::default(), Param::Symbolic);
        assert_eq!(r.n_rows(), 4 + 4);
        assert_eq!(r.row_ids, vec![0, 1, 2, 3, 4, 5, 6, 7]);
        let r = build_relaxation(&p, &Fixings { zero: vec![0], one: vec![1] }, Param::Symbolic);
        assert_eq!(r.n_rows(), 4);
        assert_eq!(r.free, vec![2]);
    }

    /// Enumerates every subset of rows as a candidate active set and keeps the
    /// KKT points that are primal and dual feasible.
    fn kkt_enumeration(h: &DMatrix<f64>, f: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Option<f64> {
        let (m, n) = a.shape();
        let mut best: Option<f64> = None;
        for k in 0..=n.min(m) {
            for set in (0..m).combinations(k) {
                let mut kkt = DMatrix::zeros(n + k, n + k);
                kkt.view_mut((0, 0), (n, n)).copy_from(h);
                let mut rhs = DVector::zeros(n + k);
                rhs.rows_mut(0, n).copy_from(&(-f));
                for (t, &i) in set.iter().enumerate() {
                    for j in 0..n {
                        kkt[(j, n + t)] = a[(i, j)];
                        kkt[(n + t, j)] = a[(i, j)];
                    }
                    rhs[n + t] = b[i];
                }
                let Some(sol) = kkt.lu().solve(&rhs) else { continue };
                let x = sol.rows(0, n).into_owned();
                let primal = (a * &x - b).iter().all(|&v| v <= 1e-9);
                let dual = sol.rows(n, k).iter().all(|&l| l >= -1e-9);
                if primal && dual {
                    let v = 0.5 * (x.transpose() * h * &x)[(0, 0)] + f.dot(&x);
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        }
        best
    }

    #[test]
    fn qp_matches_kkt_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for seed in 0..60 {
            let p = random_instance(Kind::Miqp, 0, 4, 6, 1, seed);
            let theta = [rng.random_range(-0.5..0.5)];
            let r = solve_relaxation(&p, &Fixings::default(), &theta, None).unwrap();
            let oracle = kkt_enumeration(p.h.as_ref().unwrap(), &p.linear_cost_at(&theta), &p.a, &p.rhs_at(&theta));
            match (r.status, oracle) {
                (Status::Optimal, Some(v)) => assert!((r.j - v).abs() < 1e-6, "seed {seed}: {} vs {v}", r.j),
                (Status::Infeasible, None) => {}
                (s, o) => panic!("seed {seed}: {s:?} vs {o:?}"),
            }
        }
    }

    #[test]
    fn lp_matches_geometry_lp() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        for seed in 0..200 {
            let p = random_instance(Kind::Milp, 2, 2, 6, 1, seed);
            if !crate::problems::relaxation_bounded(&p) {
                continue;
            }
            let theta = [rng.random_range(-0.5..0.5)];
            let r = solve_relaxation(&p, &Fixings::default(), &theta, None).unwrap();
            let mut a = p.a.clone().insert_rows(p.m(), 4, 0.0);
            let mut b: Vec<f64> = p.rhs_at(&theta).iter().copied().collect();
            for j in 0..2 {
                a[(p.m() + 2 * j, j)] = 1.0;
                a[(p.m() + 2 * j + 1, j)] = -1.0;
                b.extend([1.0, 0.0]);
            }
            let oracle = crate::poly_geom::lp::minimize(p.c.as_ref().unwrap().as_slice(), &a, &b);
            match (r.status, oracle.value()) {
                (Status::Optimal, Some(v)) => assert!((r.j - v).abs() < 1e-7, "seed {seed}"),
                (Status::Infeasible, None) => {}
                (s, o) => panic!("seed {seed}: {s:?} vs {o:?}"),
            }
            checked += 1;
        }
        assert!(checked > 50);
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        for seed in 0..30 {
            let p = random_instance(Kind::Miqp, 3, 2, 6, 1, seed);
            let theta = [0.1];
            let root = solve_relaxation(&p, &Fixings::default(), &theta, None).unwrap();
            let child = Fixings { zero: vec![1], one: vec![] };
            let cold = solve_relaxation(&p, &child, &theta, None).unwrap();
            let warm = solve_relaxation(&p, &child, &theta, Some(&root.active_set)).unwrap();
            assert_eq!(cold.status, warm.status);
            if cold.status == Status::Optimal {
                assert!((cold.j - warm.j).abs() < 1e-8);
            }
        }
    }
}
