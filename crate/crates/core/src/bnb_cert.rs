//! Certification of the branch and bound over a parameter region.
//!
//! Every decision of the online solver is replayed over a region; a decision
//! that depends on the parameter splits the region and both sides continue
//! with their own copy of the search state.

use crate::bnb_online::{
    level_precedes, local_branching_row, neighbor_size, rins_agreement, with_rows, BranchRule, Heuristic, Kappa, NodeRule,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::mp_cert::{cert_relaxation, CertPiece, DEFAULT_PIECE_BUDGET};
use crate::poly_geom::{AffineMap, QuadForm, RegionSet, Split};
use crate::problems::{Kind, MpProblem};
use crate::quad_compare::{approximate, Approx};
use crate::relax_solver::{branch_candidates, Fixings};
use crate::tol;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Largest parameter dimension for which quadratic region cuts are allowed.
pub const EXACT_MIQP_MAX_DIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact comparisons; quadratic cuts for MIQPs.
    #[default]
    Exact,
    /// Affine lower approximations of quadratic comparisons.
    Conservative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertConfig {
    #[serde(flatten)]
    pub solver: SolverConfig,
    pub mode: Mode,
    pub approx: Approx,
    /// Conservative mode: test every collected upper bound instead of one.
    #[serde(default)]
    pub all_uppers: bool,
    /// Maximum number of regions (and of pieces per relaxation).
    pub budget: usize,
}

impl Default for CertConfig {
    fn default() -> Self {
        CertConfig {
            solver: SolverConfig::default(),
            mode: Mode::Exact,
            approx: Approx::Atomic,
            all_uppers: false,
            budget: DEFAULT_PIECE_BUDGET,
        }
    }
}

impl CertConfig {
    pub fn validate(&self, p: &MpProblem) -> Result<()> {
        self.solver.validate()?;
        match self.mode {
            Mode::Conservative => {
                if self.solver.node_rule == NodeRule::Bf {
                    return Err(Error::Invalid("conservative mode requires depth- or breadth-first node selection".into()));
                }
                if self.solver.heuristic != Heuristic::None {
                    return Err(Error::Invalid("conservative mode does not support improvement heuristics".into()));
                }
                if !self.solver.subopt.is_exact() {
                    return Err(Error::Invalid("conservative mode does not support suboptimality limits".into()));
                }
            }
            Mode::Exact => {
                if p.kind == Kind::Miqp && p.n_theta() > EXACT_MIQP_MAX_DIM {
                    return Err(Error::Unsupported(format!(
                        "exact MIQP certification needs at most {EXACT_MIQP_MAX_DIM} parameters"
                    )));
                }
            }
        }
        Ok(())
    }

    fn for_subproblem(&self) -> CertConfig {
        CertConfig { solver: self.solver.for_subproblem(), mode: Mode::Exact, ..self.clone() }
    }
}

/// A terminated region of the certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertRegion {
    pub set: RegionSet,
    pub kappa: Kappa,
    pub upper: Option<QuadForm>,
    pub xbar: Option<AffineMap>,
    /// Conservative mode: every collected upper bound.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub upper_set: Vec<QuadForm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub regions: Vec<CertRegion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<CertConfig>,
}

impl Certificate {
    pub fn load(path: &Path) -> Result<Certificate> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { pointer: String::new(), msg: e.to_string() })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Invalid(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn max_kappa(&self) -> Kappa {
        Kappa {
            iterations: self.regions.iter().map(|r| r.kappa.iterations).max().unwrap_or(0),
            nodes: self.regions.iter().map(|r| r.kappa.nodes).max().unwrap_or(0),
        }
    }
}

/// A parametric incumbent.
#[derive(Debug, Clone, PartialEq)]
pub struct Upper {
    pub j: QuadForm,
    pub x: AffineMap,
}

/// A pending node with a parametric sorting key.
#[derive(Debug, Clone, PartialEq)]
pub struct CertNode {
    pub fix: Fixings,
    /// Parent relaxation value; `None` for the root.
    pub parent_bound: Option<QuadForm>,
    pub warm: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
struct Work {
    set: RegionSet,
    tree: Vec<CertNode>,
    kappa: Kappa,
    upper: Option<Upper>,
    uppers: Vec<Upper>,
    branchings: u64,
    heuristic_done: bool,
    root_active: Option<Vec<usize>>,
}

impl Work {
    fn finish(self, mode: Mode) -> CertRegion {
        let (upper, xbar, upper_set) = match mode {
            Mode::Exact => {
                let (j, x) = self.upper.map(|u| (u.j, u.x)).unzip();
                (j, x, vec![])
            }
            Mode::Conservative => {
                let last = self.uppers.last().cloned();
                (last.clone().map(|u| u.j), last.map(|u| u.x), self.uppers.into_iter().map(|u| u.j).collect())
            }
        };
        CertRegion { set: self.set, kappa: self.kappa, upper, xbar, upper_set }
    }
}

/// Splits by `q(theta) > tol`, affinely when possible.
fn split(set: &mut RegionSet, q: &QuadForm, tol: f64) -> Result<Split> {
    if q.is_affine() {
        set.split_affine(&q.affine_expr(), tol)
    } else {
        set.split_quad(q, tol)
    }
}

/// Parts of a region where `q > tol` and where it is not.
fn partition(mut set: RegionSet, q: &QuadForm, tol: f64) -> Result<(Option<RegionSet>, Option<RegionSet>)> {
    Ok(match split(&mut set, q, tol)? {
        Split::Above => (Some(set), None),
        Split::Below => (None, Some(set)),
        Split::Both { above, below } => (Some(above), Some(below)),
    })
}

/// Rounds the binary rows of a solution map to constants.
pub fn snap_map(p: &MpProblem, x: &AffineMap) -> AffineMap {
    let mut x = x.clone();
    for &v in &p.binary_indices {
        x.f.row_mut(v).fill(0.0);
        x.g[v] = x.g[v].round();
    }
    x
}

/// Whether two solution maps differ.
pub fn maps_differ(a: &AffineMap, b: &AffineMap) -> bool {
    (&a.f - &b.f).amax() > 1e-7 || (&a.g - &b.g).amax() > 1e-7
}

/// Per-piece most infeasible scores: every candidate's score is affine on
/// each returned piece.
pub fn most_inf_score_cert(x: &AffineMap, cands: &[usize], set: RegionSet) -> Result<Vec<(RegionSet, Vec<Vec<f64>>)>> {
    let mut work = vec![(set, Vec::with_capacity(cands.len()))];
    let mut out = Vec::new();
    while let Some((set, scores)) = work.pop() {
        if scores.len() == cands.len() {
            out.push((set, scores));
            continue;
        }
        let mut e = x.row_expr(cands[scores.len()]);
        let d = e.len() - 1;
        let mut shifted = e.clone();
        shifted[d] -= 0.5;
        let (above, below) = partition(set, &QuadForm::from_affine(&shifted), 0.0)?;
        if let Some(s) = above {
            let flipped: Vec<f64> = e.iter().enumerate().map(|(k, v)| if k == d { 1.0 - v } else { -v }).collect();
            let mut sc = scores.clone();
            sc.push(flipped);
            work.push((s, sc));
        }
        if let Some(s) = below {
            let mut sc = scores;
            sc.push(std::mem::take(&mut e));
            work.push((s, sc));
        }
    }
    Ok(out)
}

/// Branching variable per piece of `set`.
pub fn branch_ind_cert(x: &AffineMap, cands: &[usize], set: RegionSet, rule: BranchRule) -> Result<Vec<(RegionSet, usize)>> {
    assert!(!cands.is_empty(), "branching requires a candidate");
    if rule == BranchRule::Fb {
        return Ok(vec![(set, cands[0])]);
    }
    let mut out = Vec::new();
    for (set, scores) in most_inf_score_cert(x, cands, set)? {
        let mut work = vec![(set, 1usize, 0usize)];
        while let Some((set, pos, best)) = work.pop() {
            if pos == cands.len() {
                out.push((set, cands[best]));
                continue;
            }
            let diff: Vec<f64> = scores[pos].iter().zip(&scores[best]).map(|(a, b)| a - b).collect();
            let (above, below) = partition(set, &QuadForm::from_affine(&diff), tol::TIE)?;
            if let Some(s) = above {
                work.push((s, pos + 1, pos));
            }
            if let Some(s) = below {
                work.push((s, pos + 1, best));
            }
        }
    }
    Ok(out)
}

fn insert_pair(tree: &[CertNode], pos: usize, children: &[CertNode; 2]) -> Vec<CertNode> {
    let mut t = Vec::with_capacity(tree.len() + 2);
    t.extend_from_slice(&tree[..pos]);
    t.extend_from_slice(children);
    t.extend_from_slice(&tree[pos..]);
    t
}

/// Inserts the children into the pending list, splitting the region where
/// the insertion point depends on the parameter.
pub fn sort_cert(
    set: RegionSet,
    tree: &[CertNode],
    children: [CertNode; 2],
    rule: NodeRule,
) -> Result<Vec<(RegionSet, Vec<CertNode>)>> {
    if rule != NodeRule::Bf {
        let level = children[0].fix.level();
        let pos = tree.iter().position(|n| level_precedes(rule, level, n.fix.level())).unwrap_or(tree.len());
        return Ok(vec![(set, insert_pair(tree, pos, &children))]);
    }
    let rho = children[0].parent_bound.clone().expect("children carry their parent's bound");
    let mut out = Vec::new();
    let mut work = vec![(set, 0usize)];
    while let Some((set, i)) = work.pop() {
        if i == tree.len() {
            out.push((set, insert_pair(tree, i, &children)));
            continue;
        }
        let Some(rho_i) = &tree[i].parent_bound else {
            work.push((set, i + 1));
            continue;
        };
        let (above, below) = partition(set, &rho.sub(rho_i), tol::TIE)?;
        if let Some(s) = above {
            work.push((s, i + 1));
        }
        if let Some(s) = below {
            out.push((s, insert_pair(tree, i, &children)));
        }
    }
    Ok(out)
}

/// Result of a certified heuristic on one piece.
#[derive(Debug, Clone)]
pub struct HeuristicPiece {
    pub set: RegionSet,
    pub kappa: Kappa,
    pub found: Option<Upper>,
}

fn parametric_cutoff(p: &MpProblem, x_bar: &AffineMap, eps: f64) -> (Vec<f64>, f64, Vec<f64>) {
    let c = p.c.as_ref().expect("heuristics need a linear cost");
    let k = 1.0 - eps;
    let w: Vec<f64> = (0..p.n_theta()).map(|t| k * c.dot(&x_bar.f.column(t))).collect();
    (c.iter().copied().collect(), k * c.dot(&x_bar.g), w)
}

fn binary_pattern(p: &MpProblem, x_bar: &AffineMap) -> Vec<bool> {
    p.binary_indices.iter().map(|&v| x_bar.g[v] > 0.5).collect()
}

/// Local branching over a region.
pub fn lb_cert(p: &MpProblem, x_bar: &AffineMap, set: RegionSet, cfg: &CertConfig) -> Result<Vec<HeuristicPiece>> {
    let ones = binary_pattern(p, x_bar);
    let cut = parametric_cutoff(p, x_bar, cfg.solver.cutoff_eps);
    let sub_cfg = cfg.for_subproblem();
    let mut work = vec![(set, cfg.solver.r_n0, false, Kappa::default())];
    let mut out = Vec::new();
    while let Some((set, r_n, adjusted, kappa)) = work.pop() {
        let sub = with_rows(p, &[local_branching_row(p, &ones, r_n), cut.clone()]);
        for reg in bnb_cert_region(&sub, set, &sub_cfg, Fixings::default())? {
            let kappa = kappa + reg.kappa;
            if let (Some(x), Some(j)) = (&reg.xbar, &reg.upper) {
                if maps_differ(x, x_bar) {
                    out.push(HeuristicPiece { set: reg.set, kappa, found: Some(Upper { j: j.clone(), x: x.clone() }) });
                    continue;
                }
            }
            match neighbor_size(adjusted, cfg.solver.r_n0, reg.xbar.is_none()) {
                Some(r) => work.push((reg.set, r, true, kappa)),
                None => out.push(HeuristicPiece { set: reg.set, kappa, found: None }),
            }
        }
    }
    Ok(out)
}

/// RINS over a region. `root_active` is the working set of the root
/// relaxation piece, which fixes the agreeing binaries.
pub fn rins_cert(
    p: &MpProblem,
    root_active: &[usize],
    x_bar: &AffineMap,
    set: RegionSet,
    cfg: &CertConfig,
) -> Result<Vec<HeuristicPiece>> {
    let fix = rins_agreement(p, &binary_pattern(p, x_bar), root_active);
    if (fix.level() as f64) < cfg.solver.rins_ratio * p.n_b as f64 {
        return Ok(vec![HeuristicPiece { set, kappa: Kappa::default(), found: None }]);
    }
    let sub = with_rows(p, &[parametric_cutoff(p, x_bar, cfg.solver.cutoff_eps)]);
    let regions = bnb_cert_region(&sub, set, &cfg.for_subproblem(), fix)?;
    Ok(regions
        .into_iter()
        .map(|reg| {
            let found = match (reg.xbar, reg.upper) {
                (Some(x), Some(j)) if maps_differ(&x, x_bar) => Some(Upper { j, x }),
                _ => None,
            };
            HeuristicPiece { set: reg.set, kappa: reg.kappa, found }
        })
        .collect())
}

struct Cert<'a> {
    p: &'a MpProblem,
    cfg: &'a CertConfig,
    stack: Vec<Work>,
    done: Vec<CertRegion>,
}

impl Cert<'_> {
    fn eps_quad(&self) -> QuadForm {
        QuadForm::from_affine(&self.cfg.solver.subopt.eps_expr(self.p.n_theta()))
    }

    /// Dominance cut with exact comparisons; returns the surviving part.
    fn cut_dominance(&mut self, w: Work, jl: &QuadForm) -> Result<Vec<Work>> {
        let Some(u) = &w.upper else { return Ok(vec![w]) };
        let s = &self.cfg.solver.subopt;
        let margin = u.j.sub(&jl.scale(1.0 + s.eps_r)).sub(&self.eps_quad());
        let (above, below) = partition(w.set.clone(), &margin, tol::DOMINANCE)?;
        if let Some(set) = below {
            self.stack.push(Work { set, ..w.clone() });
        }
        Ok(above.map(|set| Work { set, ..w }).into_iter().collect())
    }

    /// Dominance cut against affine lower approximations of the difference.
    fn cut_dominance_cons(&mut self, w: Work, jl: &QuadForm) -> Result<Vec<Work>> {
        if w.uppers.is_empty() {
            return Ok(vec![w]);
        }
        let chosen: Vec<Upper> = if self.cfg.all_uppers {
            w.uppers.clone()
        } else {
            let mut set = w.set.clone();
            let center = match set.interior() {
                Some((c, _)) => c,
                None => {
                    let (lo, hi) = set.bbox()?;
                    (lo + hi) * 0.5
                }
            };
            let mut best = &w.uppers[0];
            for u in &w.uppers[1..] {
                if u.j.eval(center.as_slice()) < best.j.eval(center.as_slice()) {
                    best = u;
                }
            }
            vec![best.clone()]
        };
        let s = &self.cfg.solver.subopt;
        let lifted = jl.scale(1.0 + s.eps_r).add(&self.eps_quad());
        let mut survivors = vec![w];
        for u in &chosen {
            let mut next = Vec::new();
            for w in survivors {
                let jt = lifted.sub(&u.j);
                let approx = approximate(self.cfg.approx, &jt, &w.set.poly)?;
                let neg: Vec<f64> = approx.iter().map(|v| -v).collect();
                let (above, below) = partition(w.set.clone(), &QuadForm::from_affine(&neg), tol::DOMINANCE)?;
                if let Some(set) = below {
                    self.stack.push(Work { set, ..w.clone() });
                }
                if let Some(set) = above {
                    next.push(Work { set, ..w });
                }
            }
            survivors = next;
        }
        Ok(survivors)
    }

    fn run_heuristic(&mut self, w: Work) -> Result<()> {
        let u = w.upper.clone().expect("heuristics run after an incumbent");
        let pieces = match self.cfg.solver.heuristic {
            Heuristic::Lb => lb_cert(self.p, &u.x, w.set.clone(), self.cfg)?,
            Heuristic::Rins => {
                let root = w.root_active.clone().unwrap_or_default();
                rins_cert(self.p, &root, &u.x, w.set.clone(), self.cfg)?
            }
            Heuristic::None => unreachable!(),
        };
        for hp in pieces {
            let mut nw = Work { set: hp.set, kappa: w.kappa + hp.kappa, ..w.clone() };
            let Some(h) = hp.found else {
                self.stack.push(nw);
                continue;
            };
            let (above, below) = partition(nw.set.clone(), &u.j.sub(&h.j), tol::DOMINANCE)?;
            if let Some(set) = below {
                self.stack.push(Work { set, ..nw.clone() });
            }
            if let Some(set) = above {
                nw.set = set;
                nw.upper = Some(Upper { j: h.j, x: snap_map(self.p, &h.x) });
                self.stack.push(nw);
            }
        }
        Ok(())
    }

    /// Cut evaluation and branching for one relaxation piece.
    fn cut_cert(&mut self, mut w: Work, node: &CertNode, piece: CertPiece) -> Result<()> {
        w.set = piece.region;
        w.kappa += Kappa { iterations: piece.iterations, nodes: 1 };
        if w.root_active.is_none() {
            w.root_active = Some(piece.active_set.clone());
        }
        let Some(jl) = piece.j else {
            self.stack.push(w);
            return Ok(());
        };
        let survivors = match self.cfg.mode {
            Mode::Exact => self.cut_dominance(w, &jl)?,
            Mode::Conservative => self.cut_dominance_cons(w, &jl)?,
        };
        let cands = branch_candidates(self.p, &node.fix, &piece.active_set);
        let sc = &self.cfg.solver;
        for mut w in survivors {
            if cands.is_empty() {
                let up = Upper { j: jl.clone(), x: snap_map(self.p, &piece.x) };
                match self.cfg.mode {
                    Mode::Exact => w.upper = Some(up),
                    Mode::Conservative => w.uppers.push(up),
                }
                if sc.heuristic != Heuristic::None && self.p.kind == Kind::Milp && !w.heuristic_done {
                    w.heuristic_done = true;
                    self.run_heuristic(w)?;
                } else {
                    self.stack.push(w);
                }
                continue;
            }
            if sc.subopt.t_cut.is_some_and(|t0| w.branchings >= t0) {
                w.tree.clear();
                self.stack.push(w);
                continue;
            }
            w.branchings += 1;
            for (set_k, k) in branch_ind_cert(&piece.x, &cands, w.set.clone(), sc.branch_rule)? {
                let child = |v: u8| CertNode {
                    fix: node.fix.with(k, v),
                    parent_bound: Some(jl.clone()),
                    warm: Some(piece.active_set.clone()),
                };
                let children = match sc.order {
                    crate::bnb_online::ChildOrder::ZeroFirst => [child(0), child(1)],
                    crate::bnb_online::ChildOrder::OneFirst => [child(1), child(0)],
                };
                for (set_i, mut tree) in sort_cert(set_k, &w.tree, children, sc.node_rule)? {
                    if let Some(m0) = sc.subopt.m_cut {
                        tree.truncate(m0);
                    }
                    self.stack.push(Work { set: set_i, tree, ..w.clone() });
                }
            }
        }
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        while let Some(mut w) = self.stack.pop() {
            let limit_hit = self.cfg.solver.node_limit.is_some_and(|l| w.kappa.nodes >= l);
            if w.tree.is_empty() || limit_hit {
                self.done.push(w.finish(self.cfg.mode));
                continue;
            }
            let node = w.tree.remove(0);
            let warm = if self.cfg.solver.warm_start { node.warm.as_deref() } else { None };
            let pieces = cert_relaxation(self.p, &node.fix, &w.set, warm, self.cfg.budget)?;
            for piece in pieces {
                self.cut_cert(w.clone(), &node, piece)?;
            }
            if self.stack.len() + self.done.len() > self.cfg.budget {
                return Err(Error::BudgetExceeded);
            }
        }
        Ok(())
    }
}

/// Certifies the solver over `set`, starting from a root with `root` fixings.
pub fn bnb_cert_region(p: &MpProblem, set: RegionSet, cfg: &CertConfig, root: Fixings) -> Result<Vec<CertRegion>> {
    let start = Work {
        set,
        tree: vec![CertNode { fix: root, parent_bound: None, warm: None }],
        kappa: Kappa::default(),
        upper: None,
        uppers: vec![],
        branchings: 0,
        heuristic_done: false,
        root_active: None,
    };
    let mut c = Cert { p, cfg, stack: vec![start], done: vec![] };
    c.run()?;
    Ok(c.done)
}

/// Certifies the solver over the problem's parameter set.
pub fn bnb_cert(p: &MpProblem, cfg: &CertConfig) -> Result<Certificate> {
    p.validate()?;
    cfg.validate(p)?;
    let mut set = RegionSet::new(p.theta0.clone());
    set.bbox().map_err(|_| Error::UnboundedRegion)?;
    if set.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let regions = bnb_cert_region(p, set, cfg, Fixings::default())?;
    Ok(Certificate { regions, config: Some(cfg.clone()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb_online::{bnb_solve, Subopt};
    use crate::poly_geom::Polyhedron;
    use crate::problems::random_instance;
    use nalgebra::{DMatrix, DVector};

    fn scalar_milp() -> MpProblem {
        let mut p = random_instance(Kind::Milp, 1, 1, 1, 1, 0);
        p.n_c = 0;
        p.binary_indices = vec![0];
        p.c = Some(DVector::from_vec(vec![1.0]));
        p.a = DMatrix::from_row_slice(1, 1, &[-1.0]);
        p.b = DVector::from_vec(vec![0.0]);
        p.w = DMatrix::from_row_slice(1, 1, &[-1.0]);
        p.theta0 = Polyhedron::from_box(&[0.0], &[1.0]);
        p
    }

    fn lookup(c: &Certificate, theta: &[f64]) -> Kappa {
        c.regions.iter().find(|r| r.set.contains(theta, 1e-8)).expect("covered").kappa
    }

    #[test]
    fn scalar_certificate() {
        let p = scalar_milp();
        let c = bnb_cert(&p, &CertConfig::default()).unwrap();
        for k in 1..100 {
            let t = [k as f64 / 100.0];
            assert_eq!(lookup(&c, &t), bnb_solve(&p, &t, &SolverConfig::default()).unwrap().kappa);
        }
        assert_eq!(lookup(&c, &[0.5]).nodes, 3);
    }

    fn two_scores() -> AffineMap {
        // x = (theta, 0.75)
        AffineMap { f: DMatrix::from_row_slice(2, 1, &[1.0, 0.0]), g: DVector::from_vec(vec![0.0, 0.75]) }
    }

    #[test]
    fn most_infeasible_split() {
        let set = RegionSet::new(Polyhedron::from_box(&[0.0], &[0.5]));
        let mut out = branch_ind_cert(&two_scores(), &[0, 1], set, BranchRule::Mib).unwrap();
        out.sort_by(|a, b| a.1.cmp(&b.1));
        assert_eq!(out.len(), 2);
        assert!(out[0].0.contains(&[0.4], 0.0) && !out[0].0.contains(&[0.2], 0.0));
        assert!(out[1].0.contains(&[0.2], 0.0));
        let set = RegionSet::new(Polyhedron::from_box(&[0.0], &[0.5]));
        assert_eq!(branch_ind_cert(&two_scores(), &[0, 1], set, BranchRule::Fb).unwrap().len(), 1);
    }

    #[test]
    fn score_pieces() {
        let x = AffineMap { f: DMatrix::identity(2, 2), g: DVector::zeros(2) };
        let set = RegionSet::new(Polyhedron::from_box(&[0.0, 0.0], &[1.0, 1.0]));
        let pieces = most_inf_score_cert(&x, &[0, 1], set).unwrap();
        assert_eq!(pieces.len(), 4);
        for (mut s, scores) in pieces {
            let (c, _) = s.interior().unwrap();
            for (i, e) in scores.iter().enumerate() {
                let v = c[i];
                assert!((crate::poly_geom::eval_expr(e, c.as_slice()) - (0.5 - (v - 0.5).abs())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn best_first_sort_splits() {
        let node = |b: Option<QuadForm>| CertNode { fix: Fixings { zero: vec![0], one: vec![] }, parent_bound: b, warm: None };
        let pending = [node(Some(QuadForm::constant(1, 0.5)))];
        let theta = QuadForm::from_affine(&[1.0, 0.0]);
        let set = RegionSet::new(Polyhedron::from_box(&[0.0], &[1.0]));
        let out = sort_cert(set, &pending, [node(Some(theta.clone())), node(Some(theta))], NodeRule::Bf).unwrap();
        assert_eq!(out.len(), 2);
        for (s, t) in out {
            let first = s.contains(&[0.25], 0.0);
            assert_eq!(t[0].parent_bound.as_ref().unwrap().r[0] == 1.0, first);
        }
        let set = RegionSet::new(Polyhedron::from_box(&[0.0], &[1.0]));
        let out = sort_cert(set, &[], [node(None), node(None)], NodeRule::Df).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].1.len(), 2);
    }

    fn grid(d: usize, per_axis: usize) -> Vec<Vec<f64>> {
        let pts: Vec<f64> = (0..per_axis).map(|k| -0.5 + 1e-6 + (1.0 - 2e-6) * k as f64 / (per_axis - 1) as f64).collect();
        let mut out = vec![vec![]];
        for _ in 0..d {
            out = out.into_iter().flat_map(|v| pts.iter().map(move |p| [v.clone(), vec![*p]].concat())).collect();
        }
        out
    }

    fn check_lockstep(p: &MpProblem, cfg: &CertConfig, per_axis: usize) {
        let c = bnb_cert(p, cfg).unwrap();
        for t in grid(p.n_theta(), per_axis) {
            let online = bnb_solve(p, &t, &cfg.solver).unwrap();
            let k = lookup(&c, &t);
            assert_eq!(k, online.kappa, "theta {t:?}");
        }
    }

    #[test]
    fn random_milp_lockstep() {
        let mut done = 0;
        for seed in 0..40 {
            let p = random_instance(Kind::Milp, 3, 3, 6, 2, seed);
            if !crate::problems::relaxation_bounded(&p) {
                continue;
            }
            for (node_rule, branch_rule) in [(NodeRule::Df, BranchRule::Mib), (NodeRule::Bf, BranchRule::Fb)] {
                let cfg = CertConfig { solver: SolverConfig { node_rule, branch_rule, ..Default::default() }, ..Default::default() };
                check_lockstep(&p, &cfg, 15);
            }
            done += 1;
            if done == 3 {
                break;
            }
        }
        assert_eq!(done, 3);
    }

    #[test]
    fn heuristic_lockstep() {
        let mut done = 0;
        for seed in 0..40 {
            let p = random_instance(Kind::Milp, 4, 2, 6, 2, seed);
            if !crate::problems::relaxation_bounded(&p) {
                continue;
            }
            for heuristic in [Heuristic::Lb, Heuristic::Rins] {
                let cfg = CertConfig { solver: SolverConfig { heuristic, ..Default::default() }, ..Default::default() };
                check_lockstep(&p, &cfg, 12);
            }
            done += 1;
            if done == 2 {
                break;
            }
        }
    }

    #[test]
    fn suboptimal_lockstep() {
        let p = (0..40).map(|s| random_instance(Kind::Milp, 4, 3, 8, 2, s)).find(crate::problems::relaxation_bounded).unwrap();
        for subopt in [Subopt { t_cut: Some(2), ..Default::default() }, Subopt { m_cut: Some(2), ..Default::default() }] {
            let cfg = CertConfig { solver: SolverConfig { subopt, ..Default::default() }, ..Default::default() };
            check_lockstep(&p, &cfg, 12);
        }
    }

    #[test]
    fn conservative_rejects_best_first() {
        let p = random_instance(Kind::Miqp, 2, 2, 4, 2, 0);
        let cfg = CertConfig {
            mode: Mode::Conservative,
            solver: SolverConfig { node_rule: NodeRule::Bf, ..Default::default() },
            ..Default::default()
        };
        assert!(matches!(bnb_cert(&p, &cfg), Err(Error::Invalid(_))));
    }

    #[test]
    fn conservative_miqp_never_underestimates() {
        let p = (0..40).map(|s| random_instance(Kind::Miqp, 3, 3, 6, 2, s)).find(crate::problems::relaxation_bounded).unwrap();
        for approx in [Approx::Atomic, Approx::Under, Approx::McCormick] {
            let cfg = CertConfig { mode: Mode::Conservative, approx, ..Default::default() };
            let c = bnb_cert(&p, &cfg).unwrap();
            for t in grid(2, 12) {
                let online = bnb_solve(&p, &t, &cfg.solver).unwrap().kappa;
                let k = lookup(&c, &t);
                assert!(k.iterations >= online.iterations && k.nodes >= online.nodes, "{approx:?} {t:?}");
            }
        }
    }

    #[test]
    fn exact_miqp_lockstep() {
        let p = (0..40).map(|s| random_instance(Kind::Miqp, 2, 2, 5, 2, s)).find(crate::problems::relaxation_bounded).unwrap();
        let cfg = CertConfig { solver: SolverConfig { warm_start: true, ..Default::default() }, ..Default::default() };
        check_lockstep(&p, &cfg, 12);
    }

    #[test]
    fn certificate_json_shape() {
        let c = bnb_cert(&scalar_milp(), &CertConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        let r = &v["regions"][0];
        assert!(r["set"]["At"].is_array() && r["kappa"]["nodes"].is_u64());
        assert!(r.get("upper").is_some() && r.get("xbar").is_some());
        let back: Certificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
