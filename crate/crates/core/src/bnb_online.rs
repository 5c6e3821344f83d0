//! Online branch and bound at a fixed parameter value.

use crate::error::{Error, Result};
use crate::problems::{Kind, MpProblem};
use crate::relax_solver::{branch_candidates, solve_relaxation, Fixings, RelaxResult, Status};
use crate::tol;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NodeRule {
    /// Depth first.
    #[default]
    Df,
    /// Breadth first.
    Brf,
    /// Best first on the parent's relaxation value.
    Bf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BranchRule {
    /// First candidate in binary order.
    #[default]
    Fb,
    /// Most infeasible, `0.5 - |x - 0.5|`.
    Mib,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    #[default]
    None,
    Lb,
    Rins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ChildOrder {
    #[default]
    ZeroFirst,
    OneFirst,
}

/// Suboptimality controls. `eps` and `eps_theta` define the absolute
/// tolerance `eps + eps_theta . theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Subopt {
    #[serde(default)]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps_theta: Vec<f64>,
    #[serde(default)]
    pub eps_r: f64,
    /// Maximum number of branchings.
    #[serde(default)]
    pub t_cut: Option<u64>,
    /// Maximum number of pending nodes.
    #[serde(default)]
    pub m_cut: Option<usize>,
}

impl Subopt {
    pub fn eps_expr(&self, d: usize) -> Vec<f64> {
        let mut e = vec![0.0; d + 1];
        for (k, v) in self.eps_theta.iter().enumerate().take(d) {
            e[k] = *v;
        }
        e[d] = self.eps;
        e
    }

    pub fn is_exact(&self) -> bool {
        self.eps == 0.0 && self.eps_r == 0.0 && self.eps_theta.iter().all(|v| *v == 0.0) && self.t_cut.is_none() && self.m_cut.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub node_rule: NodeRule,
    pub branch_rule: BranchRule,
    pub heuristic: Heuristic,
    pub warm_start: bool,
    pub subopt: Subopt,
    pub order: ChildOrder,
    /// Initial local branching neighbourhood.
    pub r_n0: usize,
    /// Minimum fraction of agreeing binaries before RINS runs.
    pub rins_ratio: f64,
    /// Relative objective cut-off slack in heuristic subproblems.
    pub cutoff_eps: f64,
    /// Stop after this many relaxations (used for heuristic subproblems).
    #[serde(default)]
    pub node_limit: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            node_rule: NodeRule::Df,
            branch_rule: BranchRule::Fb,
            heuristic: Heuristic::None,
            warm_start: false,
            subopt: Subopt::default(),
            order: ChildOrder::ZeroFirst,
            r_n0: 2,
            rins_ratio: 0.5,
            cutoff_eps: 1e-4,
            node_limit: None,
        }
    }
}

/// Node budget of every heuristic subproblem.
pub const HEURISTIC_NODE_LIMIT: u64 = 50;

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rins_ratio) {
            return Err(Error::Invalid("RINS ratio must lie in [0, 1]".into()));
        }
        if self.r_n0 < 1 {
            return Err(Error::Invalid("r_n0 must be at least 1".into()));
        }
        if self.cutoff_eps <= 0.0 {
            return Err(Error::Invalid("cut-off slack must be positive".into()));
        }
        Ok(())
    }

    /// Configuration used for heuristic subproblems.
    pub fn for_subproblem(&self) -> SolverConfig {
        SolverConfig {
            heuristic: Heuristic::None,
            subopt: Subopt::default(),
            node_limit: Some(HEURISTIC_NODE_LIMIT),
            ..self.clone()
        }
    }
}

/// Accumulated complexity: relaxation iterations and relaxations solved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Kappa {
    pub iterations: u64,
    pub nodes: u64,
}

impl std::ops::AddAssign for Kappa {
    fn add_assign(&mut self, o: Kappa) {
        self.iterations += o.iterations;
        self.nodes += o.nodes;
    }
}

impl std::ops::Add for Kappa {
    type Output = Kappa;
    fn add(mut self, o: Kappa) -> Kappa {
        self += o;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineOutcome {
    /// `+inf` when no integer feasible point was found.
    pub j_bar: f64,
    pub x_bar: Option<DVector<f64>>,
    pub kappa: Kappa,
}

/// A pending node.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub fix: Fixings,
    /// Relaxation value of the parent (`-inf` for the root).
    pub parent_bound: f64,
    pub warm: Option<Vec<usize>>,
}

impl Node {
    pub fn root(fix: Fixings) -> Node {
        Node { fix, parent_bound: f64::NEG_INFINITY, warm: None }
    }
}

/// Integer priority comparison for depth- and breadth-first rules: true when
/// a node at `new_level` goes before one at `level`.
pub fn level_precedes(rule: NodeRule, new_level: usize, level: usize) -> bool {
    match rule {
        NodeRule::Df => new_level >= level,
        NodeRule::Brf => new_level <= level,
        NodeRule::Bf => unreachable!("best first compares bounds"),
    }
}

/// Inserts the children as a pair before the first node they do not trail.
pub fn sort_insert(tree: &mut Vec<Node>, children: [Node; 2], rule: NodeRule) {
    let pos = match rule {
        NodeRule::Bf => {
            let rho = children[0].parent_bound;
            tree.iter().position(|n| !(rho - n.parent_bound > tol::TIE))
        }
        _ => {
            let level = children[0].fix.level();
            tree.iter().position(|n| level_precedes(rule, level, n.fix.level()))
        }
    }
    .unwrap_or(tree.len());
    let [a, b] = children;
    tree.splice(pos..pos, [a, b]);
}

/// Most infeasible score of a relaxed value.
pub fn mib_score(x: f64) -> f64 {
    if x - 0.5 > 0.0 {
        1.0 - x
    } else {
        x
    }
}

/// Branching variable among `cands` (non-empty, in binary order).
pub fn branch_index(x: &DVector<f64>, cands: &[usize], rule: BranchRule) -> usize {
    assert!(!cands.is_empty(), "branching requires a candidate");
    match rule {
        BranchRule::Fb => cands[0],
        BranchRule::Mib => {
            let mut best = cands[0];
            let mut sb = mib_score(x[best]);
            for &i in &cands[1..] {
                let s = mib_score(x[i]);
                if s - sb > tol::TIE {
                    best = i;
                    sb = s;
                }
            }
            best
        }
    }
}

/// Sets binaries to exact 0/1 values.
pub fn snap_binaries(p: &MpProblem, x: &DVector<f64>) -> DVector<f64> {
    let mut x = x.clone();
    for &v in &p.binary_indices {
        x[v] = x[v].round();
    }
    x
}

/// Whether two incumbents differ.
pub fn solutions_differ(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    (a - b).amax() > 1e-7
}

/// Appends `rows` (with rhs `b` and parameter rows `w`) to a problem.
pub(crate) fn with_rows(p: &MpProblem, rows: &[(Vec<f64>, f64, Vec<f64>)]) -> MpProblem {
    let (m, n, d) = (p.m(), p.n(), p.n_theta());
    let k = rows.len();
    let mut a = DMatrix::zeros(m + k, n);
    a.rows_mut(0, m).copy_from(&p.a);
    let mut w = DMatrix::zeros(m + k, d);
    w.rows_mut(0, m).copy_from(&p.w);
    let mut b = DVector::zeros(m + k);
    b.rows_mut(0, m).copy_from(&p.b);
    for (t, (ar, br, wr)) in rows.iter().enumerate() {
        for j in 0..n {
            a[(m + t, j)] = ar[j];
        }
        for j in 0..d {
            w[(m + t, j)] = wr[j];
        }
        b[m + t] = *br;
    }
    MpProblem { a, b, w, ..p.clone() }
}

/// Local branching row `sum_{x=0} x_i + sum_{x=1} (1 - x_i) <= r_n` for the
/// binary pattern `ones`.
pub(crate) fn local_branching_row(p: &MpProblem, ones: &[bool], r_n: usize) -> (Vec<f64>, f64, Vec<f64>) {
    let mut a = vec![0.0; p.n()];
    let mut count = 0.0;
    for (j, &v) in p.binary_indices.iter().enumerate() {
        if ones[j] {
            a[v] = -1.0;
            count += 1.0;
        } else {
            a[v] = 1.0;
        }
    }
    (a, r_n as f64 - count, vec![0.0; p.n_theta()])
}

/// Outcome of an improvement heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicOutcome {
    pub j: f64,
    pub x: Option<DVector<f64>>,
    pub kappa: Kappa,
}

/// Neighbourhood update after an unsuccessful local branching pass. The first
/// adjustment shrinks (no solution) or grows (no improvement) the radius; any
/// second adjustment stops.
pub fn neighbor_size(adjusted: bool, r_n0: usize, found_nothing: bool) -> Option<usize> {
    if adjusted {
        None
    } else if found_nothing {
        Some(r_n0 - r_n0 / 2)
    } else {
        Some(r_n0 + r_n0.div_ceil(2))
    }
}

fn cutoff_row(p: &MpProblem, x_bar: &DVector<f64>, eps: f64) -> (Vec<f64>, f64, Vec<f64>) {
    let c = p.c.as_ref().unwrap();
    let rhs = (1.0 - eps) * c.dot(x_bar);
    if c.dot(x_bar) < 0.0 {
        log::warn!("objective cut-off is vacuous for a negative incumbent");
    }
    (c.iter().copied().collect(), rhs, vec![0.0; p.n_theta()])
}

pub fn lb_heuristic(p: &MpProblem, theta: &[f64], x_bar: &DVector<f64>, cfg: &SolverConfig) -> Result<HeuristicOutcome> {
    let ones: Vec<bool> = p.binary_indices.iter().map(|&v| x_bar[v] > 0.5).collect();
    let sub_cfg = cfg.for_subproblem();
    let cut = cutoff_row(p, x_bar, cfg.cutoff_eps);
    let mut kappa = Kappa::default();
    let mut r_n = cfg.r_n0;
    let mut adjusted = false;
    loop {
        let sub = with_rows(p, &[local_branching_row(p, &ones, r_n), cut.clone()]);
        let out = bnb_solve(&sub, theta, &sub_cfg)?;
        kappa += out.kappa;
        if let Some(x) = &out.x_bar {
            if solutions_differ(x, x_bar) {
                return Ok(HeuristicOutcome { j: out.j_bar, x: Some(x.clone()), kappa });
            }
        }
        match neighbor_size(adjusted, cfg.r_n0, out.x_bar.is_none()) {
            Some(r) => {
                r_n = r;
                adjusted = true;
            }
            None => return Ok(HeuristicOutcome { j: f64::INFINITY, x: None, kappa }),
        }
    }
}

/// Binaries on which the incumbent agrees with a relaxed solution, read from
/// the relaxation's working set: the matching box row must be active.
pub fn rins_agreement(p: &MpProblem, x_bar_ones: &[bool], relaxed_active: &[usize]) -> Fixings {
    let (m, nb) = (p.m(), p.n_b);
    let mut fix = Fixings::default();
    for (j, &v) in p.binary_indices.iter().enumerate() {
        if x_bar_ones[j] && relaxed_active.contains(&(m + nb + j)) {
            fix.one.push(v);
        } else if !x_bar_ones[j] && relaxed_active.contains(&(m + j)) {
            fix.zero.push(v);
        }
    }
    fix
}

pub fn rins_heuristic(
    p: &MpProblem,
    theta: &[f64],
    relaxed_active: &[usize],
    x_bar: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<HeuristicOutcome> {
    let ones: Vec<bool> = p.binary_indices.iter().map(|&v| x_bar[v] > 0.5).collect();
    let fix = rins_agreement(p, &ones, relaxed_active);
    if (fix.level() as f64) < cfg.rins_ratio * p.n_b as f64 {
        return Ok(HeuristicOutcome { j: f64::INFINITY, x: None, kappa: Kappa::default() });
    }
    let sub = with_rows(p, &[cutoff_row(p, x_bar, cfg.cutoff_eps)]);
    let out = bnb_solve_from(&sub, theta, &cfg.for_subproblem(), fix)?;
    match out.x_bar {
        Some(x) if solutions_differ(&x, x_bar) => Ok(HeuristicOutcome { j: out.j_bar, x: Some(x), kappa: out.kappa }),
        _ => Ok(HeuristicOutcome { j: f64::INFINITY, x: None, kappa: out.kappa }),
    }
}

struct Online<'a> {
    p: &'a MpProblem,
    theta: &'a [f64],
    cfg: &'a SolverConfig,
    tree: Vec<Node>,
    j_bar: f64,
    x_bar: Option<DVector<f64>>,
    kappa: Kappa,
    branchings: u64,
    heuristic_done: bool,
    root_active: Option<Vec<usize>>,
}

impl Online<'_> {
    fn dominated(&self, j: f64) -> bool {
        if !self.j_bar.is_finite() {
            return false;
        }
        let s = &self.cfg.subopt;
        let eps = crate::poly_geom::eval_expr(&s.eps_expr(self.theta.len()), self.theta);
        let margin = self.j_bar - (1.0 + s.eps_r) * j - eps;
        !(margin > tol::DOMINANCE)
    }

    fn cut_step(&mut self, node: &Node, rel: &RelaxResult) -> Result<()> {
        if rel.status == Status::Infeasible || self.dominated(rel.j) {
            return Ok(());
        }
        let cands = branch_candidates(self.p, &node.fix, &rel.active_set);
        if cands.is_empty() {
            self.j_bar = rel.j;
            self.x_bar = Some(snap_binaries(self.p, &rel.x));
            if self.cfg.heuristic != Heuristic::None && self.p.kind == Kind::Milp && !self.heuristic_done {
                self.heuristic_done = true;
                self.run_heuristic()?;
            }
            return Ok(());
        }
        if let Some(t0) = self.cfg.subopt.t_cut {
            if self.branchings >= t0 {
                self.tree.clear();
                return Ok(());
            }
        }
        self.branchings += 1;
        let k = branch_index(&rel.x, &cands, self.cfg.branch_rule);
        let child = |v: u8| Node { fix: node.fix.with(k, v), parent_bound: rel.j, warm: Some(rel.active_set.clone()) };
        let children = match self.cfg.order {
            ChildOrder::ZeroFirst => [child(0), child(1)],
            ChildOrder::OneFirst => [child(1), child(0)],
        };
        sort_insert(&mut self.tree, children, self.cfg.node_rule);
        if let Some(m0) = self.cfg.subopt.m_cut {
            self.tree.truncate(m0);
        }
        Ok(())
    }

    fn run_heuristic(&mut self) -> Result<()> {
        let x_bar = self.x_bar.clone().unwrap();
        let out = match self.cfg.heuristic {
            Heuristic::Lb => lb_heuristic(self.p, self.theta, &x_bar, self.cfg)?,
            Heuristic::Rins => {
                let root = self.root_active.clone().unwrap_or_default();
                rins_heuristic(self.p, self.theta, &root, &x_bar, self.cfg)?
            }
            Heuristic::None => return Ok(()),
        };
        self.kappa += out.kappa;
        if let Some(x) = out.x {
            if self.j_bar - out.j > tol::DOMINANCE {
                self.j_bar = out.j;
                self.x_bar = Some(snap_binaries(self.p, &x));
            }
        }
        Ok(())
    }
}

/// Solves the problem at `theta`.
pub fn bnb_solve(p: &MpProblem, theta: &[f64], cfg: &SolverConfig) -> Result<OnlineOutcome> {
    bnb_solve_from(p, theta, cfg, Fixings::default())
}

/// Solves the problem at `theta` starting from a root with the given fixings.
pub fn bnb_solve_from(p: &MpProblem, theta: &[f64], cfg: &SolverConfig, root: Fixings) -> Result<OnlineOutcome> {
    if theta.len() != p.n_theta() {
        return Err(Error::Dimension(format!("theta has {} entries, expected {}", theta.len(), p.n_theta())));
    }
    if !p.theta0.contains(theta, tol::MEMBERSHIP) {
        log::warn!("theta lies outside theta0");
    }
    let mut s = Online {
        p,
        theta,
        cfg,
        tree: vec![Node::root(root)],
        j_bar: f64::INFINITY,
        x_bar: None,
        kappa: Kappa::default(),
        branchings: 0,
        heuristic_done: false,
        root_active: None,
    };
    while !s.tree.is_empty() {
        if cfg.node_limit.is_some_and(|lim| s.kappa.nodes >= lim) {
            break;
        }
        let node = s.tree.remove(0);
        let warm = if cfg.warm_start { node.warm.as_deref() } else { None };
        let rel = solve_relaxation(p, &node.fix, theta, warm)?;
        s.kappa += Kappa { iterations: rel.iterations, nodes: 1 };
        if s.root_active.is_none() {
            s.root_active = Some(rel.active_set.clone());
        }
        s.cut_step(&node, &rel)?;
    }
    Ok(OnlineOutcome { j_bar: s.j_bar, x_bar: s.x_bar, kappa: s.kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_geom::Polyhedron;
    use crate::problems::{random_instance, Metadata};

    pub(crate) fn scalar_milp() -> MpProblem {
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
            theta0: Polyhedron::from_box(&[0.0], &[1.0]),
            metadata: Metadata::default(),
        }
    }

    #[test]
    fn scalar_examples() {
        let p = scalar_milp();
        let cfg = SolverConfig::default();
        let o = bnb_solve(&p, &[0.4], &cfg).unwrap();
        assert_eq!(o.j_bar, 1.0);
        assert_eq!(o.kappa.nodes, 3);
        let o = bnb_solve(&p, &[0.0], &cfg).unwrap();
        assert_eq!(o.j_bar, 0.0);
        assert_eq!(o.kappa.nodes, 1);
    }

    #[test]
    fn branching_rules() {
        let x = DVector::from_vec(vec![0.3, 0.9]);
        assert_eq!(branch_index(&x, &[0, 1], BranchRule::Mib), 0);
        let x = DVector::from_vec(vec![0.5, 0.5]);
        assert_eq!(branch_index(&x, &[0, 1], BranchRule::Mib), 0);
        assert_eq!(branch_index(&x, &[1], BranchRule::Fb), 1);
    }

    fn node(level: usize, bound: f64) -> Node {
        Node { fix: Fixings { zero: (0..level).collect(), one: vec![] }, parent_bound: bound, warm: None }
    }

    #[test]
    fn insertion_rules() {
        let mut t = vec![];
        sort_insert(&mut t, [node(1, 0.0), node(1, 0.0)], NodeRule::Df);
        assert_eq!(t.len(), 2);
        let mut t = vec![node(1, 0.0)];
        sort_insert(&mut t, [node(2, 0.0), node(2, 0.0)], NodeRule::Df);
        assert_eq!(t[2].fix.level(), 1);
        let mut t = vec![node(1, 0.0)];
        sort_insert(&mut t, [node(2, 0.0), node(2, 0.0)], NodeRule::Brf);
        assert_eq!(t[0].fix.level(), 1);
        let mut t = vec![node(1, 1.0), node(1, 2.0)];
        sort_insert(&mut t, [node(2, 1.5), node(2, 1.5)], NodeRule::Bf);
        let bounds: Vec<f64> = t.iter().map(|n| n.parent_bound).collect();
        assert_eq!(bounds, vec![1.0, 1.5, 1.5, 2.0]);
    }

    #[test]
    fn neighbourhood_schedule() {
        assert_eq!(neighbor_size(false, 4, false), Some(6));
        assert_eq!(neighbor_size(false, 4, true), Some(2));
        assert_eq!(neighbor_size(false, 1, true), Some(1));
        assert_eq!(neighbor_size(true, 4, false), None);
    }

    /// Minimum over every binary assignment, each solved as a convex relaxation.
    pub(crate) fn brute_force(p: &MpProblem, theta: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for mask in 0..(1u32 << p.n_b) {
            let mut fix = Fixings::default();
            for (j, &v) in p.binary_indices.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    fix.one.push(v);
                } else {
                    fix.zero.push(v);
                }
            }
            let r = solve_relaxation(p, &fix, theta, None).unwrap();
            best = best.min(r.j);
        }
        best
    }

    #[test]
    fn random_instances_match_enumeration() {
        let rules = [
            (NodeRule::Df, BranchRule::Fb),
            (NodeRule::Brf, BranchRule::Mib),
            (NodeRule::Bf, BranchRule::Mib),
        ];
        for seed in 0..20 {
            for kind in [Kind::Milp, Kind::Miqp] {
                let p = random_instance(kind, 4, 4, 8, 2, seed);
                if !crate::problems::relaxation_bounded(&p) {
                    continue;
                }
                let theta = [0.1, -0.2];
                let oracle = brute_force(&p, &theta);
                for (node_rule, branch_rule) in rules {
                    let cfg = SolverConfig { node_rule, branch_rule, warm_start: kind == Kind::Miqp, ..Default::default() };
                    let o = bnb_solve(&p, &theta, &cfg).unwrap();
                    if oracle.is_finite() {
                        assert!((o.j_bar - oracle).abs() < 1e-6, "seed {seed} {kind:?}");
                    } else {
                        assert!(o.j_bar.is_infinite());
                    }
                }
            }
        }
    }

    #[test]
    fn suboptimal_limits_hold() {
        for seed in 0..10 {
            let p = random_instance(Kind::Milp, 5, 3, 10, 2, seed);
            if !crate::problems::relaxation_bounded(&p) {
                continue;
            }
            let mut cfg = SolverConfig::default();
            let exact = bnb_solve(&p, &[0.0, 0.0], &cfg).unwrap();
            cfg.subopt.eps_r = 0.0;
            cfg.subopt.eps = 0.0;
            assert_eq!(bnb_solve(&p, &[0.0, 0.0], &cfg).unwrap(), exact);
            cfg.subopt.t_cut = Some(2);
            let t = bnb_solve(&p, &[0.0, 0.0], &cfg).unwrap();
            assert!(t.kappa.nodes <= 1 + 2 * 2);
            cfg.subopt.t_cut = None;
            cfg.subopt.eps = 1e6;
            let e = bnb_solve(&p, &[0.0, 0.0], &cfg).unwrap();
            assert!(e.kappa.nodes <= exact.kappa.nodes);
        }
    }

    #[test]
    fn heuristics_keep_optimality() {
        for seed in 0..20 {
            let p = random_instance(Kind::Milp, 5, 3, 10, 2, seed);
            if !crate::problems::relaxation_bounded(&p) {
                continue;
            }
            let theta = [0.2, 0.1];
            let oracle = brute_force(&p, &theta);
            for heuristic in [Heuristic::Lb, Heuristic::Rins] {
                let cfg = SolverConfig { heuristic, ..Default::default() };
                let o = bnb_solve(&p, &theta, &cfg).unwrap();
                if oracle.is_finite() {
                    assert!((o.j_bar - oracle).abs() < 1e-6, "seed {seed} {heuristic:?}");
                }
            }
        }
    }

    #[test]
    fn local_branching_finds_better_neighbour() {
        // max 3 x0 + 2 x1 + 1.5 x2 s.t. x0 + x1 + x2 <= 2: from x = (0, 1, 1)
        // the neighbour (1, 1, 0) at Hamming distance 2 is better.
        let mut p = scalar_milp();
        p.n_b = 3;
        p.binary_indices = vec![0, 1, 2];
        p.c = Some(DVector::from_vec(vec![-3.0, -2.0, -1.5]));
        p.a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        p.b = DVector::from_vec(vec![2.0]);
        p.w = DMatrix::zeros(1, 1);
        let x_bar = DVector::from_vec(vec![0.0, 1.0, 1.0]);
        let cfg = SolverConfig { r_n0: 2, ..Default::default() };
        let o = lb_heuristic(&p, &[0.5], &x_bar, &cfg).unwrap();
        assert_eq!(o.j, -5.0);
        assert_eq!(o.x.unwrap().as_slice(), &[1.0, 1.0, 0.0]);
        assert!(o.kappa.nodes > 0);
        // Starting from the optimum nothing better exists.
        let o = lb_heuristic(&p, &[0.5], &DVector::from_vec(vec![1.0, 1.0, 0.0]), &cfg).unwrap();
        assert!(o.x.is_none() && o.kappa.nodes > 0);
    }
}
