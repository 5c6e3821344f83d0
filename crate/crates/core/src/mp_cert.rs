//! Parametric execution of the relaxation engines over a region.
//!
//! The engine is rerun from scratch for every piece. Each run replays a
//! recorded prefix of decisions; a fresh decision that splits the region
//! continues on the `true` side and queues the `false` side with the prefix
//! extended accordingly.

use crate::error::{Error, Result};
use crate::poly_geom::{AffineMap, QuadForm, RegionSet, Split};
use crate::problems::MpProblem;
use crate::relax_solver::{build_relaxation, run_engine, Decider, Fixings, Param, Relaxation, Status};

/// Default cap on pieces produced for one relaxation.
pub const DEFAULT_PIECE_BUDGET: usize = 100_000;

/// One region on which the relaxation solver follows a single path.
#[derive(Debug, Clone)]
pub struct CertPiece {
    pub region: RegionSet,
    pub iterations: u64,
    /// Global row ids of the final working set.
    pub active_set: Vec<usize>,
    /// `None` when infeasible.
    pub j: Option<QuadForm>,
    pub x: AffineMap,
    pub status: Status,
}

struct Replay<'a> {
    path: Vec<bool>,
    pos: usize,
    region: RegionSet,
    forks: &'a mut Vec<(Vec<bool>, RegionSet)>,
}

impl Decider for Replay<'_> {
    fn positive(&mut self, expr: &[f64], tol: f64) -> Result<bool> {
        if self.pos < self.path.len() {
            self.pos += 1;
            return Ok(self.path[self.pos - 1]);
        }
        let outcome = match self.region.split_affine(expr, tol)? {
            Split::Above => true,
            Split::Below => false,
            Split::Both { above, below } => {
                let mut alt = self.path.clone();
                alt.push(false);
                self.forks.push((alt, below));
                self.region = above;
                true
            }
        };
        self.path.push(outcome);
        self.pos += 1;
        Ok(outcome)
    }
}

/// Partitions `region` into pieces on which the relaxation of `fix` has a
/// fixed working set, iteration count and affine solution.
pub fn cert_relaxation(
    p: &MpProblem,
    fix: &Fixings,
    region: &RegionSet,
    warm: Option<&[usize]>,
    budget: usize,
) -> Result<Vec<CertPiece>> {
    let r = build_relaxation(p, fix, Param::Symbolic);
    cert_built(&r, region, warm, budget)
}

pub(crate) fn cert_built(r: &Relaxation, region: &RegionSet, warm: Option<&[usize]>, budget: usize) -> Result<Vec<CertPiece>> {
    let mut work = vec![(Vec::new(), region.clone())];
    let mut out = Vec::new();
    while let Some((path, reg)) = work.pop() {
        let mut forks = Vec::new();
        let mut dec = Replay { path, pos: 0, region: reg, forks: &mut forks };
        let o = run_engine(r, warm, &mut dec)?;
        let region = dec.region;
        work.extend(forks);
        let xb = r.full_x(&o.x);
        let j = (o.status == Status::Optimal).then(|| r.objective(&xb));
        out.push(CertPiece {
            region,
            iterations: o.iterations,
            active_set: r.global_rows(&o.active),
            j,
            x: AffineMap::from_block(&xb),
            status: o.status,
        });
        if out.len() + work.len() > budget {
            return Err(Error::BudgetExceeded);
        }
    }
    Ok(out)
}
