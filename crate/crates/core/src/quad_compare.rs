//! Global minimization of quadratic forms over polytopes and the affine
//! under-approximations used by the conservative certifier.

use crate::error::{Error, Result};
use crate::poly_geom::lp::{self, LpOutcome};
use crate::poly_geom::{Polyhedron, QuadForm, RegionSet};
use crate::tol;
use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;

/// Largest parameter dimension handled by face enumeration.
pub const FACE_ENUM_MAX_DIM: usize = 4;
/// Largest facet count handled by face enumeration.
pub const FACE_ENUM_MAX_FACETS: usize = 40;

/// A witness must satisfy every quadratic cut with at least this margin.
/// Margin by which a witness must satisfy every quadratic cut.
pub const QUAD_STRICT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadMin {
    pub value: f64,
    pub argmin: DVector<f64>,
}

/// Affine under-approximation of `J_lower - J_bar` over a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Approx {
    #[default]
    Atomic,
    Under,
    #[serde(rename = "mccormick")]
    McCormick,
}

/// Global minimum of `q` over the bounded polyhedron `poly`.
///
/// Small problems use exact enumeration of KKT points on every face; larger
/// ones fall back to the McCormick spatial branch and bound.
pub fn quad_min(q: &QuadForm, poly: &Polyhedron) -> Result<QuadMin> {
    let d = poly.dim();
    if d == 0 {
        return Ok(QuadMin { value: q.s, argmin: DVector::zeros(0) });
    }
    let facets = poly.remove_redundant();
    if facets.is_empty() {
        return Err(Error::EmptyRegion);
    }
    facets.bounding_box()?;
    if d <= FACE_ENUM_MAX_DIM && facets.n_rows() <= FACE_ENUM_MAX_FACETS {
        if let Some(m) = face_enumeration(q, &facets) {
            return Ok(m);
        }
    }
    quad_min_spatial(q, &facets, 1e-9)
}

/// Enumerates stationary points of `q` restricted to every face of `poly`.
pub fn face_enumeration(q: &QuadForm, poly: &Polyhedron) -> Option<QuadMin> {
    let d = poly.dim();
    let m = poly.n_rows();
    let qs = q.symmetrized().q;
    let mut best: Option<QuadMin> = None;
    for k in 0..=d.min(m) {
        for face in (0..m).combinations(k) {
            let n = d + k;
            let mut kkt = DMatrix::zeros(n, n);
            let mut rhs = DVector::zeros(n);
            for i in 0..d {
                for j in 0..d {
                    kkt[(i, j)] = 2.0 * qs[(i, j)];
                }
                rhs[i] = -q.r[i];
            }
            for (t, &row) in face.iter().enumerate() {
                for j in 0..d {
                    kkt[(d + t, j)] = poly.a[(row, j)];
                    kkt[(j, d + t)] = poly.a[(row, j)];
                }
                rhs[d + t] = poly.b[row];
            }
            let scale = kkt.amax().max(1.0);
            let lu = kkt.clone().lu();
            let u = lu.u();
            let min_pivot = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
            if n > 0 && min_pivot < 1e-11 * scale {
                continue;
            }
            let Some(sol) = lu.solve(&rhs) else { continue };
            let theta: Vec<f64> = sol.rows(0, d).iter().copied().collect();
            if !poly.contains(&theta, 1e-9) {
                continue;
            }
            let value = q.eval(&theta);
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(QuadMin { value, argmin: DVector::from_vec(theta) });
            }
        }
    }
    best
}

/// Index of the lifted variable `w_ij` (`i <= j`) after the `d` original ones.
fn lifted_index(d: usize, i: usize, j: usize) -> usize {
    d + i * d - i * (i + 1) / 2 + j
}

/// McCormick LP lower bound of `q` over `poly` intersected with the box.
/// Returns the bound and the `theta` part of the LP solution.
pub fn mccormick_bound(
    q: &QuadForm,
    poly: &Polyhedron,
    lo: &[f64],
    hi: &[f64],
) -> Option<(f64, DVector<f64>)> {
    let d = poly.dim();
    let nw = d * (d + 1) / 2;
    let nv = d + nw;
    let qs = q.symmetrized().q;
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..poly.n_rows() {
        let mut a = vec![0.0; nv];
        for j in 0..d {
            a[j] = poly.a[(i, j)];
        }
        rows.push((a, poly.b[i]));
    }
    for k in 0..d {
        let mut a = vec![0.0; nv];
        a[k] = 1.0;
        rows.push((a.clone(), hi[k]));
        a[k] = -1.0;
        rows.push((a, -lo[k]));
    }
    for i in 0..d {
        for j in i..d {
            let w = lifted_index(d, i, j);
            let (li, ui, lj, uj) = (lo[i], hi[i], lo[j], hi[j]);
            // w >= lj ti + li tj - li lj and w >= uj ti + ui tj - ui uj
            for (bj, bi) in [(lj, li), (uj, ui)] {
                let mut a = vec![0.0; nv];
                a[i] += bj;
                a[j] += bi;
                a[w] = -1.0;
                rows.push((a, bi * bj));
            }
            // w <= uj ti + li tj - li uj and w <= lj ti + ui tj - ui lj
            for (bj, bi) in [(uj, li), (lj, ui)] {
                let mut a = vec![0.0; nv];
                a[i] -= bj;
                a[j] -= bi;
                a[w] = 1.0;
                rows.push((a, -bi * bj));
            }
        }
    }
    let mut c = vec![0.0; nv];
    for i in 0..d {
        c[i] = q.r[i];
        for j in i..d {
            c[lifted_index(d, i, j)] = if i == j { qs[(i, i)] } else { 2.0 * qs[(i, j)] };
        }
    }
    let a = DMatrix::from_fn(rows.len(), nv, |i, j| rows[i].0[j]);
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    match lp::minimize(&c, &a, &b) {
        LpOutcome::Optimal { x, value, .. } => Some((value + q.s, x.rows(0, d).into_owned())),
        _ => None,
    }
}

#[derive(PartialEq)]
struct BoxNode {
    bound: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Eq for BoxNode {}

impl PartialOrd for BoxNode {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for BoxNode {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        // BinaryHeap is a max-heap; smallest bound first.
        o.bound.total_cmp(&self.bound)
    }
}

/// Spatial branch and bound with McCormick relaxations, to absolute gap `gap`.
pub fn quad_min_spatial(q: &QuadForm, poly: &Polyhedron, gap: f64) -> Result<QuadMin> {
    let (lo, hi) = poly.bounding_box()?;
    let mut best: Option<QuadMin> = None;
    let mut heap = BinaryHeap::new();
    let (lo, hi): (Vec<f64>, Vec<f64>) = (lo.iter().copied().collect(), hi.iter().copied().collect());
    if let Some((bound, theta)) = mccormick_bound(q, poly, &lo, &hi) {
        let v = q.eval(theta.as_slice());
        best = Some(QuadMin { value: v, argmin: theta });
        heap.push(BoxNode { bound, lo, hi });
    }
    let mut iterations = 0usize;
    while let Some(node) = heap.pop() {
        let incumbent = best.as_ref().map_or(f64::INFINITY, |b| b.value);
        if node.bound >= incumbent - gap {
            break;
        }
        iterations += 1;
        if iterations > 50_000 {
            log::warn!("spatial branch and bound stopped at its node limit");
            break;
        }
        let k = (0..node.lo.len())
            .max_by(|&a, &b| (node.hi[a] - node.lo[a]).total_cmp(&(node.hi[b] - node.lo[b])))
            .unwrap();
        let mid = 0.5 * (node.lo[k] + node.hi[k]);
        for half in 0..2 {
            let (mut l, mut h) = (node.lo.clone(), node.hi.clone());
            if half == 0 {
                h[k] = mid;
            } else {
                l[k] = mid;
            }
            if let Some((bound, theta)) = mccormick_bound(q, poly, &l, &h) {
                let v = q.eval(theta.as_slice());
                if best.as_ref().is_none_or(|b| v < b.value) {
                    best = Some(QuadMin { value: v, argmin: theta });
                }
                heap.push(BoxNode { bound, lo: l, hi: h });
            }
        }
    }
    best.ok_or(Error::EmptyRegion)
}

/// Constant bound: `S' = min J over the region`.
pub fn approx_atomic(j: &QuadForm, poly: &Polyhedron) -> Result<Vec<f64>> {
    let mut e = vec![0.0; j.dim() + 1];
    e[j.dim()] = quad_min(j, poly)?.value;
    Ok(e)
}

/// Keeps the linear part and bounds only the quadratic one.
pub fn approx_under(j: &QuadForm, poly: &Polyhedron) -> Result<Vec<f64>> {
    let pure = QuadForm { q: j.q.clone(), ..QuadForm::zero(j.dim()) };
    let mut e = j.affine_expr();
    *e.last_mut().unwrap() += quad_min(&pure, poly)?.value;
    Ok(e)
}

/// Like [`approx_under`] but bounds the quadratic part with one McCormick LP.
pub fn approx_mccormick(j: &QuadForm, poly: &Polyhedron) -> Result<Vec<f64>> {
    let pure = QuadForm { q: j.q.clone(), ..QuadForm::zero(j.dim()) };
    let (lo, hi) = poly.bounding_box()?;
    let (bound, _) = mccormick_bound(&pure, poly, lo.as_slice(), hi.as_slice())
        .ok_or(Error::EmptyRegion)?;
    let mut e = j.affine_expr();
    *e.last_mut().unwrap() += bound;
    Ok(e)
}

pub fn approximate(kind: Approx, j: &QuadForm, poly: &Polyhedron) -> Result<Vec<f64>> {
    match kind {
        Approx::Atomic => approx_atomic(j, poly),
        Approx::Under => approx_under(j, poly),
        Approx::McCormick => approx_mccormick(j, poly),
    }
}

/// Whether `p` lies in `region` with margin: `WIDTH` from every row and
/// `QUAD_STRICT` from every cut.
pub fn strictly_inside(region: &RegionSet, p: &[f64]) -> bool {
    region.poly.max_violation(p) < -tol::WIDTH && region.quads.iter().all(|q| q.eval(p) < -QUAD_STRICT)
}

/// Finds a point strictly inside every cut of `region`, searching boxes that
/// cannot be ruled out by the exact per-cut minimum.
pub fn find_witness(region: &RegionSet) -> Option<DVector<f64>> {
    let poly = &region.poly;
    let (lo, hi) = poly.bounding_box().ok()?;
    let width0 = (&hi - &lo).amax().max(1e-12);
    let strictly_inside = |p: &[f64]| strictly_inside(region, p);
    let mut stack = vec![(lo.iter().copied().collect::<Vec<_>>(), hi.iter().copied().collect::<Vec<_>>())];
    let mut visited = 0usize;
    while let Some((l, h)) = stack.pop() {
        visited += 1;
        if visited > 4000 {
            log::warn!("witness search stopped at its box limit");
            return None;
        }
        let mut sub = poly.clone();
        for k in 0..l.len() {
            let mut e = vec![0.0; l.len()];
            e[k] = 1.0;
            sub = sub.intersect_halfspace(&e, h[k]);
            e[k] = -1.0;
            sub = sub.intersect_halfspace(&e, -l[k]);
        }
        let Ok((center, r)) = sub.chebyshev_center() else { continue };
        if r <= tol::WIDTH {
            continue;
        }
        if strictly_inside(center.as_slice()) {
            return Some(center);
        }
        let mut ruled_out = false;
        for q in &region.quads {
            match quad_min(q, &sub) {
                Ok(m) if m.value >= -QUAD_STRICT => {
                    ruled_out = true;
                    break;
                }
                Ok(m) => {
                    for t in [0.5, 0.9] {
                        let p = &center + (&m.argmin - &center) * t;
                        if strictly_inside(p.as_slice()) {
                            return Some(p);
                        }
                    }
                }
                Err(_) => {
                    ruled_out = true;
                    break;
                }
            }
        }
        // Two cuts negative in parts of the box may still not overlap: a
        // nonnegative weighted sum proves it.
        if !ruled_out && region.quads.len() > 1 {
            ruled_out = region.quads.iter().array_combinations().any(|[a, b]| {
                [(1.0, 1.0), (1.0, 4.0), (4.0, 1.0)].iter().any(|&(wa, wb)| {
                    quad_min(&a.scale(wa).add(&b.scale(wb)), &sub).map_or(true, |m| m.value >= -QUAD_STRICT)
                })
            });
        }
        if ruled_out {
            continue;
        }
        let k = (0..l.len()).max_by(|&a, &b| (h[a] - l[a]).total_cmp(&(h[b] - l[b]))).unwrap();
        if h[k] - l[k] < 1e-7 * width0 {
            continue;
        }
        let mid = 0.5 * (l[k] + h[k]);
        let (mut h1, mut l2) = (h.clone(), l.clone());
        h1[k] = mid;
        l2[k] = mid;
        stack.push((l2, h));
        stack.push((l, h1));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polyhedron {
        Polyhedron::from_box(&[-1., -1.], &[1., 1.])
    }

    fn diag(a: f64, b: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, 0., 0., b])
    }

    fn grid_min(q: &QuadForm, lo: f64, hi: f64, n: usize) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let t = [lo + (hi - lo) * i as f64 / n as f64, lo + (hi - lo) * j as f64 / n as f64];
                best = best.min(q.eval(&t));
            }
        }
        best
    }

    #[test]
    fn saddle_and_concave_minima() {
        let saddle = QuadForm { q: diag(1., -1.), r: DVector::zeros(2), s: 0.0 };
        assert!((quad_min(&saddle, &unit_square()).unwrap().value + 1.0).abs() < 1e-12);
        let concave = QuadForm { q: -DMatrix::identity(2, 2), r: DVector::zeros(2), s: 3.0 };
        assert!((quad_min(&concave, &unit_square()).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn under_approximation_example() {
        let j = QuadForm { q: diag(1., -1.), r: DVector::from_vec(vec![1., 0.]), s: 0.0 };
        let e = approx_under(&j, &unit_square()).unwrap();
        assert_eq!(&e[..2], &[1.0, 0.0]);
        assert!((e[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spatial_route_agrees_with_faces() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let q = QuadForm {
                q: DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0)).symmetric_part(),
                r: DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)),
                s: rng.random_range(-1.0..1.0),
            };
            let faces = face_enumeration(&q, &unit_square()).unwrap().value;
            let spatial = quad_min_spatial(&q, &unit_square(), 1e-9).unwrap().value;
            let grid = grid_min(&q, -1.0, 1.0, 400);
            assert!((faces - spatial).abs() < 1e-6, "{faces} vs {spatial}");
            assert!(faces <= grid + 1e-12 && grid - faces < 1e-4);
        }
    }

    #[test]
    fn approximations_are_sound_on_samples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let poly = unit_square().intersect_halfspace(&[1.0, 1.0], 0.8);
        for _ in 0..30 {
            let j = QuadForm {
                q: DMatrix::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0)).symmetric_part(),
                r: DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0)),
                s: rng.random_range(-1.0..1.0),
            };
            let atomic = approx_atomic(&j, &poly).unwrap();
            let under = approx_under(&j, &poly).unwrap();
            let mcc = approx_mccormick(&j, &poly).unwrap();
            for _ in 0..200 {
                let t = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                if !poly.contains(&t, 0.0) {
                    continue;
                }
                let v = j.eval(&t);
                for e in [&atomic, &under, &mcc] {
                    assert!(crate::poly_geom::eval_expr(e, &t) <= v + 1e-9);
                }
                // McCormick bounds the same quadratic part more loosely.
                assert!(crate::poly_geom::eval_expr(&mcc, &t) <= crate::poly_geom::eval_expr(&under, &t) + 1e-9);
            }
        }
    }
}
