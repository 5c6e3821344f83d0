//! Polyhedral and quadratically-cut regions of the parameter space.
//!
//! Everything here works on small dense problems: parameter dimension is a
//! handful and regions carry tens of rows.

pub mod lp;

use crate::error::{Error, Result};
use crate::serde_mat;
use crate::tol;
use lp::LpOutcome;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Evaluates an affine expression stored as `[coefficients..., constant]`.
pub fn eval_expr(expr: &[f64], theta: &[f64]) -> f64 {
    let d = theta.len();
    debug_assert_eq!(expr.len(), d + 1);
    expr[d] + expr[..d].iter().zip(theta).map(|(a, t)| a * t).sum::<f64>()
}

/// `{theta : a theta <= b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    #[serde(rename = "At")]
    at: Vec<Vec<f64>>,
    bt: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl Serialize for Polyhedron {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            at: serde_mat::rows_of(&self.a),
            bt: self.b.as_slice().to_vec(),
            dim: (self.a.nrows() == 0).then_some(self.a.ncols()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polyhedron {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = PolyRepr::deserialize(d)?;
        let a = serde_mat::matrix_from_rows(&r.at, r.dim.unwrap_or(0)).map_err(D::Error::custom)?;
        if a.nrows() != r.bt.len() {
            return Err(D::Error::custom(format!(
                "At has {} rows but bt has {} entries",
                a.nrows(),
                r.bt.len()
            )));
        }
        Ok(Polyhedron { a, b: DVector::from_vec(r.bt) })
    }
}

impl Polyhedron {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::Dimension(format!("At has {} rows, bt has {}", a.nrows(), b.len())));
        }
        Ok(Polyhedron { a, b })
    }

    /// Axis-aligned box `lo <= theta <= hi`, rows ordered upper then lower per axis.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let d = lo.len();
        let mut a = DMatrix::zeros(2 * d, d);
        let mut b = DVector::zeros(2 * d);
        for k in 0..d {
            a[(2 * k, k)] = 1.0;
            b[2 * k] = hi[k];
            a[(2 * k + 1, k)] = -1.0;
            b[2 * k + 1] = -lo[k];
        }
        Polyhedron { a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.a.nrows()
    }

    /// Largest normalized violation `(a_i theta - b_i) / |a_i|` (negative inside).
    pub fn max_violation(&self, theta: &[f64]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.n_rows() {
            let row = self.a.row(i);
            let norm = row.norm().max(1e-300);
            let v: f64 = row.iter().zip(theta).map(|(a, t)| a * t).sum::<f64>() - self.b[i];
            worst = worst.max(v / norm);
        }
        worst
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        self.n_rows() == 0 || self.max_violation(theta) <= tol
    }

    pub fn intersect_halfspace(&self, a: &[f64], b: f64) -> Polyhedron {
        let (m, d) = self.a.shape();
        assert_eq!(a.len(), d, "halfspace dimension");
        let mut na = self.a.clone().insert_row(m, 0.0);
        for j in 0..d {
            na[(m, j)] = a[j];
        }
        let nb = self.b.clone().insert_row(m, b);
        Polyhedron { a: na, b: nb }
    }

    pub fn minimize(&self, c: &[f64]) -> LpOutcome {
        lp::minimize(c, &self.a, self.b.as_slice())
    }

    /// Chebyshev center and radius. Rows are normalized internally.
    pub fn chebyshev_center(&self) -> Result<(DVector<f64>, f64)> {
        let (m, d) = self.a.shape();
        let mut a = DMatrix::zeros(m + 1, d + 1);
        let mut b = DVector::zeros(m + 1);
        for i in 0..m {
            let norm = self.a.row(i).norm();
            for j in 0..d {
                a[(i, j)] = self.a[(i, j)];
            }
            a[(i, d)] = norm;
            b[i] = self.b[i];
        }
        a[(m, d)] = 1.0;
        b[m] = 1e6;
        let mut c = vec![0.0; d + 1];
        c[d] = -1.0;
        match lp::minimize(&c, &a, b.as_slice()) {
            LpOutcome::Optimal { x, .. } => {
                let r = x[d];
                if r < -1e-8 {
                    return Err(Error::EmptyRegion);
                }
                Ok((x.rows(0, d).into_owned(), r.max(0.0)))
            }
            _ => Err(Error::EmptyRegion),
        }
    }

    /// True iff no point satisfies every row within 1e-8.
    pub fn is_empty(&self) -> bool {
        self.chebyshev_center().is_err()
    }

    /// Tight axis-aligned bounding box.
    pub fn bounding_box(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        let d = self.dim();
        let mut lo = DVector::zeros(d);
        let mut hi = DVector::zeros(d);
        for k in 0..d {
            let mut c = vec![0.0; d];
            c[k] = 1.0;
            lo[k] = self.extreme(&c)?;
            c[k] = -1.0;
            hi[k] = -self.extreme(&c)?;
        }
        Ok((lo, hi))
    }

    fn extreme(&self, c: &[f64]) -> Result<f64> {
        match self.minimize(c) {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Unbounded => Err(Error::UnboundedRegion),
            LpOutcome::Infeasible => Err(Error::EmptyRegion),
        }
    }

    /// Drops rows implied by the others. The represented set is unchanged.
    pub fn remove_redundant(&self) -> Polyhedron {
        let m = self.n_rows();
        let mut keep: Vec<usize> = (0..m).collect();
        let mut i = 0;
        while i < keep.len() {
            let row = keep[i];
            let norm = self.a.row(row).norm();
            if norm < 1e-14 {
                if self.b[row] >= 0.0 {
                    keep.remove(i);
                    continue;
                }
                i += 1;
                continue;
            }
            let others: Vec<usize> = keep.iter().copied().filter(|&r| r != row).collect();
            let sub = self.select_rows(&others);
            let c: Vec<f64> = self.a.row(row).iter().map(|v| -v).collect();
            let redundant = match sub.minimize(&c) {
                LpOutcome::Optimal { value, .. } => -value <= self.b[row] + 1e-9 * norm,
                LpOutcome::Infeasible => false,
                LpOutcome::Unbounded => false,
            };
            if redundant {
                keep.remove(i);
            } else {
                i += 1;
            }
        }
        self.select_rows(&keep)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Polyhedron {
        Polyhedron {
            a: self.a.select_rows(rows),
            b: self.b.select_rows(rows),
        }
    }
}

/// `theta' Q theta + R theta + S`, also used as the cut `... <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadForm {
    pub q: DMatrix<f64>,
    pub r: DVector<f64>,
    pub s: f64,
}

#[derive(Serialize, Deserialize)]
struct QuadRepr {
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<f64>,
    #[serde(rename = "S")]
    s: f64,
}

impl Serialize for QuadForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadRepr { q: serde_mat::rows_of(&self.q), r: self.r.as_slice().to_vec(), s: self.s }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuadForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = QuadRepr::deserialize(d)?;
        let q = serde_mat::matrix_from_rows(&r.q, r.r.len()).map_err(D::Error::custom)?;
        if q.nrows() != r.r.len() || q.ncols() != r.r.len() {
            return Err(D::Error::custom("Q must be square with the length of R"));
        }
        Ok(QuadForm { q, r: DVector::from_vec(r.r), s: r.s })
    }
}

impl QuadForm {
    pub fn zero(d: usize) -> Self {
        QuadForm { q: DMatrix::zeros(d, d), r: DVector::zeros(d), s: 0.0 }
    }

    pub fn constant(d: usize, s: f64) -> Self {
        QuadForm { s, ..QuadForm::zero(d) }
    }

    pub fn from_affine(expr: &[f64]) -> Self {
        let d = expr.len() - 1;
        QuadForm { q: DMatrix::zeros(d, d), r: DVector::from_column_slice(&expr[..d]), s: expr[d] }
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        let t = DVector::from_column_slice(theta);
        (t.transpose() * &self.q * &t)[(0, 0)] + self.r.dot(&t) + self.s
    }

    pub fn sub(&self, o: &QuadForm) -> QuadForm {
        QuadForm { q: &self.q - &o.q, r: &self.r - &o.r, s: self.s - o.s }
    }

    pub fn add(&self, o: &QuadForm) -> QuadForm {
        QuadForm { q: &self.q + &o.q, r: &self.r + &o.r, s: self.s + o.s }
    }

    pub fn scale(&self, k: f64) -> QuadForm {
        QuadForm { q: &self.q * k, r: &self.r * k, s: self.s * k }
    }

    pub fn neg(&self) -> QuadForm {
        self.scale(-1.0)
    }

    /// True when the quadratic part is numerically absent.
    pub fn is_affine(&self) -> bool {
        let scale = 1.0 + self.r.amax() + self.s.abs();
        self.q.amax() <= 1e-13 * scale
    }

    /// `[R..., S]`, discarding `Q`.
    pub fn affine_expr(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.r.iter().copied().collect();
        e.push(self.s);
        e
    }

    pub fn symmetrized(&self) -> QuadForm {
        QuadForm { q: (&self.q + self.q.transpose()) * 0.5, r: self.r.clone(), s: self.s }
    }
}

/// `x(theta) = F theta + g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(rename = "F", with = "serde_mat::matrix")]
    pub f: DMatrix<f64>,
    #[serde(with = "serde_mat::vector")]
    pub g: DVector<f64>,
}

impl AffineMap {
    /// Builds the map from a `rows x (d + 1)` block whose last column is the constant.
    pub fn from_block(block: &DMatrix<f64>) -> Self {
        let d = block.ncols() - 1;
        AffineMap { f: block.columns(0, d).into_owned(), g: block.column(d).into_owned() }
    }

    pub fn eval(&self, theta: &[f64]) -> DVector<f64> {
        &self.f * DVector::from_column_slice(theta) + &self.g
    }

    pub fn row_expr(&self, i: usize) -> Vec<f64> {
        let mut e: Vec<f64> = self.f.row(i).iter().copied().collect();
        e.push(self.g[i]);
        e
    }
}

/// Outcome of splitting a region by `expr > tol`.
#[derive(Debug, Clone)]
pub enum Split {
    Above,
    Below,
    Both { above: RegionSet, below: RegionSet },
}

#[derive(Debug, Clone, Default)]
struct Cache {
    bbox: Option<(DVector<f64>, DVector<f64>)>,
    /// `Some(None)` records a region known to have no interior.
    interior: Option<Option<(DVector<f64>, f64)>>,
}

/// Polyhedron optionally intersected with quadratic cuts `q(theta) <= 0`.
#[derive(Debug, Clone)]
pub struct RegionSet {
    pub poly: Polyhedron,
    pub quads: Vec<QuadForm>,
    cache: Cache,
}

#[derive(Serialize, Deserialize)]
struct RegionRepr {
    #[serde(flatten)]
    poly: Polyhedron,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    quads: Vec<QuadForm>,
}

impl Serialize for RegionSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RegionRepr { poly: self.poly.clone(), quads: self.quads.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RegionSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RegionRepr::deserialize(d)?;
        Ok(RegionSet { poly: r.poly, quads: r.quads, cache: Cache::default() })
    }
}

impl PartialEq for RegionSet {
    fn eq(&self, o: &Self) -> bool {
        self.poly == o.poly && self.quads == o.quads
    }
}

/// Regions with more rows than this get their redundant rows stripped.
fn prune_threshold(d: usize) -> usize {
    4 * d + 24
}

impl RegionSet {
    pub fn new(poly: Polyhedron) -> Self {
        RegionSet { poly, quads: vec![], cache: Cache::default() }
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        self.poly.contains(theta, tol) && self.quads.iter().all(|q| q.eval(theta) <= tol)
    }

    /// Largest violation over the polyhedral rows and the cuts (negative inside).
    pub fn violation(&self, theta: &[f64]) -> f64 {
        let v = if self.poly.n_rows() == 0 { f64::NEG_INFINITY } else { self.poly.max_violation(theta) };
        self.quads.iter().map(|q| q.eval(theta)).fold(v, f64::max)
    }

    pub fn intersect_halfspace(&self, a: &[f64], b: f64) -> RegionSet {
        let mut poly = self.poly.intersect_halfspace(a, b);
        if self.quads.is_empty() && poly.n_rows() > prune_threshold(self.dim()) {
            poly = poly.remove_redundant();
        }
        RegionSet {
            poly,
            quads: self.quads.clone(),
            cache: Cache { bbox: self.cache.bbox.clone(), interior: None },
        }
    }

    pub fn with_quad(&self, q: QuadForm) -> RegionSet {
        let mut quads = self.quads.clone();
        quads.push(q);
        RegionSet {
            poly: self.poly.clone(),
            quads,
            cache: Cache { bbox: self.cache.bbox.clone(), interior: None },
        }
    }

    /// Bounding box of the polyhedral part (a superset once cuts are added).
    pub fn bbox(&mut self) -> Result<(DVector<f64>, DVector<f64>)> {
        if self.cache.bbox.is_none() {
            self.cache.bbox = Some(self.poly.bounding_box()?);
        }
        Ok(self.cache.bbox.clone().unwrap())
    }

    /// A point with a ball of the returned radius inside the region, if the
    /// region has interior. Quadratic regions report radius zero.
    pub fn interior(&mut self) -> Option<(DVector<f64>, f64)> {
        if self.cache.interior.is_none() {
            let found = if self.quads.is_empty() {
                match self.poly.chebyshev_center() {
                    Ok((c, r)) if r > tol::WIDTH => Some((c, r)),
                    _ => None,
                }
            } else {
                crate::quad_compare::find_witness(self).map(|p| (p, 0.0))
            };
            self.cache.interior = Some(found);
        }
        self.cache.interior.clone().unwrap()
    }

    /// Caches the first candidate lying strictly inside a quadratic region,
    /// sparing the witness search.
    fn seed_interior(&mut self, candidates: &[DVector<f64>]) {
        if self.quads.is_empty() || self.cache.interior.is_some() {
            return;
        }
        if let Some(p) = candidates.iter().find(|p| crate::quad_compare::strictly_inside(self, p.as_slice())) {
            self.cache.interior = Some(Some((p.clone(), 0.0)));
        }
    }

    /// The region's witness and points pulled from `extremes` towards it.
    fn seed_candidates(&mut self, extremes: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let Some((c, _)) = self.interior() else { return vec![] };
        let mut out = vec![c.clone()];
        for e in extremes {
            for t in [0.999, 0.99, 0.9, 0.7, 0.5, 0.3, 0.1] {
                out.push(&c + (e - &c) * t);
            }
        }
        out
    }

    pub fn has_interior(&mut self) -> bool {
        self.interior().is_some()
    }

    /// Point existence (within 1e-8) for polyhedra, interior for quadratic regions.
    pub fn is_empty(&mut self) -> bool {
        if self.quads.is_empty() {
            self.poly.is_empty()
        } else {
            !self.has_interior()
        }
    }

    /// Partitions the region by `expr(theta) > tol`. Sides without interior are
    /// merged into the other side so the union is always preserved.
    pub fn split_affine(&mut self, expr: &[f64], tol: f64) -> Result<Split> {
        let d = self.dim();
        let a = &expr[..d];
        let c0 = expr[d];
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if na == 0.0 {
            return Ok(if c0 > tol { Split::Above } else { Split::Below });
        }
        let (lo, hi) = self.bbox()?;
        let (mut emin, mut emax) = (c0, c0);
        for k in 0..d {
            let (p, q) = (a[k] * lo[k], a[k] * hi[k]);
            emin += p.min(q);
            emax += p.max(q);
        }
        if emin > tol {
            return Ok(Split::Above);
        }
        if emax <= tol {
            return Ok(Split::Below);
        }
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        let mut above = self.intersect_halfspace(&neg, c0 - tol);
        let mut below = self.intersect_halfspace(a, tol - c0);
        if !self.quads.is_empty() {
            let extremes: Vec<DVector<f64>> = [self.poly.minimize(a), self.poly.minimize(&neg)]
                .into_iter()
                .filter_map(|o| match o {
                    LpOutcome::Optimal { x, .. } => Some(x),
                    _ => None,
                })
                .collect();
            let cands = self.seed_candidates(&extremes);
            above.seed_interior(&cands);
            below.seed_interior(&cands);
        }
        if let Some((center, r)) = self.interior() {
            let ec = eval_expr(expr, center.as_slice());
            if r > 0.0 && ec - tol >= r * na {
                above.cache.interior = Some(Some((center, r)));
            } else if r > 0.0 && tol - ec >= r * na {
                below.cache.interior = Some(Some((center, r)));
            }
        } else {
            return Ok(Split::Below);
        }
        let ha = above.has_interior();
        let hb = below.has_interior();
        Ok(match (ha, hb) {
            (true, true) => Split::Both { above, below },
            (true, false) => Split::Above,
            _ => Split::Below,
        })
    }

    /// Partitions the region by `q(theta) > tol` for a general quadratic `q`.
    pub fn split_quad(&mut self, q: &QuadForm, tol: f64) -> Result<Split> {
        if q.is_affine() {
            return self.split_affine(&q.affine_expr(), tol);
        }
        let shifted = QuadForm { s: q.s - tol, ..q.clone() };
        let lo = crate::quad_compare::quad_min(&shifted, &self.poly)?;
        if lo.value > 0.0 {
            return Ok(Split::Above);
        }
        let hi = crate::quad_compare::quad_min(&shifted.neg(), &self.poly)?;
        if -hi.value <= 0.0 {
            return Ok(Split::Below);
        }
        let cands = self.seed_candidates(&[lo.argmin, hi.argmin]);
        let mut above = self.with_quad(shifted.neg());
        let mut below = self.with_quad(shifted);
        above.seed_interior(&cands);
        below.seed_interior(&cands);
        let ha = above.has_interior();
        let hb = below.has_interior();
        Ok(match (ha, hb) {
            (true, true) => Split::Both { above, below },
            (true, false) => Split::Above,
            _ => Split::Below,
        })
    }

    /// Removes redundant polyhedral rows.
    pub fn simplified(&self) -> RegionSet {
        RegionSet {
            poly: self.poly.remove_redundant(),
            quads: self.quads.clone(),
            cache: self.cache.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Polyhedron {
        // theta >= 0 componentwise, theta_1 + theta_2 <= 1
        Polyhedron::new(
            DMatrix::from_row_slice(3, 2, &[-1., 0., 0., -1., 1., 1.]),
            DVector::from_vec(vec![0., 0., 1.]),
        )
        .unwrap()
    }

    #[test]
    fn triangle_chebyshev_matches_inradius() {
        // Inradius of the right triangle with legs 1: area / semiperimeter.
        let legs = 1.0_f64;
        let hyp = (2.0 * legs * legs).sqrt();
        let inradius = (legs * legs / 2.0) / ((2.0 * legs + hyp) / 2.0);
        let (c, r) = triangle().chebyshev_center().unwrap();
        assert!((r - inradius).abs() < 1e-9);
        assert!((c[0] - inradius).abs() < 1e-9 && (c[1] - inradius).abs() < 1e-9);
    }

    #[test]
    fn empty_and_unbounded() {
        let p = Polyhedron::new(
            DMatrix::from_row_slice(2, 1, &[1., -1.]),
            DVector::from_vec(vec![0., -1.]),
        )
        .unwrap();
        assert!(p.is_empty());
        assert_eq!(p.chebyshev_center(), Err(Error::EmptyRegion));
        let half = Polyhedron::new(DMatrix::from_row_slice(1, 2, &[1., 0.]), DVector::from_vec(vec![0.])).unwrap();
        assert_eq!(half.bounding_box(), Err(Error::UnboundedRegion));
        assert!(!Polyhedron::from_box(&[-1., -1.], &[1., 1.]).is_empty());
    }

    #[test]
    fn json_shape() {
        let p = triangle();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"At":[[-1.0,0.0],[0.0,-1.0],[1.0,1.0]],"bt":[0.0,0.0,1.0]}"#);
        let back: Polyhedron = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Polyhedron>(r#"{"At":[[1.0]],"bt":[0.0,1.0]}"#).is_err());
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let p = Polyhedron::from_box(&[0., 0.], &[1., 1.]).intersect_halfspace(&[1., 1.], 5.0);
        assert_eq!(p.remove_redundant().n_rows(), 4);
    }

    #[test]
    fn affine_split_keeps_union() {
        let mut r = RegionSet::new(Polyhedron::from_box(&[-1., -1.], &[1., 1.]));
        match r.split_affine(&[1.0, 0.0, -0.25], 0.0).unwrap() {
            Split::Both { above, below } => {
                assert!(above.contains(&[0.5, 0.0], 0.0) && !above.contains(&[0.0, 0.0], 1e-9));
                assert!(below.contains(&[0.0, 0.9], 0.0) && !below.contains(&[0.5, 0.0], 1e-9));
            }
            s => panic!("{s:?}"),
        }
        assert!(matches!(r.split_affine(&[1.0, 0.0, 3.0], 0.0).unwrap(), Split::Above));
        assert!(matches!(r.split_affine(&[0.0, 0.0, 0.0], 0.0).unwrap(), Split::Below));
        // A sliver thinner than the width tolerance is merged.
        assert!(matches!(r.split_affine(&[1.0, 0.0, -1.0 + 1e-11], 0.0).unwrap(), Split::Below));
    }

    #[test]
    fn disk_cut_is_nonempty() {
        let mut r = RegionSet::new(Polyhedron::from_box(&[-1., -1.], &[1., 1.]))
            .with_quad(QuadForm { q: DMatrix::identity(2, 2), r: DVector::zeros(2), s: -0.5 });
        assert!(!r.is_empty());
        let mut far = RegionSet::new(Polyhedron::from_box(&[0.9, 0.9], &[1., 1.]))
            .with_quad(QuadForm { q: DMatrix::identity(2, 2), r: DVector::zeros(2), s: -0.5 });
        assert!(far.is_empty());
    }
}
