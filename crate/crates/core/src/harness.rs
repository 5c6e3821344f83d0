//! Certificate lookup, grid validation against the online solver and
//! region-map rasters.

use crate::bnb_cert::{CertConfig, Certificate, Mode};
use crate::bnb_online::{bnb_solve, Kappa};
use crate::error::{Error, Result};
use crate::poly_geom::Polyhedron;
use crate::problems::MpProblem;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Distance of lattice corners from the boundary of the parameter box.
pub const GRID_INSET: f64 = 1e-6;

/// Membership tolerance of [`lookup`].
pub const LOOKUP_TOL: f64 = 1e-8;

/// Index and complexity of the region containing `theta`. Near shared
/// facets several regions qualify; the one containing `theta` most deeply
/// wins, then the first in file order.
pub fn lookup(cert: &Certificate, theta: &[f64]) -> Result<(usize, Kappa)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in cert.regions.iter().enumerate() {
        let v = r.set.violation(theta);
        if v <= LOOKUP_TOL && best.is_none_or(|(_, bv)| v < bv) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| (i, cert.regions[i].kappa)).ok_or(Error::CoverageGap)
}

/// Buckets the regions of a certificate by bounding box over the first two
/// parameter axes. Lookups then test only the regions near `theta` and give
/// the same answer as [`lookup`].
pub struct RegionIndex<'a> {
    cert: &'a Certificate,
    axes: usize,
    origin: Vec<f64>,
    step: Vec<f64>,
    cells: usize,
    buckets: Vec<Vec<usize>>,
    /// Regions without a usable bounding box, tested on every lookup.
    always: Vec<usize>,
}

impl<'a> RegionIndex<'a> {
    const MARGIN: f64 = 1e-6;

    pub fn new(cert: &'a Certificate) -> Self {
        let n = cert.regions.len();
        let axes = cert.regions.first().map_or(1, |r| r.set.dim().clamp(1, 2));
        let mut boxes = Vec::with_capacity(n);
        let mut always = Vec::new();
        let (mut lo, mut hi) = (vec![f64::INFINITY; axes], vec![f64::NEG_INFINITY; axes]);
        for (i, r) in cert.regions.iter().enumerate() {
            match r.set.poly.bounding_box() {
                Ok((l, h)) if l.len() >= axes => {
                    let l: Vec<f64> = (0..axes).map(|k| l[k] - Self::MARGIN).collect();
                    let h: Vec<f64> = (0..axes).map(|k| h[k] + Self::MARGIN).collect();
                    for k in 0..axes {
                        lo[k] = lo[k].min(l[k]);
                        hi[k] = hi[k].max(h[k]);
                    }
                    boxes.push(Some((l, h)));
                }
                _ => {
                    always.push(i);
                    boxes.push(None);
                }
            }
        }
        let cells = if axes == 2 { ((n as f64).sqrt().ceil() as usize).clamp(1, 256) } else { n.clamp(1, 4096) };
        if lo[0] > hi[0] {
            lo = vec![0.0; axes];
            hi = vec![1.0; axes];
        }
        let step: Vec<f64> = (0..axes).map(|k| ((hi[k] - lo[k]) / cells as f64).max(f64::MIN_POSITIVE)).collect();
        let mut idx = RegionIndex { cert, axes, origin: lo, step, cells, buckets: vec![], always };
        let mut buckets = vec![Vec::new(); cells.pow(axes as u32)];
        for (i, b) in boxes.iter().enumerate() {
            let Some((l, h)) = b else { continue };
            let (c0, c1) = (idx.cell_of(l), idx.cell_of(h));
            if axes == 1 {
                (c0[0]..=c1[0]).for_each(|a| buckets[a].push(i));
            } else {
                for a in c0[0]..=c1[0] {
                    for b in c0[1]..=c1[1] {
                        buckets[a * cells + b].push(i);
                    }
                }
            }
        }
        idx.buckets = buckets;
        idx
    }

    fn cell_of(&self, theta: &[f64]) -> Vec<usize> {
        (0..self.axes)
            .map(|k| (((theta[k] - self.origin[k]) / self.step[k]).floor().max(0.0) as usize).min(self.cells - 1))
            .collect()
    }

    fn candidates(&self, theta: &[f64]) -> impl Iterator<Item = usize> + '_ {
        let c = self.cell_of(theta);
        let b = if self.axes == 1 { c[0] } else { c[0] * self.cells + c[1] };
        self.buckets[b].iter().chain(&self.always).copied()
    }

    /// Same result as [`lookup`].
    pub fn lookup(&self, theta: &[f64]) -> Result<(usize, Kappa)> {
        let mut best: Option<(usize, f64)> = None;
        for i in self.candidates(theta) {
            let v = self.cert.regions[i].set.violation(theta);
            if v <= LOOKUP_TOL && best.is_none_or(|(bi, bv)| v < bv || (v == bv && i < bi)) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| (i, self.cert.regions[i].kappa)).ok_or(Error::CoverageGap)
    }

    /// Number of regions containing `theta` with tolerance `tol`.
    pub fn count_containing(&self, theta: &[f64], tol: f64) -> usize {
        self.candidates(theta).filter(|&i| self.cert.regions[i].set.contains(theta, tol)).count()
    }
}

/// Every region containing `theta`.
pub fn lookup_all(cert: &Certificate, theta: &[f64]) -> Vec<usize> {
    (0..cert.regions.len()).filter(|&i| cert.regions[i].set.contains(theta, LOOKUP_TOL)).collect()
}

/// Uniform lattice over the bounding box of `theta0`, corners inset, keeping
/// points inside `theta0`.
pub fn grid_points(theta0: &Polyhedron, per_axis: &[usize]) -> Result<Vec<Vec<f64>>> {
    let d = theta0.dim();
    if per_axis.len() != d {
        return Err(Error::Dimension(format!("grid has {} axes, parameter has {d}", per_axis.len())));
    }
    let (lo, hi) = theta0.bounding_box()?;
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let (a, b) = (lo[k] + GRID_INSET, hi[k] - GRID_INSET);
            let n = per_axis[k].max(1);
            if n == 1 {
                vec![0.5 * (a + b)]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        })
        .collect();
    let mut pts: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        pts = pts.into_iter().flat_map(|p| axis.iter().map(move |v| [p.as_slice(), &[*v]].concat())).collect();
    }
    Ok(pts.into_iter().filter(|p| theta0.contains(p, 1e-12)).collect())
}

/// Parses `"100x100"` into per-axis counts.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    spec.split(['x', 'X'])
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("bad grid spec `{spec}`"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub theta: Vec<f64>,
    pub certified: Option<Kappa>,
    pub online: Kappa,
    pub kind: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub exact_matches: usize,
    pub violations: Vec<Violation>,
    /// Largest pointwise overestimate of the iteration count.
    pub max_overestimate_pct: f64,
    /// Overestimate of the worst case over all samples.
    pub worst_case_overestimate_pct: f64,
    pub coverage_misses: usize,
    /// Region interior points lying in more than one region.
    pub overlaps: usize,
    pub max_certified: Kappa,
    pub max_online: Kappa,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.coverage_misses == 0 && self.overlaps == 0
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "samples              {}", self.samples);
        let _ = writeln!(s, "exact matches        {}", self.exact_matches);
        let _ = writeln!(s, "violations           {}", self.violations.len());
        let _ = writeln!(s, "coverage misses      {}", self.coverage_misses);
        let _ = writeln!(s, "overlaps             {}", self.overlaps);
        let _ = writeln!(s, "max kappa (cert)     {} it / {} nodes", self.max_certified.iterations, self.max_certified.nodes);
        let _ = writeln!(s, "max kappa (online)   {} it / {} nodes", self.max_online.iterations, self.max_online.nodes);
        let _ = writeln!(s, "max overestimate     {:.2}%", self.max_overestimate_pct);
        let _ = write!(s, "worst-case overest.  {:.2}%", self.worst_case_overestimate_pct);
        s
    }
}

enum Outcome {
    Miss(Vec<f64>),
    Checked { theta: Vec<f64>, cert: Kappa, online: Kappa, upper_ok: bool },
}

fn pct(over: u64, base: u64) -> f64 {
    if base == 0 {
        if over == 0 { 0.0 } else { f64::INFINITY }
    } else {
        100.0 * (over as f64 - base as f64) / base as f64
    }
}

/// Compares the certificate with online runs at lattice points and at one
/// interior point of every region.
pub fn validate_grid(p: &MpProblem, cert: &Certificate, per_axis: &[usize], cfg: &CertConfig) -> Result<ValidationReport> {
    let mut pts = grid_points(&p.theta0, per_axis)?;
    let index = RegionIndex::new(cert);
    let mut overlaps = 0;
    for r in &cert.regions {
        let mut set = r.set.clone();
        if let Some((c, _)) = set.interior() {
            if index.count_containing(c.as_slice(), 0.0) > 1 {
                overlaps += 1;
            }
            pts.push(c.as_slice().to_vec());
        }
    }
    let exact = cfg.mode == Mode::Exact;
    let outcomes: Vec<Outcome> = pts
        .into_par_iter()
        .map(|theta| -> Result<Outcome> {
            let Ok((idx, k)) = index.lookup(&theta) else { return Ok(Outcome::Miss(theta)) };
            let online = bnb_solve(p, &theta, &cfg.solver)?;
            let upper_ok = match (&cert.regions[idx].upper, exact && online.j_bar.is_finite()) {
                (Some(u), true) => {
                    let v = u.eval(&theta);
                    (v - online.j_bar).abs() <= 1e-6 * (1.0 + online.j_bar.abs())
                }
                (None, true) => false,
                _ => true,
            };
            Ok(Outcome::Checked { theta, cert: k, online: online.kappa, upper_ok })
        })
        .collect::<Result<_>>()?;
    let mut rep = ValidationReport { overlaps, ..Default::default() };
    for o in outcomes {
        rep.samples += 1;
        match o {
            Outcome::Miss(theta) => {
                rep.coverage_misses += 1;
                rep.violations.push(Violation { theta, certified: None, online: Kappa::default(), kind: "coverage gap".into() });
            }
            Outcome::Checked { theta, cert: k, online, upper_ok } => {
                rep.max_certified.iterations = rep.max_certified.iterations.max(k.iterations);
                rep.max_certified.nodes = rep.max_certified.nodes.max(k.nodes);
                rep.max_online.iterations = rep.max_online.iterations.max(online.iterations);
                rep.max_online.nodes = rep.max_online.nodes.max(online.nodes);
                if k == online {
                    rep.exact_matches += 1;
                }
                let kind = if exact {
                    if k != online {
                        Some("mismatch")
                    } else if !upper_ok {
                        Some("upper bound mismatch")
                    } else {
                        None
                    }
                } else if k.iterations < online.iterations || k.nodes < online.nodes {
                    Some("underestimate")
                } else {
                    None
                };
                if !exact {
                    rep.max_overestimate_pct = rep.max_overestimate_pct.max(pct(k.iterations, online.iterations));
                }
                if let Some(kind) = kind {
                    rep.violations.push(Violation { theta, certified: Some(k), online, kind: kind.into() });
                }
            }
        }
    }
    rep.worst_case_overestimate_pct = pct(rep.max_certified.iterations, rep.max_online.iterations);
    Ok(rep)
}

/// CSV raster of the certificate over two parameter axes; the remaining
/// coordinates sit at the Chebyshev center of `theta0`. With a single
/// parameter a one-dimensional raster is produced.
pub fn emit_region_map(cert: &Certificate, theta0: &Polyhedron, axes: (usize, usize), res: usize) -> Result<String> {
    let d = theta0.dim();
    let (center, _) = theta0.chebyshev_center()?;
    let (lo, hi) = theta0.bounding_box()?;
    let coord = |k: usize, i: usize| {
        let (a, b) = (lo[k] + GRID_INSET, hi[k] - GRID_INSET);
        if res <= 1 { 0.5 * (a + b) } else { a + (b - a) * i as f64 / (res - 1) as f64 }
    };
    let index = RegionIndex::new(cert);
    let mut out = String::new();
    if d < 2 {
        out.push_str("theta_0,kappa_iterations,kappa_nodes,region_id\n");
        for i in 0..res {
            let t = [coord(0, i)];
            let (id, k) = index.lookup(&t)?;
            let _ = writeln!(out, "{},{},{},{}", t[0], k.iterations, k.nodes, id);
        }
        return Ok(out);
    }
    let (ai, aj) = axes;
    if ai >= d || aj >= d || ai == aj {
        return Err(Error::Invalid(format!("bad axes ({ai}, {aj}) for {d} parameters")));
    }
    let _ = writeln!(out, "theta_{ai},theta_{aj},kappa_iterations,kappa_nodes,region_id");
    for i in 0..res {
        for j in 0..res {
            let mut t = center.as_slice().to_vec();
            t[ai] = coord(ai, i);
            t[aj] = coord(aj, j);
            if !theta0.contains(&t, 1e-12) {
                continue;
            }
            let (id, k) = index.lookup(&t)?;
            let _ = writeln!(out, "{},{},{},{},{}", t[ai], t[aj], k.iterations, k.nodes, id);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnb_cert::bnb_cert;
    use crate::bnb_online::{NodeRule, SolverConfig};
    use crate::problems::{random_instance, relaxation_bounded, Kind};

    fn instance() -> MpProblem {
        (0..40).map(|s| random_instance(Kind::Milp, 3, 3, 6, 2, s)).find(relaxation_bounded).unwrap()
    }

    #[test]
    fn grid_counts() {
        let box2 = Polyhedron::from_box(&[-0.5, -0.5], &[0.5, 0.5]);
        let g = grid_points(&box2, &[10, 7]).unwrap();
        assert_eq!(g.len(), 70);
        assert!(g.iter().all(|p| p[0] > -0.5 && p[1] < 0.5));
        assert_eq!(parse_grid("100x100").unwrap(), vec![100, 100]);
        assert!(parse_grid("10xa").is_err());
    }

    #[test]
    fn validation_detects_corruption() {
        let p = instance();
        let cfg = CertConfig::default();
        let mut cert = bnb_cert(&p, &cfg).unwrap();
        let rep = validate_grid(&p, &cert, &[20, 20], &cfg).unwrap();
        assert!(rep.passed(), "{}", rep.summary());
        assert_eq!(rep.exact_matches, rep.samples);
        let big = (0..cert.regions.len()).max_by_key(|&i| cert.regions[i].kappa.iterations).unwrap();
        cert.regions[big].kappa.iterations -= 1;
        let rep = validate_grid(&p, &cert, &[20, 20], &cfg).unwrap();
        assert!(!rep.violations.is_empty());
    }

    #[test]
    fn lookup_rules() {
        let p = instance();
        let cert = bnb_cert(&p, &CertConfig::default()).unwrap();
        assert!(matches!(lookup(&cert, &[2.0, 2.0]), Err(Error::CoverageGap)));
        for (i, r) in cert.regions.iter().enumerate() {
            let mut s = r.set.clone();
            let (c, _) = s.interior().unwrap();
            assert_eq!(lookup(&cert, c.as_slice()).unwrap().0, i);
        }
    }

    #[test]
    fn index_agrees_with_linear_lookup() {
        let p = instance();
        let cert = bnb_cert(&p, &CertConfig { solver: SolverConfig { node_rule: NodeRule::Bf, ..Default::default() }, ..Default::default() }).unwrap();
        let index = RegionIndex::new(&cert);
        let mut pts = grid_points(&p.theta0, &[37, 41]).unwrap();
        pts.push(vec![2.0, 2.0]);
        for r in &cert.regions {
            let mut s = r.set.clone();
            pts.push(s.interior().unwrap().0.as_slice().to_vec());
        }
        for t in &pts {
            assert_eq!(index.lookup(t).ok(), lookup(&cert, t).ok(), "{t:?}");
            assert_eq!(index.count_containing(t, 0.0), cert.regions.iter().filter(|r| r.set.contains(t, 0.0)).count());
        }
    }

    #[test]
    fn region_map_rows() {
        let p = instance();
        let cert = bnb_cert(&p, &CertConfig::default()).unwrap();
        let csv = emit_region_map(&cert, &p.theta0, (0, 1), 100).unwrap();
        assert_eq!(csv.lines().count(), 1 + 10_000);
        let mut rng_rows: Vec<&str> = csv.lines().skip(1).step_by(199).take(50).collect();
        rng_rows.dedup();
        for row in rng_rows {
            let v: Vec<f64> = row.split(',').map(|s| s.parse().unwrap()).collect();
            let online = bnb_solve(&p, &v[..2], &Default::default()).unwrap().kappa;
            assert_eq!((v[2] as u64, v[3] as u64), (online.iterations, online.nodes));
        }
    }
}
