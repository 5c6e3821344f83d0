//! Dense dual simplex for the small LPs that live in parameter space.
//!
//! Every variable gets artificial bounds `|x_k| <= BIG`, which gives a dual
//! feasible starting basis for free. An optimal basis that still leans on an
//! artificial bound with a positive multiplier means the LP is unbounded.

use nalgebra::{DMatrix, DVector};

/// Artificial bound on every variable.
pub const BIG: f64 = 1e7;

const VIOLATION: f64 = 1e-10;
const RATIO_PIVOT: f64 = 1e-11;
const BLAND_AFTER: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// `active` lists the rows of `a` in the final basis.
    Optimal { x: DVector<f64>, value: f64, active: Vec<usize> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

/// Minimizes `c.x` subject to `a x <= b`.
pub fn minimize(c: &[f64], a: &DMatrix<f64>, b: &[f64]) -> LpOutcome {
    let d = c.len();
    let m = a.nrows();
    assert_eq!(a.ncols(), d, "lp: column count");
    assert_eq!(b.len(), m, "lp: rhs length");
    if d == 0 {
        return if b.iter().all(|&v| v >= -VIOLATION) {
            LpOutcome::Optimal { x: DVector::zeros(0), value: 0.0, active: vec![] }
        } else {
            LpOutcome::Infeasible
        };
    }
    let total = m + 2 * d;
    let mut g = DMatrix::<f64>::zeros(total, d);
    let mut h = vec![0.0; total];
    let mut usable = vec![true; total];
    for i in 0..m {
        let norm = a.row(i).norm();
        if norm < 1e-14 {
            if b[i] < -VIOLATION {
                return LpOutcome::Infeasible;
            }
            usable[i] = false;
            continue;
        }
        for j in 0..d {
            g[(i, j)] = a[(i, j)] / norm;
        }
        h[i] = b[i] / norm;
    }
    for k in 0..d {
        g[(m + 2 * k, k)] = 1.0;
        h[m + 2 * k] = BIG;
        g[(m + 2 * k + 1, k)] = -1.0;
        h[m + 2 * k + 1] = BIG;
    }

    let cvec = DVector::from_column_slice(c);
    let mut basis: Vec<usize> =
        (0..d).map(|k| if c[k] < 0.0 { m + 2 * k } else { m + 2 * k + 1 }).collect();
    let mut in_basis = vec![false; total];
    for &r in &basis {
        in_basis[r] = true;
    }
    let mut degenerate = 0usize;
    let limit = 1000 + 50 * total;

    for _ in 0..limit {
        let bmat = DMatrix::from_fn(d, d, |i, j| g[(basis[i], j)]);
        let hb = DVector::from_fn(d, |i, _| h[basis[i]]);
        let Some(x) = bmat.clone().lu().solve(&hb) else {
            return LpOutcome::Infeasible;
        };
        let lut = bmat.transpose().lu();
        let Some(lam) = lut.solve(&(-&cvec)) else {
            return LpOutcome::Infeasible;
        };

        let bland = degenerate > BLAND_AFTER;
        let mut enter = None;
        let mut worst = VIOLATION;
        for i in 0..total {
            if !usable[i] || in_basis[i] {
                continue;
            }
            let v = g.row(i).transpose().dot(&x) - h[i];
            if v > worst {
                enter = Some(i);
                if bland {
                    break;
                }
                worst = v;
            }
        }
        let Some(p) = enter else {
            let unbounded = basis.iter().zip(lam.iter()).any(|(&r, &l)| r >= m && l > 1e-9);
            if unbounded {
                return LpOutcome::Unbounded;
            }
            let mut active: Vec<usize> = basis.iter().copied().filter(|&r| r < m).collect();
            active.sort_unstable();
            let value = cvec.dot(&x);
            return LpOutcome::Optimal { x, value, active };
        };

        let gp = g.row(p).transpose();
        let Some(r) = lut.solve(&gp) else {
            return LpOutcome::Infeasible;
        };
        let mut leave: Option<(usize, f64)> = None;
        for j in 0..d {
            if r[j] <= RATIO_PIVOT {
                continue;
            }
            let t = lam[j].max(0.0) / r[j];
            leave = match leave {
                None => Some((j, t)),
                Some((lj, lt)) => {
                    if t < lt - 1e-12 || (t <= lt + 1e-12 && basis[j] < basis[lj]) {
                        Some((j, t))
                    } else {
                        Some((lj, lt))
                    }
                }
            };
        }
        let Some((j, t)) = leave else {
            return LpOutcome::Infeasible;
        };
        degenerate = if t < 1e-12 { degenerate + 1 } else { 0 };
        in_basis[basis[j]] = false;
        in_basis[p] = true;
        basis[j] = p;
    }
    log::warn!("parameter-space LP hit its iteration limit");
    LpOutcome::Infeasible
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_2d(c: &[f64], a: &DMatrix<f64>, b: &[f64]) -> Option<f64> {
        // Vertex enumeration: every pair of rows, keep feasible intersections.
        let m = a.nrows();
        let mut best: Option<f64> = None;
        for i in 0..m {
            for j in i + 1..m {
                let det = a[(i, 0)] * a[(j, 1)] - a[(i, 1)] * a[(j, 0)];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x0 = (b[i] * a[(j, 1)] - a[(i, 1)] * b[j]) / det;
                let x1 = (a[(i, 0)] * b[j] - b[i] * a[(j, 0)]) / det;
                let feasible = (0..m).all(|k| a[(k, 0)] * x0 + a[(k, 1)] * x1 <= b[k] + 1e-9);
                if feasible {
                    let v = c[0] * x0 + c[1] * x1;
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        }
        best
    }

    #[test]
    fn unit_box_corner() {
        let a = DMatrix::from_row_slice(4, 2, &[1., 0., -1., 0., 0., 1., 0., -1.]);
        let b = [1., 0., 1., 0.];
        match minimize(&[-1., -2.], &a, &b) {
            LpOutcome::Optimal { x, value, active } => {
                assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
                assert!((value + 3.0).abs() < 1e-12);
                assert_eq!(active, vec![0, 2]);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = DMatrix::from_row_slice(2, 1, &[1., -1.]);
        assert_eq!(minimize(&[1.], &a, &[0., -1.]), LpOutcome::Infeasible);
        let a = DMatrix::from_row_slice(1, 2, &[1., 1.]);
        assert_eq!(minimize(&[-1., 0.], &a, &[1.]), LpOutcome::Unbounded);
    }

    #[test]
    fn random_polygons_match_vertex_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let m = rng.random_range(3..9);
            let mut a = DMatrix::zeros(m + 4, 2);
            let mut b = vec![0.0; m + 4];
            for i in 0..m {
                a[(i, 0)] = rng.random_range(-1.0..1.0);
                a[(i, 1)] = rng.random_range(-1.0..1.0);
                b[i] = rng.random_range(-0.3..1.0);
            }
            for (k, (r, s)) in [(0, 1.0), (0, -1.0), (1, 1.0), (1, -1.0)].iter().enumerate() {
                a[(m + k, *r)] = *s;
                b[m + k] = 2.0;
            }
            let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let oracle = brute_force_2d(&c, &a, &b);
            match (minimize(&c, &a, &b), oracle) {
                (LpOutcome::Optimal { value, .. }, Some(o)) => assert!((value - o).abs() < 1e-8),
                (LpOutcome::Infeasible, None) => {}
                (got, want) => panic!("lp {got:?} vs oracle {want:?}"),
            }
        }
    }
}
