//! Problem data: JSON schema, random instances and condensed MPC problems.
//!
//! An mp-MILP is `min c'x s.t. A x <= b + W theta`, an mp-MIQP is
//! `min 0.5 x'Hx + (f + F_theta theta)'x` over the same constraints, with the
//! variables listed in `binary_indices` restricted to `{0, 1}`.

use crate::error::{Error, Result};
use crate::poly_geom::lp::{self, LpOutcome};
use crate::poly_geom::Polyhedron;
use crate::serde_mat;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

/// Regularization added to generated Hessians.
pub const HESSIAN_REGULARIZATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Milp,
    Miqp,
}

/// Optional bookkeeping carried along with a problem file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian_regularization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpProblem {
    pub kind: Kind,
    pub n_c: usize,
    pub n_b: usize,
    pub binary_indices: Vec<usize>,
    pub h: Option<DMatrix<f64>>,
    pub f: Option<DVector<f64>>,
    pub f_theta: Option<DMatrix<f64>>,
    pub c: Option<DVector<f64>>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub w: DMatrix<f64>,
    pub theta0: Polyhedron,
    pub metadata: Metadata,
}

impl MpProblem {
    pub fn n(&self) -> usize {
        self.n_c + self.n_b
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_theta(&self) -> usize {
        self.w.ncols()
    }

    /// Position of `var` in `binary_indices`, if it is binary.
    pub fn binary_position(&self, var: usize) -> Option<usize> {
        self.binary_indices.iter().position(|&v| v == var)
    }

    /// Checks dimensions and kind-specific fields.
    pub fn validate(&self) -> Result<()> {
        let (n, m, d) = (self.n(), self.m(), self.n_theta());
        let dim = |what: &str| Err(Error::Dimension(what.to_string()));
        if self.a.ncols() != n {
            return dim("A must have n_c + n_b columns");
        }
        if self.b.len() != m || self.w.nrows() != m {
            return dim("A, b and W must have the same number of rows");
        }
        if self.theta0.dim() != d {
            return dim("theta0 dimension must match the columns of W");
        }
        if self.binary_indices.len() != self.n_b {
            return dim("binary_indices must list n_b variables");
        }
        let mut seen = vec![false; n];
        for &i in &self.binary_indices {
            if i >= n || seen[i] {
                return Err(Error::Invalid(format!("bad binary index {i}")));
            }
            seen[i] = true;
        }
        match self.kind {
            Kind::Milp => {
                let c = self.c.as_ref().ok_or_else(|| Error::Invalid("milp requires c".into()))?;
                if c.len() != n {
                    return dim("c must have n entries");
                }
            }
            Kind::Miqp => {
                let h = self.h.as_ref().ok_or_else(|| Error::Invalid("miqp requires H".into()))?;
                let f = self.f.as_ref().ok_or_else(|| Error::Invalid("miqp requires f".into()))?;
                if h.shape() != (n, n) || f.len() != n {
                    return dim("H must be n x n and f must have n entries");
                }
                let scale = h.amax().max(1.0);
                if (h - h.transpose()).amax() > 1e-12 * scale {
                    return Err(Error::HNotSymmetric);
                }
                if let Some(ft) = &self.f_theta {
                    if ft.shape() != (n, d) {
                        return dim("f_theta must be n x n_theta");
                    }
                }
            }
        }
        Ok(())
    }

    /// `f + F_theta theta` for an MIQP, `c` for an MILP.
    pub fn linear_cost_at(&self, theta: &[f64]) -> DVector<f64> {
        match self.kind {
            Kind::Milp => self.c.clone().unwrap(),
            Kind::Miqp => {
                let mut l = self.f.clone().unwrap();
                if let Some(ft) = &self.f_theta {
                    l += ft * DVector::from_column_slice(theta);
                }
                l
            }
        }
    }

    /// Objective value of a full-length `x` at `theta`.
    pub fn objective(&self, x: &DVector<f64>, theta: &[f64]) -> f64 {
        let lin = self.linear_cost_at(theta).dot(x);
        match &self.h {
            Some(h) if self.kind == Kind::Miqp => 0.5 * (x.transpose() * h * x)[(0, 0)] + lin,
            _ => lin,
        }
    }

    /// `b + W theta`.
    pub fn rhs_at(&self, theta: &[f64]) -> DVector<f64> {
        &self.b + &self.w * DVector::from_column_slice(theta)
    }

    pub fn to_json(&self) -> Value {
        let mat = |m: &DMatrix<f64>| json!(serde_mat::rows_of(m));
        let vec = |v: &DVector<f64>| json!(v.as_slice());
        let mut o = Map::new();
        o.insert("kind".into(), json!(self.kind));
        o.insert("n_c".into(), json!(self.n_c));
        o.insert("n_b".into(), json!(self.n_b));
        o.insert("binary_indices".into(), json!(self.binary_indices));
        o.insert("H".into(), self.h.as_ref().map_or(Value::Null, mat));
        o.insert("f".into(), self.f.as_ref().map_or(Value::Null, vec));
        o.insert("f_theta".into(), self.f_theta.as_ref().map_or(Value::Null, mat));
        o.insert("c".into(), self.c.as_ref().map_or(Value::Null, vec));
        o.insert("A".into(), mat(&self.a));
        o.insert("b".into(), vec(&self.b));
        o.insert("W".into(), mat(&self.w));
        o.insert("theta0".into(), serde_json::to_value(&self.theta0).unwrap());
        if self.metadata != Metadata::default() {
            o.insert("metadata".into(), serde_json::to_value(&self.metadata).unwrap());
        }
        Value::Object(o)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| parse_err("", "expected an object"))?;
        let kind = match req(obj, "kind")?.as_str() {
            Some("milp") => Kind::Milp,
            Some("miqp") => Kind::Miqp,
            _ => return Err(parse_err("/kind", "expected \"milp\" or \"miqp\"")),
        };
        let n_c = as_usize(req(obj, "n_c")?, "/n_c")?;
        let n_b = as_usize(req(obj, "n_b")?, "/n_b")?;
        let binary_indices = req(obj, "binary_indices")?
            .as_array()
            .ok_or_else(|| parse_err("/binary_indices", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, x)| as_usize(x, &format!("/binary_indices/{i}")))
            .collect::<Result<Vec<_>>>()?;
        let n = n_c + n_b;
        let a = as_matrix(req(obj, "A")?, "/A", n)?;
        let w = as_matrix(req(obj, "W")?, "/W", 0)?;
        let theta0_v = req(obj, "theta0")?;
        let theta0 = {
            let t = theta0_v.as_object().ok_or_else(|| parse_err("/theta0", "expected an object"))?;
            let at = as_matrix(t.get("At").ok_or_else(|| parse_err("/theta0/At", "missing field"))?, "/theta0/At", w.ncols())?;
            let bt = as_vector(t.get("bt").ok_or_else(|| parse_err("/theta0/bt", "missing field"))?, "/theta0/bt")?;
            Polyhedron::new(at, bt).map_err(|e| parse_err("/theta0", &e.to_string()))?
        };
        let metadata = match obj.get("metadata") {
            None | Some(Value::Null) => Metadata::default(),
            Some(m) => serde_json::from_value(m.clone()).map_err(|e| parse_err("/metadata", &e.to_string()))?,
        };
        let p = MpProblem {
            kind,
            n_c,
            n_b,
            binary_indices,
            h: opt(obj, "H", |v| as_matrix(v, "/H", n))?,
            f: opt(obj, "f", |v| as_vector(v, "/f"))?,
            f_theta: opt(obj, "f_theta", |v| as_matrix(v, "/f_theta", w.ncols()))?,
            c: opt(obj, "c", |v| as_vector(v, "/c"))?,
            b: as_vector(req(obj, "b")?, "/b")?,
            a,
            w,
            theta0,
            metadata,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| parse_err("", &e.to_string()))?;
        Self::from_json(&v)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json()).unwrap();
        std::fs::write(path, text)?;
        Ok(())
    }
}

fn parse_err(pointer: &str, msg: &str) -> Error {
    Error::Parse { pointer: if pointer.is_empty() { "/".into() } else { pointer.into() }, msg: msg.into() }
}

fn req<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(&format!("/{key}"), "missing field"))
}

fn opt<T>(obj: &Map<String, Value>, key: &str, f: impl Fn(&Value) -> Result<T>) -> Result<Option<T>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => f(v).map(Some),
    }
}

fn as_usize(v: &Value, ptr: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| parse_err(ptr, "expected a non-negative integer"))
}

fn as_f64(v: &Value, ptr: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| parse_err(ptr, "expected a number"))
}

fn as_vector(v: &Value, ptr: &str) -> Result<DVector<f64>> {
    let arr = v.as_array().ok_or_else(|| parse_err(ptr, "expected an array"))?;
    let vals = arr
        .iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("{ptr}/{i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(vals))
}

fn as_matrix(v: &Value, ptr: &str, ncols_if_empty: usize) -> Result<DMatrix<f64>> {
    let arr = v.as_array().ok_or_else(|| parse_err(ptr, "expected an array of rows"))?;
    let mut rows = Vec::with_capacity(arr.len());
    for (i, r) in arr.iter().enumerate() {
        rows.push(as_vector(r, &format!("{ptr}/{i}"))?.as_slice().to_vec());
    }
    serde_mat::matrix_from_rows(&rows, ncols_if_empty).map_err(|e| parse_err(ptr, &e))
}

/// Random instance with standard normal data, `b ~ U[0, 2]` and the parameter
/// box `[-0.5, 0.5]^n_theta`. The first `n_b` variables are binary.
pub fn random_instance(kind: Kind, n_b: usize, n_c: usize, m: usize, n_theta: usize, seed: u64) -> MpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_b + n_c;
    let mut normal = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let (h, f, f_theta, c) = match kind {
        Kind::Milp => (None, None, None, Some(normal(n, 1).column(0).into_owned())),
        Kind::Miqp => {
            let hb = normal(n, n);
            let h = &hb * hb.transpose() + DMatrix::identity(n, n) * HESSIAN_REGULARIZATION;
            let h = (&h + h.transpose()) * 0.5;
            let f = normal(n, 1).column(0).into_owned();
            (Some(h), Some(f), Some(normal(n, n_theta)), None)
        }
    };
    let a = normal(m, n);
    let b = DVector::from_fn(m, |_, _| rng.random_range(0.0..2.0));
    let w = DMatrix::from_fn(m, n_theta, |_, _| rng.sample::<f64, _>(StandardNormal));
    let lo = vec![-0.5; n_theta];
    let hi = vec![0.5; n_theta];
    MpProblem {
        kind,
        n_c,
        n_b,
        binary_indices: (0..n_b).collect(),
        h,
        f,
        f_theta,
        c,
        a,
        b,
        w,
        theta0: Polyhedron::from_box(&lo, &hi),
        metadata: Metadata {
            seed: Some(seed),
            hessian_regularization: (kind == Kind::Miqp).then_some(HESSIAN_REGULARIZATION),
            source: Some("random".into()),
        },
    }
}

/// True when every LP relaxation of an MILP is bounded below: no direction
/// `d` with `A d <= 0`, `d_binary = 0` and `c'd < 0`. Always true for MIQPs.
pub fn relaxation_bounded(p: &MpProblem) -> bool {
    if p.kind == Kind::Miqp {
        return true;
    }
    let n = p.n();
    let c = p.c.as_ref().unwrap();
    let mut rows: Vec<(Vec<f64>, f64)> = (0..p.m()).map(|i| (p.a.row(i).iter().copied().collect(), 0.0)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let cap = if p.binary_position(j).is_some() { 0.0 } else { 1.0 };
        rows.push((e.clone(), cap));
        e[j] = -1.0;
        rows.push((e, cap));
    }
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i].0[j]);
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    match lp::minimize(c.as_slice(), &a, &b) {
        LpOutcome::Optimal { value, .. } => value > -1e-9,
        _ => false,
    }
}

/// Linear dynamics `x+ = A x + B u` over `horizon` steps with the initial
/// state as parameter.
#[derive(Debug, Clone)]
pub struct MpcSpec {
    pub a_dyn: DMatrix<f64>,
    pub b_dyn: DMatrix<f64>,
    pub q_w: DMatrix<f64>,
    pub r_w: DMatrix<f64>,
    pub horizon: usize,
    pub u_min: DVector<f64>,
    pub u_max: DVector<f64>,
    pub x_min: DVector<f64>,
    pub x_max: DVector<f64>,
    /// Input components restricted to `{0, 1}`.
    pub binary_inputs: Vec<usize>,
}

/// Prediction matrices: stacked states `X = Sx x0 + Su U`.
pub fn prediction_matrices(a: &DMatrix<f64>, b: &DMatrix<f64>, horizon: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let (nx, nu) = (a.nrows(), b.ncols());
    let mut sx = DMatrix::zeros(horizon * nx, nx);
    let mut su = DMatrix::zeros(horizon * nx, horizon * nu);
    let mut powers = vec![DMatrix::identity(nx, nx)];
    for k in 1..=horizon {
        let next = a * &powers[k - 1];
        powers.push(next);
    }
    for k in 1..=horizon {
        sx.view_mut(((k - 1) * nx, 0), (nx, nx)).copy_from(&powers[k]);
        for i in 0..k {
            let blk = &powers[k - 1 - i] * b;
            su.view_mut(((k - 1) * nx, i * nu), (nx, nu)).copy_from(&blk);
        }
    }
    (sx, su)
}

/// Condenses a linear MPC problem into an mp-MIQP in the stacked inputs.
///
/// Cost: `sum_{k=1..N} x_k'Q x_k + sum_{k=0..N-1} u_k'R u_k` with the state
/// term of `x_0` dropped.
pub fn mpc_condense(s: &MpcSpec) -> Result<MpProblem> {
    let (nx, nu, nn) = (s.a_dyn.nrows(), s.b_dyn.ncols(), s.horizon);
    let dim = |what: &str| Err(Error::Dimension(what.to_string()));
    if s.a_dyn.ncols() != nx || s.b_dyn.nrows() != nx {
        return dim("A_dyn must be square and B_dyn must have its row count");
    }
    if s.q_w.shape() != (nx, nx) || s.r_w.shape() != (nu, nu) {
        return dim("Q_w must be n_x x n_x and R_w must be n_u x n_u");
    }
    if s.u_min.len() != nu || s.u_max.len() != nu || s.x_min.len() != nx || s.x_max.len() != nx {
        return dim("bound vectors must match the state and input sizes");
    }
    if nn == 0 {
        return dim("horizon must be positive");
    }
    if s.u_min.iter().zip(s.u_max.iter()).any(|(l, u)| l > u) || s.x_min.iter().zip(s.x_max.iter()).any(|(l, u)| l > u) {
        return Err(Error::Invalid("infeasible bounds".into()));
    }
    if s.binary_inputs.iter().any(|&j| j >= nu) {
        return Err(Error::Invalid("binary input index out of range".into()));
    }
    let (sx, su) = prediction_matrices(&s.a_dyn, &s.b_dyn, nn);
    let qbar = DMatrix::from_fn(nn * nx, nn * nx, |i, j| if i / nx == j / nx { s.q_w[(i % nx, j % nx)] } else { 0.0 });
    let rbar = DMatrix::from_fn(nn * nu, nn * nu, |i, j| if i / nu == j / nu { s.r_w[(i % nu, j % nu)] } else { 0.0 });
    let mut h = (su.transpose() * &qbar * &su + &rbar) * 2.0;
    h = (&h + h.transpose()) * 0.5;
    let mut regularization = None;
    let min_eig = h.clone().symmetric_eigen().eigenvalues.min();
    if min_eig <= 1e-10 {
        h += DMatrix::identity(nn * nu, nn * nu) * HESSIAN_REGULARIZATION;
        regularization = Some(HESSIAN_REGULARIZATION);
    }
    let f_theta = su.transpose() * &qbar * &sx * 2.0;

    let n = nn * nu;
    let mut rows: Vec<(Vec<f64>, f64, Vec<f64>)> = Vec::new();
    for k in 0..nn {
        for j in 0..nu {
            if s.binary_inputs.contains(&j) {
                continue;
            }
            let mut e = vec![0.0; n];
            e[k * nu + j] = 1.0;
            rows.push((e.clone(), s.u_max[j], vec![0.0; nx]));
            e[k * nu + j] = -1.0;
            rows.push((e, -s.u_min[j], vec![0.0; nx]));
        }
    }
    for i in 0..nn * nx {
        let su_row: Vec<f64> = su.row(i).iter().copied().collect();
        let sx_row: Vec<f64> = sx.row(i).iter().copied().collect();
        rows.push((su_row.clone(), s.x_max[i % nx], sx_row.iter().map(|v| -v).collect()));
        rows.push((su_row.iter().map(|v| -v).collect(), -s.x_min[i % nx], sx_row));
    }
    let m = rows.len();
    let binary_indices: Vec<usize> = (0..nn)
        .flat_map(|k| s.binary_inputs.iter().map(move |&j| k * nu + j))
        .collect();
    let n_b = binary_indices.len();
    let p = MpProblem {
        kind: Kind::Miqp,
        n_c: n - n_b,
        n_b,
        binary_indices,
        h: Some(h),
        f: Some(DVector::zeros(n)),
        f_theta: Some(f_theta),
        c: None,
        a: DMatrix::from_fn(m, n, |i, j| rows[i].0[j]),
        b: DVector::from_fn(m, |i, _| rows[i].1),
        w: DMatrix::from_fn(m, nx, |i, j| rows[i].2[j]),
        theta0: Polyhedron::from_box(s.x_min.as_slice(), s.x_max.as_slice()),
        metadata: Metadata { seed: None, hessian_regularization: regularization, source: Some("mpc".into()) },
    };
    p.validate()?;
    Ok(p)
}
