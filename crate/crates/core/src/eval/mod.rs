//! Numeric evaluation of compiled formulas, plus the brute-force oracle and
//! a timing harness.
//!
//! Everything is generic over [`Scalar`]: `f64` (with compensated summation)
//! and `i128` (exact; the release profile keeps overflow checks on).

mod bench;
mod brute;
mod matrix;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use ndarray::{Array1, Array2, Axis, LinalgScalar};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::{Formula, IfsTerm, MatrixExpr, TermBody, VectorExpr};
use crate::prune::Lmg;

pub use bench::{bench, BenchReport, BenchRow};
pub use brute::{brute_force_cm, brute_force_value, falling_factorial};
pub use matrix::SymMatrix;

/// Default ceiling on `n^m` for the brute-force oracle.
pub const BRUTE_FORCE_BUDGET: f64 = 1e9;
/// Default ceiling on `n^layers` for one full-sum evaluation.
pub const FULL_SUM_BUDGET: f64 = 2e11;

pub trait Scalar: LinalgScalar + Send + Sync + fmt::Debug + PartialEq {
    type Acc: Default + Copy + Send;

    fn acc_add(acc: &mut Self::Acc, x: Self);
    fn acc_value(acc: Self::Acc) -> Self;
    fn from_coefficient(c: i64) -> Self;
}

/// Neumaier running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Scalar for f64 {
    type Acc = Compensated;

    fn acc_add(acc: &mut Compensated, x: f64) {
        let t = acc.sum + x;
        if acc.sum.abs() >= x.abs() {
            acc.carry += (acc.sum - t) + x;
        } else {
            acc.carry += (x - t) + acc.sum;
        }
        acc.sum = t;
    }

    fn acc_value(acc: Compensated) -> f64 {
        acc.sum + acc.carry
    }

    fn from_coefficient(c: i64) -> f64 {
        c as f64
    }
}

impl Scalar for i128 {
    type Acc = i128;

    fn acc_add(acc: &mut i128, x: i128) {
        *acc += x;
    }

    fn acc_value(acc: i128) -> i128 {
        acc
    }

    fn from_coefficient(c: i64) -> i128 {
        c as i128
    }
}

fn sum_all<T: Scalar>(xs: impl IntoIterator<Item = T>) -> T {
    let mut acc = T::Acc::default();
    for x in xs {
        T::acc_add(&mut acc, x);
    }
    T::acc_value(acc)
}

/// A scalar result in the mode of the input matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Integer(i128),
}

impl Value {
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Float(x) => x,
            Value::Integer(x) => x as f64,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Integer(x) => write!(f, "{x}"),
            Value::Float(x) => f.write_str(&format_significant(*x, 15)),
        }
    }
}

/// `%.{digits}g`-style formatting.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Evaluates expressions against one matrix, memoizing every normalized
/// sub-expression. Safe to share across worker threads.
pub struct Evaluator<'a, T: Scalar> {
    a: &'a Array2<T>,
    mats: Mutex<HashMap<MatrixExpr, Arc<Array2<T>>>>,
    vecs: Mutex<HashMap<VectorExpr, Arc<Array1<T>>>>,
    full_sum_budget: f64,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(a: &'a Array2<T>) -> Self {
        Evaluator {
            a,
            mats: Mutex::new(HashMap::new()),
            vecs: Mutex::new(HashMap::new()),
            full_sum_budget: FULL_SUM_BUDGET,
        }
    }

    pub fn with_full_sum_budget(mut self, budget: f64) -> Self {
        self.full_sum_budget = budget;
        self
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self, m: &MatrixExpr) -> Arc<Array2<T>> {
        if let Some(hit) = self.mats.lock().unwrap().get(m) {
            return hit.clone();
        }
        let value = Arc::new(self.compute_matrix(m));
        self.mats
            .lock()
            .unwrap()
            .entry(m.clone())
            .or_insert(value)
            .clone()
    }

    pub fn vector(&self, v: &VectorExpr) -> Arc<Array1<T>> {
        if let Some(hit) = self.vecs.lock().unwrap().get(v) {
            return hit.clone();
        }
        let value = Arc::new(self.compute_vector(v));
        self.vecs
            .lock()
            .unwrap()
            .entry(v.clone())
            .or_insert(value)
            .clone()
    }

    fn compute_matrix(&self, m: &MatrixExpr) -> Array2<T> {
        match m {
            MatrixExpr::A => self.a.clone(),
            MatrixExpr::Hadamard(items) => {
                let mut acc = self.matrix(&items[0]).as_ref().clone();
                for item in &items[1..] {
                    acc.zip_mut_with(self.matrix(item).as_ref(), |x, &y| *x = *x * y);
                }
                acc
            }
            MatrixExpr::MatMul(items) => {
                let mut acc: Option<Array2<T>> = None;
                let mut left_diag: Option<Array1<T>> = None;
                for item in items {
                    if let MatrixExpr::Diag(v) = item {
                        let d = self.vector(v);
                        match acc.as_mut() {
                            // Column scaling: acc * d(v).
                            Some(acc) => acc.zip_mut_with(&d.view().insert_axis(Axis(0)), |x, &y| *x = *x * y),
                            None => {
                                left_diag = Some(match left_diag {
                                    Some(prev) => prev * d.as_ref(),
                                    None => d.as_ref().clone(),
                                })
                            }
                        }
                        continue;
                    }
                    let x = self.matrix(item);
                    acc = Some(match acc {
                        Some(acc) => acc.dot(x.as_ref()),
                        None => {
                            let mut first = x.as_ref().clone();
                            if let Some(d) = left_diag.take() {
                                // Row scaling: d(v) * first.
                                first.zip_mut_with(&d.view().insert_axis(Axis(1)), |x, &y| *x = *x * y);
                            }
                            first
                        }
                    });
                }
                acc.unwrap_or_else(|| Array2::from_diag(&left_diag.unwrap()))
            }
            MatrixExpr::Diag(v) => Array2::from_diag(self.vector(v).as_ref()),
        }
    }

    fn compute_vector(&self, v: &VectorExpr) -> Array1<T> {
        match v {
            VectorExpr::Ones => Array1::ones(self.n()),
            VectorExpr::MatVec(m, x) => {
                let mut acc = self.vector(x).as_ref().clone();
                // Apply a product right to left as matrix-vector steps.
                let factors: &[MatrixExpr] = match m.as_ref() {
                    MatrixExpr::MatMul(items) => items,
                    single => std::slice::from_ref(single),
                };
                for f in factors.iter().rev() {
                    acc = match f {
                        MatrixExpr::Diag(d) => acc * self.vector(d).as_ref(),
                        other => self.matrix(other).dot(&acc),
                    };
                }
                acc
            }
            VectorExpr::HadamardV(items) => {
                let mut acc = self.vector(&items[0]).as_ref().clone();
                for item in &items[1..] {
                    acc.zip_mut_with(self.vector(item).as_ref(), |x, &y| *x = *x * y);
                }
                acc
            }
        }
    }

    /// `1' v`.
    pub fn sea(&self, v: &VectorExpr) -> T {
        sum_all(self.vector(v).iter().copied())
    }

    pub fn ifs(&self, ifs: &IfsTerm, exec: Exec) -> Result<T> {
        let mut nodes: Vec<Option<Arc<Array1<T>>>> = vec![None; ifs.layers];
        for (p, v) in &ifs.nodes {
            nodes[p - 1] = Some(self.vector(v));
        }
        let factors = ifs
            .factors
            .iter()
            .map(|f| (f.p - 1, f.q - 1, self.matrix(&f.expr)))
            .collect();
        full_sum(self.n(), nodes, factors, self.full_sum_budget, exec)
    }

    pub fn term(&self, body: &TermBody, exec: Exec) -> Result<T> {
        match body {
            TermBody::Sea(v) => Ok(self.sea(v)),
            TermBody::Ifs(ifs) => self.ifs(ifs, exec),
        }
    }

    /// Sum of coefficient times term value, in term order.
    pub fn formula(&self, f: &Formula, exec: Exec) -> Result<T> {
        let terms: Vec<_> = f.terms.iter().collect();
        let values = exec.map(terms, |t| {
            self.term(&t.body, Exec::Sequential)
                .map(|v| T::from_coefficient(t.coefficient) * v)
        });
        Ok(sum_all(values.into_iter().collect::<Result<Vec<_>>>()?))
    }

    /// Full sum of an arbitrary labeled multigraph, layers in ascending node
    /// id order.
    pub fn lmg_full_sum(&self, lmg: &Lmg, exec: Exec) -> Result<T> {
        let index: HashMap<usize, usize> = lmg
            .nodes()
            .keys()
            .enumerate()
            .map(|(i, &id)| (id, i))
            .collect();
        let nodes = lmg
            .nodes()
            .values()
            .map(|v| (*v != VectorExpr::Ones).then(|| self.vector(v)))
            .collect();
        let factors = lmg
            .edges()
            .iter()
            .map(|e| (index[&e.from], index[&e.to], self.matrix(&e.label)))
            .collect();
        full_sum(self.n(), nodes, factors, self.full_sum_budget, exec)
    }
}

type FactorMatrix<T> = (usize, usize, Arc<Array2<T>>);

struct Plan<T: Scalar> {
    n: usize,
    layers: usize,
    // Per-layer starting weights (node labels, or ones).
    init: Vec<Vec<T>>,
    // out[e] holds (later layer l, M) with rows of M indexed by layer e.
    out: Vec<Vec<(usize, Array2<T>)>>,
}

impl<T: Scalar> Plan<T> {
    /// `weights[l]` is the running product for layer `l` given the indexes
    /// already fixed at layers `< layer`.
    fn descend(&self, layer: usize, weights: &[Vec<T>]) -> T {
        let mut acc = T::Acc::default();
        if layer + 1 == self.layers {
            for &w in &weights[layer] {
                T::acc_add(&mut acc, w);
            }
            return T::acc_value(acc);
        }
        let mut next = weights.to_vec();
        for j in 0..self.n {
            let w = weights[layer][j];
            if w == T::zero() {
                continue;
            }
            if !self.fix(layer, j, weights, &mut next) {
                continue;
            }
            T::acc_add(&mut acc, w * self.descend(layer + 1, &next));
        }
        T::acc_value(acc)
    }

    /// Writes into `next` the weights of layers after `layer` once it is
    /// fixed at `j`; false when some later layer is identically zero.
    fn fix(&self, layer: usize, j: usize, weights: &[Vec<T>], next: &mut [Vec<T>]) -> bool {
        for l in layer + 1..self.layers {
            next[l].copy_from_slice(&weights[l]);
        }
        for (l, m) in &self.out[layer] {
            let row = m.row(j);
            let row = row.as_slice().expect("standard layout");
            for (x, &r) in next[*l].iter_mut().zip(row) {
                *x = *x * r;
            }
        }
        self.out[layer]
            .iter()
            .all(|(l, _)| next[*l].iter().any(|&x| x != T::zero()))
    }
}

/// `sum over j_0..j_{L-1} of prod_l nodes[l][j_l] * prod (p, q, M) M[j_p, j_q]`,
/// indexes not required to be distinct.
fn full_sum<T: Scalar>(
    n: usize,
    nodes: Vec<Option<Arc<Array1<T>>>>,
    factors: Vec<FactorMatrix<T>>,
    budget: f64,
    exec: Exec,
) -> Result<T> {
    let layers = nodes.len();
    let estimate = (n as f64).powi(layers as i32);
    if estimate > budget {
        return Err(Error::BudgetExceeded { estimate, budget });
    }
    if layers == 0 {
        return Ok(T::one());
    }
    let mut out = vec![Vec::new(); layers];
    for (p, q, m) in factors {
        if m.dim() != (n, n) {
            return Err(Error::Dimension(format!("factor is {:?}, expected {n}x{n}", m.dim())));
        }
        if p == q || p >= layers || q >= layers {
            return Err(Error::Dimension(format!("factor ({p}, {q}) outside {layers} layers")));
        }
        // Attach each factor to its earlier layer, rows indexed by it.
        if p < q {
            out[p].push((q, m.as_standard_layout().into_owned()));
        } else {
            out[q].push((p, m.t().as_standard_layout().into_owned()));
        }
    }
    let init = nodes
        .into_iter()
        .map(|v| match v {
            Some(v) => v.to_vec(),
            None => vec![T::one(); n],
        })
        .collect();
    let plan = Plan { n, layers, init, out };
    if layers == 1 {
        return Ok(plan.descend(0, &plan.init));
    }
    let outer = exec.map_range(n, |j| {
        let w = plan.init[0][j];
        if w == T::zero() {
            return T::zero();
        }
        let mut next = plan.init.clone();
        if !plan.fix(0, j, &plan.init, &mut next) {
            return T::zero();
        }
        w * plan.descend(1, &next)
    });
    Ok(sum_all(outer))
}

/// Evaluates `f` on `a`, exactly when `a` is an integer matrix.
pub fn eval_formula(f: &Formula, a: &SymMatrix, exec: Exec) -> Result<Value> {
    Ok(match a {
        SymMatrix::Float(m) => Value::Float(Evaluator::new(m).formula(f, exec)?),
        SymMatrix::Integer(m) => Value::Integer(Evaluator::new(m).formula(f, exec)?),
    })
}

/// Evaluates several formulas on one matrix with a shared memo.
pub fn eval_formulas(fs: &[Formula], a: &SymMatrix, exec: Exec) -> Result<Vec<Value>> {
    match a {
        SymMatrix::Float(m) => {
            let ev = Evaluator::new(m);
            fs.iter()
                .map(|f| ev.formula(f, exec).map(Value::Float))
                .collect()
        }
        SymMatrix::Integer(m) => {
            let ev = Evaluator::new(m);
            fs.iter()
                .map(|f| ev.formula(f, exec).map(Value::Integer))
                .collect()
        }
    }
}

pub fn eval_vector_expr(v: &VectorExpr, a: &Array2<f64>) -> Array1<f64> {
    Evaluator::new(a).vector(v).as_ref().clone()
}

pub fn eval_matrix_expr(m: &MatrixExpr, a: &Array2<f64>) -> Array2<f64> {
    Evaluator::new(a).matrix(m).as_ref().clone()
}

pub fn eval_ifs(ifs: &IfsTerm, a: &SymMatrix, exec: Exec) -> Result<Value> {
    Ok(match a {
        SymMatrix::Float(m) => Value::Float(Evaluator::new(m).ifs(ifs, exec)?),
        SymMatrix::Integer(m) => Value::Integer(Evaluator::new(m).ifs(ifs, exec)?),
    })
}
