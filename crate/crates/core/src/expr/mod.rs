//! Symbolic expressions for the compiled terms.
//!
//! Matrix expressions are built from the input symbol `A`, entry-wise
//! (Hadamard) products, ordinary products and diagonal matrices of vector
//! expressions. Vector expressions are built from the all-ones vector,
//! matrix-vector products and entry-wise products.
//!
//! The smart constructors ([`MatrixExpr::hadamard`], [`MatrixExpr::matmul`],
//! [`VectorExpr::matvec`], [`VectorExpr::hadamard`]) keep trees normalized:
//! nested products are flattened, commutative children are sorted and
//! identity factors (`1` under `∘`, `d(1)` under `·`) are dropped.

mod emit;
mod json;

use std::fmt;

pub use emit::{emit_latex, emit_text, term_latex};
pub use json::{emit_json, parse_json};

/// Declaration order of the variants is the canonical sort order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatrixExpr {
    A,
    Hadamard(Vec<MatrixExpr>),
    MatMul(Vec<MatrixExpr>),
    Diag(Box<VectorExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VectorExpr {
    Ones,
    MatVec(Box<MatrixExpr>, Box<VectorExpr>),
    HadamardV(Vec<VectorExpr>),
}

impl MatrixExpr {
    pub fn hadamard(items: impl IntoIterator<Item = MatrixExpr>) -> MatrixExpr {
        let mut flat = Vec::new();
        for item in items {
            match item {
                MatrixExpr::Hadamard(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        assert!(!flat.is_empty(), "empty Hadamard product");
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        flat.sort();
        MatrixExpr::Hadamard(flat)
    }

    pub fn matmul(items: impl IntoIterator<Item = MatrixExpr>) -> MatrixExpr {
        let mut flat = Vec::new();
        for item in items {
            match item {
                MatrixExpr::MatMul(inner) => flat.extend(inner),
                MatrixExpr::Diag(v) if *v == VectorExpr::Ones => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => MatrixExpr::Diag(Box::new(VectorExpr::Ones)),
            1 => flat.pop().unwrap(),
            _ => MatrixExpr::MatMul(flat),
        }
    }

    pub fn diag(v: VectorExpr) -> MatrixExpr {
        MatrixExpr::Diag(Box::new(v))
    }

    /// `A` multiplied with itself `power` times.
    pub fn power(power: usize) -> MatrixExpr {
        MatrixExpr::matmul(std::iter::repeat_n(MatrixExpr::A, power))
    }

    /// Rebuilds the tree through the smart constructors. Idempotent.
    pub fn normalize(&self) -> MatrixExpr {
        match self {
            MatrixExpr::A => MatrixExpr::A,
            MatrixExpr::Hadamard(items) => MatrixExpr::hadamard(items.iter().map(Self::normalize)),
            MatrixExpr::MatMul(items) => MatrixExpr::matmul(items.iter().map(Self::normalize)),
            MatrixExpr::Diag(v) => MatrixExpr::diag(v.normalize()),
        }
    }

    /// Syntactic transpose. `A` and diagonal matrices are symmetric, so the
    /// result never needs an explicit transpose node.
    pub fn transpose(&self) -> MatrixExpr {
        match self {
            MatrixExpr::A => MatrixExpr::A,
            MatrixExpr::Diag(v) => MatrixExpr::Diag(v.clone()),
            MatrixExpr::Hadamard(items) => MatrixExpr::hadamard(items.iter().map(Self::transpose)),
            MatrixExpr::MatMul(items) => {
                MatrixExpr::matmul(items.iter().rev().map(Self::transpose))
            }
        }
    }

    /// True when the expression equals its own transpose syntactically.
    pub fn is_symmetric(&self) -> bool {
        self.transpose() == *self
    }

    /// Number of `A` leaves.
    pub fn a_count(&self) -> usize {
        match self {
            MatrixExpr::A => 1,
            MatrixExpr::Hadamard(items) | MatrixExpr::MatMul(items) => {
                items.iter().map(Self::a_count).sum()
            }
            MatrixExpr::Diag(v) => v.a_count(),
        }
    }
}

impl VectorExpr {
    pub fn matvec(m: MatrixExpr, v: VectorExpr) -> VectorExpr {
        if m == MatrixExpr::Diag(Box::new(VectorExpr::Ones)) {
            return v;
        }
        VectorExpr::MatVec(Box::new(m), Box::new(v))
    }

    pub fn hadamard(items: impl IntoIterator<Item = VectorExpr>) -> VectorExpr {
        let mut flat = Vec::new();
        for item in items {
            match item {
                VectorExpr::HadamardV(inner) => flat.extend(inner),
                VectorExpr::Ones => {}
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => VectorExpr::Ones,
            1 => flat.pop().unwrap(),
            _ => {
                flat.sort();
                VectorExpr::HadamardV(flat)
            }
        }
    }

    pub fn normalize(&self) -> VectorExpr {
        match self {
            VectorExpr::Ones => VectorExpr::Ones,
            VectorExpr::MatVec(m, v) => VectorExpr::matvec(m.normalize(), v.normalize()),
            VectorExpr::HadamardV(items) => VectorExpr::hadamard(items.iter().map(Self::normalize)),
        }
    }

    pub fn a_count(&self) -> usize {
        match self {
            VectorExpr::Ones => 0,
            VectorExpr::MatVec(m, v) => m.a_count() + v.a_count(),
            VectorExpr::HadamardV(items) => items.iter().map(Self::a_count).sum(),
        }
    }
}

// Canonical ASCII serialization: `o` is the entry-wise product, `*` the
// ordinary product, `1` the all-ones vector.
impl fmt::Display for MatrixExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixExpr::A => f.write_str("A"),
            MatrixExpr::Hadamard(items) => write_joined(f, items, " o "),
            MatrixExpr::MatMul(items) => write_joined(f, items, " * "),
            MatrixExpr::Diag(v) => write!(f, "d({v})"),
        }
    }
}

impl fmt::Display for VectorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorExpr::Ones => f.write_str("1"),
            VectorExpr::MatVec(m, v) => write!(f, "({m} * {v})"),
            VectorExpr::HadamardV(items) => write_joined(f, items, " o "),
        }
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    f.write_str(")")
}

/// Class that produced a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub m: usize,
    pub k: usize,
    pub t: usize,
}

/// One factor `expr[i_p, i_q]` of an irreducible full sum, `1 <= p < q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub p: usize,
    pub q: usize,
    pub expr: MatrixExpr,
    /// `expr` is not syntactically symmetric, so row index `i_p` and column
    /// index `i_q` matter.
    pub oriented: bool,
}

/// A full sum over `layers` free indices that pruning could not reduce.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IfsTerm {
    pub layers: usize,
    /// Node weights `v[i_p]` for nodes whose label is not the all-ones vector,
    /// by 1-based layer index.
    pub nodes: Vec<(usize, VectorExpr)>,
    /// Sorted by `(p, q)`; parallel edges are already combined with `∘`.
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TermBody {
    /// `1' v`.
    Sea(VectorExpr),
    Ifs(IfsTerm),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coefficient: i64,
    pub body: TermBody,
    pub provenance: Provenance,
}

impl Term {
    pub fn is_sea(&self) -> bool {
        matches!(self.body, TermBody::Sea(_))
    }
}

/// `C_m` as a signed combination of terms, ordered by `k` descending then
/// `t` ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub m: usize,
    pub terms: Vec<Term>,
}

impl Formula {
    pub fn ifs_count(&self) -> usize {
        self.terms.iter().filter(|t| !t.is_sea()).count()
    }

    /// Largest number of summation layers over IFS terms, 1 if all are SEA.
    pub fn max_layers(&self) -> usize {
        self.terms
            .iter()
            .map(|t| match &t.body {
                TermBody::Sea(_) => 1,
                TermBody::Ifs(ifs) => ifs.layers,
            })
            .max()
            .unwrap_or(1)
    }
}

pub use crate::prune::compile;
