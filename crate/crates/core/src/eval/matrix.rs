//! Hollow symmetric input matrices and their text format.
//!
//! ```text
//! 3 integer        <- "n", optionally followed by the word "integer"
//! 0 1 1
//! 1 0 1
//! 1 1 0
//! ```

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Symmetric matrix with zero diagonal, in floating-point or exact mode.
#[derive(Clone, Debug, PartialEq)]
pub enum SymMatrix {
    Float(Array2<f64>),
    Integer(Array2<i128>),
}

fn check_square<T>(rows: &[Vec<T>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Dimension("matrix must have at least one row".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Dimension(format!("row {i} has {} entries, expected {n}", r.len())));
    }
    Ok(n)
}

impl SymMatrix {
    /// Floating-point matrix; the diagonal is discarded.
    pub fn from_f64_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = check_square(&rows)?;
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (rows[i][j], rows[j][i]);
                if !x.is_finite() {
                    return Err(Error::Dimension(format!("entry ({i},{j}) is not finite")));
                }
                if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
                    return Err(Error::Dimension(format!("not symmetric at ({i},{j})")));
                }
                if i != j {
                    a[[i, j]] = x;
                }
            }
        }
        Ok(SymMatrix::Float(a))
    }

    /// Exact integer matrix; the diagonal is discarded.
    pub fn from_int_rows(rows: Vec<Vec<i128>>) -> Result<Self> {
        let n = check_square(&rows)?;
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Dimension(format!("not symmetric at ({i},{j})")));
                }
                if i != j {
                    a[[i, j]] = rows[i][j];
                }
            }
        }
        Ok(SymMatrix::Integer(a))
    }

    /// Adjacency matrix of the complete graph.
    pub fn complete(n: usize) -> Self {
        SymMatrix::Integer(Array2::from_shape_fn((n, n), |(i, j)| i128::from(i != j)))
    }

    /// Binary adjacency matrix with independent edges of probability `p`.
    pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Self {
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(p) {
                    a[[i, j]] = 1;
                    a[[j, i]] = 1;
                }
            }
        }
        SymMatrix::Integer(a)
    }

    /// Hollow symmetric matrix with standard normal off-diagonal entries.
    pub fn random_normal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                let x: f64 = StandardNormal.sample(rng);
                a[[i, j]] = x;
                a[[j, i]] = x;
            }
        }
        SymMatrix::Float(a)
    }

    pub fn n(&self) -> usize {
        match self {
            SymMatrix::Float(a) => a.nrows(),
            SymMatrix::Integer(a) => a.nrows(),
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, SymMatrix::Integer(_))
    }

    pub fn to_float(&self) -> Array2<f64> {
        match self {
            SymMatrix::Float(a) => a.clone(),
            SymMatrix::Integer(a) => a.mapv(|x| x as f64),
        }
    }

    /// `P A P'` where row `i` moves to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        fn apply<T: Copy + Default>(a: &Array2<T>, perm: &[usize]) -> Array2<T> {
            let n = a.nrows();
            let mut out = Array2::from_elem((n, n), T::default());
            for i in 0..n {
                for j in 0..n {
                    out[[perm[i], perm[j]]] = a[[i, j]];
                }
            }
            out
        }
        match self {
            SymMatrix::Float(a) => SymMatrix::Float(apply(a, perm)),
            SymMatrix::Integer(a) => SymMatrix::Integer(apply(a, perm)),
        }
    }

    /// Parses the text format; see the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            column: 1,
            message: "empty matrix file".into(),
        })?;
        let mut words = header.split_whitespace();
        let n: usize = words
            .next()
            .and_then(|w| w.parse().ok())
            .ok_or_else(|| Error::Parse {
                line: hline + 1,
                column: 1,
                message: "first line must start with the dimension n".into(),
            })?;
        let integer = match words.next() {
            None => false,
            Some("integer") => true,
            Some(other) => {
                return Err(Error::Parse {
                    line: hline + 1,
                    column: header.find(other).unwrap_or(0) + 1,
                    message: format!("unknown header flag `{other}`"),
                })
            }
        };
        let mut float_rows = Vec::with_capacity(n);
        let mut int_rows = Vec::with_capacity(n);
        for (idx, line) in lines {
            if float_rows.len() + int_rows.len() == n {
                return Err(Error::Parse {
                    line: idx + 1,
                    column: 1,
                    message: format!("more than {n} rows"),
                });
            }
            let mut frow = Vec::with_capacity(n);
            let mut irow = Vec::with_capacity(n);
            for tok in line.split_whitespace() {
                let column = tok.as_ptr() as usize - line.as_ptr() as usize + 1;
                let bad = |what: &str| Error::Parse {
                    line: idx + 1,
                    column,
                    message: format!("`{tok}` is not {what}"),
                };
                if integer {
                    irow.push(tok.parse::<i128>().map_err(|_| bad("an integer"))?);
                } else {
                    frow.push(tok.parse::<f64>().map_err(|_| bad("a number"))?);
                }
            }
            if integer {
                int_rows.push(irow);
            } else {
                float_rows.push(frow);
            }
        }
        if integer {
            if int_rows.len() != n {
                return Err(Error::Dimension(format!("expected {n} rows, found {}", int_rows.len())));
            }
            SymMatrix::from_int_rows(int_rows)
        } else {
            if float_rows.len() != n {
                return Err(Error::Dimension(format!("expected {n} rows, found {}", float_rows.len())));
            }
            SymMatrix::from_f64_rows(float_rows)
        }
    }

    /// Inverse of [`SymMatrix::parse`]; floats are written in shortest
    /// round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            SymMatrix::Float(a) => {
                out.push_str(&format!("{}\n", a.nrows()));
                for row in a.rows() {
                    let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                    out.push_str(&cells.join(" "));
                    out.push('\n');
                }
            }
            SymMatrix::Integer(a) => {
                out.push_str(&format!("{} integer\n", a.nrows()));
                for row in a.rows() {
                    let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    out.push_str(&cells.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }
}
