//! Formula documents:
//!
//! ```text
//! { "m": int,
//!   "terms": [ { "coef": int, "kind": "sea" | "ifs", "k": int, "t": int,
//!                "expr": AST,                       // sea only
//!                "layers": int,                     // ifs only
//!                "nodes": [ { "p": int, "expr": AST } ],              // ifs only
//!                "factors": [ { "p": int, "q": int, "expr": AST, "oriented": bool } ] } ] }
//! ```
//!
//! AST nodes are `{ "op": "A" | "hadamard" | "matmul" | "diag" | "ones" | "matvec",
//! "args": [AST...] }`. `hadamard` takes matrix or vector arguments depending
//! on context.

use serde::{Deserialize, Serialize};

use super::{Factor, Formula, IfsTerm, MatrixExpr, Provenance, Term, TermBody, VectorExpr};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormulaDoc {
    m: usize,
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    coef: i64,
    kind: String,
    k: usize,
    t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expr: Option<Ast>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nodes: Option<Vec<NodeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    factors: Option<Vec<FactorDoc>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    p: usize,
    expr: Ast,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorDoc {
    p: usize,
    q: usize,
    expr: Ast,
    oriented: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Ast {
    op: String,
    #[serde(default)]
    args: Vec<Ast>,
}

impl Ast {
    fn leaf(op: &str) -> Ast {
        Ast {
            op: op.into(),
            args: vec![],
        }
    }

    fn node(op: &str, args: Vec<Ast>) -> Ast {
        Ast { op: op.into(), args }
    }
}

fn mat_ast(m: &MatrixExpr) -> Ast {
    match m {
        MatrixExpr::A => Ast::leaf("A"),
        MatrixExpr::Hadamard(items) => Ast::node("hadamard", items.iter().map(mat_ast).collect()),
        MatrixExpr::MatMul(items) => Ast::node("matmul", items.iter().map(mat_ast).collect()),
        MatrixExpr::Diag(v) => Ast::node("diag", vec![vec_ast(v)]),
    }
}

fn vec_ast(v: &VectorExpr) -> Ast {
    match v {
        VectorExpr::Ones => Ast::leaf("ones"),
        VectorExpr::MatVec(m, x) => Ast::node("matvec", vec![mat_ast(m), vec_ast(x)]),
        VectorExpr::HadamardV(items) => Ast::node("hadamard", items.iter().map(vec_ast).collect()),
    }
}

fn schema(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Schema(format!("{path}: {msg}"))
}

fn arity(ast: &Ast, path: &str, ok: impl Fn(usize) -> bool, want: &str) -> Result<()> {
    if ok(ast.args.len()) {
        Ok(())
    } else {
        Err(schema(
            path,
            format!("`{}` takes {want} arguments, got {}", ast.op, ast.args.len()),
        ))
    }
}

fn parse_mat(ast: &Ast, path: &str) -> Result<MatrixExpr> {
    let children = |ast: &Ast| -> Result<Vec<MatrixExpr>> {
        ast.args
            .iter()
            .enumerate()
            .map(|(i, a)| parse_mat(a, &format!("{path}.args[{i}]")))
            .collect()
    };
    match ast.op.as_str() {
        "A" => {
            arity(ast, path, |n| n == 0, "0")?;
            Ok(MatrixExpr::A)
        }
        "hadamard" => {
            arity(ast, path, |n| n >= 2, "at least 2")?;
            Ok(MatrixExpr::hadamard(children(ast)?))
        }
        "matmul" => {
            arity(ast, path, |n| n >= 2, "at least 2")?;
            Ok(MatrixExpr::matmul(children(ast)?))
        }
        "diag" => {
            arity(ast, path, |n| n == 1, "1")?;
            Ok(MatrixExpr::diag(parse_vec(&ast.args[0], &format!("{path}.args[0]"))?))
        }
        other => Err(schema(path, format!("`{other}` is not a matrix operator"))),
    }
}

fn parse_vec(ast: &Ast, path: &str) -> Result<VectorExpr> {
    match ast.op.as_str() {
        "ones" => {
            arity(ast, path, |n| n == 0, "0")?;
            Ok(VectorExpr::Ones)
        }
        "matvec" => {
            arity(ast, path, |n| n == 2, "2")?;
            let m = parse_mat(&ast.args[0], &format!("{path}.args[0]"))?;
            let v = parse_vec(&ast.args[1], &format!("{path}.args[1]"))?;
            Ok(VectorExpr::matvec(m, v))
        }
        "hadamard" => {
            arity(ast, path, |n| n >= 2, "at least 2")?;
            let items = ast
                .args
                .iter()
                .enumerate()
                .map(|(i, a)| parse_vec(a, &format!("{path}.args[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok(VectorExpr::hadamard(items))
        }
        other => Err(schema(path, format!("`{other}` is not a vector operator"))),
    }
}

pub fn emit_json(f: &Formula) -> String {
    let terms = f
        .terms
        .iter()
        .map(|term| {
            let pv = term.provenance;
            let mut doc = TermDoc {
                coef: term.coefficient,
                kind: String::new(),
                k: pv.k,
                t: pv.t,
                expr: None,
                layers: None,
                nodes: None,
                factors: None,
            };
            match &term.body {
                TermBody::Sea(v) => {
                    doc.kind = "sea".into();
                    doc.expr = Some(vec_ast(v));
                }
                TermBody::Ifs(ifs) => {
                    doc.kind = "ifs".into();
                    doc.layers = Some(ifs.layers);
                    doc.nodes = Some(
                        ifs.nodes
                            .iter()
                            .map(|(p, v)| NodeDoc { p: *p, expr: vec_ast(v) })
                            .collect(),
                    );
                    doc.factors = Some(
                        ifs.factors
                            .iter()
                            .map(|fa| FactorDoc {
                                p: fa.p,
                                q: fa.q,
                                expr: mat_ast(&fa.expr),
                                oriented: fa.oriented,
                            })
                            .collect(),
                    );
                }
            }
            doc
        })
        .collect();
    let doc = FormulaDoc { m: f.m, terms };
    let mut out = serde_json::to_string_pretty(&doc).expect("formula documents always serialize");
    out.push('\n');
    out
}

pub fn parse_json(text: &str) -> Result<Formula> {
    let doc: FormulaDoc = serde_json::from_str(text)?;
    if doc.m < 3 {
        return Err(schema("m", format!("order {} is below 3", doc.m)));
    }
    if doc.terms.is_empty() {
        return Err(schema("terms", "a formula needs at least one term"));
    }
    let mut terms = Vec::with_capacity(doc.terms.len());
    for (i, td) in doc.terms.iter().enumerate() {
        let path = format!("terms[{i}]");
        if td.coef == 0 {
            return Err(schema(&path, "coefficient must be non-zero"));
        }
        if td.k < 2 || td.k > doc.m || td.t == 0 {
            return Err(schema(&path, format!("invalid class (k={}, t={})", td.k, td.t)));
        }
        let body = match td.kind.as_str() {
            "sea" => {
                let expr = td
                    .expr
                    .as_ref()
                    .ok_or_else(|| schema(&path, "sea term without expr"))?;
                TermBody::Sea(parse_vec(expr, &format!("{path}.expr"))?)
            }
            "ifs" => TermBody::Ifs(parse_ifs(td, &path)?),
            other => return Err(schema(&path, format!("unknown kind `{other}`"))),
        };
        terms.push(Term {
            coefficient: td.coef,
            body,
            provenance: Provenance {
                m: doc.m,
                k: td.k,
                t: td.t,
            },
        });
    }
    Ok(Formula { m: doc.m, terms })
}

fn parse_ifs(td: &TermDoc, path: &str) -> Result<IfsTerm> {
    let layers = td
        .layers
        .ok_or_else(|| schema(path, "ifs term without layers"))?;
    if layers < 4 {
        return Err(schema(path, format!("ifs term with {layers} layers, at least 4 required")));
    }
    let mut nodes = Vec::new();
    for (i, nd) in td.nodes.iter().flatten().enumerate() {
        let npath = format!("{path}.nodes[{i}]");
        if nd.p == 0 || nd.p > layers {
            return Err(schema(&npath, format!("layer index {} out of range", nd.p)));
        }
        nodes.push((nd.p, parse_vec(&nd.expr, &format!("{npath}.expr"))?));
    }
    let mut factors = Vec::new();
    for (i, fd) in td
        .factors
        .as_ref()
        .ok_or_else(|| schema(path, "ifs term without factors"))?
        .iter()
        .enumerate()
    {
        let fpath = format!("{path}.factors[{i}]");
        if !(1 <= fd.p && fd.p < fd.q && fd.q <= layers) {
            return Err(schema(&fpath, format!("index pair ({}, {}) invalid", fd.p, fd.q)));
        }
        factors.push(Factor {
            p: fd.p,
            q: fd.q,
            expr: parse_mat(&fd.expr, &format!("{fpath}.expr"))?,
            oriented: fd.oriented,
        });
    }
    Ok(IfsTerm {
        layers,
        nodes,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_terms_is_a_schema_error() {
        let err = parse_json(r#"{"m": 4, "terms": []}"#).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err = parse_json("{\n  \"m\": 4,\n  \"terms\": [ oops ]\n}").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_operator_is_reported_with_path() {
        let doc = r#"{"m": 4, "terms": [
            {"coef": 1, "kind": "sea", "k": 4, "t": 1,
             "expr": {"op": "matvec", "args": [{"op": "ones"}, {"op": "ones"}]}}]}"#;
        let err = parse_json(doc).unwrap_err().to_string();
        assert!(err.contains("terms[0].expr.args[0]"), "{err}");
    }

    #[test]
    fn ifs_needs_four_layers() {
        let doc = r#"{"m": 8, "terms": [
            {"coef": 2, "kind": "ifs", "k": 4, "t": 1, "layers": 3, "factors": []}]}"#;
        assert!(matches!(parse_json(doc), Err(Error::Schema(_))));
    }

    #[test]
    fn parses_hand_written_sea() {
        let doc = r#"{"m": 3, "terms": [
            {"coef": 1, "kind": "sea", "k": 3, "t": 1,
             "expr": {"op": "matvec", "args": [
                {"op": "hadamard", "args": [{"op": "A"}, {"op": "matmul", "args": [{"op": "A"}, {"op": "A"}]}]},
                {"op": "ones"}]}}]}"#;
        let f = parse_json(doc).unwrap();
        assert_eq!(f.terms.len(), 1);
        assert_eq!(parse_json(&emit_json(&f)).unwrap(), f);
    }
}
