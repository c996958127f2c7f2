use std::fmt::Write;

use super::{Formula, IfsTerm, MatrixExpr, Term, TermBody, VectorExpr};
use crate::catalog::Catalog;

const ONES: &str = "{\\bf 1}_n";

fn mat_tex(m: &MatrixExpr) -> String {
    match m {
        MatrixExpr::A => "A".into(),
        MatrixExpr::Hadamard(items) => items
            .iter()
            .map(|x| match x {
                MatrixExpr::MatMul(_) => format!("({})", mat_tex(x)),
                _ => mat_tex(x),
            })
            .collect::<Vec<_>>()
            .join(" \\circ "),
        MatrixExpr::MatMul(items) => items
            .iter()
            .map(|x| match x {
                MatrixExpr::Hadamard(_) => format!("({})", mat_tex(x)),
                _ => mat_tex(x),
            })
            .collect::<Vec<_>>()
            .join(" \\cdot "),
        MatrixExpr::Diag(v) => format!("\\mathrm{{d}}({})", vec_tex(v)),
    }
}

/// Parenthesized unless it is the bare symbol.
fn mat_tex_atom(m: &MatrixExpr) -> String {
    match m {
        MatrixExpr::A => "A".into(),
        _ => format!("({})", mat_tex(m)),
    }
}

fn vec_tex_atom(v: &VectorExpr) -> String {
    match v {
        VectorExpr::Ones => ONES.into(),
        _ => format!("({})", vec_tex(v)),
    }
}

fn vec_tex(v: &VectorExpr) -> String {
    match v {
        VectorExpr::Ones => ONES.into(),
        VectorExpr::MatVec(m, inner) => {
            // Repeated application of one matrix prints as a power.
            let mut power = 1;
            let mut base = inner.as_ref();
            while let VectorExpr::MatVec(m2, next) = base {
                if m2 != m {
                    break;
                }
                power += 1;
                base = next;
            }
            if power > 1 {
                format!("{}^{{{power}}} \\cdot {}", mat_tex_atom(m), vec_tex_atom(base))
            } else {
                format!("{} \\cdot {}", mat_tex_atom(m), vec_tex_atom(inner))
            }
        }
        VectorExpr::HadamardV(items) => items
            .iter()
            .map(vec_tex_atom)
            .collect::<Vec<_>>()
            .join(" \\circ "),
    }
}

/// `Some(p)` when `v` is `(A ∘ A^(p-1)) 1`, whose sum is `tr(A^p)`.
fn trace_power(v: &VectorExpr) -> Option<usize> {
    let VectorExpr::MatVec(m, inner) = v else {
        return None;
    };
    if **inner != VectorExpr::Ones {
        return None;
    }
    let MatrixExpr::Hadamard(items) = m.as_ref() else {
        return None;
    };
    match items.as_slice() {
        [MatrixExpr::A, rest @ MatrixExpr::MatMul(factors)] if factors.iter().all(|f| *f == MatrixExpr::A) => {
            Some(rest.a_count() + 1)
        }
        _ => None,
    }
}

fn index_list(layers: usize) -> String {
    (1..=layers).map(|i| format!("i_{i}")).collect::<Vec<_>>().join(" ")
}

fn ifs_tex(ifs: &IfsTerm) -> String {
    let mut out = format!("\\Sigma_{{{}}}", index_list(ifs.layers));
    for (p, v) in &ifs.nodes {
        write!(out, " ({})_{{i_{p}}}", vec_tex(v)).unwrap();
    }
    for f in &ifs.factors {
        write!(out, " {}_{{i_{} i_{}}}", mat_tex_atom(&f.expr), f.p, f.q).unwrap();
    }
    out
}

/// LaTeX for one term, starting with its signed coefficient.
pub fn term_latex(term: &Term) -> String {
    let body = match &term.body {
        TermBody::Sea(v) => match trace_power(v) {
            Some(p) => format!("\\tr(A^{{{p}}})"),
            None => format!("{ONES}' \\cdot {}", vec_tex_atom(v)),
        },
        TermBody::Ifs(ifs) => ifs_tex(ifs),
    };
    format!("{:+} {body}", term.coefficient)
}

/// One signed term per line.
pub fn emit_latex(f: &Formula) -> String {
    let mut out = String::new();
    for term in &f.terms {
        out.push_str(&term_latex(term));
        out.push('\n');
    }
    out
}

fn ifs_text(ifs: &IfsTerm) -> String {
    let idx: Vec<String> = (1..=ifs.layers).map(|i| format!("i{i}")).collect();
    let mut out = format!("sum({})", idx.join(","));
    for (p, v) in &ifs.nodes {
        write!(out, " {v}[i{p}]").unwrap();
    }
    for f in &ifs.factors {
        write!(out, " {}[i{},i{}]", f.expr, f.p, f.q).unwrap();
    }
    out
}

/// Plain-text listing: coefficient, class, the class graph in
/// `{c [a,b]; ...}` form when a catalog is supplied, then the term.
pub fn emit_text(f: &Formula, catalog: Option<&Catalog>) -> String {
    let mut out = String::new();
    for term in &f.terms {
        let pv = term.provenance;
        write!(out, "{:+} [k={} t={}]", term.coefficient, pv.k, pv.t).unwrap();
        if let Some(class) = catalog.and_then(|c| {
            c.classes.iter().find(|cl| cl.k == pv.k && cl.t == pv.t)
        }) {
            write!(out, " {}", class.representative.to_edge_string()).unwrap();
        }
        match &term.body {
            TermBody::Sea(v) => writeln!(out, " sea 1'{}", text_atom(v)).unwrap(),
            TermBody::Ifs(ifs) => writeln!(out, " ifs {}", ifs_text(ifs)).unwrap(),
        }
    }
    out
}

fn text_atom(v: &VectorExpr) -> String {
    match v {
        VectorExpr::Ones => "1".into(),
        other => other.to_string(),
    }
}
