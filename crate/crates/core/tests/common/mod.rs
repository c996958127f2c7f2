//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use ceef::eval::{eval_matrix_expr, eval_vector_expr};
use ceef::expr::{IfsTerm, MatrixExpr};
use ceef::prune::Lmg;
use ndarray::Array2;

/// All set partitions of `0..m` as restricted-growth strings, by recursion.
pub fn all_partitions(m: usize) -> Vec<Vec<u8>> {
    fn go(prefix: &mut Vec<u8>, max: u8, m: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == m {
            out.push(prefix.clone());
            return;
        }
        let top = if prefix.is_empty() { 0 } else { max + 1 };
        for b in 0..=top {
            prefix.push(b);
            go(prefix, max.max(b), m, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 0, m, &mut out);
    out
}

/// Some block holds two cyclically adjacent positions.
pub fn has_adjacent(rgs: &[u8]) -> bool {
    let m = rgs.len();
    (0..m).any(|i| rgs[i] == rgs[(i + 1) % m])
}

fn relabel(raw: &[u8]) -> Vec<u8> {
    let mut map = HashMap::new();
    raw.iter()
        .map(|b| {
            let next = map.len() as u8;
            *map.entry(*b).or_insert(next)
        })
        .collect()
}

/// Partitions that refine `sigma`, including `sigma` itself.
fn refinements(sigma: &[u8]) -> Vec<Vec<u8>> {
    let k = *sigma.iter().max().unwrap() as usize + 1;
    let blocks: Vec<Vec<usize>> = (0..k)
        .map(|b| (0..sigma.len()).filter(|&i| sigma[i] as usize == b).collect())
        .collect();
    let mut acc: Vec<Vec<u8>> = vec![vec![0; sigma.len()]];
    let mut offset = 0u8;
    for block in &blocks {
        let parts = all_partitions(block.len());
        let width = block.len() as u8;
        let mut next = Vec::with_capacity(acc.len() * parts.len());
        for base in &acc {
            for p in &parts {
                let mut x = base.clone();
                for (pos, &i) in block.iter().enumerate() {
                    x[i] = offset + p[pos];
                }
                next.push(x);
            }
        }
        acc = next;
        offset += width;
    }
    acc.into_iter().map(|x| relabel(&x)).collect()
}

/// `mu(finest, sigma)` from the defining recursion
/// `mu(x, x) = 1`, `mu(x, y) = -sum_{x <= z < y} mu(x, z)`.
pub struct MobiusOracle {
    memo: HashMap<Vec<u8>, i64>,
}

impl MobiusOracle {
    pub fn new() -> Self {
        MobiusOracle {
            memo: HashMap::new(),
        }
    }

    pub fn mu(&mut self, sigma: &[u8]) -> i64 {
        let sigma = relabel(sigma);
        if let Some(&v) = self.memo.get(&sigma) {
            return v;
        }
        let finest = *sigma.iter().max().unwrap() as usize + 1 == sigma.len();
        let v = if finest {
            1
        } else {
            -refinements(&sigma)
                .into_iter()
                .filter(|t| *t != sigma)
                .map(|t| self.mu(&t))
                .sum::<i64>()
        };
        self.memo.insert(sigma, v);
        v
    }
}

/// Odometer over `0..n` for each of `k` positions.
fn for_each_tuple(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 && k > 0 {
        return;
    }
    let mut idx = vec![0; k];
    loop {
        f(&idx);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Full sum of an LMG by plain nested loops.
pub fn naive_lmg_fs(lmg: &Lmg, a: &Array2<f64>) -> f64 {
    let ids: Vec<usize> = lmg.nodes().keys().copied().collect();
    let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let labels: Vec<_> = lmg.nodes().values().map(|v| eval_vector_expr(v, a)).collect();
    let edges: Vec<_> = lmg
        .edges()
        .iter()
        .map(|e| (pos[&e.from], pos[&e.to], eval_matrix_expr(&e.label, a)))
        .collect();
    let mut total = 0.0;
    for_each_tuple(a.nrows(), ids.len(), |j| {
        let mut w: f64 = labels.iter().enumerate().map(|(p, v)| v[j[p]]).product();
        for (p, q, m) in &edges {
            w *= m[[j[*p], j[*q]]];
        }
        total += w;
    });
    total
}

/// An IFS term by plain nested loops.
pub fn naive_ifs(ifs: &IfsTerm, a: &Array2<f64>) -> f64 {
    let nodes: Vec<_> = ifs.nodes.iter().map(|(p, v)| (p - 1, eval_vector_expr(v, a))).collect();
    let factors: Vec<_> = ifs
        .factors
        .iter()
        .map(|f| (f.p - 1, f.q - 1, eval_matrix_expr(&f.expr, a)))
        .collect();
    let mut total = 0.0;
    for_each_tuple(a.nrows(), ifs.layers, |j| {
        let mut w = 1.0;
        for (p, v) in &nodes {
            w *= v[j[*p]];
        }
        for (p, q, m) in &factors {
            w *= m[[j[*p], j[*q]]];
        }
        total += w;
    });
    total
}

/// `C_m` over all `n^m` tuples, skipping those with a repeated index.
pub fn naive_cycle_sum(a: &Array2<f64>, m: usize) -> f64 {
    let mut total = 0.0;
    for_each_tuple(a.nrows(), m, |j| {
        let mut seen = j.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() < m {
            return;
        }
        total += (0..m).map(|i| a[[j[i], j[(i + 1) % m]]]).product::<f64>();
    });
    total
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Whether the factor list equals `expected` after some renaming of the
/// summation indices. Only meaningful for symmetric factor expressions.
pub fn same_pattern_up_to_renaming(ifs: &IfsTerm, expected: &[(usize, usize, MatrixExpr)]) -> bool {
    let mut want: Vec<(usize, usize, MatrixExpr)> = expected.to_vec();
    want.sort();
    permutations(ifs.layers).into_iter().any(|perm| {
        let mut got: Vec<(usize, usize, MatrixExpr)> = ifs
            .factors
            .iter()
            .map(|f| {
                let (p, q) = (perm[f.p - 1] + 1, perm[f.q - 1] + 1);
                (p.min(q), p.max(q), f.expr.clone())
            })
            .collect();
        got.sort();
        got == want && ifs.nodes.is_empty()
    })
}

pub fn relative_error(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs().max(1.0)
}
