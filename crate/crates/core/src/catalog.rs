//! Isomorphism classes of the multigraphs induced by merging an `m`-cycle,
//! with class sizes and signed coefficients.
//!
//! For class `(m, k, t)` with `d` member partitions and representative block
//! sizes `g_1..g_k`, the coefficient is
//!
//! ```text
//! a = (-1)^(m-k) * d * h,    h = prod_i (g_i - 1)!
//! ```
//!
//! where `(-1)^(m-k) * h` is the Möbius function of the partition lattice
//! between the finest partition and any member partition.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::partition::{enumerate_with_prefix, prefixes, MultiGraph, Partition};
use crate::{DEFAULT_MAX_ORDER, HARD_MAX_ORDER};

/// Isomorphism-invariant key of a multigraph: node count followed by the
/// lexicographically smallest upper-triangle serialization of the weight
/// matrix over all orderings the refinement search admits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn node_count(&self) -> usize {
        self.0[0] as usize
    }
}

/// Ranks `keys` densely: equal keys share a color, colors follow key order.
fn rank<K: Ord + Clone>(keys: &[K]) -> (Vec<u32>, usize) {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    let colors = keys
        .iter()
        .map(|key| sorted.binary_search(key).unwrap() as u32)
        .collect();
    (colors, sorted.len())
}

struct Canonizer<'a> {
    g: &'a MultiGraph,
    k: usize,
    best: Option<Vec<u8>>,
}

impl Canonizer<'_> {
    fn refine(&self, mut colors: Vec<u32>, mut count: usize) -> (Vec<u32>, usize) {
        loop {
            let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..self.k)
                .map(|v| {
                    let mut nb: Vec<(u32, u32)> = (0..self.k)
                        .filter_map(|u| {
                            let w = self.g.weight(v, u);
                            (w > 0).then_some((colors[u], w))
                        })
                        .collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            let (next, next_count) = rank(&sigs);
            if next_count == count {
                return (next, next_count);
            }
            colors = next;
            count = next_count;
        }
    }

    fn search(&mut self, colors: Vec<u32>, count: usize) {
        if count == self.k {
            let mut order = vec![0; self.k];
            for (v, &c) in colors.iter().enumerate() {
                order[c as usize] = v;
            }
            let mut ser = Vec::with_capacity(self.k * (self.k - 1) / 2);
            for i in 0..self.k {
                for j in i + 1..self.k {
                    ser.push(self.g.weight(order[i], order[j]) as u8);
                }
            }
            if self.best.as_ref().is_none_or(|b| ser < *b) {
                self.best = Some(ser);
            }
            return;
        }
        // First non-singleton cell, chosen by color so the choice is invariant.
        let mut sizes = vec![0usize; count];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let target = sizes.iter().position(|&s| s > 1).unwrap() as u32;
        let cell: Vec<usize> = (0..self.k).filter(|&v| colors[v] == target).collect();
        for &v in &cell {
            let keys: Vec<(u32, bool)> = (0..self.k)
                .map(|u| (colors[u], colors[u] == target && u != v))
                .collect();
            let (split, split_count) = rank(&keys);
            let (refined, refined_count) = self.refine(split, split_count);
            self.search(refined, refined_count);
        }
    }
}

/// Canonical key of `g`. Node orderings are explored by degree-aware
/// refinement plus individualization, so only degree-preserving relabelings
/// are ever compared.
pub fn canonical_form(g: &MultiGraph) -> CanonicalForm {
    let k = g.node_count();
    let initial: Vec<(u32, Vec<u32>)> = (0..k)
        .map(|v| {
            let mut mult: Vec<u32> = (0..k).map(|u| g.weight(v, u)).filter(|&w| w > 0).collect();
            mult.sort_unstable();
            (g.degree(v), mult)
        })
        .collect();
    let (colors, count) = rank(&initial);
    let mut c = Canonizer { g, k, best: None };
    let (colors, count) = c.refine(colors, count);
    c.search(colors, count);
    let mut key = Vec::with_capacity(1 + k * (k - 1) / 2);
    key.push(k as u8);
    key.extend(c.best.unwrap());
    CanonicalForm(key)
}

pub fn are_isomorphic(g1: &MultiGraph, g2: &MultiGraph) -> bool {
    g1.node_count() == g2.node_count() && canonical_form(g1) == canonical_form(g2)
}

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, x| acc.checked_mul(x))
}

/// `prod (g_i - 1)!` over block sizes.
pub fn factorial_product(block_sizes: &[usize]) -> Result<u64> {
    block_sizes
        .iter()
        .try_fold(1u64, |acc, &g| {
            factorial(g.saturating_sub(1)).and_then(|f| acc.checked_mul(f))
        })
        .ok_or_else(|| Error::Contract("factorial product overflows u64".into()))
}

/// Möbius function between the finest partition and `p`:
/// `(-1)^(m-k) * prod (|S_i| - 1)!`.
pub fn mobius_finest(p: &Partition) -> i64 {
    let h = factorial_product(&p.block_sizes()).expect("orders <= 16 fit in u64") as i64;
    if (p.order() - p.size()) % 2 == 0 {
        h
    } else {
        -h
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphClass {
    pub m: usize,
    pub k: usize,
    /// 1-based index among the classes with `k` nodes, by canonical key.
    pub t: usize,
    /// Graph induced by the lexicographically first member partition.
    pub representative: MultiGraph,
    pub key: CanonicalForm,
    /// Number of admissible partitions in the class.
    pub d: u64,
    pub h: u64,
    pub a: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    pub m: usize,
    /// Grouped by `k` descending, then `t` ascending.
    pub classes: Vec<GraphClass>,
}

impl Catalog {
    /// Number of admissible partitions accounted for.
    pub fn admissible_count(&self) -> u64 {
        self.classes.iter().map(|c| c.d).sum()
    }

    /// Class counts `b_{m,k}` indexed by `k`.
    pub fn counts_by_size(&self) -> Vec<usize> {
        let mut counts = vec![0; self.m + 1];
        for c in &self.classes {
            counts[c.k] += 1;
        }
        counts
    }
}

struct Acc {
    count: u64,
    first: Partition,
    sizes: Vec<usize>,
}

fn sorted_sizes(p: &Partition) -> Vec<usize> {
    let mut s = p.block_sizes();
    s.sort_unstable();
    s
}

fn merge_into(into: &mut HashMap<CanonicalForm, Acc>, key: CanonicalForm, acc: Acc) -> Result<()> {
    match into.get_mut(&key) {
        None => {
            into.insert(key, acc);
        }
        Some(have) => {
            if have.sizes != acc.sizes {
                return Err(Error::Contract(format!(
                    "isomorphic graphs from {} and {} have different block sizes",
                    have.first, acc.first
                )));
            }
            have.count += acc.count;
            if acc.first.cmp(&have.first) == Ordering::Less {
                have.first = acc.first;
            }
        }
    }
    Ok(())
}

fn classify_stream(m: usize, prefix: &[u8]) -> Result<HashMap<CanonicalForm, Acc>> {
    let mut local = HashMap::new();
    for p in enumerate_with_prefix(m, prefix)? {
        if p.has_self_loop() {
            continue;
        }
        let key = canonical_form(&p.induce_multigraph()?);
        let acc = Acc {
            count: 1,
            sizes: sorted_sizes(&p),
            first: p,
        };
        merge_into(&mut local, key, acc)?;
    }
    Ok(local)
}

/// Builds the class catalog for order `m`, `3 <= m <= 12`.
pub fn build_catalog(m: usize, exec: Exec) -> Result<Catalog> {
    build_catalog_with_limit(m, DEFAULT_MAX_ORDER, exec)
}

/// Like [`build_catalog`] with a caller-chosen order ceiling (at most 16).
pub fn build_catalog_with_limit(m: usize, max_order: usize, exec: Exec) -> Result<Catalog> {
    let max_order = max_order.min(HARD_MAX_ORDER);
    if m < 3 {
        return Err(Error::order(m, "order must be at least 3"));
    }
    if m > max_order {
        return Err(Error::order(
            m,
            format!("supported range is 3..={max_order}; raise the limit explicitly"),
        ));
    }
    let streams = prefixes(m.min(6));
    let locals = exec.map(streams, |pre| classify_stream(m, &pre));
    let mut merged = HashMap::new();
    for local in locals {
        for (key, acc) in local? {
            merge_into(&mut merged, key, acc)?;
        }
    }
    assemble(m, merged)
}

fn assemble(m: usize, merged: HashMap<CanonicalForm, Acc>) -> Result<Catalog> {
    let mut entries: Vec<(CanonicalForm, Acc)> = merged.into_iter().collect();
    entries.sort_by(|(ka, _), (kb, _)| {
        kb.node_count()
            .cmp(&ka.node_count())
            .then_with(|| ka.cmp(kb))
    });
    let mut classes = Vec::with_capacity(entries.len());
    let mut t = 0;
    let mut last_k = 0;
    for (key, acc) in entries {
        let k = key.node_count();
        if k != last_k {
            t = 0;
            last_k = k;
        }
        t += 1;
        let representative = acc.first.induce_multigraph()?;
        let h = factorial_product(representative.block_sizes())?;
        let from_degrees: Vec<usize> = (0..k)
            .map(|a| representative.degree(a) as usize / 2)
            .collect();
        if factorial_product(&from_degrees)? != h {
            return Err(Error::Contract(format!(
                "block sizes of {} disagree with node degrees",
                acc.first
            )));
        }
        let a = coefficient(m, k, acc.count, h)?;
        classes.push(GraphClass {
            m,
            k,
            t,
            representative,
            key,
            d: acc.count,
            h,
            a,
        });
    }
    Ok(Catalog { m, classes })
}

pub(crate) fn coefficient(m: usize, k: usize, d: u64, h: u64) -> Result<i64> {
    let mag = i64::try_from(d)
        .ok()
        .and_then(|d| d.checked_mul(i64::try_from(h).ok()?))
        .ok_or_else(|| Error::Contract(format!("coefficient overflow for d={d}, h={h}")))?;
    Ok(if (m - k) % 2 == 0 { mag } else { -mag })
}
