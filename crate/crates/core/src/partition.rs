//! Set partitions of the cycle's vertex set and the merging process that turns
//! an admissible partition into a multigraph.
//!
//! A partition of `{1..m}` is stored as a restricted-growth string: entry `i`
//! is the block id of vertex `i + 1`, the first entry is 0, and every entry is
//! at most one more than the maximum before it.

use std::fmt;

use crate::error::{Error, Result};
use crate::HARD_MAX_ORDER;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    assignment: Vec<u8>,
    size: usize,
}

impl Partition {
    /// Builds a partition from a restricted-growth string.
    pub fn from_assignment(assignment: Vec<u8>) -> Result<Self> {
        let m = assignment.len();
        if m == 0 {
            return Err(Error::order(0, "a partition needs at least one vertex"));
        }
        if m > HARD_MAX_ORDER {
            return Err(Error::order(m, format!("exceeds hard limit {HARD_MAX_ORDER}")));
        }
        let mut next = 0u8;
        for (i, &b) in assignment.iter().enumerate() {
            if b > next {
                return Err(Error::RejectedPartition(format!(
                    "not a restricted-growth string: position {i} has {b}, at most {next} allowed"
                )));
            }
            if b == next {
                next += 1;
            }
        }
        Ok(Partition {
            assignment,
            size: next as usize,
        })
    }

    /// Builds a partition from 1-based blocks, e.g. `[[1, 3], [2, 4]]`.
    pub fn from_blocks(m: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut raw = vec![u8::MAX; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::RejectedPartition("empty block".into()));
            }
            for &v in block {
                if v == 0 || v > m || raw[v - 1] != u8::MAX {
                    return Err(Error::RejectedPartition(format!(
                        "vertex {v} out of range or repeated"
                    )));
                }
                raw[v - 1] = b as u8;
            }
        }
        if raw.contains(&u8::MAX) {
            return Err(Error::RejectedPartition("blocks do not cover 1..m".into()));
        }
        Self::from_assignment(normalize_labels(&raw))
    }

    /// The finest partition, every vertex in its own block.
    pub fn finest(m: usize) -> Result<Self> {
        Self::from_assignment((0..m).map(|i| i as u8).collect())
    }

    pub fn order(&self) -> usize {
        self.assignment.len()
    }

    /// Number of blocks.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn assignment(&self) -> &[u8] {
        &self.assignment
    }

    /// Blocks as sorted lists of 1-based vertex indices, ordered by block id.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.size];
        for (i, &b) in self.assignment.iter().enumerate() {
            blocks[b as usize].push(i + 1);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.size];
        for &b in &self.assignment {
            sizes[b as usize] += 1;
        }
        sizes
    }

    /// True when some block holds two cyclically adjacent vertices, i.e. the
    /// merged graph would carry a self-loop and the term vanishes on a hollow
    /// matrix.
    pub fn has_self_loop(&self) -> bool {
        let m = self.order();
        if m == 1 {
            // The lone vertex is its own cyclic neighbour.
            return true;
        }
        (0..m).any(|i| self.assignment[i] == self.assignment[(i + 1) % m])
    }

    /// Merges each block into one node, keeping every cycle edge.
    pub fn induce_multigraph(&self) -> Result<MultiGraph> {
        if self.has_self_loop() {
            return Err(Error::RejectedPartition(format!(
                "{self} merges two adjacent cycle vertices"
            )));
        }
        let m = self.order();
        let k = self.size;
        let mut weights = vec![0u32; k * k];
        for i in 0..m {
            let a = self.assignment[i] as usize;
            let b = self.assignment[(i + 1) % m] as usize;
            weights[a * k + b] += 1;
            weights[b * k + a] += 1;
        }
        Ok(MultiGraph {
            k,
            weights,
            block_sizes: self.block_sizes(),
        })
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (bi, block) in self.blocks().iter().enumerate() {
            if bi > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (vi, v) in block.iter().enumerate() {
                if vi > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// Relabels arbitrary block ids into restricted-growth form (first-occurrence
/// order).
pub fn normalize_labels(raw: &[u8]) -> Vec<u8> {
    let mut map = [u8::MAX; 256];
    let mut next = 0u8;
    raw.iter()
        .map(|&b| {
            if map[b as usize] == u8::MAX {
                map[b as usize] = next;
                next += 1;
            }
            map[b as usize]
        })
        .collect()
}

/// Streams the partitions of `{1..m}` in lexicographic restricted-growth
/// order, optionally with a fixed prefix.
#[derive(Clone, Debug)]
pub struct PartitionIter {
    current: Vec<u8>,
    // running[i] = 1 + max(current[0..=i])
    running: Vec<u8>,
    fixed: usize,
    started: bool,
    done: bool,
}

impl PartitionIter {
    fn with_prefix(m: usize, prefix: &[u8]) -> Self {
        debug_assert!(!prefix.is_empty() && prefix.len() <= m);
        let mut current = prefix.to_vec();
        current.resize(m, 0);
        let mut running = Vec::with_capacity(m);
        let mut hi = 0u8;
        for &b in &current {
            hi = hi.max(b + 1);
            running.push(hi);
        }
        PartitionIter {
            current,
            running,
            fixed: prefix.len(),
            started: false,
            done: false,
        }
    }

    fn advance(&mut self) -> bool {
        let m = self.current.len();
        let mut i = m;
        while i > self.fixed.max(1) {
            i -= 1;
            if self.current[i] < self.running[i - 1] {
                self.current[i] += 1;
                self.running[i] = self.running[i - 1].max(self.current[i] + 1);
                for j in i + 1..m {
                    self.current[j] = 0;
                    self.running[j] = self.running[j - 1];
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
        }
        let size = *self.running.last().unwrap() as usize;
        Some(Partition {
            assignment: self.current.clone(),
            size,
        })
    }
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::order(m, "order must be at least 1"));
    }
    if m > HARD_MAX_ORDER {
        return Err(Error::order(m, format!("exceeds hard limit {HARD_MAX_ORDER}")));
    }
    Ok(())
}

/// Every set partition of `{1..m}` exactly once; `Bell(m)` items.
pub fn enumerate_partitions(m: usize) -> Result<PartitionIter> {
    check_order(m)?;
    Ok(PartitionIter::with_prefix(m, &[0]))
}

/// The partitions whose restricted-growth string starts with `prefix`.
pub fn enumerate_with_prefix(m: usize, prefix: &[u8]) -> Result<PartitionIter> {
    check_order(m)?;
    if prefix.is_empty() || prefix.len() > m {
        return Err(Error::Config(format!(
            "prefix length {} must be in 1..={m}",
            prefix.len()
        )));
    }
    Partition::from_assignment(prefix.to_vec())?;
    Ok(PartitionIter::with_prefix(m, prefix))
}

/// Restricted-growth prefixes of length `len`; the sub-streams they seed
/// cover every partition of `{1..m}` exactly once.
pub fn prefixes(len: usize) -> Vec<Vec<u8>> {
    if len == 0 {
        return vec![];
    }
    PartitionIter::with_prefix(len, &[0])
        .map(|p| p.assignment)
        .collect()
}

/// Induced multigraph of a merged `m`-cycle.
///
/// `weights` is a symmetric `k x k` matrix with zero diagonal; node `a` came
/// from a block of `block_sizes[a]` cycle vertices, so its degree is
/// `2 * block_sizes[a]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiGraph {
    k: usize,
    weights: Vec<u32>,
    block_sizes: Vec<usize>,
}

impl MultiGraph {
    /// Builds a multigraph from a weight matrix, deriving block sizes from
    /// degrees.
    pub fn from_weights(weights: Vec<Vec<u32>>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || weights.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("weight matrix must be square and non-empty".into()));
        }
        let mut flat = Vec::with_capacity(k * k);
        for (a, row) in weights.iter().enumerate() {
            for (b, &w) in row.iter().enumerate() {
                if w != weights[b][a] {
                    return Err(Error::Dimension(format!("weights not symmetric at ({a},{b})")));
                }
                if a == b && w != 0 {
                    return Err(Error::RejectedPartition(format!("self-loop at node {a}")));
                }
                flat.push(w);
            }
        }
        let mut block_sizes = Vec::with_capacity(k);
        for row in &weights {
            let deg: u32 = row.iter().sum();
            if deg == 0 || deg % 2 != 0 {
                return Err(Error::RejectedPartition(format!(
                    "node degree {deg} is not a positive even number"
                )));
            }
            block_sizes.push(deg as usize / 2);
        }
        Ok(MultiGraph {
            k,
            weights: flat,
            block_sizes,
        })
    }

    pub fn node_count(&self) -> usize {
        self.k
    }

    pub fn weight(&self, a: usize, b: usize) -> u32 {
        self.weights[a * self.k + b]
    }

    pub fn weights(&self) -> Vec<Vec<u32>> {
        self.weights.chunks(self.k).map(<[u32]>::to_vec).collect()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn degree(&self, a: usize) -> u32 {
        self.weights[a * self.k..(a + 1) * self.k].iter().sum()
    }

    /// Total edge multiplicity, which equals the cycle order.
    pub fn edge_count(&self) -> u32 {
        let mut total = 0;
        for a in 0..self.k {
            for b in a + 1..self.k {
                total += self.weight(a, b);
            }
        }
        total
    }

    /// The same graph with node `a` moved to position `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> MultiGraph {
        let k = self.k;
        let mut weights = vec![0; k * k];
        let mut block_sizes = vec![0; k];
        for a in 0..k {
            block_sizes[perm[a]] = self.block_sizes[a];
            for b in 0..k {
                weights[perm[a] * k + perm[b]] = self.weight(a, b);
            }
        }
        MultiGraph {
            k,
            weights,
            block_sizes,
        }
    }

    /// Edge list in the `{c [a,b]; ...}` convention, 1-based, pairs in
    /// dictionary order.
    pub fn to_edge_string(&self) -> String {
        let mut parts = Vec::new();
        for a in 0..self.k {
            for b in a + 1..self.k {
                let w = self.weight(a, b);
                if w > 0 {
                    parts.push(format!("{w} [{},{}]", a + 1, b + 1));
                }
            }
        }
        format!("{{{}}}", parts.join("; "))
    }
}
