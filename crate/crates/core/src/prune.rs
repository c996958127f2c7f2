//! Pendant pruning on labeled multigraphs.
//!
//! A labeled multigraph (LMG) carries a vector expression on every node and a
//! matrix expression on every edge; its full sum is
//!
//! ```text
//! FS = sum over j_1..j_k of  prod_a v_a[j_a] * prod_edges M_e[j_from, j_to]
//! ```
//!
//! A node with one distinct neighbour (Type I) folds into that neighbour's
//! label as `u ∘ ((M_1 ∘ .. ∘ M_s) v)`. A node with two distinct neighbours
//! (Type II) becomes a new edge `(Q_1 ∘ ..) d(y) (R_1 ∘ ..)` between them.
//! Both steps remove one summation layer and leave the full sum unchanged.
//!
//! Edges are stored with an orientation because a Type II edge is generally
//! not symmetric.

use std::collections::{BTreeMap, BTreeSet};

use crate::catalog::{build_catalog, Catalog, GraphClass};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::expr::{Factor, Formula, IfsTerm, MatrixExpr, Provenance, Term, TermBody, VectorExpr};
use crate::partition::MultiGraph;

/// One factor `label[j_from, j_to]` of the full sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: MatrixExpr,
}

impl Edge {
    fn touches(&self, a: usize) -> bool {
        self.from == a || self.to == a
    }

    fn between(&self, a: usize, b: usize) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }

    /// Label indexed as `[row_node, other]`.
    fn oriented_from(&self, row_node: usize) -> MatrixExpr {
        if self.from == row_node {
            self.label.clone()
        } else {
            self.label.transpose()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PendantKind {
    /// Exactly one distinct neighbour.
    TypeI,
    /// Exactly two distinct neighbours.
    TypeII,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lmg {
    nodes: BTreeMap<usize, VectorExpr>,
    edges: Vec<Edge>,
}

impl Lmg {
    /// All node labels `1`, one `A` edge per unit of multiplicity.
    pub fn from_multigraph(g: &MultiGraph) -> Lmg {
        let k = g.node_count();
        let nodes = (0..k).map(|a| (a, VectorExpr::Ones)).collect();
        let mut edges = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                for _ in 0..g.weight(a, b) {
                    edges.push(Edge {
                        from: a,
                        to: b,
                        label: MatrixExpr::A,
                    });
                }
            }
        }
        Lmg { nodes, edges }
    }

    /// Builds an LMG directly; fails on self-loops or dangling endpoints.
    pub fn new(nodes: BTreeMap<usize, VectorExpr>, edges: Vec<Edge>) -> Result<Lmg> {
        for e in &edges {
            if e.from == e.to {
                return Err(Error::Contract(format!("self-loop on node {}", e.from)));
            }
            if !nodes.contains_key(&e.from) || !nodes.contains_key(&e.to) {
                return Err(Error::Contract(format!(
                    "edge ({}, {}) references a missing node",
                    e.from, e.to
                )));
            }
        }
        Ok(Lmg { nodes, edges })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &BTreeMap<usize, VectorExpr> {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn label(&self, node: usize) -> Option<&VectorExpr> {
        self.nodes.get(&node)
    }

    pub fn neighbors(&self, a: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter(|e| e.touches(a))
            .map(|e| if e.from == a { e.to } else { e.from })
            .collect()
    }

    fn classify(&self, a: usize) -> Option<PendantKind> {
        match self.neighbors(a).len() {
            1 => Some(PendantKind::TypeI),
            2 => Some(PendantKind::TypeII),
            _ => None,
        }
    }

    /// Every pendant, highest id first.
    pub fn pendants(&self) -> Vec<(usize, PendantKind)> {
        if self.nodes.len() <= 1 {
            return vec![];
        }
        self.nodes
            .keys()
            .rev()
            .filter_map(|&a| self.classify(a).map(|kind| (a, kind)))
            .collect()
    }

    /// The default choice: the highest-id Type I pendant if any, otherwise the
    /// highest-id Type II pendant. On the last step, when one of the two
    /// nodes still has the label `1`, the other one is folded into it so the
    /// result is a single matrix-vector chain such as `(A o A)((A o A) 1)`.
    pub fn find_pendant(&self) -> Option<(usize, PendantKind)> {
        if let [(&lo, u), (&hi, v)] = self.nodes.iter().collect::<Vec<_>>()[..] {
            if *v == VectorExpr::Ones && *u != VectorExpr::Ones {
                return Some((lo, PendantKind::TypeI));
            }
            return Some((hi, PendantKind::TypeI));
        }
        let all = self.pendants();
        all.iter()
            .find(|(_, kind)| *kind == PendantKind::TypeI)
            .or_else(|| all.first())
            .copied()
    }

    /// Smallest number of distinct neighbours over all nodes.
    pub fn min_distinct_neighbors(&self) -> usize {
        self.nodes
            .keys()
            .map(|&a| self.neighbors(a).len())
            .min()
            .unwrap_or(0)
    }

    fn take_edges(&mut self, pendant: usize) -> Vec<Edge> {
        let (taken, kept) = std::mem::take(&mut self.edges)
            .into_iter()
            .partition(|e| e.touches(pendant));
        self.edges = kept;
        taken
    }

    fn expect_kind(&self, pendant: usize, kind: PendantKind) -> Result<()> {
        if !self.nodes.contains_key(&pendant) {
            return Err(Error::Contract(format!("node {pendant} does not exist")));
        }
        if self.nodes.len() < 2 || self.classify(pendant) != Some(kind) {
            return Err(Error::Contract(format!(
                "node {pendant} has {} distinct neighbours, not a {kind:?} pendant",
                self.neighbors(pendant).len()
            )));
        }
        Ok(())
    }

    /// Folds a Type I pendant into its hinge.
    pub fn prune_type1(&mut self, pendant: usize) -> Result<()> {
        self.expect_kind(pendant, PendantKind::TypeI)?;
        let hinge = *self.neighbors(pendant).first().unwrap();
        let edges = self.take_edges(pendant);
        let v = self.nodes.remove(&pendant).unwrap();
        let combined = MatrixExpr::hadamard(edges.iter().map(|e| e.oriented_from(hinge)));
        let u = self.nodes.remove(&hinge).unwrap();
        let updated = VectorExpr::hadamard([u, VectorExpr::matvec(combined, v)]);
        self.nodes.insert(hinge, updated);
        Ok(())
    }

    /// Replaces a Type II pendant by one edge between its hinges, oriented
    /// from the lower-id hinge to the higher.
    pub fn prune_type2(&mut self, pendant: usize) -> Result<()> {
        self.expect_kind(pendant, PendantKind::TypeII)?;
        let hinges: Vec<usize> = self.neighbors(pendant).into_iter().collect();
        let (first, second) = (hinges[0], hinges[1]);
        let edges = self.take_edges(pendant);
        let y = self.nodes.remove(&pendant).unwrap();
        let q = MatrixExpr::hadamard(
            edges
                .iter()
                .filter(|e| e.between(first, pendant))
                .map(|e| e.oriented_from(first)),
        );
        let r = MatrixExpr::hadamard(
            edges
                .iter()
                .filter(|e| e.between(pendant, second))
                .map(|e| e.oriented_from(pendant)),
        );
        self.edges.push(Edge {
            from: first,
            to: second,
            label: MatrixExpr::matmul([q, MatrixExpr::diag(y), r]),
        });
        Ok(())
    }

    /// Applies the matching prune step.
    pub fn prune(&mut self, pendant: usize, kind: PendantKind) -> Result<()> {
        match kind {
            PendantKind::TypeI => self.prune_type1(pendant),
            PendantKind::TypeII => self.prune_type2(pendant),
        }
    }
}

/// Terminal state of a pruning run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// One node left; the full sum is `1' v`.
    Sea(VectorExpr),
    /// No pendant left; the remaining LMG is an irreducible full sum.
    Ifs(Lmg),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PruneResult {
    pub outcome: Outcome,
    /// Surviving node count.
    pub layers: usize,
    pub steps: usize,
}

impl PruneResult {
    pub fn is_sea(&self) -> bool {
        matches!(self.outcome, Outcome::Sea(_))
    }

    /// Term body, with IFS layers renumbered `1..=layers` by ascending node
    /// id and parallel edges combined per index pair.
    pub fn body(&self) -> TermBody {
        match &self.outcome {
            Outcome::Sea(v) => TermBody::Sea(v.clone()),
            Outcome::Ifs(lmg) => TermBody::Ifs(ifs_term(lmg)),
        }
    }
}

fn ifs_term(lmg: &Lmg) -> IfsTerm {
    let index: BTreeMap<usize, usize> = lmg
        .nodes
        .keys()
        .enumerate()
        .map(|(i, &id)| (id, i + 1))
        .collect();
    let nodes = lmg
        .nodes
        .iter()
        .filter(|(_, v)| **v != VectorExpr::Ones)
        .map(|(id, v)| (index[id], v.clone()))
        .collect();
    let mut grouped: BTreeMap<(usize, usize), Vec<MatrixExpr>> = BTreeMap::new();
    for e in &lmg.edges {
        let (a, b) = (index[&e.from], index[&e.to]);
        let (p, q, label) = if a < b {
            (a, b, e.label.clone())
        } else {
            (b, a, e.label.transpose())
        };
        grouped.entry((p, q)).or_default().push(label);
    }
    let factors = grouped
        .into_iter()
        .map(|((p, q), labels)| {
            let expr = MatrixExpr::hadamard(labels);
            let oriented = !expr.is_symmetric();
            Factor { p, q, expr, oriented }
        })
        .collect();
    IfsTerm {
        layers: lmg.node_count(),
        nodes,
        factors,
    }
}

/// Prunes with a caller-supplied pendant choice. `on_step` sees the LMG
/// before the first step and after every step.
pub fn prune_with_policy<P, S>(g: &MultiGraph, mut policy: P, mut on_step: S) -> Result<PruneResult>
where
    P: FnMut(&Lmg) -> Option<(usize, PendantKind)>,
    S: FnMut(&Lmg),
{
    let mut lmg = Lmg::from_multigraph(g);
    on_step(&lmg);
    let mut steps = 0;
    while lmg.node_count() > 1 {
        let Some((node, kind)) = policy(&lmg) else {
            break;
        };
        lmg.prune(node, kind)?;
        steps += 1;
        on_step(&lmg);
    }
    let layers = lmg.node_count();
    let outcome = if layers == 1 {
        let (_, v) = lmg.nodes.into_iter().next().unwrap();
        Outcome::Sea(v)
    } else {
        Outcome::Ifs(lmg)
    };
    Ok(PruneResult {
        outcome,
        layers,
        steps,
    })
}

/// Prunes the default LMG of `g` under the deterministic policy until one
/// node or no pendant remains.
pub fn prune_to_completion(g: &MultiGraph) -> Result<PruneResult> {
    prune_with_policy(g, Lmg::find_pendant, |_| {})
}

fn class_term(class: &GraphClass) -> Result<Term> {
    let result = prune_to_completion(&class.representative)?;
    Ok(Term {
        coefficient: class.a,
        body: result.body(),
        provenance: Provenance {
            m: class.m,
            k: class.k,
            t: class.t,
        },
    })
}

/// Turns every class of `catalog` into a term.
pub fn compile_catalog(catalog: &Catalog, exec: Exec) -> Result<Formula> {
    let classes: Vec<&GraphClass> = catalog.classes.iter().collect();
    let terms = exec
        .map(classes, class_term)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Formula {
        m: catalog.m,
        terms,
    })
}

/// Builds the catalog for `m` and compiles it.
pub fn compile(m: usize, exec: Exec) -> Result<Formula> {
    compile_catalog(&build_catalog(m, exec)?, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Partition;
    use MatrixExpr::A;

    fn mg(w: Vec<Vec<u32>>) -> MultiGraph {
        MultiGraph::from_weights(w).unwrap()
    }

    /// Unlabeled LMG from a weight matrix, without the even-degree check.
    fn lmg_of(w: Vec<Vec<u32>>) -> Lmg {
        let nodes = (0..w.len()).map(|a| (a, VectorExpr::Ones)).collect();
        let mut edges = Vec::new();
        for a in 0..w.len() {
            for b in a + 1..w.len() {
                for _ in 0..w[a][b] {
                    edges.push(Edge { from: a, to: b, label: A });
                }
            }
        }
        Lmg::new(nodes, edges).unwrap()
    }

    fn doubled_path() -> MultiGraph {
        mg(vec![vec![0, 2, 0], vec![2, 0, 2], vec![0, 2, 0]])
    }

    fn aa() -> MatrixExpr {
        MatrixExpr::hadamard([A, A])
    }

    fn mv(m: MatrixExpr, v: VectorExpr) -> VectorExpr {
        VectorExpr::matvec(m, v)
    }

    #[test]
    fn default_lmg_shapes() {
        let lmg = Lmg::from_multigraph(&doubled_path());
        assert_eq!(lmg.node_count(), 3);
        assert_eq!(lmg.edges().len(), 4);
        assert!(lmg.nodes().values().all(|v| *v == VectorExpr::Ones));
        assert!(lmg.edges().iter().all(|e| e.label == A));

        let pair = Lmg::from_multigraph(&mg(vec![vec![0, 4], vec![4, 0]]));
        assert_eq!(pair.edges().len(), 4);
        assert!(pair.edges().iter().all(|e| e.from == 0 && e.to == 1));
    }

    #[test]
    fn pendant_selection() {
        let lmg = Lmg::from_multigraph(&doubled_path());
        assert_eq!(lmg.find_pendant(), Some((2, PendantKind::TypeI)));

        let cycle = Lmg::from_multigraph(&Partition::finest(6).unwrap().induce_multigraph().unwrap());
        let p = cycle.pendants();
        assert_eq!(p.len(), 6);
        assert!(p.iter().all(|(_, kind)| *kind == PendantKind::TypeII));
        assert_eq!(cycle.find_pendant(), Some((5, PendantKind::TypeII)));

        // Every node sees three others.
        let core = mg(vec![
            vec![0, 2, 1, 1],
            vec![2, 0, 1, 1],
            vec![1, 1, 0, 2],
            vec![1, 1, 2, 0],
        ]);
        assert_eq!(Lmg::from_multigraph(&core).find_pendant(), None);
    }

    #[test]
    fn doubled_path_prunes_like_the_worked_example() {
        let mut lmg = Lmg::from_multigraph(&doubled_path());
        lmg.prune_type1(2).unwrap();
        assert_eq!(lmg.label(1), Some(&mv(aa(), VectorExpr::Ones)));
        lmg.prune_type1(1).unwrap();
        assert_eq!(lmg.node_count(), 1);
        assert_eq!(lmg.label(0), Some(&mv(aa(), mv(aa(), VectorExpr::Ones))));
    }

    #[test]
    fn last_step_keeps_the_bare_node() {
        let mut lmg = Lmg::from_multigraph(&mg(vec![vec![0, 2, 2], vec![2, 0, 0], vec![2, 0, 0]]));
        assert_eq!(lmg.find_pendant(), Some((2, PendantKind::TypeI)));
        lmg.prune_type1(2).unwrap();
        assert_eq!(lmg.find_pendant(), Some((0, PendantKind::TypeI)));
        lmg.prune_type1(0).unwrap();
        assert_eq!(lmg.label(1), Some(&mv(aa(), mv(aa(), VectorExpr::Ones))));
    }

    #[test]
    fn single_edge_type1() {
        let mut lmg = lmg_of(vec![vec![0, 1], vec![1, 0]]);
        lmg.prune_type1(1).unwrap();
        assert_eq!(lmg.label(0), Some(&mv(A, VectorExpr::Ones)));
    }

    #[test]
    fn misclassified_pendants_are_rejected() {
        let mut lmg = Lmg::from_multigraph(&Partition::finest(5).unwrap().induce_multigraph().unwrap());
        assert!(matches!(lmg.prune_type1(0), Err(Error::Contract(_))));
        let mut path = Lmg::from_multigraph(&doubled_path());
        assert!(matches!(path.prune_type2(0), Err(Error::Contract(_))));
        assert!(matches!(path.prune_type1(9), Err(Error::Contract(_))));
    }

    #[test]
    fn cycle_type2_creates_a_product_edge() {
        let mut lmg = Lmg::from_multigraph(&Partition::finest(5).unwrap().induce_multigraph().unwrap());
        lmg.prune_type2(2).unwrap();
        let created = lmg.edges().iter().find(|e| e.between(1, 3)).unwrap();
        assert_eq!(created.label, MatrixExpr::MatMul(vec![A, A]));
        assert_eq!((created.from, created.to), (1, 3));
    }

    #[test]
    fn mixed_multiplicity_type2() {
        // Node 1 has a doubled edge to 0 and a single edge to 2.
        let mut lmg = lmg_of(vec![vec![0, 2, 1], vec![2, 0, 1], vec![1, 1, 0]]);
        lmg.prune_type2(1).unwrap();
        let created = lmg.edges().iter().find(|e| e.label != A).unwrap();
        assert_eq!(created.label, MatrixExpr::MatMul(vec![aa(), A]));
    }

    #[test]
    fn weighted_pendant_type2_uses_its_diagonal() {
        let mut nodes = BTreeMap::new();
        nodes.insert(0, VectorExpr::Ones);
        nodes.insert(1, mv(aa(), VectorExpr::Ones));
        nodes.insert(2, VectorExpr::Ones);
        let edges = vec![
            Edge { from: 0, to: 1, label: A },
            Edge { from: 1, to: 2, label: A },
        ];
        let mut lmg = Lmg::new(nodes, edges).unwrap();
        lmg.prune_type2(1).unwrap();
        let expected = MatrixExpr::matmul([A, MatrixExpr::diag(mv(aa(), VectorExpr::Ones)), A]);
        assert_eq!(lmg.edges()[0].label, expected);
    }

    #[test]
    fn order_four_terms() {
        let path = prune_to_completion(&doubled_path()).unwrap();
        assert_eq!(path.outcome, Outcome::Sea(mv(aa(), mv(aa(), VectorExpr::Ones))));
        assert_eq!(path.steps, 2);

        let pair = prune_to_completion(&mg(vec![vec![0, 4], vec![4, 0]])).unwrap();
        assert_eq!(
            pair.outcome,
            Outcome::Sea(mv(MatrixExpr::hadamard([A, A, A, A]), VectorExpr::Ones))
        );
    }

    #[test]
    fn order_eight_core_is_ifs() {
        let core = mg(vec![
            vec![0, 2, 1, 1],
            vec![2, 0, 1, 1],
            vec![1, 1, 0, 2],
            vec![1, 1, 2, 0],
        ]);
        let r = prune_to_completion(&core).unwrap();
        assert_eq!(r.layers, 4);
        assert_eq!(r.steps, 0);
        let TermBody::Ifs(ifs) = r.body() else {
            panic!("expected an IFS term");
        };
        let pattern: Vec<_> = ifs.factors.iter().map(|f| (f.p, f.q, f.expr.clone())).collect();
        assert_eq!(
            pattern,
            vec![(1, 2, aa()), (1, 3, A), (1, 4, A), (2, 3, A), (2, 4, A), (3, 4, aa())]
        );
        assert!(ifs.nodes.is_empty());
    }

    #[test]
    fn lmg_rejects_loops() {
        let mut nodes = BTreeMap::new();
        nodes.insert(0, VectorExpr::Ones);
        let e = Edge { from: 0, to: 0, label: A };
        assert!(Lmg::new(nodes.clone(), vec![e]).is_err());
        let e = Edge { from: 0, to: 1, label: A };
        assert!(Lmg::new(nodes, vec![e]).is_err());
    }
}
