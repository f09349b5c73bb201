//! Finite rooted cones of a graded groupoid.
//!
//! A cone is stored as a breadth-first array of nodes with parent indices.
//! Each node carries one accumulated value per registered quasi-cocycle;
//! edge increments are recovered as child minus parent.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// What a node stands for in the underlying model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    /// A point of the complex plane (preimage cones).
    Point(Complex64),
    /// A finite admissible word (symbolic cones).
    Word(Vec<u8>),
}

impl Payload {
    pub fn point(&self) -> Option<Complex64> {
        match self {
            Payload::Point(z) => Some(*z),
            Payload::Word(_) => None,
        }
    }

    pub fn word(&self) -> Option<&[u8]> {
        match self {
            Payload::Word(w) => Some(w),
            Payload::Point(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CocycleKind {
    /// Composition length; increment 1 on every edge.
    Level,
    /// `-ln|B'|` of the inverse branch, i.e. `ln|f'(child)|`.
    Derivative,
    /// Anything else; not required to be positive.
    Custom,
}

impl CocycleKind {
    /// Level gradings must increase strictly along every edge. Derivative
    /// gradings of a hyperbolic map grow along iterates but a single inverse
    /// branch may expand slightly, so they are not checked edge by edge.
    pub fn is_positive(self) -> bool {
        matches!(self, CocycleKind::Level)
    }
}

/// Edge increment as a function of the (parent, child) payloads.
pub type IncrementRule = Arc<dyn Fn(&Payload, &Payload) -> f64 + Send + Sync>;

/// A grading assignment on the edges of a cone.
#[derive(Clone)]
pub struct QuasiCocycleSpec {
    pub name: String,
    pub eta: f64,
    pub kind: CocycleKind,
    rule: IncrementRule,
}

impl QuasiCocycleSpec {
    pub fn new(name: impl Into<String>, eta: f64, kind: CocycleKind, rule: IncrementRule) -> Self {
        QuasiCocycleSpec {
            name: name.into(),
            eta,
            kind,
            rule,
        }
    }

    /// The level cocycle: every edge has increment 1.
    pub fn level() -> Self {
        Self::new("level", 0.0, CocycleKind::Level, Arc::new(|_, _| 1.0))
    }

    pub fn increment(&self, parent: &Payload, child: &Payload) -> f64 {
        (self.rule)(parent, child)
    }
}

impl fmt::Debug for QuasiCocycleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuasiCocycleSpec")
            .field("name", &self.name)
            .field("eta", &self.eta)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

/// Growth stops once a child's value on `cocycle` would exceed `limit`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub cocycle: usize,
    pub limit: f64,
}

/// Produces the children of a node, in a deterministic order.
pub trait ConeGenerator: Sync {
    fn children(&self, node: usize, parent: &Payload) -> Result<Vec<Payload>>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeNode {
    pub parent: Option<usize>,
    pub label: u32,
    pub depth: u32,
    pub payload: Payload,
    pub gradings: Vec<f64>,
}

/// A child that was generated but excluded by the budget.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierNode {
    pub parent: usize,
    pub label: u32,
    pub payload: Payload,
    pub gradings: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GradedCone {
    nodes: Vec<ConeNode>,
    children: Vec<Range<usize>>,
    frontier: Vec<FrontierNode>,
    specs: Vec<QuasiCocycleSpec>,
    complete_through: Vec<f64>,
    max_increment: Vec<f64>,
    min_increment: Vec<f64>,
}

/// Hard ceiling on explicit cone size.
pub const MAX_CONE_NODES: usize = 10_000_000;

impl GradedCone {
    /// Breadth-first growth from `root`: a node is kept iff its value on the
    /// budget cocycle is at most `budget.limit`.
    pub fn grow<G: ConeGenerator>(
        root: Payload,
        specs: Vec<QuasiCocycleSpec>,
        generator: &G,
        budget: Budget,
        max_nodes: usize,
    ) -> Result<Self> {
        if specs.is_empty() {
            return input("a cone needs at least one cocycle");
        }
        if budget.cocycle >= specs.len() {
            return input(format!("budget cocycle {} is not registered", budget.cocycle));
        }
        if !budget.limit.is_finite() || budget.limit < 0.0 {
            return input(format!("budget limit must be finite and >= 0, got {}", budget.limit));
        }
        let k = specs.len();
        let mut nodes = vec![ConeNode {
            parent: None,
            label: 0,
            depth: 0,
            payload: root,
            gradings: vec![0.0; k],
        }];
        let mut children: Vec<Range<usize>> = Vec::new();
        let mut frontier = Vec::new();
        let mut max_inc = vec![f64::NEG_INFINITY; k];
        let mut min_inc = vec![f64::INFINITY; k];

        let mut level = 0..1;
        while !level.is_empty() {
            let expanded: Vec<Result<Vec<(Payload, Vec<f64>)>>> = level
                .clone()
                .into_par_iter()
                .map(|i| {
                    let parent = &nodes[i];
                    let kids = generator.children(i, &parent.payload)?;
                    kids.into_iter()
                        .map(|p| {
                            let mut g = parent.gradings.clone();
                            for (j, spec) in specs.iter().enumerate() {
                                let inc = spec.increment(&parent.payload, &p);
                                if !inc.is_finite() {
                                    return Err(Error::Expansion {
                                        node: i,
                                        reason: format!("non-finite increment on cocycle '{}'", spec.name),
                                    });
                                }
                                if spec.kind.is_positive() && inc <= spec.eta {
                                    return Err(Error::Expansion {
                                        node: i,
                                        reason: format!(
                                            "increment {inc} on positive cocycle '{}' does not exceed eta = {}",
                                            spec.name, spec.eta
                                        ),
                                    });
                                }
                                g[j] += inc;
                            }
                            Ok((p, g))
                        })
                        .collect()
                })
                .collect();

            let start = nodes.len();
            for (i, kids) in level.clone().zip(expanded) {
                let kids = kids?;
                let first = nodes.len();
                for (label, (payload, gradings)) in kids.into_iter().enumerate() {
                    for j in 0..k {
                        let inc = gradings[j] - nodes[i].gradings[j];
                        max_inc[j] = max_inc[j].max(inc);
                        min_inc[j] = min_inc[j].min(inc);
                    }
                    if gradings[budget.cocycle] <= budget.limit {
                        nodes.push(ConeNode {
                            parent: Some(i),
                            label: label as u32,
                            depth: nodes[i].depth + 1,
                            payload,
                            gradings,
                        });
                    } else {
                        frontier.push(FrontierNode {
                            parent: i,
                            label: label as u32,
                            payload,
                            gradings,
                        });
                    }
                }
                children.push(first..nodes.len());
                if nodes.len() > max_nodes {
                    return Err(Error::Resource(format!(
                        "cone exceeds {max_nodes} nodes; lower the budget"
                    )));
                }
            }
            level = start..nodes.len();
        }

        // Largest drop below an ancestor's value. Unexplored descendants of
        // the frontier are assumed to dip no further.
        let mut dip = vec![0.0f64; k];
        let mut peak: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
        for n in &nodes {
            let p = match n.parent {
                None => vec![f64::NEG_INFINITY; k],
                Some(i) => (0..k).map(|j| peak[i][j].max(nodes[i].gradings[j])).collect(),
            };
            for j in 0..k {
                dip[j] = dip[j].max(p[j] - n.gradings[j]);
            }
            peak.push(p);
        }
        let mut complete_through = vec![f64::INFINITY; k];
        for f in &frontier {
            for j in 0..k {
                let p = peak[f.parent][j].max(nodes[f.parent].gradings[j]);
                dip[j] = dip[j].max(p - f.gradings[j]);
                complete_through[j] = complete_through[j].min(f.gradings[j]);
            }
        }
        for j in 0..k {
            complete_through[j] -= dip[j];
        }
        for j in 0..k {
            if max_inc[j] == f64::NEG_INFINITY {
                max_inc[j] = 0.0;
                min_inc[j] = 0.0;
            }
        }
        Ok(GradedCone {
            nodes,
            children,
            frontier,
            specs,
            complete_through,
            max_increment: max_inc,
            min_increment: min_inc,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn nodes(&self) -> &[ConeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Result<&ConeNode> {
        self.nodes
            .get(i)
            .ok_or_else(|| Error::Input(format!("unknown node index {i} (cone has {} nodes)", self.nodes.len())))
    }

    pub fn children(&self, i: usize) -> Range<usize> {
        self.children.get(i).cloned().unwrap_or(0..0)
    }

    pub fn frontier(&self) -> &[FrontierNode] {
        &self.frontier
    }

    pub fn specs(&self) -> &[QuasiCocycleSpec] {
        &self.specs
    }

    pub fn spec(&self, cocycle: usize) -> Result<&QuasiCocycleSpec> {
        self.specs
            .get(cocycle)
            .ok_or_else(|| Error::Input(format!("cocycle {cocycle} is not registered")))
    }

    pub fn grading(&self, node: usize, cocycle: usize) -> f64 {
        self.nodes[node].gradings[cocycle]
    }

    /// Every node with value `<= v` on `cocycle` is present iff `v` is below this.
    pub fn complete_through(&self, cocycle: usize) -> f64 {
        self.complete_through[cocycle]
    }

    pub fn max_increment(&self, cocycle: usize) -> f64 {
        self.max_increment[cocycle]
    }

    pub fn min_increment(&self, cocycle: usize) -> f64 {
        self.min_increment[cocycle]
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes.last().map(|n| n.depth).unwrap_or(0)
    }

    /// Nodes at exactly `depth`, in breadth-first order.
    pub fn level(&self, depth: u32) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.depth == depth)
            .map(|(i, _)| i)
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.children(i).is_empty())
    }

    /// Increment of `cocycle` on the edge into `node`, from stored sums.
    pub fn edge_increment(&self, node: usize, cocycle: usize) -> Option<f64> {
        let n = &self.nodes[node];
        n.parent.map(|p| n.gradings[cocycle] - self.nodes[p].gradings[cocycle])
    }

    /// Increment recomputed from the rule on the edge payloads.
    pub fn recompute_increment(&self, node: usize, cocycle: usize) -> Option<f64> {
        let n = &self.nodes[node];
        n.parent
            .map(|p| self.specs[cocycle].increment(&self.nodes[p].payload, &n.payload))
    }

    /// Root-to-node path, root first.
    pub fn path(&self, node: usize) -> Vec<usize> {
        let mut out = vec![node];
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Branch labels along the root-to-node path (the node's address).
    pub fn address(&self, node: usize) -> Vec<u32> {
        self.path(node)
            .into_iter()
            .skip(1)
            .map(|i| self.nodes[i].label)
            .collect()
    }

    /// Ancestor of `node` at `depth` (the node itself when depths agree).
    pub fn ancestor_at(&self, node: usize, depth: u32) -> Option<usize> {
        let mut cur = node;
        if self.nodes[cur].depth < depth {
            return None;
        }
        while self.nodes[cur].depth > depth {
            cur = self.nodes[cur].parent?;
        }
        Some(cur)
    }

    /// Deepest common ancestor.
    pub fn common_ancestor(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        while self.nodes[a].depth > self.nodes[b].depth {
            a = self.nodes[a].parent.unwrap();
        }
        while self.nodes[b].depth > self.nodes[a].depth {
            b = self.nodes[b].parent.unwrap();
        }
        while a != b {
            a = self.nodes[a].parent.unwrap();
            b = self.nodes[b].parent.unwrap();
        }
        a
    }

    /// Unit-edge tree distance.
    pub fn tree_distance(&self, a: usize, b: usize) -> u32 {
        let c = self.common_ancestor(a, b);
        self.nodes[a].depth + self.nodes[b].depth - 2 * self.nodes[c].depth
    }

    pub(crate) fn check_node(&self, i: usize) -> Result<()> {
        self.node(i).map(|_| ())
    }

    pub(crate) fn check_cocycle(&self, c: usize) -> Result<()> {
        self.spec(c).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::FullTree;

    fn binary(depth: f64) -> GradedCone {
        GradedCone::grow(
            Payload::Word(vec![]),
            vec![QuasiCocycleSpec::level()],
            &FullTree(2),
            Budget { cocycle: 0, limit: depth },
            MAX_CONE_NODES,
        )
        .unwrap()
    }

    #[test]
    fn binary_cone_sizes() {
        let c = binary(3.0);
        assert_eq!(c.len(), 15);
        assert_eq!(c.frontier().len(), 16);
        assert_eq!(c.complete_through(0), 4.0);
        assert_eq!(c.max_increment(0), 1.0);
        assert_eq!(c.level(3).count(), 8);
    }

    #[test]
    fn parent_depth_invariant() {
        let c = binary(4.0);
        for (i, n) in c.nodes().iter().enumerate() {
            if let Some(p) = n.parent {
                assert_eq!(c.nodes()[p].depth + 1, n.depth);
                assert!(c.children(p).contains(&i));
                assert!(n.gradings[0] > c.nodes()[p].gradings[0]);
            }
        }
    }

    #[test]
    fn addresses_and_ancestors() {
        let c = binary(3.0);
        let leaf = c.level(3).last().unwrap();
        assert_eq!(c.address(leaf), vec![1, 1, 1]);
        assert_eq!(c.payload_word(leaf), vec![1, 1, 1]);
        let a = c.ancestor_at(leaf, 1).unwrap();
        assert_eq!(c.address(a), vec![1]);
        let first = c.level(3).next().unwrap();
        assert_eq!(c.common_ancestor(first, leaf), 0);
        assert_eq!(c.tree_distance(first, leaf), 6);
    }

    #[test]
    fn node_limit_is_enforced() {
        let r = GradedCone::grow(
            Payload::Word(vec![]),
            vec![QuasiCocycleSpec::level()],
            &FullTree(2),
            Budget { cocycle: 0, limit: 20.0 },
            1000,
        );
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn completeness_allows_for_dips() {
        // a 1 after anything but a 1 costs 1, every other step gains 2
        let zigzag = QuasiCocycleSpec::new(
            "zigzag",
            0.0,
            CocycleKind::Custom,
            Arc::new(|_, c| match c.word().unwrap() {
                [.., a, 1] if *a != 1 => -1.0,
                [1] => -1.0,
                _ => 2.0,
            }),
        );
        let grow = |d: f64| {
            GradedCone::grow(
                Payload::Word(vec![]),
                vec![QuasiCocycleSpec::level(), zigzag.clone()],
                &FullTree(2),
                Budget { cocycle: 0, limit: d },
                MAX_CONE_NODES,
            )
            .unwrap()
        };
        let c = grow(4.0);
        let lowest = c.frontier().iter().map(|f| f.gradings[1]).fold(f64::INFINITY, f64::min);
        assert_eq!(c.complete_through(1), lowest - 1.0);
        let deep = grow(12.0);
        for n in deep.nodes() {
            if n.gradings[1] <= c.complete_through(1) {
                assert!(n.depth <= 4);
            }
        }
    }

    #[test]
    fn non_positive_increment_rejected() {
        let bad = QuasiCocycleSpec::new("flat", 0.0, CocycleKind::Level, Arc::new(|_, _| 0.0));
        let r = GradedCone::grow(
            Payload::Word(vec![]),
            vec![QuasiCocycleSpec::level(), bad],
            &FullTree(2),
            Budget { cocycle: 0, limit: 2.0 },
            MAX_CONE_NODES,
        );
        assert!(matches!(r, Err(Error::Expansion { .. })));
    }

    impl GradedCone {
        fn payload_word(&self, i: usize) -> Vec<u8> {
            self.nodes[i].payload.word().unwrap().to_vec()
        }
    }
}
