//! The implicit binary tree of dyadic intervals. Nodes are addressed by
//! `(depth, index)` and never materialized; node `(d, k)` is the half-open
//! interval `[k / 2^d, (k + 1) / 2^d)`.

use std::fmt;

use crate::model::{DyadicPrice, Valuation, MAX_LEVEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub depth: u8,
    pub index: u64,
}

impl NodeRef {
    pub const ROOT: NodeRef = NodeRef { depth: 0, index: 0 };

    pub fn new(depth: u8, index: u64) -> Self {
        assert!(depth <= MAX_LEVEL, "depth {depth} beyond grid");
        assert!(
            index < 1u64 << depth,
            "index {index} out of range at depth {depth}"
        );
        NodeRef { depth, index }
    }

    pub fn left_child(self) -> NodeRef {
        assert!(self.depth < MAX_LEVEL, "child of a node at the grid floor");
        NodeRef {
            depth: self.depth + 1,
            index: 2 * self.index,
        }
    }

    pub fn right_child(self) -> NodeRef {
        assert!(self.depth < MAX_LEVEL, "child of a node at the grid floor");
        NodeRef {
            depth: self.depth + 1,
            index: 2 * self.index + 1,
        }
    }

    pub fn parent(self) -> NodeRef {
        assert!(self.depth > 0, "parent of the root");
        NodeRef {
            depth: self.depth - 1,
            index: self.index / 2,
        }
    }

    pub fn is_right_child(self) -> bool {
        self.depth > 0 && self.index % 2 == 1
    }

    /// `(L, R)` of the interval `[L, R)`.
    pub fn endpoints(self) -> (DyadicPrice, DyadicPrice) {
        (self.left(), self.right())
    }

    pub fn left(self) -> DyadicPrice {
        DyadicPrice::new(self.index, self.depth).expect("node endpoints lie on the grid")
    }

    pub fn right(self) -> DyadicPrice {
        DyadicPrice::new(self.index + 1, self.depth).expect("node endpoints lie on the grid")
    }

    /// `(L + R) / 2`, i.e. the left endpoint of the right child.
    pub fn midpoint(self) -> DyadicPrice {
        DyadicPrice::new(2 * self.index + 1, self.depth + 1).expect("midpoint lies on the grid")
    }

    pub fn contains(self, v: Valuation) -> bool {
        let (l, r) = self.endpoints();
        l.value() <= v.value() && v.value() < r.value()
    }

    /// Ancestor at `depth` (or `self` when the depths match).
    pub fn ancestor_at(self, depth: u8) -> NodeRef {
        assert!(depth <= self.depth);
        NodeRef {
            depth,
            index: self.index >> (self.depth - depth),
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = self.endpoints();
        write!(f, "({}, {}) = [{}, {})", self.depth, self.index, l, r)
    }
}

/// Tree depth chosen so that leaves have length at most `1/T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub depth: u8,
}

impl TreeParams {
    pub fn new(depth: u8) -> Self {
        assert!((1..=MAX_LEVEL).contains(&depth));
        TreeParams { depth }
    }

    /// `D = ceil(log2 T)`.
    pub fn for_horizon(horizon: u64) -> Self {
        assert!(horizon >= 2);
        TreeParams::new((64 - (horizon - 1).leading_zeros()) as u8)
    }

    pub fn is_leaf(self, n: NodeRef) -> bool {
        n.depth == self.depth
    }

    pub fn leaf_count(self) -> u64 {
        1u64 << self.depth
    }

    pub fn leaf(self, index: u64) -> NodeRef {
        NodeRef::new(self.depth, index)
    }
}

/// The unique leaf whose interval contains `v`.
pub fn leaf_of(v: Valuation, params: TreeParams) -> NodeRef {
    // v * 2^D is exact (power-of-two scaling), so flooring is exact too.
    let scaled = v.value() * (1u64 << params.depth) as f64;
    let index = (scaled.floor() as u64).min(params.leaf_count() - 1);
    NodeRef::new(params.depth, index)
}

/// Length of the shortest path between two nodes in the tree graph.
pub fn tree_distance(a: NodeRef, b: NodeRef) -> u32 {
    let common = a.depth.min(b.depth);
    let ai = a.index >> (a.depth - common);
    let bi = b.index >> (b.depth - common);
    let lca_depth = common as u32 - (64 - (ai ^ bi).leading_zeros());
    (a.depth as u32 - lca_depth) + (b.depth as u32 - lca_depth)
}

/// Whether `n` lies on the root-to-`leaf_star` path.
pub fn is_on_path(n: NodeRef, leaf_star: NodeRef) -> bool {
    n.depth <= leaf_star.depth && leaf_star.ancestor_at(n.depth) == n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64) -> Valuation {
        Valuation::new(x).unwrap()
    }

    #[test]
    fn navigation() {
        assert_eq!(NodeRef::ROOT.left_child(), NodeRef::new(1, 0));
        assert_eq!(NodeRef::new(1, 1).right_child(), NodeRef::new(2, 3));
        assert_eq!(NodeRef::new(2, 3).parent(), NodeRef::new(1, 1));
    }

    #[test]
    #[should_panic(expected = "parent of the root")]
    fn parent_of_root_is_a_contract_violation() {
        NodeRef::ROOT.parent();
    }

    #[test]
    fn endpoints_of_known_nodes() {
        let ep = |d, k| {
            let (l, r) = NodeRef::new(d, k).endpoints();
            (l.value(), r.value())
        };
        assert_eq!(ep(1, 1), (0.5, 1.0));
        assert_eq!(ep(2, 2), (0.5, 0.75));
        assert_eq!(ep(0, 0), (0.0, 1.0));
        assert_eq!(NodeRef::ROOT.midpoint().value(), 0.5);
    }

    #[test]
    fn depth_is_ceil_log2() {
        assert_eq!(TreeParams::for_horizon(2).depth, 1);
        assert_eq!(TreeParams::for_horizon(8).depth, 3);
        assert_eq!(TreeParams::for_horizon(9).depth, 4);
        assert_eq!(TreeParams::for_horizon(16_384).depth, 14);
        for t in 2..300u64 {
            let d = TreeParams::for_horizon(t).depth as u32;
            assert!(1u64 << d >= t && (d == 1 || 1u64 << (d - 1) < t), "T={t}");
        }
    }

    #[test]
    fn leaf_lookup() {
        assert_eq!(leaf_of(v(0.0), TreeParams::new(3)), NodeRef::new(3, 0));
        assert_eq!(leaf_of(v(0.7), TreeParams::new(2)), NodeRef::new(2, 2));
        assert_eq!(leaf_of(v(0.999), TreeParams::new(3)), NodeRef::new(3, 7));
        assert_eq!(leaf_of(v(0.5), TreeParams::new(1)), NodeRef::new(1, 1));
    }

    #[test]
    fn distances() {
        let leaf = NodeRef::new(4, 9);
        assert_eq!(tree_distance(NodeRef::ROOT, leaf), 4);
        assert_eq!(tree_distance(leaf, leaf), 0);
        assert_eq!(tree_distance(NodeRef::new(2, 2), NodeRef::new(2, 3)), 2);
        assert_eq!(tree_distance(NodeRef::new(1, 0), NodeRef::new(3, 7)), 4);
    }

    #[test]
    fn path_membership() {
        let star = NodeRef::new(3, 7);
        assert!(is_on_path(NodeRef::ROOT, star));
        assert!(is_on_path(star, star));
        assert!(!is_on_path(NodeRef::new(1, 0), star));
        assert!(is_on_path(NodeRef::new(2, 3), star));
    }
}
