//! Dendrograms of nested approximations.
//!
//! A [`Hierarchy`] over `N` pixels is a full binary tree of `2N - 1` nodes.
//! Leaves occupy ids `0..N`, internal nodes `N..2N-1`, and every parent has a
//! larger id than its children, so the root is always the last node. Each
//! internal node records the error increment of the merge that formed it and
//! its rank in the merge sequence. The approximation with `g` clusters is
//! the state after the first `N - g` merges, so all `N` approximations are
//! recoverable from `O(N)` storage.

use std::fmt;

use crate::error::{Error, Result};
use crate::stats::{sigma_from_error, ClusterStats};

/// Relative tolerance used for convexity checks unless the caller supplies
/// one. Multiplied by the error of the whole image to get an absolute value.
pub const DEFAULT_RELATIVE_EPSILON: f64 = 1e-9;

/// Index of a node within one [`Hierarchy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Raster dimensions of the image a hierarchy was built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(a, b)` for every 4-adjacent pixel pair, `a < b`.
    pub fn for_each_edge(&self, mut f: impl FnMut(usize, usize)) {
        for y in 0..self.height {
            for x in 0..self.width {
                let p = y * self.width + x;
                if x + 1 < self.width {
                    f(p, p + 1);
                }
                if y + 1 < self.height {
                    f(p, p + self.width);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyNode {
    children: Option<[NodeId; 2]>,
    parent: Option<NodeId>,
    stats: ClusterStats,
    merge_cost: f64,
    merge_rank: u32,
}

impl HierarchyNode {
    pub fn children(&self) -> Option<[NodeId; 2]> {
        self.children
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn stats(&self) -> &ClusterStats {
        &self.stats
    }

    /// Error increment of the merge that formed this node; zero for leaves.
    pub fn merge_cost(&self) -> f64 {
        self.merge_cost
    }

    /// Position in the merge sequence, `1..N`; zero for leaves.
    pub fn merge_rank(&self) -> u32 {
        self.merge_rank
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    nodes: Vec<HierarchyNode>,
    /// Pixel index of each leaf, strictly increasing.
    leaf_pixels: Vec<u32>,
    /// Internal node with rank `r` is at `by_rank[r - 1]`.
    by_rank: Vec<NodeId>,
    channels: u8,
    grid: Option<Grid>,
}

impl Hierarchy {
    /// Builds a hierarchy by replaying `merges` over `leaf_stats`.
    ///
    /// Leaf `i` gets id `i` and pixel index `i`; the `k`-th merge creates
    /// node `N + k` with rank `k + 1`. Every merge must reference two nodes
    /// that exist and have not been merged yet.
    ///
    /// ```
    /// use hiermerge::{ClusterStats, Hierarchy, NodeId};
    ///
    /// let leaves = [0u8, 1, 5].map(|v| ClusterStats::from_pixel(&[v]).unwrap());
    /// let h = Hierarchy::build_from_merges(
    ///     leaves.to_vec(),
    ///     &[(NodeId(0), NodeId(1)), (NodeId(3), NodeId(2))],
    /// )
    /// .unwrap();
    /// assert_eq!(h.node(NodeId(3)).merge_cost(), 0.5);
    /// assert!((h.node(h.root()).merge_cost() - 13.5).abs() < 1e-12);
    /// ```
    pub fn build_from_merges(
        leaf_stats: Vec<ClusterStats>,
        merges: &[(NodeId, NodeId)],
    ) -> Result<Hierarchy> {
        let pixels = (0..leaf_stats.len() as u32).collect();
        Hierarchy::assemble(leaf_stats, pixels, merges, None)
    }

    /// Like [`build_from_merges`](Self::build_from_merges) for leaves that
    /// are pixels of a `grid`, leaf `i` being pixel `i` in row-major order.
    pub fn build_on_grid(
        leaf_stats: Vec<ClusterStats>,
        grid: Grid,
        merges: &[(NodeId, NodeId)],
    ) -> Result<Hierarchy> {
        if grid.len() != leaf_stats.len() {
            return Err(Error::LabelMismatch {
                labels: leaf_stats.len(),
                pixels: grid.len(),
            });
        }
        let pixels = (0..leaf_stats.len() as u32).collect();
        Hierarchy::assemble(leaf_stats, pixels, merges, Some(grid))
    }

    pub(crate) fn assemble(
        leaf_stats: Vec<ClusterStats>,
        leaf_pixels: Vec<u32>,
        merges: &[(NodeId, NodeId)],
        grid: Option<Grid>,
    ) -> Result<Hierarchy> {
        let n = leaf_stats.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if merges.len() != n - 1 {
            return Err(Error::MergeCount {
                expected: n - 1,
                found: merges.len(),
            });
        }
        debug_assert_eq!(leaf_pixels.len(), n);
        debug_assert!(leaf_pixels.windows(2).all(|w| w[0] < w[1]));
        let channels = leaf_stats[0].channels();
        let mut nodes = Vec::with_capacity(2 * n - 1);
        for stats in leaf_stats {
            if stats.is_empty() {
                return Err(Error::EmptyCluster);
            }
            if stats.channels() != channels {
                return Err(Error::ChannelMismatch {
                    expected: channels as u8,
                    found: stats.channels() as u8,
                });
            }
            nodes.push(HierarchyNode {
                children: None,
                parent: None,
                stats,
                merge_cost: 0.0,
                merge_rank: 0,
            });
        }
        let mut by_rank = Vec::with_capacity(n - 1);
        for (k, &(a, b)) in merges.iter().enumerate() {
            let id = NodeId(nodes.len() as u32);
            for c in [a, b] {
                let live = nodes.get(c.index()).is_some_and(|node| node.parent.is_none());
                if !live || a == b {
                    return Err(Error::DeadNode { index: k, node: c });
                }
            }
            let (sa, sb) = (nodes[a.index()].stats, nodes[b.index()].stats);
            nodes[a.index()].parent = Some(id);
            nodes[b.index()].parent = Some(id);
            nodes.push(HierarchyNode {
                children: Some([a, b]),
                parent: None,
                stats: sa.merge(&sb)?,
                merge_cost: sa.merge_increment_unchecked(&sb),
                merge_rank: k as u32 + 1,
            });
            by_rank.push(id);
        }
        Ok(Hierarchy {
            nodes,
            leaf_pixels,
            by_rank,
            channels: channels as u8,
            grid,
        })
    }

    /// Reassigns the pixel index of each leaf, e.g. to describe a sub-image.
    /// Indices must be strictly increasing in leaf order. The grid is
    /// dropped since the leaves no longer cover it.
    pub fn with_pixels(mut self, pixels: Vec<u32>) -> Result<Hierarchy> {
        if pixels.len() != self.len() {
            return Err(Error::LabelMismatch {
                labels: pixels.len(),
                pixels: self.len(),
            });
        }
        if let Some(w) = pixels.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::OverlappingLeaves(w[1]));
        }
        self.leaf_pixels = pixels;
        self.grid = None;
        Ok(self)
    }

    /// Replaces the merge ranks; `order[k]` receives rank `k + 1`.
    ///
    /// `order` must list every internal node once with children before
    /// parents.
    pub(crate) fn with_rank_order(mut self, order: Vec<NodeId>) -> Hierarchy {
        debug_assert_eq!(order.len(), self.by_rank.len());
        for (k, &id) in order.iter().enumerate() {
            self.nodes[id.index()].merge_rank = k as u32 + 1;
        }
        debug_assert!(self.ranks_are_topological());
        self.by_rank = order;
        self
    }

    /// [`with_rank_order`](Self::with_rank_order) for untrusted orders.
    pub(crate) fn with_rank_order_checked(mut self, order: Vec<NodeId>) -> Option<Hierarchy> {
        for (k, &id) in order.iter().enumerate() {
            self.nodes[id.index()].merge_rank = k as u32 + 1;
        }
        self.by_rank = order;
        self.ranks_are_topological().then_some(self)
    }

    fn ranks_are_topological(&self) -> bool {
        self.internal_nodes().all(|id| {
            let node = self.node(id);
            node.children.unwrap().iter().all(|c| {
                let child = self.node(*c);
                child.is_leaf() || child.merge_rank < node.merge_rank
            })
        })
    }

    /// Number of leaves (pixels).
    pub fn len(&self) -> usize {
        self.leaf_pixels.len()
    }

    /// Always false: a hierarchy has at least one leaf.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn channels(&self) -> usize {
        usize::from(self.channels)
    }

    pub fn grid(&self) -> Option<Grid> {
        self.grid
    }

    pub fn root(&self) -> NodeId {
        NodeId(self.nodes.len() as u32 - 1)
    }

    pub fn node(&self, id: NodeId) -> &HierarchyNode {
        &self.nodes[id.index()]
    }

    pub fn get(&self, id: NodeId) -> Option<&HierarchyNode> {
        self.nodes.get(id.index())
    }

    pub fn nodes(&self) -> &[HierarchyNode] {
        &self.nodes
    }

    /// Pixel index of each leaf, in leaf id order.
    pub fn leaf_pixels(&self) -> &[u32] {
        &self.leaf_pixels
    }

    /// Ids of the internal nodes, ascending.
    pub fn internal_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (self.len() as u32..self.nodes.len() as u32).map(NodeId)
    }

    /// Internal nodes in merge order.
    pub fn merge_order(&self) -> &[NodeId] {
        &self.by_rank
    }

    /// Error of the single-cluster approximation.
    pub fn root_error(&self) -> f64 {
        self.node(self.root()).stats.error()
    }

    /// Absolute tolerance `relative * E_1`.
    pub fn epsilon(&self, relative: f64) -> f64 {
        relative * self.root_error()
    }

    /// Leaf ids below `id`, in depth-first order.
    pub fn leaves_under(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(top) = stack.pop() {
            match self.node(top).children {
                None => out.push(top),
                Some([a, b]) => {
                    stack.push(b);
                    stack.push(a);
                }
            }
        }
        out
    }

    /// Splits an internal node into its two children.
    ///
    /// Returns the children and the (non-positive) change of the total error,
    /// which is the negated merge cost of the node. The hierarchy is not
    /// modified: dividing is the reverse of a merge that stays recorded.
    pub fn divide(&self, id: NodeId) -> Result<(NodeId, NodeId, f64)> {
        let node = self.get(id).ok_or(Error::UnknownNode(id))?;
        match node.children {
            None => Err(Error::LeafNode(id)),
            Some([a, b]) => Ok((a, b, -node.merge_cost)),
        }
    }

    /// The approximation with `g` clusters: the state after the first
    /// `N - g` merges in rank order.
    pub fn cut_at(&self, g: usize) -> Result<Partition> {
        let n = self.len();
        if g == 0 || g > n {
            return Err(Error::LevelOutOfRange { g, n });
        }
        let limit = (n - g) as u32;
        let formed = |node: &HierarchyNode| node.is_leaf() || node.merge_rank <= limit;
        // parents have larger ids, so a descending sweep sees them first
        let mut owner = vec![NodeId(0); self.nodes.len()];
        let mut clusters = Vec::with_capacity(g);
        for i in (0..self.nodes.len()).rev() {
            let node = &self.nodes[i];
            if !formed(node) {
                continue;
            }
            match node.parent {
                Some(p) if formed(&self.nodes[p.index()]) => owner[i] = owner[p.index()],
                _ => {
                    owner[i] = NodeId(i as u32);
                    clusters.push((NodeId(i as u32), node.stats));
                }
            }
        }
        clusters.reverse();
        let labels = owner[..n].to_vec();
        Ok(Partition::new(labels, clusters))
    }

    /// Total error of every approximation, `errors[g - 1] = E_g`.
    pub(crate) fn errors(&self) -> Vec<f64> {
        let n = self.len();
        let mut errors = vec![0.0; n];
        for g in (1..n).rev() {
            // going from g + 1 clusters to g applies the merge ranked N - g
            let id = self.by_rank[n - g - 1];
            errors[g - 1] = errors[g] + self.node(id).merge_cost;
        }
        errors
    }

    /// Error curve rows for `g = 1..=g_max`.
    pub fn error_curve(&self, g_max: usize) -> Result<ErrorCurve> {
        let n = self.len();
        if g_max == 0 || g_max > n {
            return Err(Error::LevelOutOfRange { g: g_max, n });
        }
        let errors = self.errors();
        ErrorCurve::from_errors(&errors[..g_max], n as u64, self.channels())
    }

    /// Internal nodes whose merge cost exceeds their parent's by more than
    /// `epsilon`.
    ///
    /// A hierarchy is convex when dividing any node never releases more
    /// error than dividing its parent; each reported node is a child that
    /// breaks this.
    pub fn convexity_violations(&self, epsilon: f64) -> Vec<NodeId> {
        self.internal_nodes()
            .filter(|&id| match self.node(id).parent {
                Some(p) => self.node(id).merge_cost > self.node(p).merge_cost + epsilon,
                None => false,
            })
            .collect()
    }

    /// Returns whether the hierarchy is convex within `epsilon`, together
    /// with the violating nodes.
    pub fn is_convex(&self, epsilon: f64) -> (bool, Vec<NodeId>) {
        let v = self.convexity_violations(epsilon);
        (v.is_empty(), v)
    }

    /// Re-ranks the merges of a convex hierarchy by ascending cost, with the
    /// default tolerance.
    pub fn canonicalize(&self) -> Result<Hierarchy> {
        self.canonicalize_with(self.epsilon(DEFAULT_RELATIVE_EPSILON))
    }

    /// Re-ranks the merges of a convex hierarchy by ascending cost. Equal
    /// costs are ordered by node id. A node whose cost undercuts a child's
    /// within `epsilon` still ranks after that child.
    pub fn canonicalize_with(&self, epsilon: f64) -> Result<Hierarchy> {
        let violations = self.convexity_violations(epsilon);
        if !violations.is_empty() {
            return Err(Error::NotConvex(violations));
        }
        let keys = self.monotone_keys();
        let mut order: Vec<NodeId> = self.internal_nodes().collect();
        order.sort_by(|a, b| {
            keys[a.index()]
                .total_cmp(&keys[b.index()])
                .then(a.cmp(b))
        });
        Ok(self.clone().with_rank_order(order))
    }

    /// Merge cost raised to the maximum over the node's subtree.
    fn monotone_keys(&self) -> Vec<f64> {
        let mut keys = vec![f64::NEG_INFINITY; self.nodes.len()];
        for id in self.internal_nodes() {
            let node = self.node(id);
            let [a, b] = node.children.unwrap();
            keys[id.index()] = node
                .merge_cost
                .max(keys[a.index()])
                .max(keys[b.index()]);
        }
        keys
    }
}

/// A partition of the leaves into clusters, each cluster being a node of the
/// hierarchy it was cut from.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    labels: Vec<NodeId>,
    clusters: Vec<(NodeId, ClusterStats)>,
    total_error: f64,
}

impl Partition {
    pub(crate) fn new(labels: Vec<NodeId>, mut clusters: Vec<(NodeId, ClusterStats)>) -> Partition {
        clusters.sort_by_key(|c| c.0);
        let total_error = clusters.iter().map(|(_, s)| s.error()).sum();
        Partition {
            labels,
            clusters,
            total_error,
        }
    }

    /// Owning cluster of each leaf. For hierarchies built from an image the
    /// leaf index is the row-major pixel index.
    pub fn labels(&self) -> &[NodeId] {
        &self.labels
    }

    /// Clusters with their statistics, ascending by id.
    pub fn clusters(&self) -> &[(NodeId, ClusterStats)] {
        &self.clusters
    }

    pub fn stats_of(&self, id: NodeId) -> Option<&ClusterStats> {
        self.clusters
            .binary_search_by_key(&id, |c| c.0)
            .ok()
            .map(|i| &self.clusters[i].1)
    }

    /// Number of clusters.
    pub fn g(&self) -> usize {
        self.clusters.len()
    }

    pub fn total_error(&self) -> f64 {
        self.total_error
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub g: usize,
    pub error: f64,
    pub sigma: f64,
}

/// Approximation error as a function of the cluster count.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorCurve {
    rows: Vec<CurveRow>,
}

impl ErrorCurve {
    /// Curve from `errors[g - 1] = E_g` for an image of `n` pixels.
    pub fn from_errors(errors: &[f64], n: u64, channels: usize) -> Result<ErrorCurve> {
        let rows = errors
            .iter()
            .enumerate()
            .map(|(i, &error)| {
                Ok(CurveRow {
                    g: i + 1,
                    error,
                    sigma: sigma_from_error(error, n, channels)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ErrorCurve { rows })
    }

    pub fn from_rows(rows: Vec<CurveRow>) -> ErrorCurve {
        ErrorCurve { rows }
    }

    pub fn rows(&self) -> &[CurveRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Interior points where `2 E_g > E_{g-1} + E_{g+1} + tolerance`.
    pub fn convexity_defects(&self, tolerance: f64) -> Vec<usize> {
        self.rows
            .windows(3)
            .filter(|w| 2.0 * w[1].error > w[0].error + w[2].error + tolerance)
            .map(|w| w[1].g)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(values: &[u8]) -> Vec<ClusterStats> {
        values
            .iter()
            .map(|&v| ClusterStats::from_pixel(&[v]).unwrap())
            .collect()
    }

    fn three_leaf() -> Hierarchy {
        Hierarchy::build_from_merges(
            gray(&[0, 1, 5]),
            &[(NodeId(0), NodeId(1)), (NodeId(3), NodeId(2))],
        )
        .unwrap()
    }

    #[test]
    fn single_leaf() {
        let h = Hierarchy::build_from_merges(gray(&[9]), &[]).unwrap();
        assert_eq!(h.root(), NodeId(0));
        assert_eq!(h.len(), 1);
        assert!(matches!(h.divide(NodeId(0)), Err(Error::LeafNode(_))));
        assert_eq!(h.cut_at(1).unwrap().total_error(), 0.0);
    }

    #[test]
    fn two_leaves() {
        let leaves = vec![
            ClusterStats::from_pixel(&[0, 0, 0]).unwrap(),
            ClusterStats::from_pixel(&[2, 2, 2]).unwrap(),
        ];
        let h = Hierarchy::build_from_merges(leaves, &[(NodeId(0), NodeId(1))]).unwrap();
        assert_eq!(h.node(h.root()).merge_cost(), 6.0);
        assert_eq!(h.divide(h.root()).unwrap(), (NodeId(0), NodeId(1), -6.0));
    }

    #[test]
    fn three_leaf_costs_and_cuts() {
        let h = three_leaf();
        assert_eq!(h.node(NodeId(3)).merge_cost(), 0.5);
        assert!((h.node(NodeId(4)).merge_cost() - 13.5).abs() < 1e-12);

        let p2 = h.cut_at(2).unwrap();
        assert_eq!(p2.labels(), &[NodeId(3), NodeId(3), NodeId(2)]);
        assert_eq!(p2.total_error(), 0.5);

        let p1 = h.cut_at(1).unwrap();
        assert_eq!(p1.g(), 1);
        assert_eq!(p1.total_error(), h.root_error());
        assert_eq!(h.cut_at(3).unwrap().total_error(), 0.0);
        assert!(matches!(h.cut_at(0), Err(Error::LevelOutOfRange { .. })));
        assert!(matches!(h.cut_at(4), Err(Error::LevelOutOfRange { .. })));

        let curve = h.error_curve(3).unwrap();
        let e: Vec<f64> = curve.rows().iter().map(|r| r.error).collect();
        assert!((e[0] - 14.0).abs() < 1e-12);
        assert_eq!(&e[1..], &[0.5, 0.0]);
        assert!((e[0] - h.root_error()).abs() < 1e-12 * h.root_error());
    }

    #[test]
    fn rejects_bad_merge_lists() {
        let err = Hierarchy::build_from_merges(gray(&[0, 1, 5]), &[(NodeId(0), NodeId(1))]);
        assert!(matches!(err, Err(Error::MergeCount { .. })));
        let err = Hierarchy::build_from_merges(
            gray(&[0, 1, 5]),
            &[(NodeId(0), NodeId(1)), (NodeId(0), NodeId(2))],
        );
        assert!(matches!(err, Err(Error::DeadNode { index: 1, .. })));
        let err = Hierarchy::build_from_merges(
            gray(&[0, 1, 5]),
            &[(NodeId(0), NodeId(1)), (NodeId(3), NodeId(9))],
        );
        assert!(matches!(err, Err(Error::DeadNode { .. })));
    }

    #[test]
    fn divide_equal_pixels_releases_nothing() {
        let h = Hierarchy::build_from_merges(gray(&[4, 4]), &[(NodeId(0), NodeId(1))]).unwrap();
        assert_eq!(h.divide(h.root()).unwrap().2, 0.0);
    }

    #[test]
    fn inversion_is_reported_at_the_child() {
        // merging the far pair first: {0,100} costs 5000, adding 1 costs less
        let h = Hierarchy::build_from_merges(
            gray(&[0, 1, 100]),
            &[(NodeId(0), NodeId(2)), (NodeId(3), NodeId(1))],
        )
        .unwrap();
        assert_eq!(h.convexity_violations(0.0), vec![NodeId(3)]);
        assert!(!h.is_convex(0.0).0);
        assert!(matches!(h.canonicalize(), Err(Error::NotConvex(_))));
    }

    #[test]
    fn tiny_hierarchies_are_convex() {
        assert!(three_leaf().is_convex(0.0).0);
        let h = Hierarchy::build_from_merges(gray(&[3, 200]), &[(NodeId(0), NodeId(1))]).unwrap();
        assert!(h.is_convex(0.0).0);
    }

    #[test]
    fn canonicalize_reorders_ranks_by_cost() {
        // 0,1 | 10,11 ; merge the expensive pair first, then the cheap one
        let h = Hierarchy::build_from_merges(
            gray(&[0, 1, 10, 14]),
            &[
                (NodeId(2), NodeId(3)),
                (NodeId(0), NodeId(1)),
                (NodeId(4), NodeId(5)),
            ],
        )
        .unwrap();
        let before: Vec<f64> = h.error_curve(4).unwrap().rows().iter().map(|r| r.error).collect();
        // E_3 = 8 (only {10,14} merged), E_2 = 8.5
        assert_eq!(&before[1..], &[8.5, 8.0, 0.0]);
        assert!(!h.error_curve(4).unwrap().convexity_defects(0.0).is_empty());

        let c = h.canonicalize().unwrap();
        assert_eq!(c.merge_order(), &[NodeId(5), NodeId(4), NodeId(6)]);
        let curve = c.error_curve(4).unwrap();
        assert!(curve.convexity_defects(0.0).is_empty());
        assert_eq!(curve.rows()[2].error, 0.5);
        // topology and stats untouched
        for id in c.internal_nodes() {
            assert_eq!(c.node(id).children(), h.node(id).children());
            assert_eq!(c.node(id).stats(), h.node(id).stats());
        }
        assert_eq!(c.canonicalize().unwrap(), c);
    }

    #[test]
    fn canonicalize_breaks_ties_by_id() {
        let h = Hierarchy::build_from_merges(
            gray(&[10, 11, 0, 1]),
            &[
                (NodeId(2), NodeId(3)),
                (NodeId(0), NodeId(1)),
                (NodeId(4), NodeId(5)),
            ],
        )
        .unwrap();
        let c = h.canonicalize().unwrap();
        assert_eq!(c.merge_order(), &[NodeId(4), NodeId(5), NodeId(6)]);
    }
}
