//! Conversion of arbitrary hierarchies into convex ones.
//!
//! [`combined_merge`] unites two hierarchies. If the joint tree violates
//! convexity (some node releases more error on division than its parent),
//! the violating nodes are divided, the resulting sub-images are re-merged
//! with Ward's method, and the check repeats until the tree is convex.
//! Sub-hierarchies that already fit are kept intact.
//!
//! [`restructure`] applies the same operation bottom-up to every merge of an
//! existing hierarchy, turning any merge history into a convex one with the
//! same leaves and the same root statistics.

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::hierarchy::{Hierarchy, DEFAULT_RELATIVE_EPSILON};

/// Counters describing how much restructuring a call performed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RestructureStats {
    /// Number of pairwise joins performed.
    pub joins: usize,
    /// Crush-and-re-merge passes summed over all joins.
    pub crush_iterations: usize,
    /// Largest number of passes needed by a single join.
    pub max_iterations_per_join: usize,
}

impl From<&crate::forest::JoinTrace> for RestructureStats {
    fn from(t: &crate::forest::JoinTrace) -> Self {
        RestructureStats {
            joins: t.joins,
            crush_iterations: t.crushes,
            max_iterations_per_join: t.max_crushes,
        }
    }
}

/// Merges two hierarchies over disjoint pixel sets into one convex
/// hierarchy, with the default tolerance.
///
/// ```
/// use hiermerge::{combined_merge, ClusterStats, Hierarchy, NodeId};
///
/// let px = |v: u8| ClusterStats::from_pixel(&[v]).unwrap();
/// // {0, 100} merged first costs 5000; joining pixel 1 afterwards is cheaper
/// let a = Hierarchy::build_from_merges(vec![px(0), px(100)], &[(NodeId(0), NodeId(1))])
///     .unwrap()
///     .with_pixels(vec![0, 2])
///     .unwrap();
/// let b = Hierarchy::build_from_merges(vec![px(1)], &[])
///     .unwrap()
///     .with_pixels(vec![1])
///     .unwrap();
/// let joined = combined_merge(&a, &b).unwrap();
/// let first = joined.merge_order()[0];
/// assert_eq!(joined.node(first).merge_cost(), 0.5); // pixels 0 and 1 now merge first
/// assert!(joined.is_convex(0.0).0);
/// ```
pub fn combined_merge(a: &Hierarchy, b: &Hierarchy) -> Result<Hierarchy> {
    combined_merge_traced(a, b, DEFAULT_RELATIVE_EPSILON).map(|(h, _)| h)
}

/// [`combined_merge`] with an explicit relative tolerance, also returning
/// restructuring counters.
pub fn combined_merge_traced(
    a: &Hierarchy,
    b: &Hierarchy,
    relative_epsilon: f64,
) -> Result<(Hierarchy, RestructureStats)> {
    if a.channels() != b.channels() {
        return Err(Error::ChannelMismatch {
            expected: a.channels() as u8,
            found: b.channels() as u8,
        });
    }
    // merge the sorted pixel lists, remembering where each leaf lands
    let (pa, pb) = (a.leaf_pixels(), b.leaf_pixels());
    let mut leaves = Vec::with_capacity(pa.len() + pb.len());
    let mut ids_a = Vec::with_capacity(pa.len());
    let mut ids_b = Vec::with_capacity(pb.len());
    let (mut i, mut j) = (0, 0);
    while i < pa.len() || j < pb.len() {
        let take_a = j == pb.len() || (i < pa.len() && pa[i] < pb[j]);
        if take_a {
            ids_a.push(leaves.len() as u32);
            leaves.push((pa[i], *a.node(crate::NodeId(i as u32)).stats()));
            i += 1;
        } else {
            if i < pa.len() && pa[i] == pb[j] {
                return Err(Error::OverlappingLeaves(pa[i]));
            }
            ids_b.push(leaves.len() as u32);
            leaves.push((pb[j], *b.node(crate::NodeId(j as u32)).stats()));
            j += 1;
        }
    }
    let joint = a
        .node(a.root())
        .stats()
        .merge(b.node(b.root()).stats())?;
    let epsilon = relative_epsilon * joint.error();

    let mut forest = Forest::with_leaves(leaves, epsilon);
    let ra = forest.import_restructured(a, &ids_a);
    let rb = forest.import_restructured(b, &ids_b);
    let root = forest.join(vec![ra, rb]);
    let grid = if a.grid() == b.grid() { a.grid() } else { None };
    Ok((forest.export(root, grid), RestructureStats::from(&forest.trace)))
}

/// Converts any hierarchy into a convex one over the same leaves, with the
/// default tolerance.
pub fn restructure(h: &Hierarchy) -> Hierarchy {
    restructure_traced(h, DEFAULT_RELATIVE_EPSILON).0
}

/// [`restructure`] with an explicit relative tolerance, also returning
/// restructuring counters.
pub fn restructure_traced(h: &Hierarchy, relative_epsilon: f64) -> (Hierarchy, RestructureStats) {
    let leaves = (0..h.len()).map(|i| (h.leaf_pixels()[i], *h.node(crate::NodeId(i as u32)).stats()));
    let mut forest = Forest::with_leaves(leaves, h.epsilon(relative_epsilon));
    let ids: Vec<u32> = (0..h.len() as u32).collect();
    let root = forest.import_restructured(h, &ids);
    (forest.export(root, h.grid()), RestructureStats::from(&forest.trace))
}
