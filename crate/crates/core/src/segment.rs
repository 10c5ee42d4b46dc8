//! Greedy merging of adjacent segments.
//!
//! Starting from one region per pixel, the two 4-adjacent regions whose
//! union increases the total squared error the least are merged, until a
//! single region remains. This is the piecewise-constant segmentation path:
//! every cluster at every level is a connected pixel set, and the merge
//! costs need not be monotone. [`segment_restructured`] runs the same
//! selection but performs every merge with restructuring, which turns the
//! segmentation into a convex clustering whose clusters may be
//! disconnected.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};

use crate::error::Result;
use crate::hierarchy::{Grid, Hierarchy, NodeId, DEFAULT_RELATIVE_EPSILON};
use crate::image::ImageRaster;
use crate::restructure::{restructure_traced, RestructureStats};
use crate::stats::ClusterStats;

/// Region adjacency graph over live regions, identified by the hierarchy
/// node that currently represents them.
#[derive(Clone, Debug)]
pub struct AdjacencyGraph {
    grid: Grid,
    neighbors: Vec<BTreeSet<NodeId>>,
    alive: Vec<bool>,
    regions: usize,
    edges: usize,
}

impl AdjacencyGraph {
    /// One region per pixel of `grid`, edges between 4-neighbors.
    pub fn from_grid(grid: Grid) -> AdjacencyGraph {
        let n = grid.len();
        let mut neighbors = vec![BTreeSet::new(); n];
        let mut edges = 0;
        grid.for_each_edge(|a, b| {
            neighbors[a].insert(NodeId(b as u32));
            neighbors[b].insert(NodeId(a as u32));
            edges += 1;
        });
        AdjacencyGraph {
            grid,
            neighbors,
            alive: vec![true; n],
            regions: n,
            edges,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn region_count(&self) -> usize {
        self.regions
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn is_region(&self, id: NodeId) -> bool {
        self.alive.get(id.index()).copied().unwrap_or(false)
    }

    pub fn regions(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| NodeId(i as u32))
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors[id.index()].iter().copied()
    }

    pub fn are_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.is_region(a) && self.neighbors[a.index()].contains(&b)
    }

    /// Replaces adjacent regions `u` and `v` by the new region `w`, which
    /// inherits their neighbors.
    pub fn contract(&mut self, u: NodeId, v: NodeId, w: NodeId) {
        debug_assert!(self.are_adjacent(u, v));
        if self.neighbors.len() <= w.index() {
            self.neighbors.resize(w.index() + 1, BTreeSet::new());
            self.alive.resize(w.index() + 1, false);
        }
        let nu = std::mem::take(&mut self.neighbors[u.index()]);
        let nv = std::mem::take(&mut self.neighbors[v.index()]);
        self.edges -= nu.len() + nv.len() - 1;
        let mut merged = BTreeSet::new();
        for x in nu.into_iter().chain(nv) {
            if x == u || x == v {
                continue;
            }
            let set = &mut self.neighbors[x.index()];
            set.remove(&u);
            set.remove(&v);
            set.insert(w);
            merged.insert(x);
        }
        self.edges += merged.len();
        self.neighbors[w.index()] = merged;
        self.alive[u.index()] = false;
        self.alive[v.index()] = false;
        self.alive[w.index()] = true;
        self.regions -= 1;
    }
}

/// Adjacency graph of an image with one region per pixel.
pub fn build_rag(image: &ImageRaster) -> AdjacencyGraph {
    AdjacencyGraph::from_grid(image.grid())
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    cost: f64,
    a: NodeId,
    b: NodeId,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn candidate(stats: &[ClusterStats], x: NodeId, y: NodeId) -> Reverse<Candidate> {
    let (a, b) = (x.min(y), x.max(y));
    Reverse(Candidate {
        cost: stats[a.index()].merge_increment_unchecked(&stats[b.index()]),
        a,
        b,
    })
}

/// Merge sequence of greedy adjacent merging, new regions numbered from `N`.
fn adjacent_merges(leaves: &[ClusterStats], grid: Grid) -> Vec<(NodeId, NodeId)> {
    let n = leaves.len();
    let mut rag = AdjacencyGraph::from_grid(grid);
    let mut stats = leaves.to_vec();
    stats.reserve(n.saturating_sub(1));
    let mut heap = BinaryHeap::with_capacity(2 * rag.edge_count());
    grid.for_each_edge(|a, b| heap.push(candidate(&stats, NodeId(a as u32), NodeId(b as u32))));

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    while let Some(Reverse(c)) = heap.pop() {
        // stale entries refer to regions that were merged since
        if !rag.is_region(c.a) || !rag.is_region(c.b) {
            continue;
        }
        let w = NodeId((n + merges.len()) as u32);
        stats.push(stats[c.a.index()].merge(&stats[c.b.index()]).expect("single channel count"));
        rag.contract(c.a, c.b, w);
        merges.push((c.a, c.b));
        for x in rag.neighbors(w) {
            heap.push(candidate(&stats, w, x));
        }
    }
    merges
}

/// Conventional segmentation: greedy merging of adjacent regions under the
/// minimal-increment criterion. The result is generally not convex.
///
/// ```
/// use hiermerge::{greedy_segment, ImageRaster, NodeId};
///
/// let img = ImageRaster::gray(3, 1, vec![5, 0, 1]).unwrap();
/// let h = greedy_segment(&img).unwrap();
/// let first = h.merge_order()[0];
/// assert_eq!(h.node(first).children(), Some([NodeId(1), NodeId(2)]));
/// assert_eq!(h.node(first).merge_cost(), 0.5);
/// ```
pub fn greedy_segment(image: &ImageRaster) -> Result<Hierarchy> {
    let leaves = image.pixel_stats();
    let merges = adjacent_merges(&leaves, image.grid());
    Hierarchy::build_on_grid(leaves, image.grid(), &merges)
}

/// Segmentation converted to clustering: the merge pairs of
/// [`greedy_segment`], each merge carried out with restructuring so the
/// hierarchy stays convex after every step.
///
/// Pair selection depends only on the regions' pixel sets, which
/// restructuring does not change, so this equals restructuring the
/// conventional hierarchy merge by merge.
pub fn segment_restructured(image: &ImageRaster) -> Result<Hierarchy> {
    segment_restructured_traced(image, DEFAULT_RELATIVE_EPSILON).map(|(h, _)| h)
}

/// [`segment_restructured`] with an explicit relative tolerance, also
/// returning restructuring counters.
pub fn segment_restructured_traced(
    image: &ImageRaster,
    relative_epsilon: f64,
) -> Result<(Hierarchy, RestructureStats)> {
    let conventional = greedy_segment(image)?;
    Ok(restructure_traced(&conventional, relative_epsilon))
}
