//! Improvement of a partition with a fixed number of clusters.
//!
//! A partition into `g` clusters is stable when no merge of two clusters is
//! cheaper than the largest error drop obtainable by dividing one cluster
//! along its stored dichotomy:
//!
//! ```text
//! min ΔE_merge  >=  max |ΔE_divide|
//! ```
//!
//! While that fails, the cluster with the largest drop is divided and the
//! cheapest pair among the resulting `g + 1` clusters is merged again, with
//! restructuring, so every cluster keeps a convex internal hierarchy. Each
//! round lowers the total error by the difference between the drop and the
//! merge increment.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::hierarchy::{Grid, Hierarchy, NodeId, Partition, DEFAULT_RELATIVE_EPSILON};
use crate::stats::ClusterStats;
use crate::ward::ward_merges;

/// Which cluster pairs may be merged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeMode {
    /// Any two clusters.
    Clustering,
    /// Only clusters containing 4-adjacent pixels of the grid.
    Segmentation(Grid),
}

/// The cluster whose stored division releases the most error, and that
/// amount. Leaves release nothing; ties go to the smallest id.
pub fn best_split(p: &Partition, h: &Hierarchy) -> (NodeId, f64) {
    let mut best = (p.clusters()[0].0, f64::NEG_INFINITY);
    for &(id, _) in p.clusters() {
        let drop = h.node(id).merge_cost();
        if drop > best.1 {
            best = (id, drop);
        }
    }
    best
}

/// Cheapest admissible merge among the clusters of `p`, ties to the
/// smallest `(min id, max id)`.
pub fn best_merge(p: &Partition, mode: MergeMode) -> Result<((NodeId, NodeId), f64)> {
    if p.g() < 2 {
        return Err(Error::TooFewClusters(p.g()));
    }
    let clusters = p.clusters();
    let mut best = ((clusters[0].0, clusters[1].0), f64::INFINITY);
    match mode {
        MergeMode::Clustering => {
            for (i, (a, sa)) in clusters.iter().enumerate() {
                for (b, sb) in &clusters[i + 1..] {
                    let c = sa.merge_increment_unchecked(sb);
                    if c < best.1 {
                        best = ((*a, *b), c);
                    }
                }
            }
        }
        MergeMode::Segmentation(grid) => {
            if p.labels().len() != grid.len() {
                return Err(Error::LabelMismatch {
                    labels: p.labels().len(),
                    pixels: grid.len(),
                });
            }
            for (a, b) in adjacent_label_pairs(grid, p.labels()) {
                let (sa, sb) = (p.stats_of(a).unwrap(), p.stats_of(b).unwrap());
                let c = sa.merge_increment_unchecked(sb);
                if c < best.1 {
                    best = ((a, b), c);
                }
            }
        }
    }
    Ok(best)
}

fn adjacent_label_pairs<T: Copy + Ord>(grid: Grid, labels: &[T]) -> BTreeSet<(T, T)> {
    let mut pairs = BTreeSet::new();
    grid.for_each_edge(|x, y| {
        let (a, b) = (labels[x], labels[y]);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    });
    pairs
}

/// Result of [`asi_improve`].
#[derive(Clone, Debug)]
pub struct AsiOutcome {
    /// Cluster subtrees followed by a Ward hierarchy over the clusters;
    /// cutting it at `g` yields [`partition`](Self::partition).
    pub hierarchy: Hierarchy,
    pub partition: Partition,
    /// Total error before the first round and after each round.
    pub errors: Vec<f64>,
    /// Whether the stability criterion holds at exit.
    pub criterion_met: bool,
    /// Smallest admissible merge increment at exit (infinite for `g = 1`).
    pub min_merge: f64,
    /// Largest division drop at exit.
    pub max_drop: f64,
}

impl AsiOutcome {
    pub fn rounds(&self) -> usize {
        self.errors.len() - 1
    }
}

/// Improves the `g`-cluster cut of `h` with the default tolerance.
pub fn asi_improve(h: &Hierarchy, g: usize, mode: MergeMode) -> Result<AsiOutcome> {
    asi_improve_with(h, g, mode, DEFAULT_RELATIVE_EPSILON)
}

struct State {
    forest: Forest,
    clusters: Vec<u32>,
    /// Owning cluster of each leaf.
    owner: Vec<u32>,
    mode: MergeMode,
}

impl State {
    fn stats(&self, c: u32) -> &ClusterStats {
        &self.forest.node(c).stats
    }

    fn drop_of(&self, c: u32) -> f64 {
        let node = self.forest.node(c);
        if node.children.is_some() {
            node.cost
        } else {
            0.0
        }
    }

    fn relabel(&mut self, c: u32) {
        let mut stack = vec![c];
        while let Some(x) = stack.pop() {
            match self.forest.node(x).children {
                None => self.owner[x as usize] = c,
                Some([a, b]) => stack.extend([a, b]),
            }
        }
    }

    /// Admissible pairs among the current clusters with their increments;
    /// `extra` is a pair that is admissible regardless of adjacency.
    fn pairs(&self, extra: Option<(u32, u32)>) -> Vec<((u32, u32), f64)> {
        let cost = |a: u32, b: u32| {
            let (a, b) = (a.min(b), a.max(b));
            ((a, b), self.stats(a).merge_increment_unchecked(self.stats(b)))
        };
        match self.mode {
            MergeMode::Clustering => {
                let mut out = Vec::new();
                for (i, &a) in self.clusters.iter().enumerate() {
                    for &b in &self.clusters[i + 1..] {
                        out.push(cost(a, b));
                    }
                }
                out
            }
            MergeMode::Segmentation(grid) => {
                let mut set = adjacent_label_pairs(grid, &self.owner);
                if let Some((a, b)) = extra {
                    set.insert((a.min(b), a.max(b)));
                }
                set.into_iter().map(|(a, b)| cost(a, b)).collect()
            }
        }
    }

    /// Cheapest admissible pair, ties to the smallest ids.
    fn cheapest_pair(&self, extra: Option<(u32, u32)>) -> Option<((u32, u32), f64)> {
        self.pairs(extra)
            .into_iter()
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
    }

    /// Largest division drop, ties to the smallest id.
    fn largest_drop(&self) -> (u32, f64) {
        let mut best = (self.clusters[0], self.drop_of(self.clusters[0]));
        for &c in &self.clusters[1..] {
            let d = self.drop_of(c);
            if d > best.1 || (d == best.1 && c < best.0) {
                best = (c, d);
            }
        }
        best
    }

    fn replace(&mut self, old: &[u32], new: &[u32]) {
        self.clusters.retain(|c| !old.contains(c));
        self.clusters.extend_from_slice(new);
        self.clusters.sort_unstable();
        for &c in new {
            self.relabel(c);
        }
    }

    /// Divides the largest-drop cluster (or, failing that, another one) and
    /// merges the cheapest pair, if that lowers the error by more than `eps`.
    fn split_then_merge(&mut self, min_merge: f64, eps: f64) -> bool {
        let mut candidates: Vec<u32> = self
            .clusters
            .iter()
            .copied()
            .filter(|&c| self.drop_of(c) > min_merge + eps)
            .collect();
        candidates.sort_by(|&a, &b| self.drop_of(b).total_cmp(&self.drop_of(a)).then(a.cmp(&b)));
        for s in candidates {
            let drop = self.drop_of(s);
            let [s1, s2] = self.forest.node(s).children.unwrap();
            self.replace(&[s], &[s1, s2]);
            let ((a, b), inc) = self
                .cheapest_pair(Some((s1, s2)))
                .expect("at least two clusters after a division");
            if drop - inc > eps && (a, b) != (s1.min(s2), s1.max(s2)) {
                let merged = self.forest.join(vec![a, b]);
                self.replace(&[a, b], &[merged]);
                return true;
            }
            self.replace(&[s1, s2], &[s]);
        }
        false
    }

    /// Merges a cheap pair first and then divides the largest-drop cluster,
    /// if that lowers the error by more than `eps`.
    fn merge_then_split(&mut self, max_drop: f64, eps: f64) -> bool {
        let mut pairs: Vec<_> = self
            .pairs(None)
            .into_iter()
            .filter(|p| p.1 < max_drop - eps)
            .collect();
        pairs.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        for ((a, b), inc) in pairs {
            let merged = self.forest.join(vec![a, b]);
            self.replace(&[a, b], &[merged]);
            let (s, drop) = self.largest_drop();
            if drop - inc > eps {
                let [s1, s2] = self.forest.node(s).children.unwrap();
                self.replace(&[s], &[s1, s2]);
                return true;
            }
            self.replace(&[merged], &[a, b]);
        }
        false
    }

    fn total_error(&self) -> f64 {
        self.clusters.iter().map(|&c| self.stats(c).error()).sum()
    }
}

/// [`asi_improve`] with an explicit relative tolerance.
///
/// Each round divides the cluster with the largest drop and merges the
/// cheapest admissible pair of the `g + 1` clusters, provided that lowers
/// the total error by more than the tolerance. If the largest-drop cluster
/// cannot yield such a round, clusters with smaller drops are tried in
/// order, and then the reverse move: merging a cheap pair first and
/// dividing the largest-drop cluster of the `g - 1`. When no move helps, the
/// loop stops and [`criterion_met`](AsiOutcome::criterion_met) reports
/// whether the stability criterion holds.
pub fn asi_improve_with(
    h: &Hierarchy,
    g: usize,
    mode: MergeMode,
    relative_epsilon: f64,
) -> Result<AsiOutcome> {
    let n = h.len();
    if g == 0 || g > n {
        return Err(Error::LevelOutOfRange { g, n });
    }
    if let MergeMode::Segmentation(grid) = mode {
        if h.grid() != Some(grid) {
            return Err(Error::MissingGrid);
        }
    }
    let eps = h.epsilon(relative_epsilon);
    let leaves = (0..n).map(|i| (h.leaf_pixels()[i], *h.node(NodeId(i as u32)).stats()));
    let mut forest = Forest::with_leaves(leaves, eps);
    let ids: Vec<u32> = (0..n as u32).collect();
    let clusters = forest.import_restructured_until(h, &ids, n - g);
    let mut state = State {
        forest,
        clusters,
        owner: vec![0; n],
        mode,
    };
    for c in state.clusters.clone() {
        state.relabel(c);
    }

    let mut errors = vec![state.total_error()];
    let (min_merge, max_drop) = loop {
        let max_drop = state
            .clusters
            .iter()
            .map(|&c| state.drop_of(c))
            .fold(0.0, f64::max);
        let min_merge = state.cheapest_pair(None).map_or(f64::INFINITY, |p| p.1);
        if min_merge >= max_drop - eps {
            break (min_merge, max_drop);
        }

        if state.split_then_merge(min_merge, eps) || state.merge_then_split(max_drop, eps) {
            errors.push(state.total_error());
        } else {
            break (min_merge, max_drop);
        }
    };

    // Ward over the final clusters, never dividing them
    let mark = state.forest.len() as u32;
    let items: Vec<ClusterStats> = state.clusters.iter().map(|&c| *state.stats(c)).collect();
    let mut ids = state.clusters.clone();
    for m in ward_merges(&items) {
        let id = state.forest.merge_plain(ids[m.a as usize], ids[m.b as usize]);
        ids.push(id);
    }
    let root = *ids.last().unwrap();
    let hierarchy = state
        .forest
        .export_tiered(root, h.grid(), |x| u8::from(x >= mark));
    let partition = hierarchy.cut_at(g)?;
    Ok(AsiOutcome {
        hierarchy,
        partition,
        errors,
        criterion_met: min_merge >= max_drop - eps,
        min_merge,
        max_drop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ward_cluster, ImageRaster};

    fn gray(values: &[u8]) -> Vec<ClusterStats> {
        values
            .iter()
            .map(|&v| ClusterStats::from_pixel(&[v]).unwrap())
            .collect()
    }

    /// Pairs {0,10} and {1,11}, then the root.
    fn adversarial() -> Hierarchy {
        Hierarchy::build_from_merges(
            gray(&[0, 1, 10, 11]),
            &[
                (NodeId(0), NodeId(2)),
                (NodeId(1), NodeId(3)),
                (NodeId(4), NodeId(5)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn best_split_examples() {
        let h = ward_cluster(&gray(&[0, 1, 10, 11])).unwrap();
        let leaves = h.cut_at(4).unwrap();
        assert_eq!(best_split(&leaves, &h).1, 0.0);
        let whole = h.cut_at(1).unwrap();
        assert_eq!(best_split(&whole, &h), (h.root(), 100.0));
        let two = h.cut_at(2).unwrap();
        assert_eq!(best_split(&two, &h), (NodeId(4), 0.5));
    }

    #[test]
    fn best_merge_examples() {
        let h = ward_cluster(&gray(&[0, 1, 10, 11])).unwrap();
        let two = h.cut_at(2).unwrap();
        assert_eq!(best_merge(&two, MergeMode::Clustering).unwrap(), ((NodeId(4), NodeId(5)), 100.0));
        let singles = h.cut_at(4).unwrap();
        assert_eq!(
            best_merge(&singles, MergeMode::Clustering).unwrap(),
            ((NodeId(0), NodeId(1)), 0.5)
        );
        assert!(matches!(
            best_merge(&h.cut_at(1).unwrap(), MergeMode::Clustering),
            Err(Error::TooFewClusters(1))
        ));

        let img = ImageRaster::gray(3, 1, vec![5, 0, 1]).unwrap();
        let h = crate::greedy_segment(&img).unwrap();
        let p = h.cut_at(3).unwrap();
        assert_eq!(
            best_merge(&p, MergeMode::Segmentation(img.grid())).unwrap(),
            ((NodeId(1), NodeId(2)), 0.5)
        );
    }

    #[test]
    fn stable_partition_is_kept() {
        let h = ward_cluster(&gray(&[0, 1, 10, 11])).unwrap();
        let out = asi_improve(&h, 2, MergeMode::Clustering).unwrap();
        assert_eq!(out.rounds(), 0);
        assert!(out.criterion_met);
        assert_eq!(out.partition.total_error(), 1.0);
        assert_eq!(out.partition.labels(), h.cut_at(2).unwrap().labels());
    }

    #[test]
    fn adversarial_pairs_reach_the_optimum() {
        let h = adversarial();
        assert_eq!(h.cut_at(2).unwrap().total_error(), 100.0);
        let out = asi_improve(&h, 2, MergeMode::Clustering).unwrap();
        assert!(out.criterion_met);
        assert_eq!(out.partition.total_error(), 1.0);
        assert!(out.errors.windows(2).all(|w| w[1] < w[0]));
        let l = out.partition.labels();
        assert!(l[0] == l[1] && l[2] == l[3] && l[0] != l[2]);
        assert!(out.hierarchy.is_convex(out.hierarchy.epsilon(1e-9)).0);
    }

    #[test]
    fn level_range_is_checked() {
        let h = adversarial();
        assert!(matches!(
            asi_improve(&h, 0, MergeMode::Clustering),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(matches!(
            asi_improve(&h, 5, MergeMode::Clustering),
            Err(Error::LevelOutOfRange { .. })
        ));
        let grid = Grid { width: 2, height: 2 };
        assert!(matches!(
            asi_improve(&h, 2, MergeMode::Segmentation(grid)),
            Err(Error::MissingGrid)
        ));
    }

    #[test]
    fn single_cluster_and_all_singletons() {
        let h = adversarial();
        let one = asi_improve(&h, 1, MergeMode::Clustering).unwrap();
        assert!(one.criterion_met && one.rounds() == 0);
        let all = asi_improve(&h, 4, MergeMode::Clustering).unwrap();
        assert!(all.criterion_met);
        assert_eq!(all.partition.total_error(), 0.0);
    }
}
