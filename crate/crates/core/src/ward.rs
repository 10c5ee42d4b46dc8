//! Unconstrained Ward agglomeration.
//!
//! Every step merges the pair of clusters whose union increases the total
//! squared error the least. Each cluster caches its cheapest partner in a
//! priority queue. Ward's criterion is reducible (merging two clusters never
//! brings the union closer to a third cluster than the nearer of the two
//! parts was), so a cached partner stays exact until the partner itself is
//! merged; only then is it recomputed. This needs `O(n)` memory and
//! typically `O(n^2)` time. Costs come straight from
//! [`ClusterStats::merge_increment`], so no distance-update formula is
//! involved.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, NodeId};
use crate::image::ImageRaster;
use crate::stats::ClusterStats;

/// One step of an agglomeration over `n` items. Items are `0..n`; the
/// cluster created by step `k` is `n + k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct WardMerge {
    /// Smaller node id.
    pub a: u32,
    pub b: u32,
    pub cost: f64,
}

/// Ward merge sequence over `items`, cheapest merge first.
///
/// All items must be non-empty and share a channel count. Among merges of
/// equal cost the one with the smallest `(min id, max id)` goes first.
pub(crate) fn ward_merges(items: &[ClusterStats]) -> Vec<WardMerge> {
    let n = items.len();
    if n < 2 {
        return Vec::new();
    }
    let mut slots = Slots {
        stats: items.to_vec(),
        id: (0..n as u32).collect(),
        alive: vec![true; n],
        live: (0..n).collect(),
    };
    let mut nearest: Vec<Nearest> = vec![Nearest::NONE; n];
    let mut heap = BinaryHeap::with_capacity(2 * n);
    for i in 0..n {
        nearest[i] = slots.nearest(i);
        heap.push(Reverse(nearest[i].entry(&slots, i)));
    }

    let mut out = Vec::with_capacity(n - 1);
    while out.len() + 1 < n {
        let Reverse(top) = heap.pop().expect("a live pair remains");
        let i = top.slot;
        if !slots.alive[i] || slots.id[i] != top.self_id {
            continue;
        }
        let nn = nearest[i];
        if !slots.alive[nn.slot] || slots.id[nn.slot] != nn.id {
            // the cached neighbor was merged away; its value was a lower bound
            nearest[i] = slots.nearest(i);
            heap.push(Reverse(nearest[i].entry(&slots, i)));
            continue;
        }
        let (lo, hi) = (i.min(nn.slot), i.max(nn.slot));
        let (x, y) = (slots.id[lo], slots.id[hi]);
        out.push(WardMerge {
            a: x.min(y),
            b: x.max(y),
            cost: nn.cost,
        });
        slots.stats[lo] = slots.stats[lo]
            .merge(&slots.stats[hi])
            .expect("channels checked by caller");
        slots.id[lo] = (n + out.len() - 1) as u32;
        slots.alive[hi] = false;
        slots.live.retain(|&x| x != hi);
        if slots.live.len() > 1 {
            nearest[lo] = slots.nearest(lo);
            heap.push(Reverse(nearest[lo].entry(&slots, lo)));
        }
    }
    out
}

struct Slots {
    stats: Vec<ClusterStats>,
    /// Node id currently held by each slot.
    id: Vec<u32>,
    alive: Vec<bool>,
    live: Vec<usize>,
}

impl Slots {
    /// Cheapest partner of slot `i`, ties to the smallest node id pair.
    fn nearest(&self, i: usize) -> Nearest {
        let mut best = Nearest::NONE;
        let own = self.id[i];
        for &j in &self.live {
            if j == i {
                continue;
            }
            let cost = self.stats[i].merge_increment_unchecked(&self.stats[j]);
            let id = self.id[j];
            let better = cost < best.cost
                || (cost == best.cost && (own.min(id), own.max(id)) < (own.min(best.id), own.max(best.id)));
            if better {
                best = Nearest { cost, slot: j, id };
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug)]
struct Nearest {
    cost: f64,
    slot: usize,
    id: u32,
}

impl Nearest {
    const NONE: Nearest = Nearest {
        cost: f64::INFINITY,
        slot: usize::MAX,
        id: u32::MAX,
    };

    fn entry(&self, slots: &Slots, slot: usize) -> Entry {
        let own = slots.id[slot];
        Entry {
            cost: self.cost,
            pair: (own.min(self.id), own.max(self.id)),
            slot,
            self_id: own,
        }
    }
}

/// Heap entry ordered by cost, then node id pair.
#[derive(Clone, Copy, Debug)]
struct Entry {
    cost: f64,
    pair: (u32, u32),
    slot: usize,
    self_id: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.pair.cmp(&other.pair))
            .then(self.slot.cmp(&other.slot))
    }
}

fn check_items(items: &[ClusterStats]) -> Result<()> {
    let first = items.first().ok_or(Error::EmptyInput)?;
    for s in items {
        if s.is_empty() {
            return Err(Error::EmptyCluster);
        }
        if s.channels() != first.channels() {
            return Err(Error::ChannelMismatch {
                expected: first.channels() as u8,
                found: s.channels() as u8,
            });
        }
    }
    Ok(())
}

/// Ward hierarchy over arbitrary (possibly multi-pixel) clusters.
///
/// Leaf `i` is `items[i]`. The result is always convex: Ward merge costs
/// never decrease along the merge sequence.
///
/// ```
/// use hiermerge::{ward_cluster, ClusterStats};
///
/// let items = [0u8, 1, 10, 11].map(|v| ClusterStats::from_pixel(&[v]).unwrap());
/// let h = ward_cluster(&items).unwrap();
/// let costs: Vec<f64> = h.merge_order().iter().map(|&id| h.node(id).merge_cost()).collect();
/// assert_eq!(costs, [0.5, 0.5, 100.0]);
/// ```
pub fn ward_cluster(items: &[ClusterStats]) -> Result<Hierarchy> {
    check_items(items)?;
    let merges = to_pairs(&ward_merges(items));
    Hierarchy::build_from_merges(items.to_vec(), &merges)
}

/// Ward hierarchy over the pixels of an image, ignoring adjacency.
pub fn ward_cluster_image(image: &ImageRaster) -> Result<Hierarchy> {
    let leaves = image.pixel_stats();
    let merges = to_pairs(&ward_merges(&leaves));
    Hierarchy::build_on_grid(leaves, image.grid(), &merges)
}

fn to_pairs(merges: &[WardMerge]) -> Vec<(NodeId, NodeId)> {
    merges.iter().map(|m| (NodeId(m.a), NodeId(m.b))).collect()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Textbook greedy Ward: scan every live pair at every step, ties to the
    /// lexicographically smallest id pair.
    fn greedy_ward(items: &[ClusterStats]) -> Vec<(u32, u32, f64)> {
        let n = items.len();
        let mut live: Vec<(u32, ClusterStats)> =
            items.iter().enumerate().map(|(i, s)| (i as u32, *s)).collect();
        let mut out = Vec::new();
        for k in 0..n.saturating_sub(1) {
            let mut best = (f64::INFINITY, (u32::MAX, u32::MAX), 0, 0);
            for i in 0..live.len() {
                for j in i + 1..live.len() {
                    let c = live[i].1.merge_increment(&live[j].1).unwrap();
                    let (x, y) = (live[i].0, live[j].0);
                    let ids = (x.min(y), x.max(y));
                    if c < best.0 || (c == best.0 && ids < best.1) {
                        best = (c, ids, i, j);
                    }
                }
            }
            let (c, _, i, j) = best;
            let (a, b) = (live[i].0, live[j].0);
            let merged = live[i].1.merge(&live[j].1).unwrap();
            live.remove(j);
            live[i] = ((n + k) as u32, merged);
            out.push((a.min(b), a.max(b), c));
        }
        out
    }

    fn random_items(rng: &mut ChaCha8Rng, n: usize, channels: usize) -> Vec<ClusterStats> {
        (0..n)
            .map(|_| {
                let size = rng.gen_range(1..6);
                let mut s = ClusterStats::empty();
                for _ in 0..size {
                    let px: Vec<u8> = (0..channels).map(|_| rng.gen()).collect();
                    s = s.merge(&ClusterStats::from_pixel(&px).unwrap()).unwrap();
                }
                s
            })
            .collect()
    }

    fn gray(values: &[u8]) -> Vec<ClusterStats> {
        values
            .iter()
            .map(|&v| ClusterStats::from_pixel(&[v]).unwrap())
            .collect()
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(ward_cluster(&[]), Err(Error::EmptyInput)));
        let mixed = [
            ClusterStats::from_pixel(&[1]).unwrap(),
            ClusterStats::from_pixel(&[1, 2, 3]).unwrap(),
        ];
        assert!(matches!(ward_cluster(&mixed), Err(Error::ChannelMismatch { .. })));
    }

    #[test]
    fn single_item() {
        let h = ward_cluster(&gray(&[42])).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.root(), NodeId(0));
    }

    #[test]
    fn three_items() {
        // pair costs: {0,1} 1/2, {1,5} 8, {0,5} 25/2
        let h = ward_cluster(&gray(&[0, 1, 5])).unwrap();
        let first = h.merge_order()[0];
        assert_eq!(h.node(first).children(), Some([NodeId(0), NodeId(1)]));
        assert_eq!(h.node(first).merge_cost(), 0.5);
        assert!((h.node(h.root()).merge_cost() - 13.5).abs() < 1e-12);
    }

    #[test]
    fn four_items_on_a_line() {
        let h = ward_cluster(&gray(&[0, 1, 10, 11])).unwrap();
        let order = h.merge_order();
        assert_eq!(h.node(order[0]).children(), Some([NodeId(0), NodeId(1)]));
        assert_eq!(h.node(order[1]).children(), Some([NodeId(2), NodeId(3)]));
        assert_eq!(h.node(order[2]).merge_cost(), 100.0);
    }

    #[test]
    fn matches_greedy_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let channels = if trial % 2 == 0 { 3 } else { 1 };
            let n = rng.gen_range(2..40);
            let items = random_items(&mut rng, n, channels);
            let chain = ward_merges(&items);
            let greedy = greedy_ward(&items);
            assert_eq!(chain.len(), greedy.len());
            for (m, g) in chain.iter().zip(&greedy) {
                assert_eq!((m.a, m.b), (g.0, g.1), "trial {trial}");
                assert!((m.cost - g.2).abs() <= 1e-9 * g.2.max(1.0), "trial {trial}");
            }
        }
    }

    #[test]
    fn heavy_ties_follow_the_id_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..40 {
            let values: Vec<u8> = (0..rng.gen_range(2..50)).map(|_| rng.gen_range(0..4) * 3).collect();
            let items = gray(&values);
            let chain = ward_merges(&items);
            let greedy = greedy_ward(&items);
            for (m, g) in chain.iter().zip(&greedy) {
                assert_eq!((m.a, m.b, m.cost), (g.0, g.1, g.2), "trial {trial}");
            }
        }
    }

    #[test]
    fn output_is_monotone_and_telescopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(1..120);
            let items = random_items(&mut rng, n, 3);
            let h = ward_cluster(&items).unwrap();
            let eps = h.epsilon(1e-9);
            let costs: Vec<f64> = h.merge_order().iter().map(|&id| h.node(id).merge_cost()).collect();
            assert!(costs.windows(2).all(|w| w[0] <= w[1] + eps));
            assert!(h.is_convex(eps).0);
            // merges add exactly the error not already inside the items
            let total: f64 = costs.iter().sum();
            let inside: f64 = items.iter().map(ClusterStats::error).sum();
            let added = h.root_error() - inside;
            assert!((total - added).abs() <= 1e-9 * h.root_error().max(1.0));
            let pooled = items.iter().fold(ClusterStats::empty(), |a, s| a.merge(s).unwrap());
            assert_eq!(h.node(h.root()).stats(), &pooled);
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let items = random_items(&mut rng, 60, 1);
        assert_eq!(ward_cluster(&items).unwrap(), ward_cluster(&items).unwrap());
    }
}
