//! Mutable arena of merge trees used while hierarchies are being rebuilt.
//!
//! Nodes are never removed; a crushed node simply stops being referenced.
//! Creation order is topological (children before parents), which the
//! export relies on.

use crate::hierarchy::{Grid, Hierarchy, NodeId};
use crate::stats::ClusterStats;
use crate::ward::ward_merges;

#[derive(Clone, Copy, Debug)]
pub(crate) struct ForestNode {
    pub stats: ClusterStats,
    pub children: Option<[u32; 2]>,
    pub cost: f64,
    /// Pixel index for leaves.
    pub pixel: u32,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct JoinTrace {
    /// Calls to [`Forest::join`].
    pub joins: usize,
    /// Crush iterations summed over all joins.
    pub crushes: usize,
    /// Largest number of crush iterations within one join.
    pub max_crushes: usize,
}

pub(crate) struct Forest {
    nodes: Vec<ForestNode>,
    epsilon: f64,
    pub trace: JoinTrace,
}

impl Forest {
    /// A forest of single-pixel trees, `leaves[i] = (pixel, stats)`.
    pub fn with_leaves(leaves: impl IntoIterator<Item = (u32, ClusterStats)>, epsilon: f64) -> Self {
        let nodes = leaves
            .into_iter()
            .map(|(pixel, stats)| ForestNode {
                stats,
                children: None,
                cost: 0.0,
                pixel,
            })
            .collect();
        Forest {
            nodes,
            epsilon,
            trace: JoinTrace::default(),
        }
    }

    pub fn node(&self, id: u32) -> &ForestNode {
        &self.nodes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    fn push(&mut self, a: u32, b: u32, cost: f64) -> u32 {
        let stats = self.nodes[a as usize]
            .stats
            .merge(&self.nodes[b as usize].stats)
            .expect("forest holds a single channel count");
        self.nodes.push(ForestNode {
            stats,
            children: Some([a, b]),
            cost,
            pixel: u32::MAX,
        });
        self.nodes.len() as u32 - 1
    }

    /// Plain merge of two roots, no restructuring.
    pub fn merge_plain(&mut self, a: u32, b: u32) -> u32 {
        let cost = self.nodes[a as usize]
            .stats
            .merge_increment_unchecked(&self.nodes[b as usize].stats);
        self.push(a, b, cost)
    }

    /// Joins convex trees into one convex tree.
    ///
    /// Ward's method builds an upper structure over the current frontier.
    /// Every frontier root whose own merge cost exceeds the cost of the Ward
    /// merge that consumes it (beyond the tolerance) is divided into its two
    /// children, and Ward is rerun over the refined frontier. The loop stops
    /// once no frontier root is violated; each pass divides at least one
    /// input node, so it runs at most once per input node.
    pub fn join(&mut self, roots: Vec<u32>) -> u32 {
        assert!(!roots.is_empty());
        let mut frontier = roots;
        let mut crushes = 0;
        loop {
            let items: Vec<ClusterStats> =
                frontier.iter().map(|&r| self.nodes[r as usize].stats).collect();
            let merges = ward_merges(&items);
            let f = frontier.len();
            let mut consumed_at = vec![f64::INFINITY; f];
            for m in &merges {
                for x in [m.a, m.b] {
                    if (x as usize) < f {
                        consumed_at[x as usize] = m.cost;
                    }
                }
            }
            let violated = |i: usize| {
                let node = &self.nodes[frontier[i] as usize];
                node.children.is_some() && node.cost > consumed_at[i] + self.epsilon
            };
            if (0..f).any(violated) {
                crushes += 1;
                let mut next = Vec::with_capacity(f + 2);
                for i in 0..f {
                    match self.nodes[frontier[i] as usize].children {
                        Some([a, b]) if violated(i) => next.extend([a, b]),
                        _ => next.push(frontier[i]),
                    }
                }
                frontier = next;
                continue;
            }

            self.trace.joins += 1;
            self.trace.crushes += crushes;
            self.trace.max_crushes = self.trace.max_crushes.max(crushes);
            let mut ids = frontier;
            for m in merges {
                let id = self.push(ids[m.a as usize], ids[m.b as usize], m.cost);
                ids.push(id);
            }
            return *ids.last().unwrap();
        }
    }

    /// Rebuilds `h` inside the forest, restructuring it bottom-up with
    /// [`join`](Self::join). `leaf_ids[i]` is the forest id of `h`'s leaf
    /// `i`. Returns the forest root.
    pub fn import_restructured(&mut self, h: &Hierarchy, leaf_ids: &[u32]) -> u32 {
        self.import_restructured_until(h, leaf_ids, h.len() - 1)
            .pop()
            .expect("one root remains")
    }

    /// Replays the first `merges` merges of `h` (in rank order) through
    /// [`join`](Self::join) and returns the roots of the resulting trees,
    /// ordered by the id of the `h` node each tree stands for.
    pub fn import_restructured_until(&mut self, h: &Hierarchy, leaf_ids: &[u32], merges: usize) -> Vec<u32> {
        let mut root_of = vec![u32::MAX; h.nodes().len()];
        root_of[..h.len()].copy_from_slice(leaf_ids);
        for &id in &h.merge_order()[..merges] {
            let [a, b] = h.node(id).children().unwrap();
            root_of[id.index()] = self.join(vec![root_of[a.index()], root_of[b.index()]]);
        }
        let limit = merges as u32;
        h.nodes()
            .iter()
            .enumerate()
            .filter(|(_, node)| {
                (node.is_leaf() || node.merge_rank() <= limit)
                    && node
                        .parent()
                        .is_none_or(|p| h.node(p).merge_rank() > limit)
            })
            .map(|(i, _)| root_of[i])
            .collect()
    }

    /// Internal nodes of the tree under `root`, in creation order.
    fn internal_under(&self, root: u32) -> (Vec<u32>, Vec<u32>) {
        let mut leaves = Vec::new();
        let mut internal = Vec::new();
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            match self.nodes[x as usize].children {
                None => leaves.push(x),
                Some([a, b]) => {
                    internal.push(x);
                    stack.extend([a, b]);
                }
            }
        }
        internal.sort_unstable();
        (leaves, internal)
    }

    /// Freezes the tree under `root` into a [`Hierarchy`] whose merge ranks
    /// follow ascending cost (raised to the subtree maximum so the order
    /// stays topological), ties by creation order.
    pub fn export(&self, root: u32, grid: Option<Grid>) -> Hierarchy {
        self.export_tiered(root, grid, |_| 0)
    }

    /// Like [`export`](Self::export), but every node of a lower tier ranks
    /// before any node of a higher tier. Tiers must not decrease from child
    /// to parent.
    pub fn export_tiered(
        &self,
        root: u32,
        grid: Option<Grid>,
        tier: impl Fn(u32) -> u8,
    ) -> Hierarchy {
        let (mut leaves, internal) = self.internal_under(root);
        leaves.sort_unstable_by_key(|&x| self.nodes[x as usize].pixel);
        let n = leaves.len();

        let mut key = std::collections::HashMap::with_capacity(internal.len());
        for &x in &internal {
            let node = &self.nodes[x as usize];
            let [a, b] = node.children.unwrap();
            let k = [a, b]
                .iter()
                .filter_map(|c| key.get(c).copied())
                .fold(node.cost, f64::max);
            key.insert(x, k);
        }
        let mut order = internal;
        order.sort_by(|x, y| {
            tier(*x)
                .cmp(&tier(*y))
                .then(key[x].total_cmp(&key[y]))
                .then(x.cmp(y))
        });

        let mut new_id = std::collections::HashMap::with_capacity(2 * n);
        for (i, &x) in leaves.iter().enumerate() {
            new_id.insert(x, NodeId(i as u32));
        }
        let mut merges = Vec::with_capacity(order.len());
        for (k, &x) in order.iter().enumerate() {
            let [a, b] = self.nodes[x as usize].children.unwrap();
            merges.push((new_id[&a], new_id[&b]));
            new_id.insert(x, NodeId((n + k) as u32));
        }
        let leaf_stats = leaves.iter().map(|&x| self.nodes[x as usize].stats).collect();
        let pixels = leaves.iter().map(|&x| self.nodes[x as usize].pixel).collect();
        Hierarchy::assemble(leaf_stats, pixels, &merges, grid)
            .expect("forest trees are valid full binary trees")
    }
}
