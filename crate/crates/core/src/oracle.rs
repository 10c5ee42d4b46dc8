//! Exhaustive optimal partitions for tiny inputs.
//!
//! Every set partition of the items is enumerated as a restricted growth
//! string (item 0 in block 0, each later item in an existing block or the
//! next new one), so the cost grows with the Bell numbers and inputs are
//! capped at [`ORACLE_CAPACITY`] items.

use crate::error::{Error, Result};
use crate::hierarchy::{ErrorCurve, Grid};
use crate::image::ImageRaster;
use crate::stats::ClusterStats;

/// Largest number of items the oracle accepts.
pub const ORACLE_CAPACITY: usize = 12;

/// A minimum-error partition into a fixed number of blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalPartition {
    /// Block of each item, numbered in order of first appearance.
    pub assignment: Vec<usize>,
    pub error: f64,
}

impl OptimalPartition {
    pub fn blocks(&self) -> usize {
        self.assignment.iter().max().map_or(0, |&b| b + 1)
    }
}

/// Optimal partition of `items` into exactly `g` blocks. Among equal errors
/// the lexicographically smallest assignment wins.
///
/// ```
/// use hiermerge::{optimal_partition, ClusterStats};
///
/// let items: Vec<_> = [0u8, 1, 10, 11]
///     .iter()
///     .map(|&v| ClusterStats::from_pixel(&[v]).unwrap())
///     .collect();
/// let best = optimal_partition(&items, 2).unwrap();
/// assert_eq!(best.assignment, [0, 0, 1, 1]);
/// assert_eq!(best.error, 1.0);
/// ```
pub fn optimal_partition(items: &[ClusterStats], g: usize) -> Result<OptimalPartition> {
    check_level(items.len(), g)?;
    let mut best = search(items, |_, _| true)?;
    Ok(best.swap_remove(g - 1).expect("every block count is reachable"))
}

/// Optimal partition of the pixels of `image` into exactly `g` 4-connected
/// regions.
pub fn optimal_connected_partition(image: &ImageRaster, g: usize) -> Result<OptimalPartition> {
    check_level(image.len(), g)?;
    let grid = image.grid();
    let mut best = search(&image.pixel_stats(), connected(grid))?;
    Ok(best.swap_remove(g - 1).expect("a connected grid splits into any number of regions"))
}

/// Optimal errors `E_opt(g)` for `g = 1..=g_max`.
pub fn optimal_curve(items: &[ClusterStats], g_max: usize) -> Result<ErrorCurve> {
    check_level(items.len(), g_max)?;
    let best = search(items, |_, _| true)?;
    curve(&best[..g_max], items)
}

/// Optimal errors over 4-connected partitions for `g = 1..=g_max`.
pub fn optimal_connected_curve(image: &ImageRaster, g_max: usize) -> Result<ErrorCurve> {
    check_level(image.len(), g_max)?;
    let items = image.pixel_stats();
    let best = search(&items, connected(image.grid()))?;
    curve(&best[..g_max], &items)
}

fn curve(best: &[Option<OptimalPartition>], items: &[ClusterStats]) -> Result<ErrorCurve> {
    let errors: Vec<f64> = best.iter().map(|b| b.as_ref().unwrap().error).collect();
    let n = items.iter().map(ClusterStats::n).sum();
    ErrorCurve::from_errors(&errors, n, items[0].channels())
}

fn check_level(n: usize, g: usize) -> Result<()> {
    if n > ORACLE_CAPACITY {
        return Err(Error::CapacityExceeded {
            n,
            max: ORACLE_CAPACITY,
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if g == 0 || g > n {
        return Err(Error::LevelOutOfRange { g, n });
    }
    Ok(())
}

/// Accepts an assignment whose blocks are all 4-connected in `grid`.
fn connected(grid: Grid) -> impl Fn(&[usize], usize) -> bool {
    move |assignment, blocks| {
        let mut masks = vec![0u32; blocks];
        for (i, &b) in assignment.iter().enumerate() {
            masks[b] |= 1 << i;
        }
        masks.iter().all(|&m| is_connected(grid, m))
    }
}

fn is_connected(grid: Grid, mask: u32) -> bool {
    let start = mask & mask.wrapping_neg();
    let mut reached = start;
    let mut frontier = start;
    while frontier != 0 {
        let i = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let (x, y) = (i % grid.width, i / grid.width);
        let mut visit = |j: usize| {
            let bit = 1u32 << j;
            if mask & bit != 0 && reached & bit == 0 {
                reached |= bit;
                frontier |= bit;
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < grid.width {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - grid.width);
        }
        if y + 1 < grid.height {
            visit(i + grid.width);
        }
    }
    reached == mask
}

/// Best accepted partition for each block count, `result[k - 1]`.
fn search(
    items: &[ClusterStats],
    accept: impl Fn(&[usize], usize) -> bool,
) -> Result<Vec<Option<OptimalPartition>>> {
    let n = items.len();
    if n > ORACLE_CAPACITY {
        return Err(Error::CapacityExceeded {
            n,
            max: ORACLE_CAPACITY,
        });
    }
    for s in items {
        if s.channels() != items[0].channels() {
            return Err(Error::ChannelMismatch {
                expected: items[0].channels() as u8,
                found: s.channels() as u8,
            });
        }
    }
    let mut walk = Walk {
        items,
        accept,
        assignment: vec![0; n],
        blocks: Vec::with_capacity(n),
        best: vec![None; n],
    };
    if n > 0 {
        walk.place(0);
    }
    Ok(walk.best)
}

struct Walk<'a, F> {
    items: &'a [ClusterStats],
    accept: F,
    assignment: Vec<usize>,
    blocks: Vec<ClusterStats>,
    best: Vec<Option<OptimalPartition>>,
}

impl<F: Fn(&[usize], usize) -> bool> Walk<'_, F> {
    fn place(&mut self, i: usize) {
        if i == self.items.len() {
            self.record();
            return;
        }
        let item = self.items[i];
        for b in 0..self.blocks.len() {
            let saved = self.blocks[b];
            self.blocks[b] = saved.merge(&item).expect("channels checked");
            self.assignment[i] = b;
            self.place(i + 1);
            self.blocks[b] = saved;
        }
        self.blocks.push(item);
        self.assignment[i] = self.blocks.len() - 1;
        self.place(i + 1);
        self.blocks.pop();
    }

    fn record(&mut self) {
        let k = self.blocks.len();
        let error: f64 = self.blocks.iter().map(ClusterStats::error).sum();
        // enumeration runs in lexicographic order, so only strictly better replaces
        let better = self.best[k - 1].as_ref().is_none_or(|b| error < b.error);
        if better && (self.accept)(&self.assignment, k) {
            self.best[k - 1] = Some(OptimalPartition {
                assignment: self.assignment.clone(),
                error,
            });
        }
    }
}
