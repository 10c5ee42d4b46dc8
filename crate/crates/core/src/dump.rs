//! Line-oriented text serialization of hierarchies.
//!
//! ```text
//! # hiermerge hierarchy v1
//! leaves 3 channels 1
//! grid 3 1
//! # id parent left right n mean cost rank pixel sum sumsq
//! 0 3 - - 1 0.000000 0 0 0 0 0
//! 1 3 - - 1 1.000000 0 0 1 1 1
//! 2 4 - - 1 5.000000 0 0 2 5 25
//! 3 4 0 1 2 0.500000 0.5 1 - 1 1
//! 4 - 2 3 3 2.000000 13.5 2 - 6 26
//! ```
//!
//! One record per node in id order. `-` marks an absent parent, child or
//! pixel. Means are per-channel, comma separated, with six decimals; the
//! cost is the shortest decimal that reads back to the same value. The
//! trailing exact sums make the dump lossless. The `grid` line is present
//! only for hierarchies over a full pixel grid.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hierarchy::{Grid, Hierarchy, NodeId};
use crate::stats::ClusterStats;

pub const DUMP_MAGIC: &str = "# hiermerge hierarchy v1";

const COLUMNS: &str = "# id parent left right n mean cost rank pixel sum sumsq";

fn join<T: ToString>(values: impl IntoIterator<Item = T>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn dump_to_string(h: &Hierarchy) -> String {
    let mut out = format!("{DUMP_MAGIC}\nleaves {} channels {}\n", h.len(), h.channels());
    if let Some(g) = h.grid() {
        writeln!(out, "grid {} {}", g.width, g.height).unwrap();
    }
    out.push_str(COLUMNS);
    out.push('\n');
    let opt = |id: Option<NodeId>| id.map_or("-".to_string(), |x| x.0.to_string());
    for (i, node) in h.nodes().iter().enumerate() {
        let s = node.stats();
        let mean = s.mean().expect("nodes are non-empty");
        let [left, right] = match node.children() {
            Some([a, b]) => [Some(a), Some(b)],
            None => [None, None],
        };
        let pixel = if node.is_leaf() {
            h.leaf_pixels()[i].to_string()
        } else {
            "-".into()
        };
        writeln!(
            out,
            "{i} {} {} {} {} {} {} {} {pixel} {} {}",
            opt(node.parent()),
            opt(left),
            opt(right),
            s.n(),
            join(mean.as_slice().iter().map(|m| format!("{m:.6}"))),
            node.merge_cost(),
            node.merge_rank(),
            join(s.sum()),
            s.sumsq(),
        )
        .unwrap();
    }
    out
}

pub fn write_dump(h: &Hierarchy, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, dump_to_string(h)).map_err(|e| Error::io(path, e))
}

pub fn load_dump(path: impl AsRef<Path>) -> Result<Hierarchy> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dump(&text)
}

/// Whether `bytes` start like a hierarchy dump.
pub fn is_dump(bytes: &[u8]) -> bool {
    bytes.starts_with(DUMP_MAGIC.as_bytes())
}

struct Record {
    parent: Option<u32>,
    children: Option<[u32; 2]>,
    n: u64,
    mean: Vec<f64>,
    cost: f64,
    rank: u32,
    pixel: Option<u32>,
    stats: ClusterStats,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| err(line, format!("bad {name} {s:?}")))
}

fn optional(line: usize, name: &str, s: &str) -> Result<Option<u32>> {
    if s == "-" {
        Ok(None)
    } else {
        field(line, name, s).map(Some)
    }
}

fn list<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| field(line, name, x)).collect()
}

/// Parses and validates a dump: the tree structure, ranks, statistics and
/// the derived columns (n, mean, cost) must all agree.
pub fn parse_dump(text: &str) -> Result<Hierarchy> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    match lines.next() {
        Some((_, l)) if l == DUMP_MAGIC => {}
        _ => return Err(err(1, format!("expected {DUMP_MAGIC:?}"))),
    }
    let (ln, header) = lines.next().ok_or_else(|| err(2, "missing leaves line"))?;
    let words: Vec<&str> = header.split_whitespace().collect();
    let ["leaves", n, "channels", c] = words[..] else {
        return Err(err(ln, "expected `leaves N channels C`"));
    };
    let n: usize = field(ln, "leaf count", n)?;
    let channels: usize = field(ln, "channel count", c)?;
    if n == 0 {
        return Err(err(ln, "no leaves"));
    }

    let mut grid = None;
    let mut records = Vec::with_capacity(2 * n - 1);
    for (ln, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f[0] == "grid" {
            let [_, w, h] = f[..] else {
                return Err(err(ln, "expected `grid W H`"));
            };
            if grid.is_some() || !records.is_empty() {
                return Err(err(ln, "misplaced grid line"));
            }
            grid = Some(Grid {
                width: field(ln, "width", w)?,
                height: field(ln, "height", h)?,
            });
            continue;
        }
        let [id, parent, left, right, count, mean, cost, rank, pixel, sum, sumsq] = f[..] else {
            return Err(err(ln, format!("expected 11 fields, found {}", f.len())));
        };
        if field::<usize>(ln, "id", id)? != records.len() {
            return Err(err(ln, format!("expected node {}", records.len())));
        }
        let children = match (optional(ln, "left", left)?, optional(ln, "right", right)?) {
            (Some(a), Some(b)) => Some([a, b]),
            (None, None) => None,
            _ => return Err(err(ln, "a node has zero or two children")),
        };
        let sum: Vec<u64> = list(ln, "sum", sum)?;
        let sumsq = field(ln, "sumsq", sumsq)?;
        let count = field(ln, "n", count)?;
        let stats = ClusterStats::from_parts(count, &sum, sumsq).map_err(|e| err(ln, e.to_string()))?;
        records.push((
            ln,
            Record {
                parent: optional(ln, "parent", parent)?,
                children,
                n: count,
                mean: list(ln, "mean", mean)?,
                cost: field(ln, "cost", cost)?,
                rank: field(ln, "rank", rank)?,
                pixel: optional(ln, "pixel", pixel)?,
                stats,
            },
        ));
    }
    if records.len() != 2 * n - 1 {
        return Err(err(0, format!("expected {} nodes, found {}", 2 * n - 1, records.len())));
    }

    let mut leaf_stats = Vec::with_capacity(n);
    let mut pixels = Vec::with_capacity(n);
    let mut merges = Vec::with_capacity(n - 1);
    let mut order = vec![NodeId(0); n - 1];
    for (i, (ln, r)) in records.iter().enumerate() {
        let ln = *ln;
        if r.stats.channels() != channels {
            return Err(err(ln, "channel count differs from the header"));
        }
        if i < n {
            if r.children.is_some() || r.rank != 0 {
                return Err(err(ln, "the first N nodes must be leaves"));
            }
            leaf_stats.push(r.stats);
            pixels.push(r.pixel.ok_or_else(|| err(ln, "leaf without pixel"))?);
        } else {
            let Some([a, b]) = r.children else {
                return Err(err(ln, "internal node without children"));
            };
            if r.pixel.is_some() {
                return Err(err(ln, "internal node with a pixel"));
            }
            let slot = (r.rank as usize).wrapping_sub(1);
            if slot >= n - 1 || order[slot] != NodeId(0) {
                return Err(err(ln, format!("bad or repeated rank {}", r.rank)));
            }
            order[slot] = NodeId(i as u32);
            merges.push((NodeId(a), NodeId(b)));
        }
    }
    if pixels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(err(0, "leaf pixels must be strictly increasing"));
    }
    if let Some(g) = grid {
        if g.len() != n || pixels.iter().enumerate().any(|(i, &p)| p as usize != i) {
            return Err(err(0, "grid does not match the leaves"));
        }
    }
    let h = Hierarchy::assemble(leaf_stats, pixels, &merges, grid).map_err(|e| err(0, e.to_string()))?;
    let h = h.with_rank_order_checked(order).ok_or_else(|| err(0, "ranks are not topological"))?;

    for (i, (ln, r)) in records.iter().enumerate() {
        let node = h.node(NodeId(i as u32));
        if node.stats() != &r.stats || node.parent().map(|p| p.0) != r.parent || node.stats().n() != r.n {
            return Err(err(*ln, "node disagrees with the tree"));
        }
        let mean = node.stats().mean().expect("non-empty");
        let mean_ok = mean.as_slice().len() == r.mean.len()
            && mean.as_slice().iter().zip(&r.mean).all(|(a, b)| (a - b).abs() <= 1e-6);
        let cost = node.merge_cost();
        if !mean_ok || (cost - r.cost).abs() > 1e-9 * cost.abs().max(1.0) {
            return Err(err(*ln, "mean or cost disagrees with the statistics"));
        }
    }
    Ok(h)
}
