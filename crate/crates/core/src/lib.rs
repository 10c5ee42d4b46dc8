//! Hierarchical piecewise-constant image approximation.
//!
//! An image of `N` pixels is approximated by partitions into `g` clusters,
//! each pixel replaced by its cluster mean. A binary merge tree stores the
//! whole family `g = 1..N` in linear memory; cutting it at any level yields
//! that approximation, and the total squared error `E_g` traces the error
//! curve.
//!
//! The crate builds such trees three ways: Ward clustering
//! ([`ward_cluster`]), greedy merging of adjacent segments
//! ([`greedy_segment`]) and segmentation with restructuring
//! ([`segment_restructured`]), which keeps the error curve convex. A
//! fixed-`g` partition can then be improved with [`asi_improve`], and tiny
//! instances can be solved exactly with the [`oracle`] functions.
//!
//! ```
//! use hiermerge::{greedy_segment, segment_restructured, ImageRaster};
//!
//! let img = ImageRaster::gray(4, 1, vec![0, 90, 10, 100]).unwrap();
//! let conventional = greedy_segment(&img).unwrap();
//! let converted = segment_restructured(&img).unwrap();
//! for g in 1..=4 {
//!     let a = conventional.cut_at(g).unwrap().total_error();
//!     let b = converted.cut_at(g).unwrap().total_error();
//!     assert!(b <= a);
//! }
//! ```

pub mod asi;
pub mod dump;
mod error;
pub mod export;
mod forest;
pub mod hierarchy;
pub mod image;
pub mod oracle;
pub mod restructure;
pub mod segment;
pub mod stats;
pub mod ward;

pub use asi::{asi_improve, asi_improve_with, best_merge, best_split, AsiOutcome, MergeMode};
pub use dump::{dump_to_string, is_dump, load_dump, parse_dump, write_dump};
pub use error::{Error, Result};
pub use export::{approximation, curve_to_csv, export_curve, load_curve, parse_curve, render_partition};
pub use hierarchy::{
    CurveRow, ErrorCurve, Grid, Hierarchy, HierarchyNode, NodeId, Partition, DEFAULT_RELATIVE_EPSILON,
};
pub use image::{Encoding, ImageRaster};
pub use oracle::{
    optimal_connected_curve, optimal_connected_partition, optimal_curve, optimal_partition,
    OptimalPartition,
};
pub use restructure::{combined_merge, combined_merge_traced, restructure, restructure_traced, RestructureStats};
pub use segment::{build_rag, greedy_segment, segment_restructured, segment_restructured_traced, AdjacencyGraph};
pub use stats::{sigma_from_error, stats_of_pixels, ClusterStats, ColorVec};
pub use ward::{ward_cluster, ward_cluster_image};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/hierarchies.md")]
    mod hierarchies {}
    #[doc = include_str!("../../../book/src/building.md")]
    mod building {}
    #[doc = include_str!("../../../book/src/restructuring.md")]
    mod restructuring {}
    #[doc = include_str!("../../../book/src/improving.md")]
    mod improving {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/files.md")]
    mod files {}
}
