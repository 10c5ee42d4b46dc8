//! Rendering of approximations and the `g,E,sigma` curve format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hierarchy::{CurveRow, ErrorCurve, Partition};
use crate::image::ImageRaster;

/// Header line of curve files.
pub const CURVE_HEADER: &str = "g,E,sigma";

/// The piecewise-constant approximation of `image`: every pixel painted in
/// its cluster's mean, rounded half-up per channel. The result keeps the
/// image's encoding.
///
/// ```
/// use hiermerge::{approximation, greedy_segment, ImageRaster};
///
/// let img = ImageRaster::gray(3, 1, vec![0, 1, 5]).unwrap();
/// let p = greedy_segment(&img).unwrap().cut_at(2).unwrap();
/// assert_eq!(approximation(&img, &p).unwrap().samples(), &[1, 1, 5]);
/// ```
pub fn approximation(image: &ImageRaster, p: &Partition) -> Result<ImageRaster> {
    if p.labels().len() != image.len() {
        return Err(Error::LabelMismatch {
            labels: p.labels().len(),
            pixels: image.len(),
        });
    }
    let c = image.channels();
    if let Some((_, s)) = p.clusters().first() {
        if s.channels() != c {
            return Err(Error::ChannelMismatch {
                expected: c as u8,
                found: s.channels() as u8,
            });
        }
    }
    let mut samples = Vec::with_capacity(image.len() * c);
    for &label in p.labels() {
        let stats = p.stats_of(label).expect("labels name clusters");
        let mean = stats.rounded_mean().expect("clusters are non-empty");
        samples.extend_from_slice(&mean[..c]);
    }
    Ok(ImageRaster::new(image.width(), image.height(), c, samples)?.with_encoding(image.encoding()))
}

/// Writes [`approximation`] to `path`.
pub fn render_partition(image: &ImageRaster, p: &Partition, path: impl AsRef<Path>) -> Result<()> {
    approximation(image, p)?.save(path)
}

/// Curve as CSV text: the header, then `g,E,sigma` rows with nine
/// significant digits.
pub fn curve_to_csv(curve: &ErrorCurve) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for row in curve.rows() {
        writeln!(out, "{},{:.8e},{:.8e}", row.g, row.error, row.sigma).unwrap();
    }
    out
}

pub fn export_curve(curve: &ErrorCurve, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, curve_to_csv(curve)).map_err(|e| Error::io(path, e))
}

/// Parses the output of [`curve_to_csv`].
pub fn parse_curve(text: &str) -> Result<ErrorCurve> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CURVE_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {CURVE_HEADER:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        let [g, e, s] = fields[..] else {
            return Err(bad(format!("expected 3 fields, found {}", fields.len())));
        };
        rows.push(CurveRow {
            g: g.parse().map_err(|_| bad(format!("bad g {g:?}")))?,
            error: e.parse().map_err(|_| bad(format!("bad E {e:?}")))?,
            sigma: s.parse().map_err(|_| bad(format!("bad sigma {s:?}")))?,
        });
    }
    Ok(ErrorCurve::from_rows(rows))
}

pub fn load_curve(path: impl AsRef<Path>) -> Result<ErrorCurve> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_curve(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ward_cluster, ClusterStats, Hierarchy, NodeId};

    fn three_leaf() -> Hierarchy {
        let leaves = [0u8, 1, 5].map(|v| ClusterStats::from_pixel(&[v]).unwrap());
        Hierarchy::build_on_grid(
            leaves.to_vec(),
            crate::Grid { width: 3, height: 1 },
            &[(NodeId(0), NodeId(1)), (NodeId(3), NodeId(2))],
        )
        .unwrap()
    }

    #[test]
    fn empty_curve_is_header_only() {
        assert_eq!(curve_to_csv(&ErrorCurve::default()), "g,E,sigma\n");
        assert!(parse_curve("g,E,sigma\n").unwrap().is_empty());
    }

    #[test]
    fn three_leaf_curve() {
        let curve = three_leaf().error_curve(3).unwrap();
        let csv = curve_to_csv(&curve);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "g,E,sigma");
        assert_eq!(lines[3], "3,0.00000000e0,0.00000000e0");
        assert!(lines[2].starts_with("2,5.00000000e-1,"));
        let e1 = 14.0;
        let back = parse_curve(&csv).unwrap();
        for (row, e) in back.rows().iter().zip([e1, 0.5, 0.0]) {
            assert!((row.error - e).abs() <= 1e-8 * e);
            let sigma = (e / 3.0).sqrt();
            assert!((row.sigma - sigma).abs() <= 1e-8 * sigma);
        }
    }

    #[test]
    fn malformed_curves() {
        assert!(matches!(parse_curve("g,E\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_curve("g,E,sigma\n1,2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_curve("g,E,sigma\n1,x,0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn render_rounds_half_up() {
        let img = ImageRaster::gray(3, 1, vec![0, 1, 5]).unwrap();
        let h = three_leaf();
        assert_eq!(approximation(&img, &h.cut_at(2).unwrap()).unwrap().samples(), &[1, 1, 5]);
        // mean 2 exactly
        assert_eq!(approximation(&img, &h.cut_at(1).unwrap()).unwrap().samples(), &[2, 2, 2]);
        assert_eq!(approximation(&img, &h.cut_at(3).unwrap()).unwrap(), img);
    }

    #[test]
    fn render_checks_sizes() {
        let img = ImageRaster::gray(2, 1, vec![0, 1]).unwrap();
        let p = three_leaf().cut_at(1).unwrap();
        assert!(matches!(
            approximation(&img, &p),
            Err(Error::LabelMismatch { labels: 3, pixels: 2 })
        ));
        let rgb = ImageRaster::rgb(3, 1, vec![0; 9]).unwrap();
        assert!(matches!(approximation(&rgb, &p), Err(Error::ChannelMismatch { .. })));
    }

    #[test]
    fn trivial_approximation_is_constant() {
        let img = ImageRaster::rgb(2, 2, vec![0, 0, 0, 255, 255, 255, 10, 20, 30, 1, 2, 3]).unwrap();
        let h = ward_cluster(&img.pixel_stats()).unwrap();
        let flat = approximation(&img, &h.cut_at(1).unwrap()).unwrap();
        // means 266/4, 277/4, 288/4 round to 67, 69, 72
        assert_eq!(flat.samples(), [67, 69, 72].repeat(4));
    }
}
