//! Sufficient statistics of pixel clusters.
//!
//! A cluster is summarised by its pixel count, the per-channel sum of its
//! intensities and the sum of squared intensity norms. All three are exact
//! integers, so merging two clusters and splitting them again restores the
//! original statistics bit for bit. Only the derived quantities (squared
//! error, merge increment, standard deviation) are floating point, and each
//! of them is evaluated from an exact integer numerator with a single
//! rounding step.

use std::fmt;

use crate::error::{Error, Result};

/// Maximum number of channels per pixel.
pub const MAX_CHANNELS: usize = 3;

/// A real-valued intensity vector with one or three channels.
///
/// Used for cluster means; individual pixels are plain `&[u8]` samples.
#[derive(Clone, Copy, PartialEq)]
pub struct ColorVec {
    len: u8,
    values: [f64; MAX_CHANNELS],
}

impl ColorVec {
    pub fn new(values: &[f64]) -> Result<Self> {
        check_channels(values.len())?;
        let mut out = [0.0; MAX_CHANNELS];
        out[..values.len()].copy_from_slice(values);
        Ok(ColorVec {
            len: values.len() as u8,
            values: out,
        })
    }

    pub fn channels(&self) -> usize {
        usize::from(self.len)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values[..self.channels()]
    }

    /// Squared Euclidean distance to `other`.
    pub fn distance_sq(&self, other: &ColorVec) -> f64 {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl fmt::Debug for ColorVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ColorVec").field(&self.as_slice()).finish()
    }
}

pub(crate) fn check_channels(c: usize) -> Result<()> {
    if c == 1 || c == MAX_CHANNELS {
        Ok(())
    } else {
        Err(Error::UnsupportedChannels(c))
    }
}

/// Exact sufficient statistics of a pixel cluster.
///
/// The empty cluster has `channels() == 0` until it is merged with a
/// non-empty one; it acts as the identity of [`ClusterStats::merge`].
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ClusterStats {
    channels: u8,
    n: u64,
    sum: [u64; MAX_CHANNELS],
    sumsq: u64,
}

impl fmt::Debug for ClusterStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClusterStats")
            .field("n", &self.n)
            .field("sum", &self.sum())
            .field("sumsq", &self.sumsq)
            .finish()
    }
}

impl ClusterStats {
    /// The empty cluster.
    pub fn empty() -> Self {
        ClusterStats::default()
    }

    /// Statistics of a single pixel with 1 or 3 channels.
    pub fn from_pixel(sample: &[u8]) -> Result<Self> {
        check_channels(sample.len())?;
        let mut sum = [0u64; MAX_CHANNELS];
        let mut sumsq = 0u64;
        for (slot, &v) in sum.iter_mut().zip(sample) {
            *slot = u64::from(v);
            sumsq += u64::from(v) * u64::from(v);
        }
        Ok(ClusterStats {
            channels: sample.len() as u8,
            n: 1,
            sum,
            sumsq,
        })
    }

    /// Builds statistics from raw parts, checking the Cauchy-Schwarz bound
    /// `n * sumsq >= |sum|^2` that every real cluster satisfies.
    pub fn from_parts(n: u64, sum: &[u64], sumsq: u64) -> Result<Self> {
        if n == 0 {
            if sum.iter().any(|&s| s != 0) || sumsq != 0 {
                return Err(Error::InvalidStats("empty cluster with non-zero sums"));
            }
            return Ok(ClusterStats::empty());
        }
        check_channels(sum.len())?;
        let mut arr = [0u64; MAX_CHANNELS];
        arr[..sum.len()].copy_from_slice(sum);
        let stats = ClusterStats {
            channels: sum.len() as u8,
            n,
            sum: arr,
            sumsq,
        };
        if u128::from(n) * u128::from(sumsq) < stats.sum_norm_sq() {
            return Err(Error::InvalidStats(
                "sums violate the Cauchy-Schwarz bound",
            ));
        }
        Ok(stats)
    }

    pub fn channels(&self) -> usize {
        usize::from(self.channels)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sum(&self) -> &[u64] {
        &self.sum[..self.channels()]
    }

    pub fn sumsq(&self) -> u64 {
        self.sumsq
    }

    /// Cluster mean; `None` for the empty cluster.
    pub fn mean(&self) -> Option<ColorVec> {
        if self.n == 0 {
            return None;
        }
        let n = self.n as f64;
        let mut values = [0.0; MAX_CHANNELS];
        for (v, &s) in values.iter_mut().zip(self.sum()) {
            *v = s as f64 / n;
        }
        Some(ColorVec {
            len: self.channels,
            values,
        })
    }

    /// Mean rounded half-up to the nearest integer in each channel.
    pub fn rounded_mean(&self) -> Option<[u8; MAX_CHANNELS]> {
        if self.n == 0 {
            return None;
        }
        let mut out = [0u8; MAX_CHANNELS];
        for (o, &s) in out.iter_mut().zip(self.sum()) {
            // floor((2s + n) / 2n) == floor(s/n + 1/2)
            let q = (2 * u128::from(s) + u128::from(self.n)) / (2 * u128::from(self.n));
            *o = q.min(255) as u8;
        }
        Some(out)
    }

    fn channel_check(&self, other: &ClusterStats) -> Result<()> {
        if self.n != 0 && other.n != 0 && self.channels != other.channels {
            return Err(Error::ChannelMismatch {
                expected: self.channels,
                found: other.channels,
            });
        }
        Ok(())
    }

    /// Statistics of the disjoint union of two clusters.
    pub fn merge(&self, other: &ClusterStats) -> Result<ClusterStats> {
        self.channel_check(other)?;
        if other.n == 0 {
            return Ok(*self);
        }
        if self.n == 0 {
            return Ok(*other);
        }
        let mut sum = self.sum;
        for (s, o) in sum.iter_mut().zip(other.sum) {
            *s += o;
        }
        Ok(ClusterStats {
            channels: self.channels,
            n: self.n + other.n,
            sum,
            sumsq: self.sumsq + other.sumsq,
        })
    }

    /// Removes `part` from `self`, the exact inverse of [`merge`](Self::merge).
    ///
    /// Returns `None` when `part` is not contained in `self` (some count or
    /// sum would go negative, or the channels differ).
    pub fn subtract(&self, part: &ClusterStats) -> Option<ClusterStats> {
        if part.n == 0 {
            return Some(*self);
        }
        if part.channels != self.channels || part.n > self.n {
            return None;
        }
        if part.n == self.n {
            return (part == self).then(ClusterStats::empty);
        }
        let mut sum = self.sum;
        for (s, p) in sum.iter_mut().zip(part.sum) {
            *s = s.checked_sub(p)?;
        }
        Some(ClusterStats {
            channels: self.channels,
            n: self.n - part.n,
            sum,
            sumsq: self.sumsq.checked_sub(part.sumsq)?,
        })
    }

    fn sum_norm_sq(&self) -> u128 {
        self.sum()
            .iter()
            .map(|&s| u128::from(s) * u128::from(s))
            .sum()
    }

    /// Total squared deviation of the cluster's pixels from its mean.
    ///
    /// Evaluated as `(n * sumsq - |sum|^2) / n`, with the numerator computed
    /// exactly in 128-bit integers. Zero for clusters of at most one pixel.
    pub fn error(&self) -> f64 {
        if self.n <= 1 {
            return 0.0;
        }
        let numer = u128::from(self.n) * u128::from(self.sumsq) - self.sum_norm_sq();
        numer as f64 / self.n as f64
    }

    /// Increase of the total squared error caused by merging two clusters:
    /// `n1 n2 / (n1 + n2) * |mean1 - mean2|^2`.
    ///
    /// Computed as `sum_k (s1_k n2 - s2_k n1)^2 / (n1 n2 (n1 + n2))` so the
    /// result is exactly symmetric in its arguments.
    pub fn merge_increment(&self, other: &ClusterStats) -> Result<f64> {
        if self.n == 0 || other.n == 0 {
            return Err(Error::EmptyCluster);
        }
        self.channel_check(other)?;
        Ok(self.merge_increment_unchecked(other))
    }

    /// [`merge_increment`](Self::merge_increment) for callers that already
    /// guarantee two non-empty clusters of equal channel count.
    #[inline]
    pub(crate) fn merge_increment_unchecked(&self, other: &ClusterStats) -> f64 {
        let (n1, n2) = (i128::from(self.n), i128::from(other.n));
        let mut numer: u128 = 0;
        for k in 0..self.channels() {
            let d = i128::from(self.sum[k]) * n2 - i128::from(other.sum[k]) * n1;
            numer += d.unsigned_abs() * d.unsigned_abs();
        }
        if numer == 0 {
            return 0.0;
        }
        let denom = (self.n as u128) * (other.n as u128) * (self.n as u128 + other.n as u128);
        numer as f64 / denom as f64
    }
}

/// Accumulates the statistics of a list of pixels.
///
/// Every pixel must have the same number of channels (1 or 3).
pub fn stats_of_pixels<'a, I>(pixels: I) -> Result<ClusterStats>
where
    I: IntoIterator<Item = &'a [u8]>,
{
    pixels.into_iter().try_fold(ClusterStats::empty(), |acc, p| {
        let s = ClusterStats::from_pixel(p)?;
        acc.merge(&s)
    })
}

/// Standard deviation of an approximation with total squared error `error`
/// over `n` pixels of `channels` channels: `sqrt(E / (c n))`.
pub fn sigma_from_error(error: f64, n: u64, channels: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::NoPixels);
    }
    check_channels(channels)?;
    Ok((error.max(0.0) / (channels as f64 * n as f64)).sqrt())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn brute_force_error(pixels: &[Vec<u8>]) -> f64 {
        let c = pixels[0].len();
        let n = pixels.len() as f64;
        let mean: Vec<f64> = (0..c)
            .map(|k| pixels.iter().map(|p| f64::from(p[k])).sum::<f64>() / n)
            .collect();
        pixels
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&mean)
                    .map(|(&v, m)| (f64::from(v) - m).powi(2))
                    .sum::<f64>()
            })
            .sum()
    }

    fn stats(pixels: &[&[u8]]) -> ClusterStats {
        stats_of_pixels(pixels.iter().copied()).unwrap()
    }

    #[test]
    fn stats_of_small_lists() {
        let empty = stats_of_pixels(std::iter::empty()).unwrap();
        assert_eq!((empty.n(), empty.sum(), empty.sumsq()), (0, &[][..], 0));

        let s = stats(&[&[0, 0, 0], &[2, 2, 2]]);
        assert_eq!((s.n(), s.sum(), s.sumsq()), (2, &[2, 2, 2][..], 12));

        let g = stats(&[&[5]]);
        assert_eq!((g.n(), g.sum(), g.sumsq()), (1, &[5][..], 25));
    }

    #[test]
    fn mixed_channels_are_rejected() {
        let err = stats_of_pixels([&[1u8][..], &[1, 2, 3][..]]).unwrap_err();
        assert!(matches!(err, Error::ChannelMismatch { .. }));
        assert!(matches!(
            ClusterStats::from_pixel(&[1, 2]),
            Err(Error::UnsupportedChannels(2))
        ));
    }

    #[test]
    fn merge_identity_and_inverse() {
        let a = stats(&[&[0, 0, 0]]);
        let b = stats(&[&[2, 2, 2]]);
        assert_eq!(a.merge(&ClusterStats::empty()).unwrap(), a);
        let m = a.merge(&b).unwrap();
        assert_eq!((m.n(), m.sum(), m.sumsq()), (2, &[2, 2, 2][..], 12));
        assert_eq!(m.subtract(&b), Some(a));
        assert_eq!(m.subtract(&a), Some(b));
        assert_eq!(a.subtract(&b), None);
    }

    #[test]
    fn cluster_error_examples() {
        assert_eq!(stats(&[&[9, 4, 1]]).error(), 0.0);
        assert_eq!(stats(&[&[0, 0, 0], &[2, 2, 2]]).error(), 6.0);
        assert_eq!(stats(&[&[0], &[0], &[3]]).error(), 6.0);
        assert_eq!(ClusterStats::empty().error(), 0.0);
    }

    #[test]
    fn merge_increment_examples() {
        let a = stats(&[&[7, 7, 7]]);
        assert_eq!(a.merge_increment(&a).unwrap(), 0.0);

        let a = stats(&[&[0, 0, 0]]);
        let b = stats(&[&[2, 2, 2]]);
        assert_eq!(a.merge_increment(&b).unwrap(), 6.0);
        let diff = a.merge(&b).unwrap().error() - a.error() - b.error();
        assert_eq!(diff, 6.0);

        // two pixels averaging (1,0,0) against two averaging (0,0,0)
        let a = stats(&[&[2, 0, 0], &[0, 0, 0]]);
        let b = stats(&[&[0, 0, 0], &[0, 0, 0]]);
        assert_eq!(a.merge_increment(&b).unwrap(), 1.0);
        let diff = a.merge(&b).unwrap().error() - a.error() - b.error();
        assert!((diff - 1.0).abs() < 1e-12);

        assert!(matches!(
            a.merge_increment(&ClusterStats::empty()),
            Err(Error::EmptyCluster)
        ));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_from_error(0.0, 5, 3).unwrap(), 0.0);
        assert_eq!(sigma_from_error(12.0, 4, 3).unwrap(), 1.0);
        assert_eq!(sigma_from_error(6.0, 2, 3).unwrap(), 1.0);
        assert!(matches!(sigma_from_error(1.0, 0, 3), Err(Error::NoPixels)));
    }

    #[test]
    fn rounded_mean_is_half_up() {
        assert_eq!(stats(&[&[0], &[1]]).rounded_mean().unwrap()[0], 1);
        assert_eq!(stats(&[&[0], &[0], &[1]]).rounded_mean().unwrap()[0], 0);
        assert_eq!(stats(&[&[254], &[255]]).rounded_mean().unwrap()[0], 255);
    }

    #[test]
    fn extreme_image_does_not_overflow() {
        // a 4096x4096 white image, accumulated in one shot
        let n = 4096u64 * 4096;
        let white = ClusterStats::from_pixel(&[255, 255, 255]).unwrap();
        let big = ClusterStats::from_parts(
            n,
            &[255 * n, 255 * n, 255 * n],
            n * 3 * 255 * 255,
        )
        .unwrap();
        assert_eq!(big.error(), 0.0);
        let merged = big.merge(&white).unwrap();
        assert_eq!(merged.subtract(&white), Some(big));
        assert_eq!(big.merge_increment(&white).unwrap(), 0.0);
    }

    fn pixel_list(channels: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
        prop::collection::vec(prop::collection::vec(any::<u8>(), channels), 1..200)
    }

    proptest! {
        #[test]
        fn closed_form_error_matches_brute_force(
            pixels in prop_oneof![pixel_list(1), pixel_list(3)]
        ) {
            let s = stats_of_pixels(pixels.iter().map(|p| p.as_slice())).unwrap();
            let brute = brute_force_error(&pixels);
            prop_assert!((s.error() - brute).abs() <= 1e-9 * brute.max(1.0));
        }

        #[test]
        fn increment_equals_error_difference(
            a in pixel_list(3),
            b in pixel_list(3),
        ) {
            let sa = stats_of_pixels(a.iter().map(|p| p.as_slice())).unwrap();
            let sb = stats_of_pixels(b.iter().map(|p| p.as_slice())).unwrap();
            let inc = sa.merge_increment(&sb).unwrap();
            prop_assert_eq!(inc, sb.merge_increment(&sa).unwrap());
            let merged = sa.merge(&sb).unwrap();
            let diff = merged.error() - sa.error() - sb.error();
            prop_assert!((inc - diff).abs() <= 1e-9 * merged.error().max(1.0));
            prop_assert_eq!(merged.subtract(&sb), Some(sa));
        }
    }
}
