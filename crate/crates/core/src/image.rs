//! 8-bit rasters and the portable anymap family (P2, P3, P5, P6).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hierarchy::Grid;
use crate::stats::ClusterStats;

/// Sample encoding of an anymap file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Ascii,
    Binary,
}

/// Row-major 8-bit image with one (gray) or three (RGB) channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageRaster {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
    encoding: Encoding,
}

impl ImageRaster {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        crate::stats::check_channels(channels)?;
        if width == 0 || height == 0 {
            return Err(Error::EmptyInput);
        }
        let expected = width * height * channels;
        if samples.len() != expected {
            return Err(Error::Truncated {
                expected,
                found: samples.len(),
            });
        }
        Ok(ImageRaster {
            width,
            height,
            channels,
            samples,
            encoding: Encoding::Binary,
        })
    }

    pub fn gray(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        ImageRaster::new(width, height, 1, samples)
    }

    pub fn rgb(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        ImageRaster::new(width, height, 3, samples)
    }

    pub fn with_encoding(mut self, encoding: Encoding) -> Self {
        self.encoding = encoding;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn grid(&self) -> Grid {
        Grid {
            width: self.width,
            height: self.height,
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn pixel(&self, index: usize) -> &[u8] {
        &self.samples[index * self.channels..(index + 1) * self.channels]
    }

    pub fn pixels(&self) -> impl Iterator<Item = &[u8]> {
        self.samples.chunks_exact(self.channels)
    }

    /// One single-pixel cluster per pixel, row-major.
    pub fn pixel_stats(&self) -> Vec<ClusterStats> {
        self.pixels()
            .map(|p| ClusterStats::from_pixel(p).expect("channel count validated"))
            .collect()
    }

    /// Sub-rectangle of this image.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<ImageRaster> {
        if x + width > self.width || y + height > self.height {
            return Err(Error::MalformedImage(format!(
                "crop {width}x{height}+{x}+{y} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let row = width * self.channels;
        let mut samples = Vec::with_capacity(row * height);
        for r in y..y + height {
            let start = (r * self.width + x) * self.channels;
            samples.extend_from_slice(&self.samples[start..start + row]);
        }
        Ok(ImageRaster::new(width, height, self.channels, samples)?.with_encoding(self.encoding))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ImageRaster> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        ImageRaster::parse(&bytes)
    }

    /// Parses a P2, P3, P5 or P6 file with maxval 255.
    pub fn parse(bytes: &[u8]) -> Result<ImageRaster> {
        let mut cursor = Cursor { bytes, pos: 0 };
        let magic = cursor.token().ok_or_else(|| Error::UnsupportedMagic(String::new()))?;
        let (channels, encoding) = match magic {
            b"P2" => (1, Encoding::Ascii),
            b"P3" => (3, Encoding::Ascii),
            b"P5" => (1, Encoding::Binary),
            b"P6" => (3, Encoding::Binary),
            other => {
                return Err(Error::UnsupportedMagic(
                    String::from_utf8_lossy(other).into_owned(),
                ))
            }
        };
        let width = cursor.header_number("width")?;
        let height = cursor.header_number("height")?;
        let maxval = cursor.header_number("maxval")?;
        if maxval != 255 {
            return Err(Error::UnsupportedMaxval(maxval));
        }
        if width == 0 || height == 0 {
            return Err(Error::MalformedImage("zero image dimension".into()));
        }
        let expected = width as usize * height as usize * channels;
        let samples = match encoding {
            Encoding::Binary => {
                // exactly one whitespace byte separates the header from the data
                match cursor.bytes.get(cursor.pos) {
                    Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
                    _ => {
                        return Err(Error::Truncated {
                            expected,
                            found: 0,
                        })
                    }
                }
                let data = &cursor.bytes[cursor.pos..];
                if data.len() < expected {
                    return Err(Error::Truncated {
                        expected,
                        found: data.len(),
                    });
                }
                data[..expected].to_vec()
            }
            Encoding::Ascii => {
                let mut samples = Vec::with_capacity(expected);
                while samples.len() < expected {
                    let Some(tok) = cursor.token() else {
                        return Err(Error::Truncated {
                            expected,
                            found: samples.len(),
                        });
                    };
                    let v = parse_decimal(tok)
                        .filter(|&v| v <= 255)
                        .ok_or_else(|| {
                            Error::MalformedImage(format!(
                                "bad sample {:?}",
                                String::from_utf8_lossy(tok)
                            ))
                        })?;
                    samples.push(v as u8);
                }
                samples
            }
        };
        Ok(ImageRaster::new(width as usize, height as usize, channels, samples)?.with_encoding(encoding))
    }

    /// Serializes in the canonical layout: magic, `width height`, maxval on
    /// separate lines, then the samples (one text line per image row for the
    /// ASCII variants).
    pub fn to_bytes(&self) -> Vec<u8> {
        let magic = match (self.channels, self.encoding) {
            (1, Encoding::Ascii) => "P2",
            (_, Encoding::Ascii) => "P3",
            (1, Encoding::Binary) => "P5",
            (_, Encoding::Binary) => "P6",
        };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        match self.encoding {
            Encoding::Binary => out.extend_from_slice(&self.samples),
            Encoding::Ascii => {
                for row in self.samples.chunks_exact(self.width * self.channels) {
                    let line: Vec<String> = row.iter().map(u8::to_string).collect();
                    out.extend_from_slice(line.join(" ").as_bytes());
                    out.push(b'\n');
                }
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

fn parse_decimal(tok: &[u8]) -> Option<u32> {
    if tok.is_empty() || tok.len() > 9 || !tok.iter().all(u8::is_ascii_digit) {
        return None;
    }
    Some(tok.iter().fold(0, |acc, &d| acc * 10 + u32::from(d - b'0')))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    /// Next whitespace-delimited token, skipping `#` comments.
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            match self.bytes.get(self.pos)? {
                b if b.is_ascii_whitespace() => self.pos += 1,
                b'#' => {
                    while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn header_number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::MalformedImage(format!("missing {what}")))?;
        parse_decimal(tok).ok_or_else(|| {
            Error::MalformedImage(format!(
                "bad {what} {:?}",
                String::from_utf8_lossy(tok)
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_ascii_graymap() {
        let img = ImageRaster::parse(b"P2 1 1 255 7").unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (1, 1, 1));
        assert_eq!(img.samples(), &[7]);
        assert_eq!(img.encoding(), Encoding::Ascii);
    }

    #[test]
    fn binary_pixmap_payload_size() {
        let mut bytes = b"P6\n512 512\n255\n".to_vec();
        bytes.extend(std::iter::repeat_n(9u8, 512 * 512 * 3));
        let img = ImageRaster::parse(&bytes).unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.samples().len(), 786_432);
    }

    #[test]
    fn header_comments_are_skipped() {
        let img = ImageRaster::parse(b"P5\n# made by hand\n2 1\n# max\n255\n\x01\x02").unwrap();
        assert_eq!(img.samples(), &[1, 2]);
    }

    #[test]
    fn binary_samples_may_look_like_whitespace() {
        let img = ImageRaster::parse(b"P5 2 1 255\n\n#").unwrap();
        assert_eq!(img.samples(), b"\n#");
    }

    #[test]
    fn errors_are_distinct() {
        assert!(matches!(
            ImageRaster::parse(b"P3 1 1 65535 0 0 0"),
            Err(Error::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            ImageRaster::parse(b"P4 1 1\n\x00"),
            Err(Error::UnsupportedMagic(m)) if m == "P4"
        ));
        assert!(matches!(
            ImageRaster::parse(b"P6 2 2 255\n\x00\x01\x02"),
            Err(Error::Truncated { expected: 12, found: 3 })
        ));
        assert!(matches!(
            ImageRaster::parse(b"P2 2 2 255 1 2 3"),
            Err(Error::Truncated { expected: 4, found: 3 })
        ));
        assert!(matches!(
            ImageRaster::parse(b"P2 1 1 255 256"),
            Err(Error::MalformedImage(_))
        ));
        assert!(matches!(
            ImageRaster::parse(b"P2 x 1 255 1"),
            Err(Error::MalformedImage(_))
        ));
    }

    #[test]
    fn canonical_files_round_trip_byte_for_byte() {
        let files: [&[u8]; 4] = [
            b"P2\n3 2\n255\n0 1 2\n250 251 255\n",
            b"P3\n2 1\n255\n1 2 3 4 5 6\n",
            b"P5\n2 2\n255\n\x00\xff\x10\x0a",
            b"P6\n1 1\n255\n\x01\x02\x03",
        ];
        for f in files {
            assert_eq!(ImageRaster::parse(f).unwrap().to_bytes(), f);
        }
    }

    #[test]
    fn crop_extracts_rows() {
        let img = ImageRaster::gray(3, 3, (0..9).collect()).unwrap();
        let c = img.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.samples(), &[4, 5, 7, 8]);
        assert!(img.crop(2, 2, 2, 1).is_err());
    }
}
