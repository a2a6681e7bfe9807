//! Grayscale frames, the block grid laid over them, and the two on-disk
//! formats we read: binary PGM (`P5`) and headerless Y8 planes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// An 8-bit luminance raster in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    samples: Vec<u8>,
    /// Position of this frame in its sequence.
    pub index: usize,
}

impl Frame {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateGeometry(format!("{width}x{height}")));
        }
        if samples.len() != width * height {
            return Err(Error::GeometryMismatch(format!(
                "{} samples for a {width}x{height} frame",
                samples.len()
            )));
        }
        Ok(Frame {
            width,
            height,
            samples,
            index: 0,
        })
    }

    /// A frame filled with one value.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Frame::new(width, height, vec![value; width * height])
    }

    /// Builds a frame by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Frame::new(width, height, samples)
    }

    pub fn with_index(mut self, index: usize) -> Self {
        self.index = index;
        self
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub(crate) fn set(&mut self, x: usize, y: usize, value: u8) {
        self.samples[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub(crate) fn same_dims(&self, other: &Frame) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::GeometryMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

/// The block grid: frame size plus the smallest and largest quadtree cell.
///
/// The frame must tile exactly into `max_block` squares; both block sizes
/// are powers of two with `min_block <= max_block`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridGeometry {
    width: usize,
    height: usize,
    min_block: usize,
    max_block: usize,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize, min_block: usize, max_block: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateGeometry(format!("{width}x{height}")));
        }
        if !min_block.is_power_of_two() || !max_block.is_power_of_two() {
            return Err(Error::InvalidGeometry(format!(
                "block sizes {min_block}/{max_block} must be powers of two"
            )));
        }
        if min_block > max_block {
            return Err(Error::InvalidGeometry(format!(
                "min_block {min_block} exceeds max_block {max_block}"
            )));
        }
        if !width.is_multiple_of(max_block) || !height.is_multiple_of(max_block) {
            return Err(Error::InvalidGeometry(format!(
                "{width}x{height} is not a multiple of max_block {max_block}"
            )));
        }
        Ok(GridGeometry {
            width,
            height,
            min_block,
            max_block,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn min_block(&self) -> usize {
        self.min_block
    }

    #[inline]
    pub fn max_block(&self) -> usize {
        self.max_block
    }

    /// Number of tree levels, counting both the root and the base level.
    pub fn levels(&self) -> usize {
        (self.max_block / self.min_block).trailing_zeros() as usize + 1
    }

    /// Base blocks per row and per column.
    pub fn blocks_x(&self) -> usize {
        self.width / self.min_block
    }

    pub fn blocks_y(&self) -> usize {
        self.height / self.min_block
    }

    pub fn base_blocks(&self) -> usize {
        self.blocks_x() * self.blocks_y()
    }

    pub fn roots_x(&self) -> usize {
        self.width / self.max_block
    }

    pub fn roots_y(&self) -> usize {
        self.height / self.max_block
    }

    pub fn root_count(&self) -> usize {
        self.roots_x() * self.roots_y()
    }

    /// Side of a root measured in base blocks.
    pub fn root_span(&self) -> usize {
        self.max_block / self.min_block
    }

    /// Pixel origins of all base blocks in row-major order.
    pub fn block_origins(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let bx = self.blocks_x();
        (0..self.base_blocks()).map(move |i| ((i % bx) * self.min_block, (i / bx) * self.min_block))
    }
}

/// Checks that `frame` has exactly the dimensions of `geom`.
pub fn validate_geometry(frame: &Frame, geom: &GridGeometry) -> Result<()> {
    // Re-run the constructor checks; cheap and keeps this total.
    GridGeometry::new(geom.width, geom.height, geom.min_block, geom.max_block)?;
    if frame.width != geom.width || frame.height != geom.height {
        return Err(Error::GeometryMismatch(format!(
            "frame is {}x{}, grid is {}x{}",
            frame.width, frame.height, geom.width, geom.height
        )));
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Parses a binary 8-bit graymap from memory.
pub fn parse_pgm(data: &[u8]) -> Result<Frame> {
    let mut pos = 0usize;
    let mut fields = [0u32; 3];

    if data.len() < 2 || &data[..2] != b"P5" {
        return Err(Error::MalformedHeader("missing P5 magic".into()));
    }
    pos += 2;
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            match data.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while pos < data.len() && data[pos] != b'\n' {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::MalformedHeader("header ends early".into())),
            }
        }
        let start = pos;
        while pos < data.len() && data[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::MalformedHeader(format!("expected a number at byte {start}")));
        }
        *field = std::str::from_utf8(&data[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader("number out of range".into()))?;
    }
    match data.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedHeader("no whitespace after maxval".into())),
    }

    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedDepth(maxval));
    }
    let (width, height) = (width as usize, height as usize);
    if width == 0 || height == 0 {
        return Err(Error::DegenerateGeometry(format!("{width}x{height}")));
    }
    let expected = width * height;
    let payload = &data[pos..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    Frame::new(width, height, payload[..expected].to_vec())
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Frame> {
    parse_pgm(&read_file(path.as_ref())?)
}

/// Serializes a frame as `P5` with maxval 255.
pub fn pgm_bytes(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.samples);
    out
}

pub fn store_pgm(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&pgm_bytes(frame)).map_err(|e| Error::io(path, e))
}

/// Reads plane `frame_index` from a file of concatenated `width`×`height`
/// luminance planes.
pub fn load_raw_y8(path: impl AsRef<Path>, width: usize, height: usize, frame_index: usize) -> Result<Frame> {
    if width == 0 || height == 0 {
        return Err(Error::DegenerateGeometry(format!("{width}x{height}")));
    }
    let data = read_file(path.as_ref())?;
    let plane = width * height;
    let available = data.len() / plane;
    if frame_index >= available {
        return Err(Error::OutOfRange {
            index: frame_index,
            available,
        });
    }
    let start = frame_index * plane;
    Ok(Frame::new(width, height, data[start..start + plane].to_vec())?.with_index(frame_index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_pgm() {
        let mut data = b"P5\n2 2\n255\n".to_vec();
        data.extend_from_slice(&[0, 255, 128, 64]);
        let f = parse_pgm(&data).unwrap();
        assert_eq!((f.width(), f.height()), (2, 2));
        assert_eq!(f.samples(), &[0, 255, 128, 64]);
    }

    #[test]
    fn pgm_comments_are_skipped() {
        let mut data = b"P5 # made by hand\n1 # w\n1\n255 ".to_vec();
        data.push(7);
        assert_eq!(parse_pgm(&data).unwrap().samples(), &[7]);
    }

    #[test]
    fn sixteen_bit_pgm_rejected() {
        let mut data = b"P5\n2 2\n65535\n".to_vec();
        data.extend_from_slice(&[0; 8]);
        let err = parse_pgm(&data).unwrap_err();
        assert!(err.to_string().contains("unsupported sample depth"), "{err}");
    }

    #[test]
    fn truncated_payload() {
        let mut data = b"P5\n2 2\n255\n".to_vec();
        data.extend_from_slice(&[1, 2, 3]);
        let err = parse_pgm(&data).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
    }

    #[test]
    fn wrong_magic() {
        assert!(matches!(parse_pgm(b"P2\n1 1\n255\n0"), Err(Error::MalformedHeader(_))));
        assert!(matches!(parse_pgm(b"P5\n1"), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn single_pixel_file_layout() {
        let f = Frame::new(1, 1, vec![0]).unwrap();
        assert_eq!(pgm_bytes(&f), b"P5\n1 1\n255\n\0");
    }

    #[test]
    fn geometry_examples() {
        let g = GridGeometry::new(256, 256, 16, 64).unwrap();
        assert_eq!((g.root_count(), g.base_blocks(), g.levels()), (16, 256, 3));
        let g = GridGeometry::new(256, 128, 16, 64).unwrap();
        assert_eq!((g.root_count(), g.base_blocks()), (8, 128));
        assert!(GridGeometry::new(100, 100, 16, 64).is_err());
        assert!(GridGeometry::new(64, 64, 12, 64).is_err());
        assert!(GridGeometry::new(64, 64, 64, 32).is_err());
        assert_eq!(GridGeometry::new(64, 64, 64, 64).unwrap().levels(), 1);
    }

    #[test]
    fn validate_rejects_mismatch() {
        let g = GridGeometry::new(256, 256, 16, 64).unwrap();
        let f = Frame::filled(256, 256, 0).unwrap();
        validate_geometry(&f, &g).unwrap();
        let f = Frame::filled(256, 128, 0).unwrap();
        assert!(matches!(validate_geometry(&f, &g), Err(Error::GeometryMismatch(_))));
    }
}
