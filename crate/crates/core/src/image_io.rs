//! Grayscale images, binary masks, Netpbm I/O and the `SBM1` container.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImageIoError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("maxval {0} exceeds 255")]
    MaxvalTooLarge(u32),
    #[error("bad magic")]
    BadMagic,
    #[error("length mismatch: header declares {declared} payload bytes, found {found}")]
    LengthMismatch { declared: usize, found: usize },
    #[error("unknown codec id {0}")]
    UnknownCodec(u8),
    #[error("invalid container: {0}")]
    InvalidContainer(String),
    #[error("invalid dimensions {width}x{height} for {len} values")]
    Dimensions { width: usize, height: usize, len: usize },
    #[error("value {0} outside [0, 255]")]
    ValueOutOfRange(f64),
}

/// Row-major grid of gray values in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self, ImageIoError> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(ImageIoError::Dimensions { width, height, len: values.len() });
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 255.0) {
            return Err(ImageIoError::ValueOutOfRange(bad));
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0);
        assert!((0.0..=255.0).contains(&value));
        Self { width, height, values: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0);
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y).clamp(0.0, 255.0));
            }
        }
        Self { width, height, values }
    }

    /// Builds an image without range checks. Used for inpainting results,
    /// which satisfy the maximum principle but may carry rounding noise.
    pub(crate) fn from_raw(width: usize, height: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        Self { width, height, values }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Row-major bit grid. A set bit marks a mask point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
    ones: usize,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BinaryMask {}x{} ({} ones)", self.width, self.height, self.ones)?;
        if self.bits.len() <= 1024 {
            for row in self.bits.chunks(self.width) {
                let line: String = row.iter().map(|&b| if b { '1' } else { '0' }).collect();
                writeln!(f, "  {line}")?;
            }
        }
        Ok(())
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self { width, height, bits: vec![false; width * height], ones: 0 }
    }

    pub fn full(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        let n = width * height;
        Self { width, height, bits: vec![true; n], ones: n }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, ImageIoError> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(ImageIoError::Dimensions { width, height, len: bits.len() });
        }
        let ones = bits.iter().filter(|&&b| b).count();
        Ok(Self { width, height, bits, ones })
    }

    /// Parses rows of `0`/`1` characters; whitespace separates rows.
    pub fn from_rows(rows: &[&str]) -> Result<Self, ImageIoError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut bits = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(ImageIoError::Dimensions { width, height, len: row.len() });
            }
            for c in row.chars() {
                match c {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    _ => return Err(ImageIoError::MalformedHeader(format!("bad mask char {c:?}"))),
                }
            }
        }
        Self::from_bits(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Total number of pixels.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of set bits, `|K|`.
    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn density(&self) -> f64 {
        self.ones as f64 / self.bits.len() as f64
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn get_index(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.set_index(y * self.width + x, value);
    }

    pub fn set_index(&mut self, i: usize, value: bool) {
        let old = std::mem::replace(&mut self.bits[i], value);
        match (old, value) {
            (false, true) => self.ones += 1,
            (true, false) => self.ones -= 1,
            _ => {}
        }
    }

    /// Row-major indices of the set bits.
    pub fn ones_indices(&self) -> Vec<usize> {
        self.bits.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect()
    }
}

struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn magic(&mut self) -> Result<[u8; 2], ImageIoError> {
        if self.data.len() < 2 || self.data[0] != b'P' {
            return Err(ImageIoError::MalformedHeader("missing P magic".into()));
        }
        self.pos = 2;
        Ok([self.data[0], self.data[1]])
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let c = self.data[self.pos];
            if c == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, ImageIoError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageIoError::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageIoError::MalformedHeader(format!("{what} out of range")))
    }

    fn dimension(&mut self, what: &str) -> Result<usize, ImageIoError> {
        match self.number(what)? {
            0 => Err(ImageIoError::MalformedHeader(format!("{what} is zero"))),
            v => Ok(v as usize),
        }
    }

    /// Consumes the single whitespace byte that separates a binary raster from its header.
    fn raster_start(&mut self) -> Result<usize, ImageIoError> {
        match self.data.get(self.pos) {
            Some(c) if c.is_ascii_whitespace() => Ok(self.pos + 1),
            _ => Err(ImageIoError::MalformedHeader("missing whitespace before raster".into())),
        }
    }
}

/// Reads a binary (`P5`) or ASCII (`P2`) PGM with maxval at most 255.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, ImageIoError> {
    let mut r = HeaderReader::new(bytes);
    let magic = r.magic()?;
    let ascii = match &magic {
        b"P2" => true,
        b"P5" => false,
        _ => return Err(ImageIoError::MalformedHeader("not a P2/P5 graymap".into())),
    };
    let width = r.dimension("width")?;
    let height = r.dimension("height")?;
    let maxval = r.number("maxval")?;
    if maxval == 0 {
        return Err(ImageIoError::MalformedHeader("maxval is zero".into()));
    }
    if maxval > 255 {
        return Err(ImageIoError::MaxvalTooLarge(maxval));
    }
    let n = width * height;
    let mut values = Vec::with_capacity(n);
    if ascii {
        for _ in 0..n {
            r.skip_space_and_comments();
            if r.pos >= bytes.len() {
                return Err(ImageIoError::Truncated { expected: n, found: values.len() });
            }
            let v = r.number("pixel")?;
            if v > maxval {
                return Err(ImageIoError::MalformedHeader(format!("pixel {v} exceeds maxval")));
            }
            values.push(v as f64);
        }
    } else {
        let start = r.raster_start()?;
        let raster = &bytes[start..];
        if raster.len() < n {
            return Err(ImageIoError::Truncated { expected: n, found: raster.len() });
        }
        values.extend(raster[..n].iter().map(|&b| b as f64));
    }
    GrayImage::new(width, height, values)
}

/// Writes a binary `P5` graymap, rounding values to the nearest integer.
pub fn write_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(image.values.iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
    out
}

/// Reads a `P1` or `P4` bitmap; black (1) marks a mask point.
pub fn read_pbm(bytes: &[u8]) -> Result<BinaryMask, ImageIoError> {
    let mut r = HeaderReader::new(bytes);
    let magic = r.magic()?;
    let ascii = match &magic {
        b"P1" => true,
        b"P4" => false,
        _ => return Err(ImageIoError::MalformedHeader("not a P1/P4 bitmap".into())),
    };
    let width = r.dimension("width")?;
    let height = r.dimension("height")?;
    let n = width * height;
    let mut bits = Vec::with_capacity(n);
    if ascii {
        while bits.len() < n {
            r.skip_space_and_comments();
            match bytes.get(r.pos) {
                Some(b'0') => bits.push(false),
                Some(b'1') => bits.push(true),
                Some(c) => {
                    return Err(ImageIoError::MalformedHeader(format!(
                        "unexpected byte {c:#04x} in P1 raster"
                    )))
                }
                None => return Err(ImageIoError::Truncated { expected: n, found: bits.len() }),
            }
            r.pos += 1;
        }
    } else {
        let start = r.raster_start()?;
        let stride = width.div_ceil(8);
        let raster = &bytes[start..];
        if raster.len() < stride * height {
            return Err(ImageIoError::Truncated { expected: stride * height, found: raster.len() });
        }
        for row in raster.chunks(stride).take(height) {
            for x in 0..width {
                bits.push(row[x / 8] & (0x80 >> (x % 8)) != 0);
            }
        }
    }
    BinaryMask::from_bits(width, height, bits)
}

/// Writes a raw `P4` bitmap. Rows are padded to whole bytes with zero bits.
pub fn write_pbm(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P4\n{} {}\n", mask.width, mask.height).into_bytes();
    let stride = mask.width.div_ceil(8);
    for row in mask.bits.chunks(mask.width) {
        let mut packed = vec![0u8; stride];
        for (x, _) in row.iter().enumerate().filter(|(_, &b)| b) {
            packed[x / 8] |= 0x80 >> (x % 8);
        }
        out.extend_from_slice(&packed);
    }
    out
}

/// Writes a plain `P1` bitmap, one text row per mask row.
pub fn write_pbm_ascii(mask: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P1\n{} {}\n", mask.width, mask.height);
    for row in mask.bits.chunks(mask.width) {
        let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

/// Codec tags stored in the container header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum CodecId {
    Marwood = 1,
    Demaret = 2,
    BpaqS = 3,
    BpaqM = 4,
    BpaqL = 5,
    BpaqXl = 6,
    Ulpaq = 7,
    RleHuffman = 8,
    RleArith = 9,
}

impl CodecId {
    pub const ALL: [CodecId; 9] = [
        CodecId::Marwood,
        CodecId::Demaret,
        CodecId::BpaqS,
        CodecId::BpaqM,
        CodecId::BpaqL,
        CodecId::BpaqXl,
        CodecId::Ulpaq,
        CodecId::RleHuffman,
        CodecId::RleArith,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CodecId::Marwood => "marwood",
            CodecId::Demaret => "demaret",
            CodecId::BpaqS => "bpaq-s",
            CodecId::BpaqM => "bpaq-m",
            CodecId::BpaqL => "bpaq-l",
            CodecId::BpaqXl => "bpaq-xl",
            CodecId::Ulpaq => "ulpaq",
            CodecId::RleHuffman => "rle-huffman",
            CodecId::RleArith => "rle-arith",
        }
    }

    pub fn from_name(name: &str) -> Option<CodecId> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl TryFrom<u8> for CodecId {
    type Error = ImageIoError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        CodecId::ALL
            .into_iter()
            .find(|c| *c as u8 == v)
            .ok_or(ImageIoError::UnknownCodec(v))
    }
}

impl std::fmt::Display for CodecId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub const CONTAINER_MAGIC: &[u8; 4] = b"SBM1";
pub const CONTAINER_HEADER_LEN: usize = 21;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedMask {
    pub codec: CodecId,
    pub width: u32,
    pub height: u32,
    pub ones_count: u32,
    pub payload: Vec<u8>,
}

impl EncodedMask {
    pub fn container_len(&self) -> usize {
        CONTAINER_HEADER_LEN + self.payload.len()
    }
}

/// Layout: `SBM1`, codec id (u8), width, height, ones count, payload
/// length (u32 LE each), payload.
pub fn write_container(encoded: &EncodedMask) -> Vec<u8> {
    let mut out = Vec::with_capacity(encoded.container_len());
    out.extend_from_slice(CONTAINER_MAGIC);
    out.push(encoded.codec as u8);
    out.extend_from_slice(&encoded.width.to_le_bytes());
    out.extend_from_slice(&encoded.height.to_le_bytes());
    out.extend_from_slice(&encoded.ones_count.to_le_bytes());
    out.extend_from_slice(&(encoded.payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&encoded.payload);
    out
}

pub fn read_container(bytes: &[u8]) -> Result<EncodedMask, ImageIoError> {
    if bytes.len() < 4 || &bytes[..4] != CONTAINER_MAGIC {
        return Err(ImageIoError::BadMagic);
    }
    if bytes.len() < CONTAINER_HEADER_LEN {
        return Err(ImageIoError::LengthMismatch {
            declared: CONTAINER_HEADER_LEN,
            found: bytes.len(),
        });
    }
    let codec = CodecId::try_from(bytes[4])?;
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let width = u32_at(5);
    let height = u32_at(9);
    let ones_count = u32_at(13);
    let declared = u32_at(17) as usize;
    let payload = &bytes[CONTAINER_HEADER_LEN..];
    if payload.len() != declared {
        return Err(ImageIoError::LengthMismatch { declared, found: payload.len() });
    }
    if ones_count as u64 > width as u64 * height as u64 {
        return Err(ImageIoError::InvalidContainer(format!(
            "ones count {ones_count} exceeds {width}x{height}"
        )));
    }
    Ok(EncodedMask { codec, width, height, ones_count, payload: payload.to_vec() })
}
