//! Sparse representations of binary masks and the Shannon entropy of
//! symbol streams.
//!
//! Vectorisation and CSR scan row by row; run-length encoding scans column
//! by column. Coordinates in COO and CSR are 1-indexed.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::image_io::BinaryMask;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ReprError {
    #[error("runs overflow the {width}x{height} image area")]
    RunOverflow { width: usize, height: usize },
    #[error("coordinate ({row}, {col}) outside {width}x{height} image")]
    OutOfBounds { row: usize, col: usize, width: usize, height: usize },
    #[error("coordinates not strictly increasing in row-major order")]
    Unsorted,
    #[error("inconsistent CSR form: {0}")]
    InconsistentCounts(String),
    #[error("empty histogram")]
    EmptyHistogram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanOrder {
    RowMajor,
    ColumnMajor,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSequence {
    pub bits: Vec<bool>,
    pub order: ScanOrder,
}

/// Zero-gap lengths before each set pixel in column-major order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunLengthSeq {
    pub runs: Vec<u32>,
}

/// 1-indexed `(row, column)` pairs sorted row-major.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CooList {
    pub entries: Vec<(u32, u32)>,
}

/// CSR variant that stores per-row non-zero counts instead of running totals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CsrForm {
    pub column_indices: Vec<u32>,
    pub row_counts: Vec<u32>,
}

pub fn vectorise_row_major(mask: &BinaryMask) -> BitSequence {
    BitSequence { bits: mask.bits().to_vec(), order: ScanOrder::RowMajor }
}

pub fn devectorise(seq: &BitSequence, width: usize, height: usize) -> Result<BinaryMask, ReprError> {
    if seq.bits.len() != width * height {
        return Err(ReprError::RunOverflow { width, height });
    }
    let mut mask = BinaryMask::new(width, height);
    for (i, &b) in seq.bits.iter().enumerate().filter(|(_, &b)| b) {
        let (x, y) = match seq.order {
            ScanOrder::RowMajor => (i % width, i / width),
            ScanOrder::ColumnMajor => (i / height, i % height),
        };
        mask.set(x, y, b);
    }
    Ok(mask)
}

pub fn rle_encode(mask: &BinaryMask) -> RunLengthSeq {
    let mut runs = Vec::with_capacity(mask.count_ones());
    let mut gap = 0u32;
    for x in 0..mask.width() {
        for y in 0..mask.height() {
            if mask.get(x, y) {
                runs.push(gap);
                gap = 0;
            } else {
                gap += 1;
            }
        }
    }
    RunLengthSeq { runs }
}

pub fn rle_decode(runs: &RunLengthSeq, width: usize, height: usize) -> Result<BinaryMask, ReprError> {
    let mut mask = BinaryMask::new(width, height);
    let n = (width * height) as u64;
    let mut pos = 0u64;
    for &run in &runs.runs {
        pos += run as u64;
        if pos >= n {
            return Err(ReprError::RunOverflow { width, height });
        }
        let p = pos as usize;
        mask.set(p / height, p % height, true);
        pos += 1;
    }
    Ok(mask)
}

pub fn coo_encode(mask: &BinaryMask) -> CooList {
    let w = mask.width();
    let entries = mask
        .ones_indices()
        .into_iter()
        .map(|i| ((i / w + 1) as u32, (i % w + 1) as u32))
        .collect();
    CooList { entries }
}

pub fn coo_decode(coo: &CooList, width: usize, height: usize) -> Result<BinaryMask, ReprError> {
    let mut mask = BinaryMask::new(width, height);
    let mut prev: Option<usize> = None;
    for &(row, col) in &coo.entries {
        let (row, col) = (row as usize, col as usize);
        if row == 0 || col == 0 || row > height || col > width {
            return Err(ReprError::OutOfBounds { row, col, width, height });
        }
        let idx = (row - 1) * width + (col - 1);
        if prev.is_some_and(|p| p >= idx) {
            return Err(ReprError::Unsorted);
        }
        prev = Some(idx);
        mask.set_index(idx, true);
    }
    Ok(mask)
}

pub fn csr_encode(mask: &BinaryMask) -> CsrForm {
    let mut column_indices = Vec::with_capacity(mask.count_ones());
    let mut row_counts = Vec::with_capacity(mask.height());
    for y in 0..mask.height() {
        let before = column_indices.len();
        column_indices.extend((0..mask.width()).filter(|&x| mask.get(x, y)).map(|x| x as u32 + 1));
        row_counts.push((column_indices.len() - before) as u32);
    }
    CsrForm { column_indices, row_counts }
}

pub fn csr_decode(csr: &CsrForm, width: usize, height: usize) -> Result<BinaryMask, ReprError> {
    if csr.row_counts.len() != height {
        return Err(ReprError::InconsistentCounts(format!(
            "{} row counts for {height} rows",
            csr.row_counts.len()
        )));
    }
    let total: u64 = csr.row_counts.iter().map(|&c| c as u64).sum();
    if total != csr.column_indices.len() as u64 {
        return Err(ReprError::InconsistentCounts(format!(
            "row counts sum to {total}, {} columns stored",
            csr.column_indices.len()
        )));
    }
    let mut mask = BinaryMask::new(width, height);
    let mut cols = csr.column_indices.iter();
    for (y, &count) in csr.row_counts.iter().enumerate() {
        let mut prev = 0usize;
        for _ in 0..count {
            let col = *cols.next().expect("counts checked against column total") as usize;
            if col == 0 || col > width {
                return Err(ReprError::OutOfBounds { row: y + 1, col, width, height });
            }
            if col <= prev {
                return Err(ReprError::Unsorted);
            }
            prev = col;
            mask.set(col - 1, y, true);
        }
    }
    Ok(mask)
}

/// Histogram of an integer symbol stream.
pub fn histogram<I: IntoIterator<Item = u64>>(symbols: I) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for s in symbols {
        *h.entry(s).or_insert(0) += 1;
    }
    h
}

/// Shannon entropy in bits per symbol: `-sum p log2 p`.
pub fn shannon_entropy<'a, I: IntoIterator<Item = &'a u64>>(counts: I) -> Result<f64, ReprError> {
    let counts: Vec<u64> = counts.into_iter().copied().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ReprError::EmptyHistogram);
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(h.max(0.0))
}

/// The representations the toolkit can dump and measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReprForm {
    Vector,
    Rle,
    Coo,
    Csr,
}

impl ReprForm {
    pub const ALL: [ReprForm; 4] = [ReprForm::Vector, ReprForm::Rle, ReprForm::Coo, ReprForm::Csr];

    pub fn name(self) -> &'static str {
        match self {
            ReprForm::Vector => "vector",
            ReprForm::Rle => "rle",
            ReprForm::Coo => "coo",
            ReprForm::Csr => "csr",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    /// The integer stream of this representation, in storage order.
    /// COO interleaves rows and columns; CSR lists columns, then counts.
    pub fn symbols(self, mask: &BinaryMask) -> Vec<u64> {
        match self {
            ReprForm::Vector => mask.bits().iter().map(|&b| b as u64).collect(),
            ReprForm::Rle => rle_encode(mask).runs.iter().map(|&r| r as u64).collect(),
            ReprForm::Coo => coo_encode(mask)
                .entries
                .iter()
                .flat_map(|&(r, c)| [r as u64, c as u64])
                .collect(),
            ReprForm::Csr => {
                let csr = csr_encode(mask);
                csr.column_indices
                    .iter()
                    .chain(&csr.row_counts)
                    .map(|&v| v as u64)
                    .collect()
            }
        }
    }

    /// Human-readable dump as whitespace-separated integers.
    pub fn dump(self, mask: &BinaryMask) -> String {
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
        match self {
            ReprForm::Vector | ReprForm::Rle => join(&mut self.symbols(mask).into_iter().map(|s| s.to_string())),
            ReprForm::Coo => coo_encode(mask)
                .entries
                .iter()
                .map(|(r, c)| format!("{r} {c}"))
                .collect::<Vec<_>>()
                .join("\n"),
            ReprForm::Csr => {
                let csr = csr_encode(mask);
                format!(
                    "{}\n{}",
                    join(&mut csr.column_indices.iter().map(|v| v.to_string())),
                    join(&mut csr.row_counts.iter().map(|v| v.to_string()))
                )
            }
        }
    }

    /// Single-line rendering: COO as `(r,c), (r,c)`, CSR as
    /// `columns | counts`, the other forms as in [`ReprForm::dump`].
    pub fn inline(self, mask: &BinaryMask) -> String {
        match self {
            ReprForm::Vector | ReprForm::Rle => self.dump(mask),
            ReprForm::Coo => coo_encode(mask)
                .entries
                .iter()
                .map(|(r, c)| format!("({r},{c})"))
                .collect::<Vec<_>>()
                .join(", "),
            ReprForm::Csr => self.dump(mask).replacen('\n', " | ", 1),
        }
    }

    /// Entropy of the symbol stream; `None` when the stream is empty.
    pub fn entropy(self, mask: &BinaryMask) -> Option<f64> {
        let h = histogram(self.symbols(mask));
        shannon_entropy(h.values()).ok()
    }
}
