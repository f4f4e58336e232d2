//! Canonical Huffman codes over a dense alphabet `0..n`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::bits::{BitReader, BitWriter};
use super::CoderError;

/// Code length and canonical code for every symbol; length 0 marks an
/// unused symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanTable {
    lengths: Vec<u8>,
    codes: Vec<u64>,
}

/// Optimal code lengths for `counts` (heap construction). A lone symbol
/// gets a 1-bit code.
pub fn code_lengths(counts: &[u64]) -> Vec<u8> {
    let mut lengths = vec![0u8; counts.len()];
    let used: Vec<usize> = (0..counts.len()).filter(|&s| counts[s] > 0).collect();
    match used.len() {
        0 => return lengths,
        1 => {
            lengths[used[0]] = 1;
            return lengths;
        }
        _ => {}
    }
    // Nodes 0..counts.len() are leaves; internal nodes are appended.
    let mut parent: Vec<usize> = vec![usize::MAX; counts.len()];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        used.iter().map(|&s| Reverse((counts[s], s))).collect();
    while heap.len() > 1 {
        let Reverse((wa, a)) = heap.pop().unwrap();
        let Reverse((wb, b)) = heap.pop().unwrap();
        let node = parent.len();
        parent.push(usize::MAX);
        parent[a] = node;
        parent[b] = node;
        heap.push(Reverse((wa + wb, node)));
    }
    for &s in &used {
        let mut depth = 0u8;
        let mut n = s;
        while parent[n] != usize::MAX {
            n = parent[n];
            depth += 1;
        }
        lengths[s] = depth;
    }
    lengths
}

impl HuffmanTable {
    pub fn build(counts: &[u64]) -> Result<Self, CoderError> {
        if counts.iter().all(|&c| c == 0) {
            return Err(CoderError::EmptyHistogram);
        }
        Self::from_lengths(code_lengths(counts))
    }

    /// Assigns canonical codes: shorter codes first, ties by symbol order.
    pub fn from_lengths(lengths: Vec<u8>) -> Result<Self, CoderError> {
        if lengths.iter().any(|&l| l > 63) {
            return Err(CoderError::InvalidTable("code length above 63".into()));
        }
        let kraft: f64 = lengths.iter().filter(|&&l| l > 0).map(|&l| (-(l as f64)).exp2()).sum();
        if kraft > 1.0 + 1e-12 || kraft == 0.0 {
            return Err(CoderError::InvalidTable(format!("kraft sum {kraft}")));
        }
        let mut order: Vec<usize> = (0..lengths.len()).filter(|&s| lengths[s] > 0).collect();
        order.sort_by_key(|&s| (lengths[s], s));
        let mut codes = vec![0u64; lengths.len()];
        let mut code = 0u64;
        let mut prev_len = lengths[order[0]];
        for (i, &s) in order.iter().enumerate() {
            if i > 0 {
                code = (code + 1) << (lengths[s] - prev_len);
            }
            prev_len = lengths[s];
            codes[s] = code;
        }
        Ok(Self { lengths, codes })
    }

    pub fn lengths(&self) -> &[u8] {
        &self.lengths
    }

    pub fn code(&self, symbol: usize) -> Option<(u64, u8)> {
        match self.lengths.get(symbol) {
            Some(&l) if l > 0 => Some((self.codes[symbol], l)),
            _ => None,
        }
    }

    pub fn kraft_sum(&self) -> f64 {
        self.lengths.iter().filter(|&&l| l > 0).map(|&l| (-(l as f64)).exp2()).sum()
    }

    pub fn encode_symbol(&self, symbol: usize, out: &mut BitWriter) -> Result<(), CoderError> {
        let (code, len) = self.code(symbol).ok_or(CoderError::UnknownSymbol(symbol))?;
        out.write_bits(code, len as u32);
        Ok(())
    }

    pub fn decoder(&self) -> HuffmanDecoder {
        HuffmanDecoder::new(self)
    }
}

pub fn huffman_encode(symbols: &[usize], table: &HuffmanTable) -> Result<Vec<u8>, CoderError> {
    let mut w = BitWriter::new();
    for &s in symbols {
        table.encode_symbol(s, &mut w)?;
    }
    Ok(w.finish())
}

pub fn huffman_decode(bytes: &[u8], count: usize, table: &HuffmanTable) -> Result<Vec<usize>, CoderError> {
    let dec = table.decoder();
    let mut r = BitReader::new(bytes);
    (0..count).map(|_| dec.decode(&mut r)).collect()
}

/// Canonical decoding tables: per length, the first code and the offset
/// into the symbol list sorted by (length, symbol).
#[derive(Debug, Clone)]
pub struct HuffmanDecoder {
    first_code: Vec<u64>,
    count: Vec<u64>,
    offset: Vec<usize>,
    sorted: Vec<usize>,
}

impl HuffmanDecoder {
    fn new(table: &HuffmanTable) -> Self {
        let max_len = *table.lengths.iter().max().unwrap_or(&0) as usize;
        let mut count = vec![0u64; max_len + 1];
        for &l in table.lengths.iter().filter(|&&l| l > 0) {
            count[l as usize] += 1;
        }
        let mut sorted: Vec<usize> = (0..table.lengths.len()).filter(|&s| table.lengths[s] > 0).collect();
        sorted.sort_by_key(|&s| (table.lengths[s], s));
        let mut first_code = vec![0u64; max_len + 1];
        let mut offset = vec![0usize; max_len + 1];
        let mut code = 0u64;
        let mut seen = 0usize;
        for len in 1..=max_len {
            first_code[len] = code;
            offset[len] = seen;
            code = (code + count[len]) << 1;
            seen += count[len] as usize;
        }
        Self { first_code, count, offset, sorted }
    }

    pub fn decode(&self, r: &mut BitReader) -> Result<usize, CoderError> {
        let mut code = 0u64;
        for len in 1..self.first_code.len() {
            code = (code << 1) | r.read_bit()? as u64;
            let delta = code.wrapping_sub(self.first_code[len]);
            if code >= self.first_code[len] && delta < self.count[len] {
                return Ok(self.sorted[self.offset[len] + delta as usize]);
            }
        }
        Err(CoderError::InvalidCode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::shannon_entropy;
    use proptest::prelude::*;

    /// Cheapest total cost over every length assignment satisfying Kraft.
    fn brute_force_optimal_cost(counts: &[u64]) -> u64 {
        let n = counts.len();
        let max_len = n as u32;
        let mut best = u64::MAX;
        let mut lens = vec![1u32; n];
        loop {
            let kraft: f64 = lens.iter().map(|&l| (-(l as f64)).exp2()).sum();
            if kraft <= 1.0 {
                best = best.min(lens.iter().zip(counts).map(|(&l, &c)| l as u64 * c).sum());
            }
            let mut i = 0;
            while i < n && lens[i] == max_len {
                lens[i] = 1;
                i += 1;
            }
            if i == n {
                break;
            }
            lens[i] += 1;
        }
        best
    }

    #[test]
    fn three_symbol_lengths_match_brute_force() {
        let counts = [1, 1, 2];
        let lengths = code_lengths(&counts);
        assert_eq!(lengths, vec![2, 2, 1]);
        let cost: u64 = lengths.iter().zip(&counts).map(|(&l, &c)| l as u64 * c).sum();
        assert_eq!(cost, brute_force_optimal_cost(&counts));
    }

    #[test]
    fn single_symbol_gets_one_bit() {
        let table = HuffmanTable::build(&[0, 0, 7]).unwrap();
        assert_eq!(table.code(2), Some((0, 1)));
        let bytes = huffman_encode(&[2; 7], &table).unwrap();
        assert_eq!(bytes, vec![0]);
        assert_eq!(huffman_decode(&bytes, 7, &table).unwrap(), vec![2; 7]);
    }

    #[test]
    fn errors() {
        assert_eq!(HuffmanTable::build(&[0, 0]), Err(CoderError::EmptyHistogram));
        let table = HuffmanTable::build(&[1, 1]).unwrap();
        assert_eq!(huffman_encode(&[5], &table), Err(CoderError::UnknownSymbol(5)));
        assert!(HuffmanTable::from_lengths(vec![1, 1, 1]).is_err());
    }

    #[test]
    fn canonical_codes() {
        let table = HuffmanTable::from_lengths(vec![2, 1, 3, 3]).unwrap();
        assert_eq!(table.code(1), Some((0b0, 1)));
        assert_eq!(table.code(0), Some((0b10, 2)));
        assert_eq!(table.code(2), Some((0b110, 3)));
        assert_eq!(table.code(3), Some((0b111, 3)));
    }

    proptest! {
        #[test]
        fn optimal_on_small_alphabets(counts in proptest::collection::vec(1u64..20, 2..6)) {
            let lengths = code_lengths(&counts);
            let cost: u64 = lengths.iter().zip(&counts).map(|(&l, &c)| l as u64 * c).sum();
            prop_assert_eq!(cost, brute_force_optimal_cost(&counts));
        }

        #[test]
        fn round_trip_and_entropy_bounds(symbols in proptest::collection::vec(0usize..40, 1..400)) {
            let mut counts = vec![0u64; 40];
            for &s in &symbols {
                counts[s] += 1;
            }
            let table = HuffmanTable::build(&counts).unwrap();
            let used = counts.iter().filter(|&&c| c > 0).count();
            if used > 1 {
                prop_assert!((table.kraft_sum() - 1.0).abs() < 1e-12);
            }
            let bits: u64 = symbols.iter().map(|&s| table.code(s).unwrap().1 as u64).sum();
            let h = shannon_entropy(&counts).unwrap();
            let n = symbols.len() as f64;
            prop_assert!(bits as f64 >= (h * n - 1e-9).ceil());
            prop_assert!((bits as f64) / n <= h + 1.0 + 1e-9);
            let bytes = huffman_encode(&symbols, &table).unwrap();
            prop_assert_eq!(huffman_decode(&bytes, symbols.len(), &table).unwrap(), symbols);
        }
    }
}
