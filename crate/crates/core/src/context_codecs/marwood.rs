//! Global-count model: the next pixel is a 1 with probability
//! `remaining ones / remaining pixels`.

use super::{stable_hash, PixelModel};
use crate::codec::CodecError;
use crate::coder::{quantize, PROB_ONE};

/// Remaining ones `V_r` and remaining pixels `N_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GlobalCounts {
    ones: u64,
    pixels: u64,
}

impl GlobalCounts {
    pub fn new(ones: u64, pixels: u64) -> Result<Self, CodecError> {
        if ones > pixels {
            return Err(CodecError::CorruptHeader(format!("{ones} ones in {pixels} pixels")));
        }
        Ok(Self { ones, pixels })
    }

    pub fn remaining_ones(&self) -> u64 {
        self.ones
    }

    pub fn remaining_pixels(&self) -> u64 {
        self.pixels
    }

    /// `V_r / N_r`, or 0 once every pixel is coded.
    pub fn probability(&self) -> f64 {
        if self.pixels == 0 {
            0.0
        } else {
            self.ones as f64 / self.pixels as f64
        }
    }

    /// `V_r / N_r` on the 16-bit scale, computed in integers.
    pub fn p1(&self) -> u32 {
        if self.pixels == 0 {
            return quantize(0.0);
        }
        let scaled = (self.ones as u128 * PROB_ONE as u128 * 2 + self.pixels as u128) / (2 * self.pixels as u128);
        crate::coder::arith::clamp_prob(scaled as u32)
    }

    pub fn update(&mut self, bit: bool) -> Result<(), CodecError> {
        if self.pixels == 0 || (bit && self.ones == 0) || (!bit && self.ones == self.pixels) {
            return Err(CodecError::CorruptStream("pixel contradicts remaining counts".into()));
        }
        if bit {
            self.ones -= 1;
        }
        self.pixels -= 1;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MarwoodModel {
    counts: GlobalCounts,
}

impl MarwoodModel {
    pub fn new(ones: u64, pixels: u64) -> Result<Self, CodecError> {
        Ok(Self { counts: GlobalCounts::new(ones, pixels)? })
    }

    pub fn counts(&self) -> GlobalCounts {
        self.counts
    }
}

impl PixelModel for MarwoodModel {
    fn predict(&mut self, _pattern: u16) -> u32 {
        self.counts.p1()
    }

    fn update(&mut self, bit: bool) -> Result<(), CodecError> {
        self.counts.update(bit)
    }

    fn digest(&self) -> u64 {
        stable_hash(&self.counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context_codecs::{decode_with, encode_with, ideal_cost_bits, probability_trace};
    use crate::image_io::BinaryMask;

    fn log2_binomial(n: u64, k: u64) -> f64 {
        (0..k).map(|i| ((n - i) as f64).log2() - ((i + 1) as f64).log2()).sum()
    }

    fn table1() -> BinaryMask {
        BinaryMask::from_rows(&["1010", "0001", "0100", "0010"]).unwrap()
    }

    #[test]
    fn exact_probability_product_is_inverse_binomial() {
        // Accumulate the unquantized probabilities directly.
        let m = table1();
        let (mut ones, mut left) = (5.0f64, 16.0f64);
        let mut log_product = 0.0;
        for &b in m.bits() {
            let p = ones / left;
            log_product += if b { p.log2() } else { (1.0 - p).log2() };
            if b {
                ones -= 1.0;
            }
            left -= 1.0;
        }
        assert!((-log_product - 4368f64.log2()).abs() < 1e-9);
        assert!((4368f64.log2() - 12.0928).abs() < 1e-4);
        assert!((log2_binomial(16, 5) - 4368f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn table1_payload() {
        let m = table1();
        let mut model = MarwoodModel::new(5, 16).unwrap();
        let trace = probability_trace(&mut model, &m).unwrap();
        let ideal = ideal_cost_bits(&trace);
        assert!((ideal - 4368f64.log2()).abs() < 0.01, "{ideal}");
        let payload = encode_with(&mut MarwoodModel::new(5, 16).unwrap(), &m).unwrap();
        assert_eq!(payload.len(), 2);
        let back = decode_with(&mut MarwoodModel::new(5, 16).unwrap(), &payload, 4, 4).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn full_mask_is_nearly_free() {
        let m = BinaryMask::full(32, 32);
        let mut model = MarwoodModel::new(1024, 1024).unwrap();
        let trace = probability_trace(&mut model, &m).unwrap();
        assert!(trace.iter().all(|&(p, _)| p == 65535));
        assert!(ideal_cost_bits(&trace) < 0.05);
        let payload = encode_with(&mut MarwoodModel::new(1024, 1024).unwrap(), &m).unwrap();
        assert_eq!(payload.len(), 1);
    }

    #[test]
    fn corrupt_header() {
        assert!(matches!(MarwoodModel::new(5, 4), Err(CodecError::CorruptHeader(_))));
    }

    #[test]
    fn counts_end_at_zero() {
        let m = table1();
        let mut model = MarwoodModel::new(5, 16).unwrap();
        encode_with(&mut model, &m).unwrap();
        assert_eq!(model.counts().remaining_ones(), 0);
        assert_eq!(model.counts().remaining_pixels(), 0);
    }
}
