//! Binary arithmetic coder with 32-bit integer registers.
//!
//! Interval arithmetic follows the Witten-Neal-Cleary scheme: the encoder
//! emits one bit per doubling of the interval and counts straddling
//! (underflow) doublings as pending bits, resolved by the next emitted bit.
//! Probabilities are 16-bit: `p1` is the chance of a 1 in units of 1/65536.

use super::CoderError;

pub const PROB_BITS: u32 = 16;
pub const PROB_ONE: u32 = 1 << PROB_BITS;
pub const PROB_MIN: u32 = 1;
pub const PROB_MAX: u32 = PROB_ONE - 1;

const HALF: u64 = 1 << 31;
const QUARTER: u64 = 1 << 30;
const THREE_QUARTERS: u64 = HALF + QUARTER;
const TOP: u64 = (1 << 32) - 1;

/// Zero bits the decoder may read past the end of a payload. The encoder
/// flushes at least two bits, so a well-formed stream never needs more
/// than 30.
const MAX_OVERREAD_BITS: u64 = 32;

/// Clamps `p1` into the codable range `[1, 65535]`.
#[inline]
pub fn clamp_prob(p1: u32) -> u32 {
    p1.clamp(PROB_MIN, PROB_MAX)
}

/// Quantizes a real probability of a 1 to the 16-bit scale.
#[inline]
pub fn quantize(p: f64) -> u32 {
    if p.is_nan() {
        return PROB_ONE / 2;
    }
    clamp_prob((p * PROB_ONE as f64).round().clamp(0.0, PROB_ONE as f64) as u32)
}

/// Ideal cost in bits of coding `bit` under quantized `p1`.
#[inline]
pub fn bit_cost(p1: u32, bit: bool) -> f64 {
    let p = clamp_prob(p1) as f64 / PROB_ONE as f64;
    -(if bit { p } else { 1.0 - p }).log2()
}

#[inline]
fn split(low: u64, high: u64, p1: u32) -> u64 {
    // Size of the sub-interval for a 1. With range > 2^30 and p1 in
    // [1, 65535] both sub-intervals are non-empty.
    let range = high - low + 1;
    (range * clamp_prob(p1) as u64) >> PROB_BITS
}

#[derive(Debug, Clone)]
pub struct ArithEncoder {
    low: u64,
    high: u64,
    pending: u64,
    out: Vec<u8>,
    acc: u8,
    acc_bits: u32,
}

impl Default for ArithEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl ArithEncoder {
    pub fn new() -> Self {
        Self { low: 0, high: TOP, pending: 0, out: Vec::new(), acc: 0, acc_bits: 0 }
    }

    #[inline]
    fn put(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | bit as u8;
        self.acc_bits += 1;
        if self.acc_bits == 8 {
            self.out.push(self.acc);
            self.acc = 0;
            self.acc_bits = 0;
        }
    }

    #[inline]
    fn emit(&mut self, bit: bool) {
        self.put(bit);
        while self.pending > 0 {
            self.put(!bit);
            self.pending -= 1;
        }
    }

    /// Codes `bit` with probability `p1 / 65536` of it being 1.
    pub fn encode(&mut self, p1: u32, bit: bool) {
        let r1 = split(self.low, self.high, p1);
        if bit {
            self.high = self.low + r1 - 1;
        } else {
            self.low += r1;
        }
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    /// Number of whole bytes emitted so far.
    pub fn bytes_written(&self) -> usize {
        self.out.len()
    }

    /// Flushes two disambiguating bits and pads the final byte with zeros.
    pub fn finish(mut self) -> Vec<u8> {
        self.pending += 1;
        let bit = self.low >= QUARTER;
        self.emit(bit);
        while self.acc_bits != 0 {
            self.put(false);
        }
        self.out
    }
}

#[derive(Debug, Clone)]
pub struct ArithDecoder<'a> {
    data: &'a [u8],
    bit_pos: u64,
    low: u64,
    high: u64,
    value: u64,
}

impl<'a> ArithDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self, CoderError> {
        let mut d = Self { data, bit_pos: 0, low: 0, high: TOP, value: 0 };
        for _ in 0..32 {
            d.value = (d.value << 1) | d.next_bit()? as u64;
        }
        Ok(d)
    }

    #[inline]
    fn next_bit(&mut self) -> Result<bool, CoderError> {
        let byte = (self.bit_pos / 8) as usize;
        let bit = match self.data.get(byte) {
            Some(b) => b & (0x80 >> (self.bit_pos % 8)) != 0,
            None => {
                if self.bit_pos >= self.data.len() as u64 * 8 + MAX_OVERREAD_BITS {
                    return Err(CoderError::UnexpectedEnd);
                }
                false
            }
        };
        self.bit_pos += 1;
        Ok(bit)
    }

    pub fn decode(&mut self, p1: u32) -> Result<bool, CoderError> {
        let r1 = split(self.low, self.high, p1);
        let bit = self.value - self.low < r1;
        if bit {
            self.high = self.low + r1 - 1;
        } else {
            self.low += r1;
        }
        loop {
            if self.high < HALF {
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | self.next_bit()? as u64;
        }
        Ok(bit)
    }
}
