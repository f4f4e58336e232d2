//! Mask codecs that code every pixel in row-major order with the binary
//! arithmetic coder, each driven by its own probability model.
//!
//! A model sees the neighbourhood pattern of the current pixel (built from
//! already-coded pixels only), returns a 16-bit probability of a 1, and is
//! then told the actual bit. Encoder and decoder run the same model, so
//! they stay in lockstep.

pub mod bpaq;
pub mod demaret;
pub mod layout;
pub mod marwood;

use crate::codec::CodecError;
use crate::coder::{ArithDecoder, ArithEncoder};
use crate::image_io::BinaryMask;

pub use bpaq::{BpaqVariant, LinearMixModel, LogisticMixModel};
pub use demaret::DemaretModel;
pub use layout::{neighbourhood_pattern, Context, ContextLayout, NEIGHBOURS};
pub use marwood::{GlobalCounts, MarwoodModel};

/// A sequential bit predictor over a mask in row-major order.
pub trait PixelModel {
    /// Probability (16-bit scale) that the current pixel is set, given the
    /// causal neighbourhood `pattern` (see [`neighbourhood_pattern`]).
    fn predict(&mut self, pattern: u16) -> u32;

    /// Learns from the coded bit. Always follows a `predict` call.
    fn update(&mut self, bit: bool) -> Result<(), CodecError>;

    /// Hash of the complete model state.
    fn digest(&self) -> u64;
}

pub fn encode_with<M: PixelModel>(model: &mut M, mask: &BinaryMask) -> Result<Vec<u8>, CodecError> {
    encode_observed(model, mask, |_, _, _| {})
}

/// Encodes and reports `(model, p1, bit)` after every pixel.
pub fn encode_observed<M: PixelModel>(
    model: &mut M,
    mask: &BinaryMask,
    mut observe: impl FnMut(&M, u32, bool),
) -> Result<Vec<u8>, CodecError> {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut enc = ArithEncoder::new();
    for y in 0..h {
        for x in 0..w {
            let bit = bits[y * w + x];
            let p1 = model.predict(neighbourhood_pattern(bits, w, x, y));
            enc.encode(p1, bit);
            model.update(bit)?;
            observe(model, p1, bit);
        }
    }
    Ok(enc.finish())
}

pub fn decode_with<M: PixelModel>(
    model: &mut M,
    payload: &[u8],
    width: usize,
    height: usize,
) -> Result<BinaryMask, CodecError> {
    decode_observed(model, payload, width, height, |_, _, _| {})
}

pub fn decode_observed<M: PixelModel>(
    model: &mut M,
    payload: &[u8],
    width: usize,
    height: usize,
    mut observe: impl FnMut(&M, u32, bool),
) -> Result<BinaryMask, CodecError> {
    let mut bits = vec![false; width * height];
    let mut dec = ArithDecoder::new(payload)?;
    for y in 0..height {
        for x in 0..width {
            let p1 = model.predict(neighbourhood_pattern(&bits, width, x, y));
            let bit = dec.decode(p1)?;
            bits[y * width + x] = bit;
            model.update(bit)?;
            observe(model, p1, bit);
        }
    }
    Ok(BinaryMask::from_bits(width, height, bits)?)
}

/// The `(p1, bit)` sequence a model assigns while coding `mask`.
pub fn probability_trace<M: PixelModel>(model: &mut M, mask: &BinaryMask) -> Result<Vec<(u32, bool)>, CodecError> {
    let mut trace = Vec::with_capacity(mask.len());
    encode_observed(model, mask, |_, p, b| trace.push((p, b)))?;
    Ok(trace)
}

/// Sum of `-log2 p(bit)` over a trace.
pub fn ideal_cost_bits(trace: &[(u32, bool)]) -> f64 {
    trace.iter().map(|&(p, b)| crate::coder::bit_cost(p, b)).sum()
}

pub(crate) fn stable_hash<T: std::hash::Hash>(value: &T) -> u64 {
    use std::hash::Hasher;
    let mut h = std::collections::hash_map::DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}
