//! Neighbour-count model: the context is the number of set pixels among
//! the twelve causal neighbours, each with its own adaptive counts.

use super::{stable_hash, PixelModel};
use crate::codec::CodecError;
use crate::coder::quantize;

/// Additive prior on each count.
pub const DEMARET_PRIOR: f64 = 0.5;

#[derive(Debug, Clone, Default)]
pub struct DemaretModel {
    counts: [[u32; 2]; 13],
    current: usize,
}

impl DemaretModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Context of a neighbourhood pattern, `0..=12`.
    pub fn context(pattern: u16) -> usize {
        pattern.count_ones() as usize
    }

    pub fn probability(&self, context: usize) -> f64 {
        let [c0, c1] = self.counts[context];
        (c1 as f64 + DEMARET_PRIOR) / ((c0 + c1) as f64 + 2.0 * DEMARET_PRIOR)
    }
}

impl PixelModel for DemaretModel {
    fn predict(&mut self, pattern: u16) -> u32 {
        self.current = Self::context(pattern);
        quantize(self.probability(self.current))
    }

    fn update(&mut self, bit: bool) -> Result<(), CodecError> {
        self.counts[self.current][bit as usize] += 1;
        Ok(())
    }

    fn digest(&self) -> u64 {
        stable_hash(&(self.counts, self.current))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context_codecs::{
        decode_with, encode_observed, encode_with, ideal_cost_bits, probability_trace, MarwoodModel,
    };
    use crate::image_io::BinaryMask;

    #[test]
    fn first_pixel_has_context_zero() {
        let mut m = BinaryMask::full(5, 5);
        m.set(0, 0, true);
        let mut model = DemaretModel::new();
        let mut contexts = Vec::new();
        encode_observed(&mut model, &m, |md, _, _| contexts.push(md.current)).unwrap();
        assert_eq!(contexts[0], 0);
        // (1,0) sees only its left neighbour.
        assert_eq!(contexts[1], 1);
    }

    #[test]
    fn all_zero_mask_descends_toward_zero() {
        let m = BinaryMask::new(32, 32);
        let trace = probability_trace(&mut DemaretModel::new(), &m).unwrap();
        assert!(trace.windows(2).all(|w| w[1].0 <= w[0].0));
        assert!(trace.last().unwrap().0 < 40);
        // Under the prior the cost of n zeros in one context is
        // log2( Gamma(n+1) Gamma(1/2) / (Gamma(n+1/2)) ), accumulated term by term.
        let n = m.len();
        let oracle: f64 = (0..n).map(|i| -((i as f64 + 0.5) / (i as f64 + 1.0)).log2()).sum();
        assert!((ideal_cost_bits(&trace) - oracle).abs() < 0.05, "{} vs {oracle}", ideal_cost_bits(&trace));
    }

    #[test]
    fn all_zero_mask_versus_global_counts() {
        // The global-count model knows there are no ones and pays almost
        // nothing; the neighbour-count model must learn it.
        let m = BinaryMask::new(32, 32);
        let demaret = ideal_cost_bits(&probability_trace(&mut DemaretModel::new(), &m).unwrap());
        let marwood = ideal_cost_bits(&probability_trace(&mut MarwoodModel::new(0, 1024).unwrap(), &m).unwrap());
        assert!(marwood < 0.05);
        assert!(demaret > marwood);
        let pd = encode_with(&mut DemaretModel::new(), &m).unwrap();
        let pm = encode_with(&mut MarwoodModel::new(0, 1024).unwrap(), &m).unwrap();
        assert!(pd.len() >= pm.len());
    }

    #[test]
    fn round_trip() {
        let m = BinaryMask::from_rows(&["10100", "00010", "01000", "00101"]).unwrap();
        let payload = encode_with(&mut DemaretModel::new(), &m).unwrap();
        assert_eq!(decode_with(&mut DemaretModel::new(), &payload, 5, 4).unwrap(), m);
    }
}
