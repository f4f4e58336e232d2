//! Bottom-up context-mixing models for binary masks.
//!
//! | variant | local contexts                         | mixing   |
//! |---------|----------------------------------------|----------|
//! | S       | order 1 (left neighbour)               | linear   |
//! | M       | orders 1..=12, contiguous              | linear   |
//! | L       | orders 1..=12, contiguous              | logistic |
//! | XL      | 15 subsets of the four nearest pixels  | logistic |
//!
//! Every variant also uses the global remaining-ones probability. Local
//! contexts keep per-pattern counts with a semi-stationary update: the
//! observed count is incremented and the other is halved when above 2.

use super::layout::ContextLayout;
use super::marwood::GlobalCounts;
use super::{stable_hash, PixelModel};
use crate::codec::CodecError;
use crate::coder::quantize;

/// Evidence floor of the linear mixer.
pub const EVIDENCE_FLOOR: f64 = 0.5;
/// Learning rate of the logistic mixer.
pub const LOGISTIC_RATE: f64 = 0.02;
pub const LINEAR_INITIAL_WEIGHT: f64 = 1.0;
pub const LOGISTIC_INITIAL_WEIGHT: f64 = 0.1;
/// Additive smoothing of context probabilities: `(n1 + a) / (n0 + n1 + 2a)`.
pub const COUNT_PRIOR: f64 = 0.2;

const P_MIN: f64 = 1.0 / 65536.0;
const P_MAX: f64 = 65535.0 / 65536.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BpaqVariant {
    S,
    M,
    L,
    Xl,
}

impl BpaqVariant {
    pub fn layout(self) -> ContextLayout {
        match self {
            BpaqVariant::S => ContextLayout::contiguous(1),
            BpaqVariant::M | BpaqVariant::L => ContextLayout::contiguous(12),
            BpaqVariant::Xl => ContextLayout::nearest_four_subsets(),
        }
    }
}

/// Per-pattern `[n0, n1]` tables, one per context of a layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextBank {
    layout_masks: Vec<u16>,
    tables: Vec<Vec<[u32; 2]>>,
    slots: Vec<usize>,
}

impl ContextBank {
    pub fn new(layout: &ContextLayout) -> Self {
        Self {
            layout_masks: layout.contexts.iter().map(|c| c.neighbours).collect(),
            tables: layout.contexts.iter().map(|c| vec![[0; 2]; c.table_len()]).collect(),
            slots: vec![0; layout.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Selects the active pattern of every context.
    #[inline]
    pub fn select(&mut self, pattern: u16) {
        for (slot, &neighbours) in self.slots.iter_mut().zip(&self.layout_masks) {
            *slot = super::layout::Context { neighbours }.index(pattern);
        }
    }

    /// Active `[n0, n1]` of context `i`.
    #[inline]
    pub fn counts(&self, i: usize) -> [u32; 2] {
        self.tables[i][self.slots[i]]
    }

    #[inline]
    pub fn smoothed(&self, i: usize) -> f64 {
        let [n0, n1] = self.counts(i);
        (n1 as f64 + COUNT_PRIOR) / ((n0 + n1) as f64 + 2.0 * COUNT_PRIOR)
    }

    /// Semi-stationary update of every active entry.
    pub fn update(&mut self, bit: bool) {
        let (seen, other) = (bit as usize, !bit as usize);
        for (table, &slot) in self.tables.iter_mut().zip(&self.slots) {
            let entry = &mut table[slot];
            entry[seen] = entry[seen].saturating_add(1);
            if entry[other] > 2 {
                entry[other] /= 2;
            }
        }
    }
}

/// Linear evidence mixing (variants S and M).
#[derive(Debug, Clone)]
pub struct LinearMixModel {
    bank: ContextBank,
    weights: Vec<f64>,
    static_context: usize,
    global: GlobalCounts,
    last: LinearState,
}

/// Intermediate quantities of the last prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinearState {
    pub s0: f64,
    pub s1: f64,
    pub p_dyn: f64,
    pub p_stat: f64,
    pub p_global: f64,
    pub p_final: f64,
}

impl LinearMixModel {
    pub fn new(variant: BpaqVariant, ones: u64, pixels: u64) -> Result<Self, CodecError> {
        let static_context = match variant {
            BpaqVariant::S => 0,
            BpaqVariant::M => 3,
            _ => panic!("variant {variant:?} uses logistic mixing"),
        };
        let layout = variant.layout();
        Ok(Self {
            weights: vec![LINEAR_INITIAL_WEIGHT; layout.len()],
            bank: ContextBank::new(&layout),
            static_context,
            global: GlobalCounts::new(ones, pixels)?,
            last: LinearState::default(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn last(&self) -> LinearState {
        self.last
    }
}

impl PixelModel for LinearMixModel {
    fn predict(&mut self, pattern: u16) -> u32 {
        self.bank.select(pattern);
        let (mut s0, mut s1) = (EVIDENCE_FLOOR, EVIDENCE_FLOOR);
        for (i, &w) in self.weights.iter().enumerate() {
            let [n0, n1] = self.bank.counts(i);
            s0 += w * n0 as f64;
            s1 += w * n1 as f64;
        }
        let p_dyn = s1 / (s0 + s1);
        let p_stat = self.bank.smoothed(self.static_context);
        let p_global = self.global.probability();
        let p_final = 0.4 * p_dyn + 0.2 * p_stat + 0.4 * p_global;
        self.last = LinearState { s0, s1, p_dyn, p_stat, p_global, p_final };
        quantize(p_final)
    }

    fn update(&mut self, bit: bool) -> Result<(), CodecError> {
        let LinearState { s0, s1, p_dyn, .. } = self.last;
        let s = s0 + s1;
        // The error term uses the dynamically mixed probability.
        let err = bit as u8 as f64 - p_dyn;
        for (i, w) in self.weights.iter_mut().enumerate() {
            let [n0, n1] = self.bank.counts(i);
            let grad = (s * n1 as f64 - s1 * (n0 + n1) as f64) / (s0 * s1);
            *w = (*w + err * grad).max(0.0);
        }
        self.bank.update(bit);
        self.global.update(bit)
    }

    fn digest(&self) -> u64 {
        let w: Vec<u64> = self.weights.iter().map(|w| w.to_bits()).collect();
        stable_hash(&(&self.bank, w, self.global))
    }
}

#[inline]
pub fn stretch(p: f64) -> f64 {
    let p = p.clamp(P_MIN, P_MAX);
    (p / (1.0 - p)).ln()
}

#[inline]
pub fn squash(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Logistic mixing of stretched context probabilities (variants L and XL).
/// The last mixer input is the global remaining-ones probability.
#[derive(Debug, Clone)]
pub struct LogisticMixModel {
    bank: ContextBank,
    weights: Vec<f64>,
    inputs: Vec<f64>,
    global: GlobalCounts,
    p_final: f64,
}

impl LogisticMixModel {
    pub fn new(variant: BpaqVariant, ones: u64, pixels: u64) -> Result<Self, CodecError> {
        assert!(matches!(variant, BpaqVariant::L | BpaqVariant::Xl), "variant {variant:?} uses linear mixing");
        let layout = variant.layout();
        let n_inputs = layout.len() + 1;
        Ok(Self {
            bank: ContextBank::new(&layout),
            weights: vec![LOGISTIC_INITIAL_WEIGHT; n_inputs],
            inputs: vec![0.0; n_inputs],
            global: GlobalCounts::new(ones, pixels)?,
            p_final: 0.5,
        })
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn last_probability(&self) -> f64 {
        self.p_final
    }
}

impl PixelModel for LogisticMixModel {
    fn predict(&mut self, pattern: u16) -> u32 {
        self.bank.select(pattern);
        let local = self.bank.len();
        for i in 0..local {
            self.inputs[i] = stretch(self.bank.smoothed(i));
        }
        self.inputs[local] = stretch(self.global.probability());
        let dot: f64 = self.inputs.iter().zip(&self.weights).map(|(t, w)| t * w).sum();
        self.p_final = squash(dot).clamp(P_MIN, P_MAX);
        quantize(self.p_final)
    }

    fn update(&mut self, bit: bool) -> Result<(), CodecError> {
        let err = bit as u8 as f64 - self.p_final;
        for (w, t) in self.weights.iter_mut().zip(&self.inputs) {
            *w += LOGISTIC_RATE * t * err;
        }
        self.bank.update(bit);
        self.global.update(bit)
    }

    fn digest(&self) -> u64 {
        let w: Vec<u64> = self.weights.iter().map(|w| w.to_bits()).collect();
        stable_hash(&(&self.bank, w, self.global))
    }
}

/// Either mixer behind one type, selected by variant.
#[derive(Debug, Clone)]
pub enum BpaqModel {
    Linear(LinearMixModel),
    Logistic(LogisticMixModel),
}

impl BpaqModel {
    pub fn new(variant: BpaqVariant, ones: u64, pixels: u64) -> Result<Self, CodecError> {
        Ok(match variant {
            BpaqVariant::S | BpaqVariant::M => BpaqModel::Linear(LinearMixModel::new(variant, ones, pixels)?),
            BpaqVariant::L | BpaqVariant::Xl => BpaqModel::Logistic(LogisticMixModel::new(variant, ones, pixels)?),
        })
    }
}

impl PixelModel for BpaqModel {
    #[inline]
    fn predict(&mut self, pattern: u16) -> u32 {
        match self {
            BpaqModel::Linear(m) => m.predict(pattern),
            BpaqModel::Logistic(m) => m.predict(pattern),
        }
    }

    #[inline]
    fn update(&mut self, bit: bool) -> Result<(), CodecError> {
        match self {
            BpaqModel::Linear(m) => m.update(bit),
            BpaqModel::Logistic(m) => m.update(bit),
        }
    }

    fn digest(&self) -> u64 {
        match self {
            BpaqModel::Linear(m) => m.digest(),
            BpaqModel::Logistic(m) => m.digest(),
        }
    }
}
