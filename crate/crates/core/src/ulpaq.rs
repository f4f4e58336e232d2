//! Byte-stream context mixing reduced to its lightest form: one adaptive
//! probability per intra-byte context, refined by a single SSE stage, over
//! varint-serialized integer streams.
//!
//! All probability arithmetic here is integer so that payloads are
//! identical on every platform.

use std::sync::OnceLock;

use crate::codec::CodecError;
use crate::coder::arith::clamp_prob;
use crate::coder::{ArithDecoder, ArithEncoder, PROB_ONE};
use crate::repr::{CooList, CsrForm, RunLengthSeq};

pub const MODEL_RATE: u32 = 5;
pub const SSE_RATE: u32 = 7;
pub const SSE_KNOTS: usize = 33;

/// Appends `value` as little-endian base-128 groups; the high bit of each
/// byte flags a continuation.
pub fn write_varint(out: &mut Vec<u8>, mut value: u64) {
    while value >= 0x80 {
        out.push((value as u8 & 0x7F) | 0x80);
        value >>= 7;
    }
    out.push(value as u8);
}

pub fn read_varint(bytes: &[u8], pos: &mut usize) -> Result<u64, CodecError> {
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let &b = bytes.get(*pos).ok_or(CodecError::TruncatedVarint)?;
        *pos += 1;
        if shift > 63 {
            return Err(CodecError::CorruptStream("varint longer than 64 bits".into()));
        }
        value |= ((b & 0x7F) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

pub fn runs_to_bytes(runs: &RunLengthSeq) -> Vec<u8> {
    let mut out = Vec::with_capacity(runs.runs.len());
    for &r in &runs.runs {
        write_varint(&mut out, r as u64);
    }
    out
}

pub fn bytes_to_runs(bytes: &[u8]) -> Result<RunLengthSeq, CodecError> {
    let mut pos = 0;
    let mut runs = Vec::new();
    while pos < bytes.len() {
        let v = read_varint(bytes, &mut pos)?;
        runs.push(u32::try_from(v).map_err(|_| CodecError::CorruptStream(format!("run {v} too large")))?);
    }
    Ok(RunLengthSeq { runs })
}

/// Row and column of every entry, interleaved.
pub fn coo_to_bytes(coo: &CooList) -> Vec<u8> {
    let mut out = Vec::with_capacity(coo.entries.len() * 2);
    for &(r, c) in &coo.entries {
        write_varint(&mut out, r as u64);
        write_varint(&mut out, c as u64);
    }
    out
}

pub fn bytes_to_coo(bytes: &[u8]) -> Result<CooList, CodecError> {
    let ints = read_all_varints(bytes)?;
    if ints.len() % 2 != 0 {
        return Err(CodecError::CorruptStream("odd number of coordinates".into()));
    }
    let entries = ints.chunks(2).map(|p| (p[0] as u32, p[1] as u32)).collect();
    Ok(CooList { entries })
}

/// Column indices followed by the per-row counts.
pub fn csr_to_bytes(csr: &CsrForm) -> Vec<u8> {
    let mut out = Vec::with_capacity(csr.column_indices.len() + csr.row_counts.len());
    for &c in csr.column_indices.iter().chain(&csr.row_counts) {
        write_varint(&mut out, c as u64);
    }
    out
}

pub fn bytes_to_csr(bytes: &[u8], height: usize) -> Result<CsrForm, CodecError> {
    let ints = read_all_varints(bytes)?;
    if ints.len() < height {
        return Err(CodecError::CorruptStream("fewer integers than rows".into()));
    }
    let split = ints.len() - height;
    Ok(CsrForm {
        column_indices: ints[..split].iter().map(|&v| v as u32).collect(),
        row_counts: ints[split..].iter().map(|&v| v as u32).collect(),
    })
}

fn read_all_varints(bytes: &[u8]) -> Result<Vec<u64>, CodecError> {
    let mut pos = 0;
    let mut ints = Vec::new();
    while pos < bytes.len() {
        ints.push(read_varint(bytes, &mut pos)?);
    }
    Ok(ints)
}

struct Logistic {
    stretch: Vec<i16>,
}

/// Logistic function on a 12-bit scale: input in 1/256 logit units over
/// `[-2047, 2047]`, output in `[0, 4095]`.
pub fn squash12(d: i32) -> i32 {
    const T: [i32; 33] = [
        1, 2, 3, 6, 10, 16, 27, 45, 73, 120, 194, 310, 488, 747, 1101, 1546, 2047, 2549, 2994, 3348, 3607, 3785,
        3901, 3975, 4022, 4050, 4068, 4079, 4085, 4089, 4092, 4093, 4094,
    ];
    if d > 2047 {
        return 4095;
    }
    if d < -2047 {
        return 0;
    }
    let w = d & 127;
    let i = ((d >> 7) + 16) as usize;
    (T[i] * (128 - w) + T[i + 1] * w + 64) >> 7
}

fn logistic() -> &'static Logistic {
    static TABLE: OnceLock<Logistic> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut stretch = vec![0i16; 4096];
        let mut pi = 0usize;
        for x in -2047..=2047 {
            let v = squash12(x) as usize;
            for s in stretch.iter_mut().take(v + 1).skip(pi) {
                *s = x as i16;
            }
            pi = pi.max(v + 1);
        }
        for s in stretch.iter_mut().skip(pi) {
            *s = 2047;
        }
        Logistic { stretch }
    })
}

/// Inverse of [`squash12`] on a 12-bit probability.
pub fn stretch12(p: u32) -> i32 {
    logistic().stretch[p.min(4095) as usize] as i32
}

/// One 16-bit probability per partial-byte context `(1 << bits_seen) | bits`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntraByteModel {
    probs: Vec<u32>,
    rate: u32,
}

impl IntraByteModel {
    pub fn new(rate: u32) -> Self {
        Self { probs: vec![PROB_ONE / 2; 256], rate }
    }

    #[inline]
    pub fn p1(&self, ctx: usize) -> u32 {
        self.probs[ctx]
    }

    #[inline]
    pub fn update(&mut self, ctx: usize, bit: bool) {
        let p = self.probs[ctx] as i32;
        let target = if bit { PROB_ONE as i32 } else { 0 };
        self.probs[ctx] = clamp_prob((p + ((target - p) >> self.rate)) as u32);
    }
}

/// Secondary estimation: per context, 33 knots over the stretched
/// probability axis `[-8, 8]`, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SseStage {
    knots: Vec<u32>,
    rate: Option<u32>,
    lo: usize,
    frac: u32,
}

impl SseStage {
    /// `rate: None` freezes the stage at its initial (identity) mapping.
    pub fn new(contexts: usize, rate: Option<u32>) -> Self {
        let row: Vec<u32> = (0..SSE_KNOTS as i32)
            .map(|j| clamp_prob((squash12((j - 16) * 128) * 16) as u32))
            .collect();
        Self { knots: row.repeat(contexts), rate, lo: 0, frac: 0 }
    }

    pub fn knots(&self, ctx: usize) -> &[u32] {
        &self.knots[ctx * SSE_KNOTS..(ctx + 1) * SSE_KNOTS]
    }

    #[inline]
    pub fn refine(&mut self, p1: u32, ctx: usize) -> u32 {
        let s = stretch12(p1 >> 4) + 2048;
        self.lo = ctx * SSE_KNOTS + (s >> 7) as usize;
        self.frac = (s & 127) as u32;
        let (a, b) = (self.knots[self.lo], self.knots[self.lo + 1]);
        clamp_prob((a * (128 - self.frac) + b * self.frac) >> 7)
    }

    #[inline]
    pub fn update(&mut self, bit: bool) {
        let Some(rate) = self.rate else { return };
        let target = if bit { PROB_ONE as i32 } else { 0 };
        for k in [self.lo, self.lo + 1] {
            let v = self.knots[k] as i32;
            self.knots[k] = clamp_prob((v + ((target - v) >> rate)) as u32);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UlpaqConfig {
    pub model_rate: u32,
    pub sse_rate: Option<u32>,
}

impl Default for UlpaqConfig {
    fn default() -> Self {
        Self { model_rate: MODEL_RATE, sse_rate: Some(SSE_RATE) }
    }
}

/// Bit predictor over a byte stream, most significant bit first.
#[derive(Debug, Clone)]
pub struct UlpaqModel {
    model: IntraByteModel,
    sse: Option<SseStage>,
    ctx: usize,
}

impl UlpaqModel {
    pub fn new(config: UlpaqConfig) -> Self {
        Self { model: IntraByteModel::new(config.model_rate), sse: Some(SseStage::new(256, config.sse_rate)), ctx: 1 }
    }

    /// The intra-byte model alone, without the SSE stage.
    pub fn order0(rate: u32) -> Self {
        Self { model: IntraByteModel::new(rate), sse: None, ctx: 1 }
    }

    #[inline]
    pub fn p1(&mut self) -> u32 {
        let p = self.model.p1(self.ctx);
        match &mut self.sse {
            Some(sse) => {
                let refined = sse.refine(p, self.ctx);
                clamp_prob((p + refined) / 2)
            }
            None => p,
        }
    }

    #[inline]
    pub fn update(&mut self, bit: bool) {
        self.model.update(self.ctx, bit);
        if let Some(sse) = &mut self.sse {
            sse.update(bit);
        }
        self.ctx = (self.ctx << 1) | bit as usize;
        if self.ctx >= 256 {
            self.ctx = 1;
        }
    }

    pub fn digest(&self) -> u64 {
        crate::context_codecs::stable_hash(&(&self.model, &self.sse, self.ctx))
    }

    pub fn encode_observed(mut self, bytes: &[u8], mut observe: impl FnMut(&Self, u32, bool)) -> Vec<u8> {
        let mut enc = ArithEncoder::new();
        for &byte in bytes {
            for i in (0..8).rev() {
                let bit = (byte >> i) & 1 == 1;
                let p = self.p1();
                enc.encode(p, bit);
                self.update(bit);
                observe(&self, p, bit);
            }
        }
        enc.finish()
    }

    pub fn encode(self, bytes: &[u8]) -> Vec<u8> {
        self.encode_observed(bytes, |_, _, _| {})
    }

    pub fn decode_observed(
        mut self,
        payload: &[u8],
        byte_count: usize,
        mut observe: impl FnMut(&Self, u32, bool),
    ) -> Result<Vec<u8>, CodecError> {
        let mut dec = ArithDecoder::new(payload)?;
        let mut out = Vec::with_capacity(byte_count);
        for _ in 0..byte_count {
            let mut byte = 0u8;
            for _ in 0..8 {
                let p = self.p1();
                let bit = dec.decode(p)?;
                self.update(bit);
                observe(&self, p, bit);
                byte = (byte << 1) | bit as u8;
            }
            out.push(byte);
        }
        Ok(out)
    }

    pub fn decode(self, payload: &[u8], byte_count: usize) -> Result<Vec<u8>, CodecError> {
        self.decode_observed(payload, byte_count, |_, _, _| {})
    }
}

pub fn ulpaq_encode(bytes: &[u8]) -> Vec<u8> {
    UlpaqModel::new(UlpaqConfig::default()).encode(bytes)
}

pub fn ulpaq_decode(payload: &[u8], byte_count: usize) -> Result<Vec<u8>, CodecError> {
    UlpaqModel::new(UlpaqConfig::default()).decode(payload, byte_count)
}

/// Container payload layout shared by the byte-stream codecs: the byte
/// count as u32 LE, then the coded stream.
pub(crate) fn frame(byte_count: usize, coded: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + coded.len());
    out.extend_from_slice(&(byte_count as u32).to_le_bytes());
    out.extend(coded);
    out
}

pub(crate) fn unframe(payload: &[u8]) -> Result<(usize, &[u8]), CodecError> {
    if payload.len() < 4 {
        return Err(CodecError::CorruptStream("missing byte count".into()));
    }
    let n = u32::from_le_bytes(payload[..4].try_into().unwrap()) as usize;
    Ok((n, &payload[4..]))
}
