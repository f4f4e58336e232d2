//! Codec registry: maps every [`CodecId`] to its encoder and decoder.

use thiserror::Error;

use crate::coder::{CoderError, HuffmanTable};
use crate::coder::bits::{BitReader, BitWriter};
use crate::context_codecs::bpaq::BpaqModel;
use crate::context_codecs::{decode_with, encode_with, BpaqVariant, DemaretModel, MarwoodModel};
use crate::image_io::{BinaryMask, CodecId, EncodedMask, ImageIoError};
use crate::repr::{rle_decode, rle_encode, ReprError, RunLengthSeq};
use crate::ulpaq::{self, bytes_to_runs, runs_to_bytes, UlpaqModel};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CodecError {
    #[error(transparent)]
    Coder(#[from] CoderError),
    #[error("corrupt header: {0}")]
    CorruptHeader(String),
    #[error("corrupt stream: {0}")]
    CorruptStream(String),
    #[error("truncated varint")]
    TruncatedVarint,
    #[error("decoded {found} ones, header declares {expected}")]
    OnesMismatch { expected: u64, found: u64 },
    #[error("decoded {found} bytes, header declares {expected}")]
    ByteCountMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Repr(#[from] ReprError),
    #[error("{0}")]
    Image(String),
    #[error("mask too large for the container: {0}")]
    TooLarge(String),
}

impl From<ImageIoError> for CodecError {
    fn from(e: ImageIoError) -> Self {
        CodecError::Image(e.to_string())
    }
}

/// Run values at or above this are escaped and stored as raw 32-bit words.
pub const HUFFMAN_ESCAPE: usize = 255;
const TABLE_END: u8 = 0xFF;

/// Symbol stream of the Huffman run-length codec.
fn huffman_symbols(runs: &[u32]) -> Vec<usize> {
    runs.iter().map(|&r| (r as usize).min(HUFFMAN_ESCAPE)).collect()
}

pub fn rle_huffman_encode(runs: &RunLengthSeq) -> Result<Vec<u8>, CodecError> {
    if runs.runs.is_empty() {
        return Ok(Vec::new());
    }
    let symbols = huffman_symbols(&runs.runs);
    let mut counts = vec![0u64; HUFFMAN_ESCAPE + 1];
    for &s in &symbols {
        counts[s] += 1;
    }
    let table = HuffmanTable::build(&counts)?;
    let used = table.lengths().iter().rposition(|&l| l > 0).map_or(0, |i| i + 1);
    let mut out: Vec<u8> = table.lengths()[..used].to_vec();
    out.push(TABLE_END);
    let mut w = BitWriter::new();
    for (&s, &run) in symbols.iter().zip(&runs.runs) {
        table.encode_symbol(s, &mut w)?;
        if s == HUFFMAN_ESCAPE {
            w.write_bits(run as u64, 32);
        }
    }
    out.extend(w.finish());
    Ok(out)
}

pub fn rle_huffman_decode(payload: &[u8], count: usize) -> Result<RunLengthSeq, CodecError> {
    if count == 0 {
        return Ok(RunLengthSeq::default());
    }
    let end = payload
        .iter()
        .position(|&b| b == TABLE_END)
        .ok_or_else(|| CodecError::CorruptStream("unterminated code-length table".into()))?;
    if end > HUFFMAN_ESCAPE + 1 {
        return Err(CodecError::CorruptStream("code-length table too long".into()));
    }
    let table = HuffmanTable::from_lengths(payload[..end].to_vec())?;
    let decoder = table.decoder();
    let mut r = BitReader::new(&payload[end + 1..]);
    let mut runs = Vec::with_capacity(count);
    for _ in 0..count {
        let s = decoder.decode(&mut r)?;
        runs.push(if s == HUFFMAN_ESCAPE { r.read_bits(32)? as u32 } else { s as u32 });
    }
    Ok(RunLengthSeq { runs })
}

fn byte_codec_encode(model: UlpaqModel, bytes: &[u8]) -> Vec<u8> {
    ulpaq::frame(bytes.len(), model.encode(bytes))
}

fn byte_codec_decode(model: UlpaqModel, payload: &[u8], max_bytes: u64) -> Result<Vec<u8>, CodecError> {
    let (n, coded) = ulpaq::unframe(payload)?;
    if n as u64 > max_bytes {
        return Err(CodecError::CorruptStream(format!("byte count {n} exceeds {max_bytes}")));
    }
    model.decode(coded, n)
}

fn context_model(codec: CodecId, ones: u64, pixels: u64) -> Result<ContextModel, CodecError> {
    Ok(match codec {
        CodecId::Marwood => ContextModel::Marwood(MarwoodModel::new(ones, pixels)?),
        CodecId::Demaret => ContextModel::Demaret(DemaretModel::new()),
        CodecId::BpaqS => ContextModel::Bpaq(BpaqModel::new(BpaqVariant::S, ones, pixels)?),
        CodecId::BpaqM => ContextModel::Bpaq(BpaqModel::new(BpaqVariant::M, ones, pixels)?),
        CodecId::BpaqL => ContextModel::Bpaq(BpaqModel::new(BpaqVariant::L, ones, pixels)?),
        CodecId::BpaqXl => ContextModel::Bpaq(BpaqModel::new(BpaqVariant::Xl, ones, pixels)?),
        _ => unreachable!("{codec} is not a pixel-context codec"),
    })
}

enum ContextModel {
    Marwood(MarwoodModel),
    Demaret(DemaretModel),
    Bpaq(BpaqModel),
}

/// Encodes `mask` as the payload of `codec`.
pub fn encode_payload(codec: CodecId, mask: &BinaryMask) -> Result<Vec<u8>, CodecError> {
    let ones = mask.count_ones() as u64;
    let pixels = mask.len() as u64;
    match codec {
        CodecId::Marwood | CodecId::Demaret | CodecId::BpaqS | CodecId::BpaqM | CodecId::BpaqL | CodecId::BpaqXl => {
            match context_model(codec, ones, pixels)? {
                ContextModel::Marwood(mut m) => encode_with(&mut m, mask),
                ContextModel::Demaret(mut m) => encode_with(&mut m, mask),
                ContextModel::Bpaq(mut m) => encode_with(&mut m, mask),
            }
        }
        CodecId::Ulpaq => Ok(byte_codec_encode(
            UlpaqModel::new(Default::default()),
            &runs_to_bytes(&rle_encode(mask)),
        )),
        CodecId::RleArith => Ok(byte_codec_encode(
            UlpaqModel::order0(ulpaq::MODEL_RATE),
            &runs_to_bytes(&rle_encode(mask)),
        )),
        CodecId::RleHuffman => rle_huffman_encode(&rle_encode(mask)),
    }
}

/// Decodes a payload and checks the result against the declared ones count.
pub fn decode_payload(
    codec: CodecId,
    payload: &[u8],
    width: usize,
    height: usize,
    ones: u64,
) -> Result<BinaryMask, CodecError> {
    let pixels = (width as u64) * (height as u64);
    if width == 0 || height == 0 {
        return Err(CodecError::CorruptHeader(format!("{width}x{height} mask")));
    }
    if ones > pixels {
        return Err(CodecError::CorruptHeader(format!("{ones} ones in {pixels} pixels")));
    }
    let mask = match codec {
        CodecId::Marwood | CodecId::Demaret | CodecId::BpaqS | CodecId::BpaqM | CodecId::BpaqL | CodecId::BpaqXl => {
            match context_model(codec, ones, pixels)? {
                ContextModel::Marwood(mut m) => decode_with(&mut m, payload, width, height)?,
                ContextModel::Demaret(mut m) => decode_with(&mut m, payload, width, height)?,
                ContextModel::Bpaq(mut m) => decode_with(&mut m, payload, width, height)?,
            }
        }
        CodecId::Ulpaq | CodecId::RleArith => {
            let model = if codec == CodecId::Ulpaq {
                UlpaqModel::new(Default::default())
            } else {
                UlpaqModel::order0(ulpaq::MODEL_RATE)
            };
            // A run is at most five varint bytes.
            let runs = bytes_to_runs(&byte_codec_decode(model, payload, ones * 5)?)?;
            if runs.runs.len() as u64 != ones {
                return Err(CodecError::OnesMismatch { expected: ones, found: runs.runs.len() as u64 });
            }
            rle_decode(&runs, width, height)?
        }
        CodecId::RleHuffman => rle_decode(&rle_huffman_decode(payload, ones as usize)?, width, height)?,
    };
    if mask.count_ones() as u64 != ones {
        return Err(CodecError::OnesMismatch { expected: ones, found: mask.count_ones() as u64 });
    }
    Ok(mask)
}

pub fn encode_mask(codec: CodecId, mask: &BinaryMask) -> Result<EncodedMask, CodecError> {
    let dim = |v: usize| u32::try_from(v).map_err(|_| CodecError::TooLarge(format!("dimension {v}")));
    let width = dim(mask.width())?;
    let height = dim(mask.height())?;
    let ones_count = dim(mask.count_ones())?;
    Ok(EncodedMask { codec, width, height, ones_count, payload: encode_payload(codec, mask)? })
}

pub fn decode_mask(encoded: &EncodedMask) -> Result<BinaryMask, CodecError> {
    decode_payload(
        encoded.codec,
        &encoded.payload,
        encoded.width as usize,
        encoded.height as usize,
        encoded.ones_count as u64,
    )
}
