//! Entropy backends shared by every codec: a binary arithmetic coder,
//! adaptive bit models and canonical Huffman codes.

pub mod arith;
pub mod bits;
pub mod huffman;
pub mod model;

use thiserror::Error;

pub use arith::{bit_cost, quantize, ArithDecoder, ArithEncoder, PROB_MAX, PROB_MIN, PROB_ONE};
pub use huffman::{huffman_decode, huffman_encode, HuffmanTable};
pub use model::AdaptiveBitModel;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum CoderError {
    #[error("unexpected end of coded stream")]
    UnexpectedEnd,
    #[error("symbol {0} has no code")]
    UnknownSymbol(usize),
    #[error("empty histogram")]
    EmptyHistogram,
    #[error("invalid code table: {0}")]
    InvalidTable(String),
    #[error("bit pattern matches no code")]
    InvalidCode,
}
