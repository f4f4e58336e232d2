//! Lossless compression of sparse binary inpainting masks.
//!
//! Masks are produced by [`mask_gen`], serialised through [`repr`], and
//! coded by one of the codecs registered in [`codec`]. [`bench`] sweeps
//! codecs over mask families and densities.

pub mod bench;
pub mod codec;
pub mod coder;
pub mod context_codecs;
pub mod image_io;
pub mod mask_gen;
pub mod repr;
pub mod ulpaq;

pub use codec::{decode_mask, encode_mask, CodecError};
pub use image_io::{BinaryMask, CodecId, EncodedMask, GrayImage};
