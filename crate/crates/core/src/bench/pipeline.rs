//! Whole-mask pipelines that pair a representation with an entropy coder,
//! used to compare representations on equal footing.

use crate::codec::{decode_payload, encode_payload, CodecError};
use crate::image_io::{BinaryMask, CodecId};
use crate::repr::{coo_decode, coo_encode, csr_decode, csr_encode, ReprForm};
use crate::ulpaq::{bytes_to_coo, bytes_to_csr, coo_to_bytes, csr_to_bytes, ulpaq_decode, ulpaq_encode};

/// Payload of `form`: the vector form through the logistic-mixing pixel
/// codec, the other forms as varint byte streams through ULPAQ.
pub fn pipeline_encode(form: ReprForm, mask: &BinaryMask) -> Result<Vec<u8>, CodecError> {
    match form {
        ReprForm::Vector => encode_payload(CodecId::BpaqL, mask),
        ReprForm::Rle => encode_payload(CodecId::Ulpaq, mask),
        ReprForm::Coo => Ok(framed(&coo_to_bytes(&coo_encode(mask)))),
        ReprForm::Csr => Ok(framed(&csr_to_bytes(&csr_encode(mask)))),
    }
}

pub fn pipeline_decode(
    form: ReprForm,
    payload: &[u8],
    width: usize,
    height: usize,
    ones: u64,
) -> Result<BinaryMask, CodecError> {
    let mask = match form {
        ReprForm::Vector => return decode_payload(CodecId::BpaqL, payload, width, height, ones),
        ReprForm::Rle => return decode_payload(CodecId::Ulpaq, payload, width, height, ones),
        ReprForm::Coo => coo_decode(&bytes_to_coo(&unframed(payload, ones * 10)?)?, width, height)?,
        ReprForm::Csr => csr_decode(&bytes_to_csr(&unframed(payload, ones * 5 + height as u64 * 5)?, height)?, width, height)?,
    };
    if mask.count_ones() as u64 != ones {
        return Err(CodecError::OnesMismatch { expected: ones, found: mask.count_ones() as u64 });
    }
    Ok(mask)
}

fn framed(bytes: &[u8]) -> Vec<u8> {
    crate::ulpaq::frame(bytes.len(), ulpaq_encode(bytes))
}

fn unframed(payload: &[u8], max_bytes: u64) -> Result<Vec<u8>, CodecError> {
    let (n, coded) = crate::ulpaq::unframe(payload)?;
    if n as u64 > max_bytes {
        return Err(CodecError::CorruptStream(format!("byte count {n} exceeds {max_bytes}")));
    }
    ulpaq_decode(coded, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn pipelines_round_trip(w in 1usize..30, h in 1usize..30, d in 0.0f64..=1.0, seed in any::<u64>()) {
            let m = crate::mask_gen::random_mask(w, h, d, seed);
            for form in ReprForm::ALL {
                let p = pipeline_encode(form, &m).unwrap();
                prop_assert_eq!(&pipeline_decode(form, &p, w, h, m.count_ones() as u64).unwrap(), &m);
            }
        }
    }
}
