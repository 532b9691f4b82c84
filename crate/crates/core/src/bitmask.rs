//! Hex encoding of atom subsets.
//!
//! Bit `k` of the mask is element `k`; the mask is written as a big-endian hex
//! number with exactly `ceil(len / 4)` digits.

use crate::error::{Error, Result};

pub fn to_hex(bits: &[bool]) -> String {
    let digits = bits.len().div_ceil(4);
    (0..digits)
        .rev()
        .map(|d| {
            let nibble = (0..4).fold(0u32, |acc, b| {
                let k = 4 * d + b;
                acc | (u32::from(k < bits.len() && bits[k]) << b)
            });
            char::from_digit(nibble, 16).expect("nibble")
        })
        .collect()
}

pub fn from_hex(text: &str, len: usize) -> Result<Vec<bool>> {
    let digits: Vec<u32> = text
        .chars()
        .map(|c| {
            c.to_digit(16)
                .ok_or_else(|| Error::BadParameter(format!("bad hex digit {c:?}")))
        })
        .collect::<Result<_>>()?;
    if digits.len() != len.div_ceil(4) {
        return Err(Error::ShapeMismatch(format!(
            "mask {text:?} has {} hex digits, {} expected for {len} elements",
            digits.len(),
            len.div_ceil(4)
        )));
    }
    let mut bits = vec![false; len];
    for (pos, nibble) in digits.iter().rev().enumerate() {
        for b in 0..4 {
            if nibble >> b & 1 == 1 {
                let k = 4 * pos + b;
                if k >= len {
                    return Err(Error::ShapeMismatch(format!("mask {text:?} sets bit {k} of {len}")));
                }
                bits[k] = true;
            }
        }
    }
    Ok(bits)
}
