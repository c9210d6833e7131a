//! Hamming distance over packed bit vectors.

use crate::error::{Error, Result};

/// Popcount of the XOR of two equally long word sequences.
#[inline]
pub fn hamming_words(x: &[u64], y: &[u64]) -> u64 {
    x.iter().zip(y).map(|(a, b)| u64::from((a ^ b).count_ones())).sum()
}

/// Checked Hamming distance between two bit vectors of `bits` bits each.
pub fn bit_hamming(x: &[u64], x_bits: usize, y: &[u64], y_bits: usize) -> Result<u64> {
    if x_bits != y_bits {
        return Err(Error::DimensionMismatch(x_bits, y_bits));
    }
    let words = x_bits.div_ceil(64);
    if x.len() < words || y.len() < words {
        return Err(Error::InvalidArgument("bit vector shorter than its length".into()));
    }
    Ok(hamming_words(&x[..words], &y[..words]))
}

/// Packs `0`/`1` flags into little-endian words.
pub fn pack_bits(flags: &[bool]) -> alloc::vec::Vec<u64> {
    let mut words = alloc::vec![0u64; flags.len().div_ceil(64)];
    for (i, &f) in flags.iter().enumerate() {
        if f {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = pack_bits(&[true, false, true, true, false]);
        let b = pack_bits(&[true, false, false, true, true]);
        assert_eq!(bit_hamming(&a, 5, &b, 5).unwrap(), 2);
        assert_eq!(bit_hamming(&a, 5, &a, 5).unwrap(), 0);
        let ones = pack_bits(&[true; 130]);
        let zeros = pack_bits(&[false; 130]);
        assert_eq!(bit_hamming(&ones, 130, &zeros, 130).unwrap(), 130);
        assert!(bit_hamming(&a, 5, &b, 6).is_err());
    }
}
