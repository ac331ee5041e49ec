use crate::error::{Error, Result};

/// Packed bit vector, LSB-first within each byte.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    len: usize,
    bytes: Vec<u8>,
}

impl BinaryMask {
    pub fn zeros(len: usize) -> Self {
        BinaryMask {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut m = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            m.set(j, b);
        }
        m
    }

    /// Rebuild from `len.div_ceil(8)` payload bytes; padding bits must be zero.
    pub fn from_bytes(len: usize, bytes: Vec<u8>) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::dim("mask payload bytes", len.div_ceil(8), bytes.len()));
        }
        if !len.is_multiple_of(8) {
            let pad = bytes[bytes.len() - 1] >> (len % 8);
            if pad != 0 {
                return Err(Error::Format("mask padding bits are set".into()));
            }
        }
        Ok(BinaryMask { len, bytes })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.len, "mask index {j} out of range {}", self.len);
        self.bytes[j / 8] >> (j % 8) & 1 == 1
    }

    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len, "mask index {j} out of range {}", self.len);
        let bit = 1u8 << (j % 8);
        if value {
            self.bytes[j / 8] |= bit;
        } else {
            self.bytes[j / 8] &= !bit;
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|j| self.get(j))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.iter().map(|b| if b { 1.0 } else { 0.0 }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn byte_length_is_ceil_n_over_8() {
        assert_eq!(BinaryMask::zeros(0).as_bytes().len(), 0);
        assert_eq!(BinaryMask::zeros(1).as_bytes().len(), 1);
        assert_eq!(BinaryMask::zeros(8).as_bytes().len(), 1);
        assert_eq!(BinaryMask::zeros(9).as_bytes().len(), 2);
    }

    #[test]
    fn lsb_first_packing() {
        let m = BinaryMask::from_bools(&[true, false, false, false, false, false, false, false, false, true]);
        assert_eq!(m.as_bytes(), &[0b0000_0001, 0b0000_0010]);
        assert!(BinaryMask::from_bytes(10, vec![1, 0b100]).is_err());
    }

    proptest! {
        #[test]
        fn bytes_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let m = BinaryMask::from_bools(&bits);
            let back = BinaryMask::from_bytes(bits.len(), m.as_bytes().to_vec()).unwrap();
            prop_assert_eq!(back.iter().collect::<Vec<_>>(), bits.clone());
            prop_assert_eq!(m.count_ones(), bits.iter().filter(|&&b| b).count());
        }
    }
}
