//! Bit-level helpers over block contents.
//!
//! Bit `i` of a block is bit `i % 8` (least significant first) of byte `i / 8`.

use super::geometry::VulnerableValue;

#[inline]
pub fn bit(content: &[u8], i: usize) -> bool {
    (content[i / 8] >> (i % 8)) & 1 == 1
}

/// Number of cells vulnerable to read disturbance in `content`.
pub fn count_ones(content: &[u8], vulnerable: VulnerableValue) -> u64 {
    let ones: u64 = content.iter().map(|b| b.count_ones() as u64).sum();
    match vulnerable {
        VulnerableValue::One => ones,
        VulnerableValue::Zero => content.len() as u64 * 8 - ones,
    }
}

/// `(0→1, 1→0)` transition counts when `old` is overwritten with `new`.
pub fn transitions(old: &[u8], new: &[u8]) -> (u64, u64) {
    debug_assert_eq!(old.len(), new.len());
    old.iter().zip(new).fold((0, 0), |(up, down), (&o, &n)| {
        (
            up + (!o & n).count_ones() as u64,
            down + (o & !n).count_ones() as u64,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn popcount_cases() {
        assert_eq!(count_ones(&[0u8; 64], VulnerableValue::One), 0);
        assert_eq!(count_ones(&[0xFFu8; 64], VulnerableValue::One), 512);
        let mut block = [0u8; 64];
        block[17] = 0xFF;
        assert_eq!(count_ones(&block, VulnerableValue::One), 8);
        assert_eq!(count_ones(&block, VulnerableValue::Zero), 504);
    }

    #[test]
    fn transition_cases() {
        assert_eq!(transitions(&[0xF0], &[0x0F]), (4, 4));
        assert_eq!(transitions(&[0xA5, 0x3C], &[0xA5, 0x3C]), (0, 0));
        assert_eq!(transitions(&[0x00], &[0x81]), (2, 0));
    }

    #[test]
    fn bit_order_is_lsb_first() {
        assert!(bit(&[0x01, 0x00], 0));
        assert!(!bit(&[0x01, 0x00], 1));
        assert!(bit(&[0x00, 0x80], 15));
    }
}
