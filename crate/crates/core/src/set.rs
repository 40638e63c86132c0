//! Vertex subsets packed into a `u64` bitmask.
//!
//! Bit `i` set means vertex `i` (zero-based) is in the set. Every exhaustive
//! routine in the crate enumerates masks, so ground sets are limited to 64
//! vertices and exhaustive scans to far fewer.

pub type Mask = u64;

pub const MAX_VERTICES: usize = 64;

#[inline]
pub fn full(n: usize) -> Mask {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
pub fn contains(mask: Mask, v: usize) -> bool {
    mask >> v & 1 == 1
}

pub fn from_indices(indices: &[usize]) -> Mask {
    indices.iter().fold(0, |m, &v| m | 1u64 << v)
}

pub fn to_indices(mask: Mask) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// One-based, comma separated rendering used in reports.
pub fn display_one_based(mask: Mask) -> String {
    to_indices(mask)
        .iter()
        .map(|v| (v + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let idx = vec![0, 3, 7, 63];
        assert_eq!(to_indices(from_indices(&idx)), idx);
        assert_eq!(full(3), 0b111);
        assert_eq!(full(64), u64::MAX);
        assert_eq!(display_one_based(0b101), "1,3");
    }
}
