//! Open-addressing set of lattice sites.

const EMPTY: u64 = u64::MAX;
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn pack(x: i64, y: i64) -> u64 {
    ((x as u32 as u64) << 32) | (y as u32 as u64)
}

/// Linear-probing hash set of sites packed into 64-bit keys.
///
/// Coordinates are truncated to 32 bits, so sites must stay within
/// `|x|, |y| < 2^31`; walks of length below `2^30` with steps of sup-norm
/// at most 2 always do.
#[derive(Debug, Clone)]
pub struct SiteSet {
    slots: Vec<u64>,
    shift: u32,
    len: usize,
    // the site packing to EMPTY, i.e. (-1, -1), is tracked out of band
    has_sentinel: bool,
}

impl SiteSet {
    pub fn with_capacity(n: usize) -> Self {
        let cap = (2 * n.max(8)).next_power_of_two();
        Self {
            slots: vec![EMPTY; cap],
            shift: 64 - cap.trailing_zeros(),
            len: 0,
            has_sentinel: false,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn clear(&mut self) {
        self.slots.fill(EMPTY);
        self.len = 0;
        self.has_sentinel = false;
    }

    #[inline]
    fn slot(&self, key: u64) -> usize {
        (key.wrapping_mul(GOLDEN) >> self.shift) as usize
    }

    /// Insert a site; returns `true` if it was not present.
    #[inline]
    pub fn insert(&mut self, x: i64, y: i64) -> bool {
        let key = pack(x, y);
        if key == EMPTY {
            let fresh = !self.has_sentinel;
            self.has_sentinel = true;
            self.len += usize::from(fresh);
            return fresh;
        }
        let mask = self.slots.len() - 1;
        let mut i = self.slot(key);
        loop {
            let s = self.slots[i];
            if s == key {
                return false;
            }
            if s == EMPTY {
                self.slots[i] = key;
                self.len += 1;
                if 2 * self.len > self.slots.len() {
                    self.grow();
                }
                return true;
            }
            i = (i + 1) & mask;
        }
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        let key = pack(x, y);
        if key == EMPTY {
            return self.has_sentinel;
        }
        let mask = self.slots.len() - 1;
        let mut i = self.slot(key);
        loop {
            match self.slots[i] {
                s if s == key => return true,
                EMPTY => return false,
                _ => i = (i + 1) & mask,
            }
        }
    }

    fn grow(&mut self) {
        let old = std::mem::replace(&mut self.slots, vec![EMPTY; 0]);
        let cap = old.len() * 2;
        self.slots = vec![EMPTY; cap];
        self.shift = 64 - cap.trailing_zeros();
        let mask = cap - 1;
        for key in old.into_iter().filter(|&k| k != EMPTY) {
            let mut i = self.slot(key);
            while self.slots[i] != EMPTY {
                i = (i + 1) & mask;
            }
            self.slots[i] = key;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn sentinel_site_is_counted_once() {
        let mut s = SiteSet::with_capacity(4);
        assert!(s.insert(-1, -1));
        assert!(!s.insert(-1, -1));
        assert!(s.contains(-1, -1));
        assert_eq!(s.len(), 1);
        s.clear();
        assert!(!s.contains(-1, -1));
    }

    proptest! {
        #[test]
        fn agrees_with_std_hashset(points in prop::collection::vec((-50i64..50, -50i64..50), 0..400)) {
            let mut ours = SiteSet::with_capacity(1);
            let mut std_set = HashSet::new();
            for &(x, y) in &points {
                prop_assert_eq!(ours.insert(x, y), std_set.insert((x, y)));
            }
            prop_assert_eq!(ours.len(), std_set.len());
            for &(x, y) in &points {
                prop_assert!(ours.contains(x, y));
            }
        }
    }
}
