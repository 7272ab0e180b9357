use std::fmt;

use super::descriptor::LatticeDescriptor;

/// Unordered multiset of at most four channel indices, stored sorted.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multiset {
    len: u8,
    ch: [u8; 4],
}

impl Multiset {
    pub const MAX_LEN: usize = 4;

    pub fn new(channels: &[usize]) -> Multiset {
        assert!(channels.len() <= Self::MAX_LEN, "multiset too large");
        let mut ch = [u8::MAX; 4];
        for (slot, &c) in ch.iter_mut().zip(channels) {
            *slot = u8::try_from(c).expect("channel index fits in u8");
        }
        ch[..channels.len()].sort_unstable();
        Multiset { len: channels.len() as u8, ch }
    }

    #[inline]
    pub fn channels(&self) -> impl Iterator<Item = usize> + '_ {
        self.ch[..self.len as usize].iter().map(|&c| c as usize)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self, channel: usize) -> usize {
        self.channels().filter(|&c| c == channel).count()
    }

    pub fn momentum(&self, desc: &LatticeDescriptor) -> [i32; 2] {
        self.channels().fold([0, 0], |m, c| {
            let v = desc.velocities[c];
            [m[0] + v[0], m[1] + v[1]]
        })
    }

    /// Product of channel weights.
    pub fn weight(&self, desc: &LatticeDescriptor) -> f64 {
        self.channels().map(|c| desc.weights[c]).product()
    }

    /// Exact product of channel weights as `(numerator, denominator)`.
    pub fn weight_ratio(&self, desc: &LatticeDescriptor) -> (u64, u64) {
        self.channels().fold((1, 1), |(n, d), c| {
            let (a, b) = desc.weight_ratios[c];
            (n * a, d * b)
        })
    }

    /// Number of distinct orderings: `k! / prod(m_c!)`.
    pub fn orderings(&self) -> usize {
        let fact = |n: usize| (1..=n).product::<usize>();
        let mut denom = 1;
        let mut i = 0;
        let ch = &self.ch[..self.len()];
        while i < ch.len() {
            let mut j = i;
            while j < ch.len() && ch[j] == ch[i] {
                j += 1;
            }
            denom *= fact(j - i);
            i = j;
        }
        fact(self.len()) / denom
    }

    /// True if the two multisets share at least one channel.
    pub fn overlaps(&self, other: &Multiset) -> bool {
        self.channels().any(|c| other.count(c) > 0)
    }

    pub fn map(&self, perm: &[usize]) -> Multiset {
        let mapped: Vec<usize> = self.channels().map(|c| perm[c]).collect();
        Multiset::new(&mapped)
    }

    /// Space separated channel list, e.g. `0 5 7`.
    pub fn to_field(&self) -> String {
        self.channels().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.channels().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_is_sorted() {
        assert_eq!(Multiset::new(&[5, 0, 3]), Multiset::new(&[0, 3, 5]));
        assert_eq!(format!("{}", Multiset::new(&[2, 1])), "{1,2}");
    }

    #[test]
    fn orderings_count_distinct_permutations() {
        assert_eq!(Multiset::new(&[0, 0]).orderings(), 1);
        assert_eq!(Multiset::new(&[1, 2]).orderings(), 2);
        assert_eq!(Multiset::new(&[0, 0, 1]).orderings(), 3);
        assert_eq!(Multiset::new(&[1, 1, 2, 2]).orderings(), 6);
        assert_eq!(Multiset::new(&[1, 2, 3, 4]).orderings(), 24);
    }

    #[test]
    fn overlap_detects_shared_channels() {
        assert!(Multiset::new(&[0, 1]).overlaps(&Multiset::new(&[1, 2])));
        assert!(!Multiset::new(&[0, 0]).overlaps(&Multiset::new(&[1, 2])));
    }
}
