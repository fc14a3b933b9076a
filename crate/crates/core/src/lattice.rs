//! Links, link subsets and the ordered partitions they induce.
//!
//! Nodes are numbered `0..=n` and the link with index `i` sits between nodes
//! `i` and `i + 1` (the half-integer position `(2i + 1) / 2`). A [`LinkSet`] is
//! a bitmask over link indices; every subset of links cuts the node interval
//! into an [`OrderedPartition`] of contiguous blocks, and inclusion of link sets
//! is exactly refinement of partitions.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of links a [`LinkSet`] may range over.
pub const MAX_LINKS: usize = 24;

/// A subset of the links `{0, .., n_links - 1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkSet {
    n_links: u8,
    bits: u32,
}

impl LinkSet {
    pub fn from_bits(n_links: usize, bits: u32) -> Result<Self> {
        if n_links > MAX_LINKS {
            return Err(Error::TooManyLinks(n_links));
        }
        if bits >> n_links != 0 {
            return Err(Error::InvalidLinkSet { bits, n_links });
        }
        Ok(Self {
            n_links: n_links as u8,
            bits,
        })
    }

    /// Builds a set from integer link indices. Duplicates are ignored.
    pub fn from_links(n_links: usize, links: &[usize]) -> Result<Self> {
        if n_links > MAX_LINKS {
            return Err(Error::TooManyLinks(n_links));
        }
        let mut bits = 0u32;
        for &l in links {
            if l >= n_links {
                return Err(Error::InvalidLinkSet {
                    bits: bits | 1u32.checked_shl(l as u32).unwrap_or(u32::MAX),
                    n_links,
                });
            }
            bits |= 1 << l;
        }
        Ok(Self {
            n_links: n_links as u8,
            bits,
        })
    }

    pub fn empty(n_links: usize) -> Result<Self> {
        Self::from_bits(n_links, 0)
    }

    /// The set `L` of all links.
    pub fn full(n_links: usize) -> Result<Self> {
        if n_links > MAX_LINKS {
            return Err(Error::TooManyLinks(n_links));
        }
        Ok(Self {
            n_links: n_links as u8,
            bits: full_mask(n_links),
        })
    }

    pub fn singleton(n_links: usize, link: usize) -> Result<Self> {
        Self::from_links(n_links, &[link])
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn n_links(self) -> usize {
        self.n_links as usize
    }

    #[inline]
    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn contains(self, link: usize) -> bool {
        link < self.n_links() && self.bits >> link & 1 == 1
    }

    pub fn is_subset(self, other: LinkSet) -> bool {
        self.bits & !other.bits == 0
    }

    /// `L - A`.
    pub fn complement(self) -> LinkSet {
        LinkSet {
            n_links: self.n_links,
            bits: !self.bits & full_mask(self.n_links()),
        }
    }

    pub fn union(self, other: LinkSet) -> Result<LinkSet> {
        self.same_universe(other)?;
        Ok(LinkSet {
            n_links: self.n_links,
            bits: self.bits | other.bits,
        })
    }

    pub fn intersection(self, other: LinkSet) -> Result<LinkSet> {
        self.same_universe(other)?;
        Ok(LinkSet {
            n_links: self.n_links,
            bits: self.bits & other.bits,
        })
    }

    /// `self - other`.
    pub fn difference(self, other: LinkSet) -> Result<LinkSet> {
        self.same_universe(other)?;
        Ok(LinkSet {
            n_links: self.n_links,
            bits: self.bits & !other.bits,
        })
    }

    /// Link indices in ascending order.
    pub fn links(self) -> impl Iterator<Item = usize> {
        let mut bits = self.bits;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let l = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(l)
        })
    }

    pub fn min(self) -> Option<usize> {
        (!self.is_empty()).then(|| self.bits.trailing_zeros() as usize)
    }

    pub fn max(self) -> Option<usize> {
        (!self.is_empty()).then(|| 31 - self.bits.leading_zeros() as usize)
    }

    /// All `2^{n_links}` subsets of `L`, in ascending bitmask order.
    pub fn all_subsets(n_links: usize) -> Result<impl Iterator<Item = LinkSet>> {
        Ok(LinkSet::empty(n_links)?.supersets())
    }

    /// Every `H` with `self ⊆ H ⊆ L`, in ascending bitmask order.
    pub fn supersets(self) -> Supersets {
        Supersets {
            base: self,
            free: self.complement().bits,
            next: Some(0),
        }
    }

    /// Every `H ⊆ self`, in ascending bitmask order.
    pub fn subsets(self) -> impl Iterator<Item = LinkSet> {
        let n_links = self.n_links;
        let mask = self.bits;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(LinkSet { n_links, bits: cur })
        })
    }

    fn same_universe(self, other: LinkSet) -> Result<()> {
        if self.n_links != other.n_links {
            return Err(Error::LinkCountMismatch(self.n_links(), other.n_links()));
        }
        Ok(())
    }
}

fn full_mask(n_links: usize) -> u32 {
    if n_links == 0 {
        0
    } else {
        u32::MAX >> (32 - n_links)
    }
}

impl fmt::Debug for LinkSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinkSet")?;
        f.debug_set().entries(self.links()).finish()?;
        write!(f, "/{}", self.n_links)
    }
}

/// Iterator over the supersets of a link set, see [`LinkSet::supersets`].
#[derive(Clone, Debug)]
pub struct Supersets {
    base: LinkSet,
    free: u32,
    next: Option<u32>,
}

impl Iterator for Supersets {
    type Item = LinkSet;

    fn next(&mut self) -> Option<LinkSet> {
        let extra = self.next?;
        // Increment within the free bits only; adding the base bits carries
        // past them, so the sequence stays in ascending order.
        self.next = if extra == self.free {
            None
        } else {
            Some((extra | !self.free).wrapping_add(1) & self.free)
        };
        Some(LinkSet {
            n_links: self.base.n_links,
            bits: self.base.bits | extra,
        })
    }
}

/// The ordered partition `N_A` of the nodes `0..=n` cut at the links of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    blocks: Vec<Range<usize>>,
}

impl OrderedPartition {
    /// Half-open node ranges, left to right.
    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn n_nodes(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    /// True when every block of `self` lies inside some block of `coarser`.
    pub fn refines(&self, coarser: &OrderedPartition) -> bool {
        self.n_nodes() == coarser.n_nodes()
            && self
                .blocks
                .iter()
                .all(|b| coarser.blocks.iter().any(|c| c.start <= b.start && b.end <= c.end))
    }
}

/// The partition of `n_nodes` nodes induced by the cut set `a`.
pub fn partition_of(a: LinkSet, n_nodes: usize) -> Result<OrderedPartition> {
    if n_nodes == 0 {
        return Err(Error::InvalidSpace("a node set needs at least one node".into()));
    }
    if a.n_links() + 1 != n_nodes {
        return Err(Error::InvalidLinkSet {
            bits: a.bits(),
            n_links: n_nodes - 1,
        });
    }
    let mut blocks = Vec::with_capacity(a.len() + 1);
    let mut start = 0;
    for link in a.links() {
        blocks.push(start..link + 1);
        start = link + 1;
    }
    blocks.push(start..n_nodes);
    Ok(OrderedPartition { blocks })
}

/// The closed interval of links `I(A) = [min A, max A]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stretch {
    Empty,
    Span { lo: usize, hi: usize },
}

impl Stretch {
    pub fn is_empty(self) -> bool {
        matches!(self, Stretch::Empty)
    }

    pub fn contains(self, link: usize) -> bool {
        match self {
            Stretch::Empty => false,
            Stretch::Span { lo, hi } => lo <= link && link <= hi,
        }
    }
}

pub fn stretch_of(a: LinkSet) -> Stretch {
    match (a.min(), a.max()) {
        (Some(lo), Some(hi)) => Stretch::Span { lo, hi },
        _ => Stretch::Empty,
    }
}

pub fn stretches_disjoint(a: LinkSet, b: LinkSet) -> bool {
    match (stretch_of(a), stretch_of(b)) {
        (Stretch::Span { lo: l1, hi: h1 }, Stretch::Span { lo: l2, hi: h2 }) => h1 < l2 || h2 < l1,
        _ => true,
    }
}

/// `(-1)^{|H - G|}` for `G ⊆ H`.
pub fn moebius_sign(g: LinkSet, h: LinkSet) -> Result<i32> {
    if g.n_links() != h.n_links() {
        return Err(Error::LinkCountMismatch(g.n_links(), h.n_links()));
    }
    if !g.is_subset(h) {
        return Err(Error::domain(format!(
            "Möbius sign needs G ⊆ H, got G = {g:?}, H = {h:?}"
        )));
    }
    Ok(if (h.bits() & !g.bits()).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    })
}

pub fn supersets_of(g: LinkSet) -> Supersets {
    g.supersets()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls(n: usize, links: &[usize]) -> LinkSet {
        LinkSet::from_links(n, links).unwrap()
    }

    #[test]
    fn partition_examples() {
        let p = partition_of(LinkSet::empty(3).unwrap(), 4).unwrap();
        assert_eq!(p.blocks().len(), 1);
        assert_eq!(p.blocks()[0], 0..4);
        let p = partition_of(LinkSet::full(3).unwrap(), 4).unwrap();
        assert_eq!(p.blocks(), &[0..1, 1..2, 2..3, 3..4]);
        // the link 3/2 sits between nodes 1 and 2
        let p = partition_of(ls(3, &[1]), 4).unwrap();
        assert_eq!(p.blocks(), &[0..2, 2..4]);
    }

    #[test]
    fn invalid_bits_are_rejected() {
        assert!(matches!(
            LinkSet::from_bits(2, 0b100),
            Err(Error::InvalidLinkSet { .. })
        ));
        assert!(LinkSet::from_links(2, &[2]).is_err());
        assert!(matches!(LinkSet::full(25), Err(Error::TooManyLinks(25))));
        assert!(LinkSet::full(24).is_ok());
        assert!(partition_of(ls(2, &[0]), 4).is_err());
    }

    #[test]
    fn stretch_examples() {
        assert_eq!(stretch_of(ls(3, &[0, 2])), Stretch::Span { lo: 0, hi: 2 });
        assert_eq!(stretch_of(ls(3, &[1])), Stretch::Span { lo: 1, hi: 1 });
        assert_eq!(stretch_of(ls(3, &[])), Stretch::Empty);
    }

    #[test]
    fn disjointness_examples() {
        assert!(stretches_disjoint(ls(3, &[0]), ls(3, &[2])));
        assert!(!stretches_disjoint(ls(3, &[0, 2]), ls(3, &[1])));
        assert!(stretches_disjoint(ls(3, &[]), ls(3, &[0, 1, 2])));
        assert!(stretches_disjoint(ls(3, &[0, 1, 2]), ls(3, &[])));
        assert!(!stretches_disjoint(ls(3, &[1]), ls(3, &[1])));
    }

    #[test]
    fn moebius_sign_examples() {
        let g = ls(2, &[0]);
        assert_eq!(moebius_sign(g, g).unwrap(), 1);
        assert_eq!(moebius_sign(ls(2, &[]), ls(2, &[0, 1])).unwrap(), 1);
        assert_eq!(moebius_sign(ls(2, &[]), ls(2, &[0])).unwrap(), -1);
        assert!(matches!(moebius_sign(ls(2, &[1]), ls(2, &[0])), Err(Error::Domain(_))));
    }

    #[test]
    fn superset_examples() {
        let full = LinkSet::full(2).unwrap();
        assert_eq!(supersets_of(full).collect::<Vec<_>>(), vec![full]);
        let all: Vec<_> = supersets_of(ls(2, &[])).map(|s| s.bits()).collect();
        assert_eq!(all, vec![0, 1, 2, 3]);
        let sup: Vec<_> = supersets_of(ls(2, &[0])).collect();
        assert_eq!(sup, vec![ls(2, &[0]), ls(2, &[0, 1])]);
    }

    #[test]
    fn supersets_enumerate_exactly_once_in_order() {
        for n in 0..=6 {
            for g in 0..1u32 << n {
                let g = LinkSet::from_bits(n, g).unwrap();
                let got: Vec<u32> = g.supersets().map(|h| h.bits()).collect();
                let want: Vec<u32> = (0..1u32 << n).filter(|h| h & g.bits() == g.bits()).collect();
                assert_eq!(got, want);
                let subs: Vec<u32> = g.subsets().map(|h| h.bits()).collect();
                let want: Vec<u32> = (0..1u32 << n).filter(|h| h & !g.bits() == 0).collect();
                assert_eq!(subs, want);
            }
        }
    }

    #[test]
    fn refinement_matches_inclusion() {
        for n in 0..=5 {
            for a in LinkSet::all_subsets(n).unwrap() {
                let pa = partition_of(a, n + 1).unwrap();
                assert_eq!(pa.blocks().len(), a.len() + 1);
                for b in LinkSet::all_subsets(n).unwrap() {
                    let pb = partition_of(b, n + 1).unwrap();
                    assert_eq!(a.is_subset(b), pb.refines(&pa), "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn moebius_inversion_round_trips() {
        // f(H) = arbitrary values; g = alternating superset sum; superset sum of g = f
        for n in 0..=6 {
            let f: Vec<f64> = (0..1u32 << n)
                .map(|h| ((h as f64) * 0.7318).sin() + h.count_ones() as f64)
                .collect();
            let g: Vec<f64> = LinkSet::all_subsets(n)
                .unwrap()
                .map(|gs| {
                    gs.supersets()
                        .map(|h| moebius_sign(gs, h).unwrap() as f64 * f[h.bits() as usize])
                        .sum()
                })
                .collect();
            for gs in LinkSet::all_subsets(n).unwrap() {
                let back: f64 = gs.supersets().map(|h| g[h.bits() as usize]).sum();
                assert!((back - f[gs.bits() as usize]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn set_algebra() {
        let a = ls(4, &[0, 2]);
        let b = ls(4, &[2, 3]);
        assert_eq!(a.union(b).unwrap(), ls(4, &[0, 2, 3]));
        assert_eq!(a.intersection(b).unwrap(), ls(4, &[2]));
        assert_eq!(a.difference(b).unwrap(), ls(4, &[0]));
        assert_eq!(a.complement(), ls(4, &[1, 3]));
        assert_eq!(a.links().collect::<Vec<_>>(), vec![0, 2]);
        assert!(a.union(ls(3, &[0])).is_err());
    }
}
