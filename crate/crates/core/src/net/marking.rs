use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::iter;

use super::{PetriNet, PlaceId};
use crate::error::Result;

/// A multiset of places.
///
/// Stored as a sorted list of `(place, count)` pairs with every count at
/// least one, so structural equality is multiset equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Marking {
    counts: Vec<(PlaceId, u32)>,
}

impl Marking {
    pub fn empty() -> Self {
        Marking::default()
    }

    /// Builds a marking from `(place, count)` pairs; repeated places add up
    /// and zero counts are dropped.
    pub fn from_counts(pairs: impl IntoIterator<Item = (PlaceId, u32)>) -> Self {
        let mut counts: Vec<(PlaceId, u32)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        counts.sort_unstable_by_key(|&(p, _)| p);
        counts.dedup_by(|next, acc| {
            if next.0 == acc.0 {
                acc.1 += next.1;
                true
            } else {
                false
            }
        });
        Marking { counts }
    }

    /// One token per listed place occurrence.
    pub fn from_places(places: impl IntoIterator<Item = PlaceId>) -> Self {
        Marking::from_counts(places.into_iter().map(|p| (p, 1)))
    }

    /// Parses a list of place names, each occurrence contributing one token.
    pub fn from_names<S: AsRef<str>>(net: &PetriNet, names: &[S]) -> Result<Self> {
        let ids = names
            .iter()
            .map(|n| net.place_id(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Marking::from_places(ids))
    }

    pub fn get(&self, p: PlaceId) -> u32 {
        match self.counts.binary_search_by_key(&p, |&(q, _)| q) {
            Ok(i) => self.counts[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, p: PlaceId) -> bool {
        self.get(p) > 0
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of tokens `|M|`.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&(_, c)| c as u64).sum()
    }

    /// Largest count on any place.
    pub fn max_count(&self) -> u32 {
        self.counts.iter().map(|&(_, c)| c).max().unwrap_or(0)
    }

    /// `M(X)`: number of tokens on the given places, each place counted once.
    pub fn count_in<'a>(&self, places: impl IntoIterator<Item = &'a PlaceId>) -> u64 {
        let set: BTreeSet<PlaceId> = places.into_iter().copied().collect();
        set.into_iter().map(|p| self.get(p) as u64).sum()
    }

    /// Places with at least one token.
    pub fn support(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.counts.iter().map(|&(p, _)| p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PlaceId, u32)> + '_ {
        self.counts.iter().copied()
    }

    /// Places with multiplicity, in place order.
    pub fn expanded(&self) -> impl Iterator<Item = PlaceId> + '_ {
        self.counts.iter().flat_map(|&(p, c)| iter::repeat_n(p, c as usize))
    }

    /// `self ≤ other` pointwise.
    pub fn le(&self, other: &Marking) -> bool {
        self.counts.iter().all(|&(p, c)| other.get(p) >= c)
    }

    /// `self < other`: pointwise `≤` and different.
    pub fn lt(&self, other: &Marking) -> bool {
        self != other && self.le(other)
    }

    /// Multiset sum.
    pub fn plus(&self, other: &Marking) -> Marking {
        Marking::from_counts(self.iter().chain(other.iter()))
    }

    /// Multiset difference, truncated at zero.
    pub fn minus(&self, other: &Marking) -> Marking {
        Marking::from_counts(self.counts.iter().map(|&(p, c)| (p, c.saturating_sub(other.get(p)))))
    }

    /// Pointwise minimum.
    pub fn meet(&self, other: &Marking) -> Marking {
        Marking::from_counts(self.counts.iter().map(|&(p, c)| (p, c.min(other.get(p)))))
    }

    /// Fires the token game step `(self − pre) + post` without an enabling
    /// check. Returns `None` if some input place is empty.
    pub(crate) fn step(&self, pre: &[PlaceId], post: &[PlaceId]) -> Option<Marking> {
        let mut counts = self.counts.clone();
        for &p in pre {
            match counts.binary_search_by_key(&p, |&(q, _)| q) {
                Ok(i) => {
                    counts[i].1 -= 1;
                }
                Err(_) => return None,
            }
        }
        counts.retain(|&(_, c)| c > 0);
        for &p in post {
            match counts.binary_search_by_key(&p, |&(q, _)| q) {
                Ok(i) => counts[i].1 += 1,
                Err(i) => counts.insert(i, (p, 1)),
            }
        }
        Some(Marking { counts })
    }

    pub fn display<'a>(&'a self, net: &'a PetriNet) -> DisplayMarking<'a> {
        DisplayMarking { marking: self, net }
    }

    /// Place names with multiplicity, in place order.
    pub fn names(&self, net: &PetriNet) -> Vec<String> {
        self.expanded().map(|p| net.place_name(p).to_string()).collect()
    }

    /// Carries this marking over to another net by place name.
    pub fn transfer(&self, from: &PetriNet, to: &PetriNet) -> Result<Marking> {
        let pairs = self
            .iter()
            .map(|(p, c)| Ok((to.place_id(from.place_name(p))?, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Marking::from_counts(pairs))
    }
}

/// Lexicographic order on the place sequence with multiplicity, so
/// `[p1] < [p1,p1] < [p1,p2] < [p2]`.
impl Ord for Marking {
    fn cmp(&self, other: &Self) -> Ordering {
        self.expanded().cmp(other.expanded())
    }
}

impl PartialOrd for Marking {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct DisplayMarking<'a> {
    marking: &'a Marking,
    net: &'a PetriNet,
}

impl fmt::Display for DisplayMarking<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (p, c)) in self.marking.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(self.net.place_name(p))?;
            if c > 1 {
                write!(f, "^{c}")?;
            }
        }
        f.write_str("]")
    }
}
