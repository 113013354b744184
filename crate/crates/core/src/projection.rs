//! Formal projections over finite products of 2-spheres.
//!
//! A [`FormalProjection`] is a finite direct sum of line bundles, each the
//! tensor product of Bott line bundles pulled back along a set of sphere
//! coordinates. The empty coordinate set stands for the trivial line bundle.
//! Every summand has rank one, so the rank of a formal projection is its
//! term count.
//!
//! [`DisjointFamilySummary`] is the compressed normal form used for tower
//! stages that are far too large to write out coordinate by coordinate.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_big;

/// Label of one S² factor of the ambient product.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoordinateId(pub u64);

impl fmt::Display for CoordinateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Hands out fresh coordinate labels within one ambient-space context.
#[derive(Debug, Default, Clone)]
pub struct CoordinateAllocator {
    next: u64,
}

impl CoordinateAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Start allocating at `first`; labels below it are treated as reserved.
    pub fn starting_at(first: u64) -> Self {
        Self { next: first }
    }

    pub fn fresh(&mut self) -> CoordinateId {
        let id = CoordinateId(self.next);
        self.next += 1;
        id
    }

    pub fn fresh_set(&mut self, cardinality: usize) -> IndexSet {
        IndexSet((0..cardinality).map(|_| self.fresh()).collect())
    }

    pub fn allocated(&self) -> u64 {
        self.next
    }
}

/// A finite set of coordinates, kept sorted. Empty means the trivial bundle.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct IndexSet(Vec<CoordinateId>);

impl IndexSet {
    pub fn trivial() -> Self {
        IndexSet(Vec::new())
    }

    /// Builds a set, rejecting repeated coordinates.
    pub fn new<I: IntoIterator<Item = u64>>(coords: I) -> std::result::Result<Self, String> {
        let mut v: Vec<CoordinateId> = coords.into_iter().map(CoordinateId).collect();
        v.sort_unstable();
        let before = v.len();
        v.dedup();
        if v.len() != before {
            return Err("index set contains a repeated coordinate".into());
        }
        Ok(IndexSet(v))
    }

    pub fn from_ids<I: IntoIterator<Item = CoordinateId>>(coords: I) -> std::result::Result<Self, String> {
        Self::new(coords.into_iter().map(|c| c.0))
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[CoordinateId] {
        &self.0
    }

    pub fn contains(&self, c: CoordinateId) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.cmp(y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    /// Union of two disjoint sets; `None` if they share a coordinate.
    pub fn disjoint_union(&self, other: &IndexSet) -> Option<IndexSet> {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => return None,
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Some(IndexSet(out))
    }
}

impl TryFrom<Vec<u64>> for IndexSet {
    type Error = String;

    fn try_from(v: Vec<u64>) -> std::result::Result<Self, String> {
        IndexSet::new(v)
    }
}

impl From<IndexSet> for Vec<u64> {
    fn from(s: IndexSet) -> Self {
        s.0.into_iter().map(|c| c.0).collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// A multiset of index sets; each copy is one rank-one summand.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FormalProjection {
    terms: BTreeMap<IndexSet, u64>,
}

#[derive(Serialize, Deserialize)]
struct TermWire {
    coords: IndexSet,
    mult: u64,
}

#[derive(Serialize, Deserialize)]
struct ProjectionWire {
    terms: Vec<TermWire>,
}

impl Serialize for FormalProjection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProjectionWire {
            terms: self
                .terms
                .iter()
                .map(|(coords, &mult)| TermWire {
                    coords: coords.clone(),
                    mult,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FormalProjection {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = ProjectionWire::deserialize(d)?;
        let mut p = FormalProjection::empty();
        for t in wire.terms {
            if t.mult == 0 {
                return Err(serde::de::Error::custom("term multiplicity must be positive"));
            }
            p.add_term(t.coords, t.mult);
        }
        Ok(p)
    }
}

impl FormalProjection {
    pub fn empty() -> Self {
        Self::default()
    }

    /// One copy of each listed set (repeats accumulate).
    pub fn from_sets<I: IntoIterator<Item = IndexSet>>(sets: I) -> Self {
        let mut p = Self::empty();
        for s in sets {
            p.add_term(s, 1);
        }
        p
    }

    /// `t` copies of the trivial line bundle.
    pub fn trivial(t: u64) -> Self {
        let mut p = Self::empty();
        p.add_term(IndexSet::trivial(), t);
        p
    }

    pub fn add_term(&mut self, set: IndexSet, mult: u64) {
        if mult > 0 {
            *self.terms.entry(set).or_insert(0) += mult;
        }
    }

    pub fn with_term(mut self, set: IndexSet, mult: u64) -> Self {
        self.add_term(set, mult);
        self
    }

    /// Distinct index sets with multiplicities, in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, u64)> + '_ {
        self.terms.iter().map(|(s, &m)| (s, m))
    }

    pub fn multiplicity(&self, set: &IndexSet) -> u64 {
        self.terms.get(set).copied().unwrap_or(0)
    }

    pub fn distinct_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn trivial_count(&self) -> u64 {
        self.multiplicity(&IndexSet::trivial())
    }

    pub fn rank(&self) -> u64 {
        self.terms.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn direct_sum(&self, other: &FormalProjection) -> FormalProjection {
        let mut out = self.clone();
        for (s, m) in other.terms() {
            out.add_term(s.clone(), m);
        }
        out
    }

    /// `n` copies of `self`. Scaling by zero yields the zero projection.
    pub fn scale(&self, n: u64) -> FormalProjection {
        if n == 0 {
            return Self::empty();
        }
        FormalProjection {
            terms: self.terms.iter().map(|(s, &m)| (s.clone(), m * n)).collect(),
        }
    }

    /// Whether `self` is a sub-multiset of `other`.
    pub fn is_subprojection_of(&self, other: &FormalProjection) -> bool {
        self.terms().all(|(s, m)| other.multiplicity(s) >= m)
    }

    /// Sorted list of every coordinate occurring in some term.
    pub fn support(&self) -> Vec<CoordinateId> {
        let mut v: Vec<CoordinateId> = self.terms.keys().flat_map(|s| s.0.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Applies a coordinate map to every term. The map must be defined and
    /// injective on the support of `self`.
    pub fn relabel<F>(&self, map: F) -> Result<FormalProjection>
    where
        F: Fn(CoordinateId) -> Option<CoordinateId>,
    {
        let mut image_of: HashMap<CoordinateId, CoordinateId> = HashMap::new();
        let mut preimage_of: HashMap<CoordinateId, CoordinateId> = HashMap::new();
        for c in self.support() {
            let img = map(c).ok_or(Error::UnmappedCoordinate(c.0))?;
            if preimage_of.insert(img, c).is_some() {
                return Err(Error::NonInjectiveMap(img.0));
            }
            image_of.insert(c, img);
        }
        let mut out = FormalProjection::empty();
        for (s, m) in self.terms() {
            let mapped: Vec<CoordinateId> = s.0.iter().map(|c| image_of[c]).collect();
            let set = IndexSet::from_ids(mapped).expect("injective image has no repeats");
            out.add_term(set, m);
        }
        Ok(out)
    }

    pub fn relabel_with_map(&self, map: &BTreeMap<CoordinateId, CoordinateId>) -> Result<FormalProjection> {
        self.relabel(|c| map.get(&c).copied())
    }

    /// Checks that distinct nontrivial index sets are pairwise disjoint.
    /// Repeated copies of one set are allowed.
    pub fn check_disjoint(&self) -> Result<()> {
        let mut owner: HashMap<CoordinateId, &IndexSet> = HashMap::new();
        for s in self.terms.keys() {
            for c in s.coords() {
                if let Some(prev) = owner.insert(*c, s) {
                    return Err(Error::NotDisjoint {
                        first: prev.clone(),
                        second: s.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn compress(&self) -> Result<DisjointFamilySummary> {
        self.check_disjoint()?;
        let mut groups: BTreeMap<(usize, u64), BigUint> = BTreeMap::new();
        let mut trivial = BigUint::zero();
        for (s, m) in self.terms() {
            if s.is_trivial() {
                trivial += m;
            } else {
                *groups.entry((s.len(), m)).or_default() += 1u32;
            }
        }
        Ok(DisjointFamilySummary::from_parts(
            groups.into_iter().map(|((s, m), c)| FamilyGroup::new(s, c, m)),
            trivial,
        ))
    }
}

/// `set_count` pairwise-disjoint index sets of one cardinality, each
/// occurring with the same multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyGroup {
    #[serde(rename = "s")]
    pub cardinality: usize,
    #[serde(rename = "count", with = "serde_big::biguint")]
    pub set_count: BigUint,
    #[serde(rename = "mult")]
    pub multiplicity: u64,
}

impl FamilyGroup {
    pub fn new(cardinality: usize, set_count: impl Into<BigUint>, multiplicity: u64) -> Self {
        Self {
            cardinality,
            set_count: set_count.into(),
            multiplicity,
        }
    }
}

/// Compressed normal form of a projection whose nontrivial index sets are
/// pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DisjointFamilySummary {
    groups: Vec<FamilyGroup>,
    #[serde(rename = "trivial", with = "serde_big::biguint")]
    trivial_count: BigUint,
}

#[derive(Deserialize)]
struct SummaryWire {
    groups: Vec<FamilyGroup>,
    #[serde(with = "serde_big::biguint")]
    trivial: BigUint,
}

impl<'de> Deserialize<'de> for DisjointFamilySummary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = SummaryWire::deserialize(d)?;
        if w.groups.iter().any(|g| g.cardinality == 0 || g.multiplicity == 0) {
            return Err(serde::de::Error::custom(
                "group cardinality and multiplicity must be positive",
            ));
        }
        Ok(DisjointFamilySummary::from_parts(w.groups, w.trivial))
    }
}

impl DisjointFamilySummary {
    pub fn empty() -> Self {
        Self {
            groups: Vec::new(),
            trivial_count: BigUint::zero(),
        }
    }

    /// Normalises: merges groups with equal (cardinality, multiplicity),
    /// drops empty groups and sorts.
    ///
    /// Panics on a group with zero cardinality or multiplicity.
    pub fn from_parts<I: IntoIterator<Item = FamilyGroup>>(groups: I, trivial_count: BigUint) -> Self {
        let mut merged: BTreeMap<(usize, u64), BigUint> = BTreeMap::new();
        for g in groups {
            assert!(g.cardinality > 0, "group cardinality must be positive");
            assert!(g.multiplicity > 0, "group multiplicity must be positive");
            if !g.set_count.is_zero() {
                *merged.entry((g.cardinality, g.multiplicity)).or_default() += g.set_count;
            }
        }
        Self {
            groups: merged
                .into_iter()
                .map(|((s, m), c)| FamilyGroup::new(s, c, m))
                .collect(),
            trivial_count,
        }
    }

    pub fn groups(&self) -> &[FamilyGroup] {
        &self.groups
    }

    pub fn trivial_count(&self) -> &BigUint {
        &self.trivial_count
    }

    pub fn rank(&self) -> BigUint {
        self.groups
            .iter()
            .map(|g| &g.set_count * g.multiplicity)
            .sum::<BigUint>()
            + &self.trivial_count
    }

    /// Number of coordinates the nontrivial part occupies.
    pub fn coordinates_used(&self) -> BigUint {
        self.groups.iter().map(|g| &g.set_count * g.cardinality).sum()
    }

    pub fn scale(&self, n: u64) -> Self {
        if n == 0 {
            return Self::empty();
        }
        Self {
            groups: self
                .groups
                .iter()
                .map(|g| FamilyGroup::new(g.cardinality, g.set_count.clone(), g.multiplicity * n))
                .collect(),
            trivial_count: &self.trivial_count * n,
        }
    }

    /// Sum of two summaries. The caller guarantees that the two families live
    /// on disjoint coordinates.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self::from_parts(
            self.groups.iter().chain(other.groups.iter()).cloned(),
            &self.trivial_count + &other.trivial_count,
        )
    }

    /// Writes the family out with fresh coordinates from `alloc`, refusing to
    /// allocate more than `max_coords` coordinates.
    pub fn expand_bounded(&self, alloc: &mut CoordinateAllocator, max_coords: usize) -> Result<FormalProjection> {
        let used = self.coordinates_used();
        if used.to_usize().is_none_or(|u| u > max_coords) {
            return Err(Error::SizeExceeded {
                what: "coordinates",
                actual: used.to_usize().unwrap_or(usize::MAX),
                limit: max_coords,
            });
        }
        let trivial = self.trivial_count.to_u64().ok_or(Error::SizeExceeded {
            what: "trivial count",
            actual: usize::MAX,
            limit: u64::MAX as usize,
        })?;
        let mut p = FormalProjection::trivial(trivial);
        for g in &self.groups {
            let count = g.set_count.to_usize().expect("bounded by coordinate count");
            for _ in 0..count {
                p.add_term(alloc.fresh_set(g.cardinality), g.multiplicity);
            }
        }
        Ok(p)
    }

    pub fn expand(&self, alloc: &mut CoordinateAllocator) -> Result<FormalProjection> {
        self.expand_bounded(alloc, DEFAULT_EXPANSION_LIMIT)
    }
}

/// Coordinate budget for [`DisjointFamilySummary::expand`].
pub const DEFAULT_EXPANSION_LIMIT: usize = 1 << 22;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[u64]) -> IndexSet {
        IndexSet::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn direct_sum_of_singletons() {
        let p = FormalProjection::from_sets([set(&[1])]);
        let q = FormalProjection::from_sets([set(&[2])]);
        let s = p.direct_sum(&q);
        assert_eq!(s, FormalProjection::from_sets([set(&[1]), set(&[2])]));
        assert_eq!(s.direct_sum(&FormalProjection::empty()), s);
        let q1 = FormalProjection::from_sets([set(&[7])]);
        let twice = q1.direct_sum(&q1);
        assert_eq!(twice.rank(), 2);
        assert_eq!(twice, q1.scale(2));
    }

    #[test]
    fn scale_trivial() {
        let e = FormalProjection::trivial(1);
        let three = e.scale(3);
        assert_eq!(three.rank(), 3);
        assert_eq!(three.trivial_count(), 3);
        let p = FormalProjection::from_sets([set(&[1, 2]), set(&[3])]);
        assert_eq!(p.scale(1), p);
    }

    #[test]
    fn relabel_examples_and_errors() {
        let p = FormalProjection::from_sets([set(&[1, 2])]);
        let map: BTreeMap<_, _> = [(CoordinateId(1), CoordinateId(5)), (CoordinateId(2), CoordinateId(9))].into();
        assert_eq!(
            p.relabel_with_map(&map).unwrap(),
            FormalProjection::from_sets([set(&[5, 9])])
        );
        assert_eq!(p.relabel(Some).unwrap(), p);

        let squash = |_c: CoordinateId| Some(CoordinateId(0));
        assert_eq!(p.relabel(squash), Err(Error::NonInjectiveMap(0)));
        let partial: BTreeMap<_, _> = [(CoordinateId(1), CoordinateId(5))].into();
        assert_eq!(p.relabel_with_map(&partial), Err(Error::UnmappedCoordinate(2)));
    }

    #[test]
    fn compress_examples() {
        let p = FormalProjection::trivial(2).direct_sum(&FormalProjection::from_sets([set(&[1]), set(&[2])]));
        let c = p.compress().unwrap();
        assert_eq!(c.groups(), &[FamilyGroup::new(1, 2u32, 1)]);
        assert_eq!(c.trivial_count(), &BigUint::from(2u32));

        let bad = FormalProjection::from_sets([set(&[1, 2]), set(&[2, 3])]);
        match bad.compress() {
            Err(Error::NotDisjoint { first, second }) => {
                assert_eq!(first, set(&[1, 2]));
                assert_eq!(second, set(&[2, 3]));
            }
            other => panic!("expected NotDisjoint, got {other:?}"),
        }
    }

    #[test]
    fn repeated_copies_are_not_an_overlap() {
        let p = FormalProjection::from_sets([set(&[1, 2])]).scale(3);
        let c = p.compress().unwrap();
        assert_eq!(c.groups(), &[FamilyGroup::new(2, 1u32, 3)]);
    }

    #[test]
    fn index_set_rejects_repeats() {
        assert!(IndexSet::new([1, 1]).is_err());
        assert!(serde_json::from_str::<IndexSet>("[3,3]").is_err());
    }

    #[test]
    fn canonical_json_shapes() {
        let p = FormalProjection::trivial(1).with_term(set(&[4, 2]), 3);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"terms":[{"coords":[],"mult":1},{"coords":[2,4],"mult":3}]}"#);
        let back: FormalProjection = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);

        let c = p.compress().unwrap();
        let cj = serde_json::to_string(&c).unwrap();
        assert_eq!(cj, r#"{"groups":[{"s":2,"count":"1","mult":3}],"trivial":"1"}"#);
        let numeric: DisjointFamilySummary =
            serde_json::from_str(r#"{"groups":[{"s":2,"count":1,"mult":3}],"trivial":1}"#).unwrap();
        assert_eq!(numeric, c);
    }

    #[test]
    fn expansion_respects_budget() {
        let s = DisjointFamilySummary::from_parts([FamilyGroup::new(3, 10u32, 1)], BigUint::zero());
        let mut alloc = CoordinateAllocator::new();
        assert!(matches!(
            s.expand_bounded(&mut alloc, 29),
            Err(Error::SizeExceeded { .. })
        ));
        assert_eq!(s.expand_bounded(&mut alloc, 30).unwrap().rank(), 10);
    }

    fn arb_projection() -> impl Strategy<Value = FormalProjection> {
        proptest::collection::vec((proptest::collection::btree_set(0u64..12, 0..4), 1u64..4), 0..6).prop_map(|terms| {
            let mut p = FormalProjection::empty();
            for (s, m) in terms {
                p.add_term(IndexSet::new(s).unwrap(), m);
            }
            p
        })
    }

    fn arb_summary() -> impl Strategy<Value = DisjointFamilySummary> {
        (proptest::collection::vec((1usize..5, 0u32..5, 1u64..5), 0..5), 0u32..6).prop_map(|(groups, t)| {
            DisjointFamilySummary::from_parts(
                groups.into_iter().map(|(s, c, m)| FamilyGroup::new(s, c, m)),
                BigUint::from(t),
            )
        })
    }

    proptest! {
        #[test]
        fn rank_is_additive_and_multiplicative(p in arb_projection(), q in arb_projection(), n in 1u64..5) {
            prop_assert_eq!(p.direct_sum(&q).rank(), p.rank() + q.rank());
            prop_assert_eq!(p.scale(n).rank(), n * p.rank());
        }

        #[test]
        fn direct_sum_commutes_and_associates(p in arb_projection(), q in arb_projection(), r in arb_projection()) {
            prop_assert_eq!(p.direct_sum(&q), q.direct_sum(&p));
            prop_assert_eq!(p.direct_sum(&q).direct_sum(&r), p.direct_sum(&q.direct_sum(&r)));
        }

        #[test]
        fn relabel_round_trips(p in arb_projection(), shift in 0u64..100) {
            let there = p.relabel(|c| Some(CoordinateId(c.0 * 3 + shift))).unwrap();
            prop_assert_eq!(there.rank(), p.rank());
            let back = there.relabel(|c| Some(CoordinateId((c.0 - shift) / 3))).unwrap();
            prop_assert_eq!(back, p.clone());
            prop_assert_eq!(p.check_disjoint().is_ok(), there.check_disjoint().is_ok());
        }

        #[test]
        fn compress_inverts_expand(s in arb_summary()) {
            let mut alloc = CoordinateAllocator::starting_at(7);
            let p = s.expand(&mut alloc).unwrap();
            prop_assert_eq!(BigUint::from(p.rank()), s.rank());
            prop_assert_eq!(p.compress().unwrap(), s);
        }
    }
}
