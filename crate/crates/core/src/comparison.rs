//! Deciding `m·e ⪯ Q` for a formal projection `Q`.
//!
//! `m` copies of the trivial line bundle fit under `Q = ⊕ p_{I_j}` exactly
//! when `m` is at most the maximum Hall deficiency
//! `max_F (|F| - |∪_{j∈F} I_j|)` over subfamilies `F` of the terms. By the
//! defect form of Hall's theorem that maximum is `rank(Q)` minus the size of
//! a maximum matching between terms and coordinates, which is how
//! [`max_trivial_multiple`] computes it.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::hopcroft_karp;
use crate::projection::{CoordinateId, DisjointFamilySummary, FormalProjection};

/// Default bound on distinct nontrivial sets for [`brute_force_max_trivial`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// A subfamily attaining the maximum deficiency.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeficiencyWitness {
    pub chosen: FormalProjection,
    pub union_size: u64,
    pub deficiency: i64,
}

impl DeficiencyWitness {
    /// Recomputes the deficiency from the listed terms.
    pub fn is_consistent(&self) -> bool {
        let union = self.chosen.support().len() as u64;
        union == self.union_size && self.chosen.rank() as i64 - union as i64 == self.deficiency
    }
}

/// `max{m : m·e ⪯ q}` together with the inclusion-minimal subfamily that
/// attains it.
///
/// The attaining subfamilies are closed under intersection, so the minimal
/// one is unique; it always contains every copy of any set it touches and
/// all trivial terms.
pub fn max_trivial_multiple(q: &FormalProjection) -> (u64, DeficiencyWitness) {
    // left side: one vertex per term copy; right side: coordinates in the support
    let support = q.support();
    let coord_index: HashMap<CoordinateId, usize> = support.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let mut owners = Vec::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    for (set, mult) in q.terms() {
        let row: Vec<usize> = set.coords().iter().map(|c| coord_index[c]).collect();
        for _ in 0..mult {
            owners.push(set);
            adj.push(row.clone());
        }
    }

    let matching = hopcroft_karp(&adj, support.len());
    let deficiency = (adj.len() - matching.size) as u64;

    let (left, right) = matching.alternating_reach(&adj);
    let mut chosen = FormalProjection::empty();
    for (u, &inside) in left.iter().enumerate() {
        if inside {
            chosen.add_term(owners[u].clone(), 1);
        }
    }
    let union_size = right.iter().filter(|&&b| b).count() as u64;
    let witness = DeficiencyWitness {
        chosen,
        union_size,
        deficiency: deficiency as i64,
    };
    debug_assert!(witness.is_consistent());
    (deficiency, witness)
}

/// Whether `m·e ⪯ q`.
pub fn is_trivial_subequivalent(m: u64, q: &FormalProjection) -> bool {
    m <= max_trivial_multiple(q).0
}

/// Enumerates every subfamily of the distinct nontrivial sets (all copies of a
/// chosen set and all trivial terms always included) and returns the largest
/// deficiency. Exponential; guarded by [`BRUTE_FORCE_LIMIT`].
pub fn brute_force_max_trivial(q: &FormalProjection) -> Result<u64> {
    brute_force_max_trivial_bounded(q, BRUTE_FORCE_LIMIT)
}

pub fn brute_force_max_trivial_bounded(q: &FormalProjection, limit: usize) -> Result<u64> {
    let sets: Vec<_> = q.terms().filter(|(s, _)| !s.is_trivial()).collect();
    if sets.len() > limit {
        return Err(Error::SizeExceeded {
            what: "distinct nontrivial index sets",
            actual: sets.len(),
            limit,
        });
    }
    let support = q.support();
    let words = support.len().div_ceil(64).max(1);
    let index: HashMap<CoordinateId, usize> = support.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let masks: Vec<Vec<u64>> = sets
        .iter()
        .map(|(s, _)| {
            let mut m = vec![0u64; words];
            for c in s.coords() {
                let i = index[c];
                m[i / 64] |= 1 << (i % 64);
            }
            m
        })
        .collect();

    let trivial = q.trivial_count() as i64;
    let mut best = trivial;
    let mut union = vec![0u64; words];
    for subset in 1u64..(1u64 << sets.len()) {
        union.iter_mut().for_each(|w| *w = 0);
        let mut count = trivial;
        for (k, (_, mult)) in sets.iter().enumerate() {
            if subset >> k & 1 == 1 {
                count += *mult as i64;
                for (w, m) in union.iter_mut().zip(&masks[k]) {
                    *w |= m;
                }
            }
        }
        let covered: i64 = union.iter().map(|w| w.count_ones() as i64).sum();
        best = best.max(count - covered);
    }
    Ok(best.max(0) as u64)
}

/// Maximum deficiency of a pairwise-disjoint family straight from its
/// summary: each set of cardinality `s` repeated `μ` times contributes
/// `max(0, μ - s)`, and every trivial term contributes one.
pub fn closed_form_max_trivial(s: &DisjointFamilySummary) -> BigUint {
    let mut total = s.trivial_count().clone();
    for g in s.groups() {
        let surplus = g.multiplicity.saturating_sub(g.cardinality as u64);
        if surplus > 0 && !g.set_count.is_zero() {
            total += &g.set_count * surplus;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{CoordinateAllocator, FamilyGroup, IndexSet};
    use proptest::prelude::*;

    fn set(v: &[u64]) -> IndexSet {
        IndexSet::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn pure_trivial_sum() {
        let q = FormalProjection::trivial(5);
        let (m, w) = max_trivial_multiple(&q);
        assert_eq!(m, 5);
        assert_eq!(w.chosen, q);
        assert_eq!(brute_force_max_trivial(&q).unwrap(), 5);
    }

    #[test]
    fn triple_pair_has_deficiency_one() {
        // subfamilies of three copies of {1,2}: best is all three, 3 - 2 = 1
        let q = FormalProjection::from_sets([set(&[1, 2])]).scale(3);
        let (m, w) = max_trivial_multiple(&q);
        assert_eq!(m, 1);
        assert_eq!(w.chosen, q);
        assert_eq!(w.union_size, 2);
        assert!(w.is_consistent());
        assert_eq!(brute_force_max_trivial(&q).unwrap(), 1);
    }

    #[test]
    fn brute_force_examples() {
        let q = FormalProjection::from_sets([set(&[1]), set(&[1]), set(&[2])]);
        assert_eq!(brute_force_max_trivial(&q).unwrap(), 1);
        assert_eq!(brute_force_max_trivial(&FormalProjection::empty()).unwrap(), 0);
        // 2·f_{2,1}: two singletons each doubled plus two trivial terms
        let f = FormalProjection::from_sets([set(&[1]), set(&[2])])
            .scale(2)
            .direct_sum(&FormalProjection::trivial(2));
        assert_eq!(brute_force_max_trivial(&f).unwrap(), 4);
        assert_eq!(max_trivial_multiple(&f).0, 4);
    }

    #[test]
    fn witness_is_minimal_part() {
        // {1},{1} is deficient; {2,3} is not and must stay out of the witness
        let q = FormalProjection::from_sets([set(&[1]), set(&[1]), set(&[2, 3])]);
        let (m, w) = max_trivial_multiple(&q);
        assert_eq!(m, 1);
        assert_eq!(w.chosen, FormalProjection::from_sets([set(&[1])]).scale(2));
        assert_eq!(w.union_size, 1);
    }

    #[test]
    fn brute_force_size_guard() {
        let q = FormalProjection::from_sets((0..21).map(|i| set(&[i])));
        assert!(matches!(
            brute_force_max_trivial(&q),
            Err(Error::SizeExceeded {
                actual: 21,
                limit: 20,
                ..
            })
        ));
        assert_eq!(brute_force_max_trivial_bounded(&q, 21).unwrap(), 0);
    }

    #[test]
    fn subequivalence_examples() {
        let q = FormalProjection::from_sets([set(&[1, 2])]);
        assert!(is_trivial_subequivalent(0, &q));
        assert!(is_trivial_subequivalent(0, &FormalProjection::empty()));
        assert!(!is_trivial_subequivalent(1, &q));
    }

    #[test]
    fn closed_form_examples() {
        let three_q2 = DisjointFamilySummary::from_parts([FamilyGroup::new(2, 3u32, 3)], BigUint::zero());
        assert_eq!(closed_form_max_trivial(&three_q2), BigUint::from(3u32));
        let mut alloc = CoordinateAllocator::new();
        let expanded = three_q2.expand(&mut alloc).unwrap();
        assert_eq!(max_trivial_multiple(&expanded).0, 3);

        for j in 1..5usize {
            let jq = DisjointFamilySummary::from_parts([FamilyGroup::new(j, 7u32, j as u64)], BigUint::zero());
            assert!(closed_form_max_trivial(&jq).is_zero());
        }
        let t = DisjointFamilySummary::from_parts([], BigUint::from(9u32));
        assert_eq!(closed_form_max_trivial(&t), BigUint::from(9u32));
    }

    fn arb_projection() -> impl Strategy<Value = FormalProjection> {
        proptest::collection::vec((proptest::collection::btree_set(0u64..8, 0..4), 1u64..4), 0..7).prop_map(|terms| {
            let mut p = FormalProjection::empty();
            for (s, m) in terms {
                p.add_term(IndexSet::new(s).unwrap(), m);
            }
            p
        })
    }

    proptest! {
        #[test]
        fn matching_equals_brute_force(q in arb_projection()) {
            let (m, w) = max_trivial_multiple(&q);
            prop_assert_eq!(m, brute_force_max_trivial(&q).unwrap());
            prop_assert!(w.is_consistent());
            prop_assert_eq!(w.deficiency as u64, m);
            prop_assert!(w.chosen.is_subprojection_of(&q));
        }

        #[test]
        fn sharpness_pairing(q in arb_projection()) {
            let m = max_trivial_multiple(&q).0;
            prop_assert!(is_trivial_subequivalent(m, &q));
            prop_assert!(!is_trivial_subequivalent(m + 1, &q));
        }

        #[test]
        fn trivial_shift(q in arb_projection(), t in 0u64..5) {
            let shifted = q.direct_sum(&FormalProjection::trivial(t));
            prop_assert_eq!(max_trivial_multiple(&shifted).0, max_trivial_multiple(&q).0 + t);
        }

        #[test]
        fn additive_on_disjoint_supports(p in arb_projection(), q in arb_projection()) {
            let moved = q.relabel(|c| Some(CoordinateId(c.0 + 100))).unwrap();
            let joint = max_trivial_multiple(&p.direct_sum(&moved)).0;
            prop_assert_eq!(joint, max_trivial_multiple(&p).0 + max_trivial_multiple(&q).0);
            // on shared supports only superadditivity holds
            prop_assert!(max_trivial_multiple(&p.direct_sum(&q)).0 >= max_trivial_multiple(&p).0 + max_trivial_multiple(&q).0);
        }
    }
}
