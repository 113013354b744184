//! Euler-class cross-check in the cohomology ring of a product of 2-spheres,
//! `Z[x_1, ..., x_N] / (x_i^2)`.
//!
//! The first Chern class of `p_I` is `Σ_{i∈I} x_i`, so the top Chern class of
//! `⊕_j p_{I_j}` is `Π_j Σ_{i∈I_j} x_i`. Expanding that product, the
//! coefficient of a square-free monomial counts the systems of distinct
//! representatives with that image, so the product is nonzero exactly when
//! the family has one. Coefficients never cancel because they are all
//! non-negative.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::projection::{CoordinateId, FormalProjection, IndexSet};

/// Default bound on the number of distinct coordinates the oracle accepts.
pub const EULER_COORD_LIMIT: usize = 24;

/// Element of `Z[x_1..x_N]/(x_i^2)`: square-free monomials with nonzero
/// integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultilinearPoly {
    terms: BTreeMap<IndexSet, BigInt>,
}

impl MultilinearPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(IndexSet::trivial(), BigInt::one())
    }

    pub fn monomial(vars: IndexSet, coeff: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term(vars, coeff);
        p
    }

    pub fn variable(c: CoordinateId) -> Self {
        Self::monomial(IndexSet::from_ids([c]).unwrap(), BigInt::one())
    }

    /// `Σ_{i∈I} x_i`, the first Chern class of `p_I`.
    pub fn linear_form(set: &IndexSet) -> Self {
        let mut p = Self::zero();
        for &c in set.coords() {
            p.add_term(IndexSet::from_ids([c]).unwrap(), BigInt::one());
        }
        p
    }

    pub fn add_term(&mut self, vars: IndexSet, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(vars.clone()).or_default();
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&vars);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, vars: &IndexSet) -> BigInt {
        self.terms.get(vars).cloned().unwrap_or_default()
    }

    /// Largest monomial degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(IndexSet::len).max()
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }
}

/// Product in the square-free quotient: monomials sharing a variable vanish.
pub fn mul_mod(p: &MultilinearPoly, q: &MultilinearPoly) -> MultilinearPoly {
    let mut out = MultilinearPoly::zero();
    for (mp, cp) in &p.terms {
        for (mq, cq) in &q.terms {
            if let Some(m) = mp.disjoint_union(mq) {
                out.add_term(m, cp * cq);
            }
        }
    }
    out
}

impl fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            for v in m.coords() {
                write!(f, "·x{v}")?;
            }
        }
        Ok(())
    }
}

fn check_coordinate_budget<'a, I: IntoIterator<Item = &'a IndexSet>>(sets: I, limit: usize) -> Result<()> {
    let mut coords: Vec<CoordinateId> = sets.into_iter().flat_map(|s| s.coords().iter().copied()).collect();
    coords.sort_unstable();
    coords.dedup();
    if coords.len() > limit {
        return Err(Error::SizeExceeded {
            what: "distinct coordinates",
            actual: coords.len(),
            limit,
        });
    }
    Ok(())
}

/// `Π_j Σ_{i∈I_j} x_i` for a family of nonempty index sets.
pub fn euler_product(family: &[IndexSet]) -> Result<MultilinearPoly> {
    euler_product_bounded(family, EULER_COORD_LIMIT)
}

pub fn euler_product_bounded(family: &[IndexSet], limit: usize) -> Result<MultilinearPoly> {
    if family.iter().any(IndexSet::is_trivial) {
        return Err(Error::InvalidFamily);
    }
    check_coordinate_budget(family, limit)?;
    Ok(family.iter().fold(MultilinearPoly::one(), |acc, s| {
        mul_mod(&acc, &MultilinearPoly::linear_form(s))
    }))
}

/// Whether the family admits a system of distinct representatives, decided
/// by nonvanishing of its Euler product.
pub fn sdr_exists(family: &[IndexSet]) -> Result<bool> {
    Ok(!euler_product(family)?.is_zero())
}

pub fn sdr_exists_bounded(family: &[IndexSet], limit: usize) -> Result<bool> {
    Ok(!euler_product_bounded(family, limit)?.is_zero())
}

/// Size of the largest subfamily of `q`'s terms (counted with multiplicity)
/// admitting distinct representatives.
///
/// Uses the total Chern class `Π_j (1 + Σ_{i∈I_j} x_i)`: its degree-`r` part
/// sums the Euler products of all `r`-element subfamilies, and with no
/// cancellation available it is nonzero iff one of them has an SDR. Trivial
/// terms contribute the factor `1`.
pub fn max_transversal_size(q: &FormalProjection) -> Result<usize> {
    max_transversal_size_bounded(q, EULER_COORD_LIMIT)
}

pub fn max_transversal_size_bounded(q: &FormalProjection, limit: usize) -> Result<usize> {
    check_coordinate_budget(q.terms().map(|(s, _)| s), limit)?;
    let mut total = MultilinearPoly::one();
    for (set, mult) in q.terms() {
        if set.is_trivial() {
            continue;
        }
        let factor = MultilinearPoly::one().add(&MultilinearPoly::linear_form(set));
        for _ in 0..mult {
            total = mul_mod(&total, &factor);
        }
    }
    Ok(total.degree().unwrap_or(0))
}
