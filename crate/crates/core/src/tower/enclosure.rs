//! Certified rational enclosure of
//! `R = Σ_{s≥1} (1 - Π_{r≥s} k_r/(k_r+1))`.
//!
//! With `x_r = 1/(k_r+1)`, truncation depth `T` and partial products
//! `P_s = Π_{r=s}^{T} (1 - x_r)`:
//!
//! * the infinite product lies in `[P_s·(1 - τ_T), P_s]` where `τ_T` bounds
//!   `Σ_{r>T} x_r` (Weierstrass: `Π(1 - x_r) ≥ 1 - Σ x_r`),
//! * the terms with `s > T` sum to at most `Σ_{s>T} Σ_{r≥s} x_r`,
//!
//! and both tails are summed in closed form against the geometric minorant of
//! the sequence.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::interval::RationalInterval;
use crate::tower::{KSequence, Minorant, TowerParams};

fn x(k_seq: &KSequence, r: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(k_seq.k(r) + 1u32))
}

fn pow(ratio: u64, e: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(BigUint::from(ratio).pow(e as u32)))
}

/// Upper bound on `Σ_{r>depth} 1/(k_r+1)`.
fn tail_bound(k_seq: &KSequence, m: &Minorant, depth: usize) -> BigRational {
    let exact: BigRational = (depth + 1..=m.from).map(|r| x(k_seq, r)).sum();
    let start = depth.max(m.from);
    // Σ_{r>start} 1/(c·ρ^r) = 1 / (c · ρ^start · (ρ-1))
    let geometric = BigRational::one() / (&m.coeff * pow(m.ratio, start) * pow(m.ratio - 1, 1));
    exact + geometric
}

/// Upper bound on `Σ_{u≥depth} Σ_{r>u} 1/(k_r+1)`.
fn double_tail_bound(k_seq: &KSequence, m: &Minorant, depth: usize) -> BigRational {
    let exact: BigRational = (depth..m.from).map(|u| tail_bound(k_seq, m, u)).sum();
    let start = depth.max(m.from);
    // Σ_{u≥start} 1/(c·ρ^u·(ρ-1)) = ρ / (c · ρ^start · (ρ-1)^2)
    let ratio = pow(m.ratio, 1);
    let geometric = ratio / (&m.coeff * pow(m.ratio, start) * pow(m.ratio - 1, 2));
    exact + geometric
}

pub fn r_enclosure(params: &TowerParams) -> Result<RationalInterval> {
    if params.truncation_depth < params.max_stage {
        return Err(Error::DepthTooSmall {
            depth: params.truncation_depth,
        });
    }
    r_enclosure_at(&params.k_seq, params.truncation_depth)
}

/// Encloses `R` using partial products up to `depth`.
pub fn r_enclosure_at(k_seq: &KSequence, depth: usize) -> Result<RationalInterval> {
    k_seq.validate()?;
    if depth == 0 {
        return Err(Error::DepthTooSmall { depth });
    }
    let minorant = k_seq.minorant().ok_or(Error::DepthTooSmall { depth })?;
    let tau = tail_bound(k_seq, &minorant, depth);
    let correction = BigRational::one() - &tau;
    if correction <= BigRational::zero() {
        return Err(Error::DepthTooSmall { depth });
    }

    let one = BigRational::one();
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    let mut partial = BigRational::one();
    for s in (1..=depth).rev() {
        partial *= &one - x(k_seq, s);
        lo += &one - &partial;
        hi += &one - &partial * &correction;
    }
    hi += double_tail_bound(k_seq, &minorant, depth);
    Ok(RationalInterval::new(lo, hi).expect("lower bound never exceeds upper bound"))
}

/// `M(n, R) = n(n-1)/2 + n·R` applied to an enclosure of `R`.
pub fn threshold_m(n: u64, r: &RationalInterval) -> RationalInterval {
    let n_big = BigInt::from(n);
    let half_sum = BigRational::new(&n_big * (&n_big - 1), BigInt::from(2));
    r.affine(&BigRational::from_integer(n_big), &half_sum)
}
