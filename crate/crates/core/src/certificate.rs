//! Certificates that a multiple `n·Q` of the tower's multiplier projection
//! is not properly infinite.
//!
//! With `E` the image of the trivial rank-one projection of stage 1 and an
//! integer threshold `T`, the certificate records
//!
//! * `T·E ⋠ n·(Q_1 ⊕ ... ⊕ Q_j)` for every `j`: the uniform bound
//!   `a_{i,j}/m_i ≤ n(n-1)/2 + n·R < T` holds at every stage, and is
//!   additionally spot-checked stage by stage up to `max_stage`;
//! * `T·E ⪯ 2n·(Q_1 ⊕ ... ⊕ Q_j)` at one witness stage, via
//!   `b_{i,j} ≥ T·m_i`.
//!
//! A projection dominating `p` at `2n` copies but not at `n` copies cannot be
//! properly infinite.
//!
//! Every stored inequality can be re-evaluated from its stored operands, and
//! [`Certificate::check`] additionally rebuilds the certificate from the
//! recorded parameters and demands an exact match.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::comparison::max_trivial_multiple;
use crate::error::{Error, Result};
use crate::interval::RationalInterval;
use crate::serde_big;
use crate::tower::explicit::{ExplicitTower, EXPLICIT_COORD_LIMIT};
use crate::tower::{r_enclosure, threshold_m, Tower, TowerParams};

/// Stages below which the counts are re-derived by explicit matching.
pub const ENGINE_CHECK_STAGES: usize = 3;

pub const CONCLUSION: &str = "not-properly-infinite";

/// The inequality `threshold > half_sum + n·r_hi = bound` with its operands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformBound {
    /// `n(n-1)/2`
    #[serde(with = "serde_big::rational")]
    pub half_sum: BigRational,
    #[serde(with = "serde_big::rational")]
    pub r_hi: BigRational,
    #[serde(with = "serde_big::rational")]
    pub bound: BigRational,
    #[serde(with = "serde_big::biguint")]
    pub threshold: BigUint,
}

impl UniformBound {
    pub fn holds(&self, n: u64) -> bool {
        let n = BigRational::from_integer(BigInt::from(n));
        let expected_half = &n * (&n - BigRational::from_integer(1.into())) / BigRational::from_integer(2.into());
        self.half_sum == expected_half
            && self.bound == &self.half_sum + &n * &self.r_hi
            && BigRational::from_integer(BigInt::from(self.threshold.clone())) > self.bound
    }
}

/// `a_{i,j} < T·m_i`, i.e. `n·f_{i,j}` does not dominate `T·m_i` trivial summands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageCheck {
    pub i: usize,
    pub j: usize,
    #[serde(with = "serde_big::biguint")]
    pub a_count: BigUint,
    #[serde(with = "serde_big::biguint")]
    pub limit: BigUint,
}

/// `b_{i,j} ≥ T·m_i`, i.e. `2n·f_{i,j}` dominates `T·m_i` trivial summands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessStage {
    pub i: usize,
    pub j: usize,
    #[serde(with = "serde_big::biguint")]
    pub b_count: BigUint,
    #[serde(with = "serde_big::biguint")]
    pub limit: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub params: TowerParams,
    pub n: u64,
    #[serde(with = "serde_big::biguint")]
    pub threshold: BigUint,
    pub r_interval: RationalInterval,
    pub uniform_bound: UniformBound,
    pub stage_checks: Vec<StageCheck>,
    pub witness: WitnessStage,
    pub conclusion: String,
}

/// `T = ⌊n(n-1)/2 + n·R_hi⌋ + 1` with the inequality that justifies it.
///
/// For every `i ≥ j`, `a_{i,j}/m_i` is a sum over `s ≤ j` of
/// `π_s·max(0, n-s) + n·(1 - π_s)` with `π_s = Π_{r=s}^{i-1} k_r/(k_r+1) ≤ 1`;
/// the first parts sum to at most `n(n-1)/2` and the second to at most
/// `n·R`, so the record bounds every stage at once.
pub fn choose_threshold(n: u64, r: &RationalInterval) -> UniformBound {
    let m = threshold_m(n, r);
    let n_big = BigInt::from(n);
    let half_sum = BigRational::new(&n_big * (&n_big - 1), BigInt::from(2));
    let bound = m.hi().clone();
    let threshold: BigInt = bound.floor().to_integer() + 1;
    UniformBound {
        half_sum,
        r_hi: r.hi().clone(),
        bound,
        threshold: threshold.to_biguint().expect("bound is non-negative"),
    }
}

pub fn verify_not_properly_infinite(params: &TowerParams, n: u64) -> Result<Certificate> {
    let tower = Tower::new(params.clone())?;
    let r = r_enclosure(params)?;
    if n == 0 || BigRational::from_integer(BigInt::from(n)) <= *r.hi() {
        return Err(Error::InadmissibleN {
            n,
            r_hi: format!("{:.9}", r.hi().to_f64().unwrap_or(f64::NAN)),
        });
    }
    let uniform_bound = choose_threshold(n, &r);
    let threshold = uniform_bound.threshold.clone();
    debug_assert!(uniform_bound.holds(n));

    let s = params.max_stage;
    let mut stage_checks = Vec::with_capacity(s * (s + 1) / 2);
    for i in 1..=s {
        let limit = &threshold * tower.m(i)?;
        for j in 1..=i {
            let a_count = tower.a_count(i, j, n)?;
            // the spot check and the uniform bound must agree
            if a_count >= limit || tower.normalized_a(i, j, n)? >= uniform_bound.bound {
                return Err(Error::Internal(format!(
                    "stage ({i},{j}) violates the uniform bound: a = {a_count}, T·m_i = {limit}"
                )));
            }
            stage_checks.push(StageCheck {
                i,
                j,
                a_count,
                limit: limit.clone(),
            });
        }
    }

    engine_agreement(&tower, n)?;
    let witness = find_witness(&tower, n, &threshold)?;
    Ok(Certificate {
        params: params.clone(),
        n,
        threshold,
        r_interval: r,
        uniform_bound,
        stage_checks,
        witness,
        conclusion: CONCLUSION.to_string(),
    })
}

/// Recomputes `a_{i,j}` and `b_{i,j}` for small `i` by running the matching
/// engine on the written-out projections. Stages whose spaces exceed the
/// explicit coordinate budget are skipped.
pub fn engine_agreement(tower: &Tower, n: u64) -> Result<usize> {
    let mut top = ENGINE_CHECK_STAGES.min(tower.max_stage());
    let explicit = loop {
        match ExplicitTower::new(tower, top, EXPLICIT_COORD_LIMIT) {
            Ok(e) => break e,
            Err(Error::SizeExceeded { .. }) if top > 1 => top -= 1,
            Err(e) => return Err(e),
        }
    };
    for i in 1..=top {
        for j in 1..=i {
            let f = explicit.f(i, j)?;
            for (copies, expected) in [(n, tower.a_count(i, j, n)?), (2 * n, tower.b_count(i, j, n)?)] {
                let (found, _) = max_trivial_multiple(&f.scale(copies));
                if BigUint::from(found) != expected {
                    return Err(Error::Internal(format!(
                        "matching gives {found} trivial summands in {copies}·f_{{{i},{j}}}, formula gives {expected}"
                    )));
                }
            }
        }
    }
    Ok(top)
}

// j from 2n upward, then i from j upward; first hit wins
fn find_witness(tower: &Tower, n: u64, threshold: &BigUint) -> Result<WitnessStage> {
    let s = tower.max_stage();
    let first_j = usize::try_from(2 * n).unwrap_or(usize::MAX);
    for j in first_j..=s {
        for i in j..=s {
            let limit = threshold * tower.m(i)?;
            let b_count = tower.b_count(i, j, n)?;
            if b_count >= limit {
                return Ok(WitnessStage { i, j, b_count, limit });
            }
        }
    }
    Err(Error::BudgetExhausted { max_stage: s })
}

fn reject(reason: impl Into<String>) -> Error {
    Error::InvalidCertificate(reason.into())
}

impl Certificate {
    /// Re-evaluates every stored inequality from its operands.
    pub fn check_inequalities(&self) -> Result<()> {
        if self.conclusion != CONCLUSION {
            return Err(reject(format!("unknown conclusion {:?}", self.conclusion)));
        }
        let ub = &self.uniform_bound;
        if ub.threshold != self.threshold {
            return Err(reject("threshold differs from the uniform-bound record"));
        }
        if &ub.r_hi != self.r_interval.hi() {
            return Err(reject("uniform bound uses a different upper bound for R"));
        }
        if !ub.holds(self.n) {
            return Err(reject("uniform bound does not hold"));
        }
        let expected_threshold = ub.bound.floor().to_integer() + 1;
        if BigInt::from(self.threshold.clone()) != expected_threshold {
            return Err(reject("threshold is not floor(bound) + 1"));
        }
        if BigRational::from_integer(BigInt::from(self.n)) <= ub.r_hi {
            return Err(reject("n does not exceed the upper bound on R"));
        }

        let s = self.params.max_stage;
        if self.stage_checks.len() != s * (s + 1) / 2 {
            return Err(reject("stage checks do not cover every pair of stages"));
        }
        let pairs = (1..=s).flat_map(|i| (1..=i).map(move |j| (i, j)));
        for (c, (i, j)) in self.stage_checks.iter().zip(pairs) {
            if (c.i, c.j) != (i, j) {
                return Err(reject(format!("stage check ({},{}) out of order", c.i, c.j)));
            }
            if !c.limit.is_multiple_of(&self.threshold) {
                return Err(reject(format!("limit at ({i},{j}) is not a multiple of T")));
            }
            if c.a_count >= c.limit {
                return Err(reject(format!("stage check ({i},{j}) fails")));
            }
        }

        let w = &self.witness;
        if (w.j as u64) < 2 * self.n || w.i < w.j || w.i > s {
            return Err(reject("witness stage outside the searched range"));
        }
        if !w.limit.is_multiple_of(&self.threshold) || w.b_count < w.limit {
            return Err(reject("witness inequality fails"));
        }
        Ok(())
    }

    /// Full self-verification: the stored inequalities hold, and rebuilding
    /// the certificate from the recorded parameters reproduces it exactly.
    pub fn check(&self) -> Result<()> {
        self.check_inequalities()?;
        let rebuilt = verify_not_properly_infinite(&self.params, self.n)
            .map_err(|e| reject(format!("cannot rebuild from recorded parameters: {e}")))?;
        if &rebuilt != self {
            return Err(reject("stored values differ from the recomputation"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| reject(e.to_string()))
    }
}

/// Implications drawn from a verified certificate for matrix size `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionChain {
    pub n: u64,
    pub certified_at: u64,
    pub steps: Vec<String>,
}

/// Derives, from a valid certificate, that `M_n(B)` is not stable for the
/// certified `n`.
pub fn stable_matrix_obstruction(cert: &Certificate) -> Result<ObstructionChain> {
    obstruction_for(cert, cert.n)
}

/// Like [`stable_matrix_obstruction`] for a matrix size `n ≤ cert.n`: if
/// `n·Q` were properly infinite then so would be every higher multiple.
/// Sizes above the certified one are refused.
pub fn obstruction_for(cert: &Certificate, n: u64) -> Result<ObstructionChain> {
    cert.check()?;
    if n == 0 || n > cert.n {
        return Err(reject(format!(
            "certificate covers multiples up to {} only, not {n}",
            cert.n
        )));
    }
    let mut steps = vec![format!(
        "certificate: T·E ⪯ {}·Q and T·E ⋠ {}·Q with T = {}, so {}·Q is not properly infinite",
        2 * cert.n,
        cert.n,
        cert.threshold,
        cert.n
    )];
    if n < cert.n {
        steps.push(format!(
            "{n}·Q properly infinite would make {}·Q properly infinite, so {n}·Q is not properly infinite",
            cert.n
        ));
    }
    steps.push(format!(
        "{n}·Q is the unit of M_{n}(M(B)), which is therefore not properly infinite"
    ));
    steps.push(format!(
        "a stable M_{n}(B) would have a properly infinite multiplier unit, so M_{n}(B) is not stable"
    ));
    Ok(ObstructionChain {
        n,
        certified_at: cert.n,
        steps,
    })
}
