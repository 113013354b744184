//! Finite stages of the AH inductive system built from products of 2-spheres.
//!
//! Stage `j` lives over `X_j`, a product of `N_j` two-spheres, with
//! `X_1 = S²` and `X_{j+1} = X_j^{k_j} × (S²)^{(j+1)·m_{j+1}}`. The connecting
//! map `A_j → A_{j+1}` has `k_j` coordinate-projection components and one
//! point evaluation; composed from stage `j` to stage `i` it has `k_{i,j}`
//! projections and `l_{i,j}` evaluations. A coordinate projection copies
//! each line-bundle summand onto fresh coordinates, a point evaluation turns
//! each summand into a trivial one.
//!
//! Everything here is in compressed form with arbitrary-precision integers;
//! [`explicit`] writes the small stages out coordinate by coordinate.

pub mod enclosure;
pub mod explicit;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::{DisjointFamilySummary, FamilyGroup};
use crate::serde_big;

pub use enclosure::{r_enclosure, r_enclosure_at, threshold_m};

/// The sequence `k_1, k_2, ...` of coordinate-projection counts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KSequence {
    /// `k_j = base · ratio^j`.
    Geometric { base: u64, ratio: u64 },
    /// `k_1, ..., k_L` as listed; past the list each term doubles the previous.
    Explicit { values: Vec<u64> },
}

impl Default for KSequence {
    fn default() -> Self {
        KSequence::Geometric { base: 1, ratio: 2 }
    }
}

impl KSequence {
    pub fn validate(&self) -> Result<()> {
        match self {
            KSequence::Geometric { base, ratio } => {
                if *base == 0 || *ratio == 0 {
                    return Err(Error::InvalidParams("geometric base and ratio must be positive".into()));
                }
            }
            KSequence::Explicit { values } => {
                if values.is_empty() || values.contains(&0) {
                    return Err(Error::InvalidParams(
                        "explicit k sequence must be nonempty with positive entries".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `k_j` for `j ≥ 1`.
    pub fn k(&self, j: usize) -> BigUint {
        assert!(j >= 1, "k is indexed from 1");
        match self {
            KSequence::Geometric { base, ratio } => BigUint::from(*base) * BigUint::from(*ratio).pow(j as u32),
            KSequence::Explicit { values } => {
                if j <= values.len() {
                    BigUint::from(values[j - 1])
                } else {
                    BigUint::from(*values.last().unwrap()) << (j - values.len())
                }
            }
        }
    }

    /// A geometric minorant valid from some index on: `k_r ≥ c · ratio^r`
    /// for every `r > from`, with `ratio ≥ 2`. `None` when the sequence does
    /// not grow geometrically, in which case `Σ 1/(k_r+1)` is not bounded by
    /// this crate.
    pub(crate) fn minorant(&self) -> Option<Minorant> {
        match self {
            KSequence::Geometric { base, ratio } if *ratio >= 2 => Some(Minorant {
                from: 0,
                coeff: BigRational::from_integer((*base).into()),
                ratio: *ratio,
            }),
            KSequence::Geometric { .. } => None,
            KSequence::Explicit { values } => {
                let len = values.len();
                let last = BigUint::from(*values.last().unwrap());
                Some(Minorant {
                    from: len,
                    coeff: BigRational::new(last.into(), (BigUint::one() << len).into()),
                    ratio: 2,
                })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Minorant {
    pub from: usize,
    pub coeff: BigRational,
    pub ratio: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerParams {
    #[serde(default)]
    pub k_seq: KSequence,
    #[serde(default = "default_max_stage")]
    pub max_stage: usize,
    #[serde(default = "default_truncation_depth")]
    pub truncation_depth: usize,
}

fn default_max_stage() -> usize {
    12
}

fn default_truncation_depth() -> usize {
    40
}

impl Default for TowerParams {
    fn default() -> Self {
        Self {
            k_seq: KSequence::default(),
            max_stage: default_max_stage(),
            truncation_depth: default_truncation_depth(),
        }
    }
}

impl TowerParams {
    pub fn validate(&self) -> Result<()> {
        self.k_seq.validate()?;
        if self.max_stage == 0 {
            return Err(Error::InvalidParams("max_stage must be at least 1".into()));
        }
        if self.truncation_depth == 0 {
            return Err(Error::InvalidParams("truncation_depth must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses the TOML configuration format, e.g.
    ///
    /// ```toml
    /// max_stage = 12
    /// truncation_depth = 40
    ///
    /// [k_seq]
    /// kind = "geometric"
    /// base = 1
    /// ratio = 2
    /// ```
    pub fn from_toml(text: &str) -> Result<Self> {
        let p: TowerParams = toml::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }
}

/// Exact data of one stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageData {
    pub j: usize,
    /// Rank of `q_j`, equal to the multiplicity of the composed map from stage 1.
    #[serde(with = "serde_big::biguint")]
    pub m: BigUint,
    /// Number of S² factors of `X_j`.
    #[serde(with = "serde_big::biguint")]
    pub n_coords: BigUint,
    /// `k_j`, the number of coordinate projections in the map to stage `j+1`.
    #[serde(with = "serde_big::biguint")]
    pub k: BigUint,
    pub q: DisjointFamilySummary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapCounts {
    pub i: usize,
    pub j: usize,
    /// Coordinate projections in the composed map.
    #[serde(with = "serde_big::biguint")]
    pub k_ij: BigUint,
    /// Point evaluations in the composed map.
    #[serde(with = "serde_big::biguint")]
    pub l_ij: BigUint,
}

impl MapCounts {
    pub fn multiplicity(&self) -> BigUint {
        &self.k_ij + &self.l_ij
    }
}

/// Precomputed stage table for one parameter set. Immutable after
/// construction and shareable across threads.
#[derive(Clone, Debug)]
pub struct Tower {
    params: TowerParams,
    // index 0 unused so stage j sits at index j
    k: Vec<BigUint>,
    m: Vec<BigUint>,
    n_coords: Vec<BigUint>,
    // Π_{n<j} k_n
    k_prefix: Vec<BigUint>,
}

impl Tower {
    pub fn new(params: TowerParams) -> Result<Self> {
        params.validate()?;
        let s = params.max_stage;
        let k: Vec<BigUint> = (0..=s)
            .map(|j| if j == 0 { BigUint::zero() } else { params.k_seq.k(j) })
            .collect();
        let mut m = vec![BigUint::zero(); s + 1];
        let mut n_coords = vec![BigUint::zero(); s + 1];
        let mut k_prefix = vec![BigUint::zero(); s + 1];
        m[1] = BigUint::one();
        n_coords[1] = BigUint::one();
        k_prefix[1] = BigUint::one();
        for j in 1..s {
            m[j + 1] = (&k[j] + 1u32) * &m[j];
            n_coords[j + 1] = &k[j] * &n_coords[j] + (j + 1) * &m[j + 1];
            k_prefix[j + 1] = &k_prefix[j] * &k[j];
        }
        Ok(Self {
            params,
            k,
            m,
            n_coords,
            k_prefix,
        })
    }

    pub fn params(&self) -> &TowerParams {
        &self.params
    }

    pub fn max_stage(&self) -> usize {
        self.params.max_stage
    }

    fn check_stage(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.params.max_stage {
            return Err(Error::StageOutOfRange {
                stage: j,
                max: self.params.max_stage,
            });
        }
        Ok(())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_stage(j)?;
        self.check_stage(i)?;
        if i < j {
            return Err(Error::StageMismatch(format!(
                "target stage {i} precedes source stage {j}"
            )));
        }
        Ok(())
    }

    pub fn m(&self, j: usize) -> Result<&BigUint> {
        self.check_stage(j)?;
        Ok(&self.m[j])
    }

    pub fn n_coords(&self, j: usize) -> Result<&BigUint> {
        self.check_stage(j)?;
        Ok(&self.n_coords[j])
    }

    /// `q_j`: `m_j` pairwise-disjoint tensor products of `j` Bott projections.
    pub fn q(&self, j: usize) -> Result<DisjointFamilySummary> {
        self.check_stage(j)?;
        Ok(DisjointFamilySummary::from_parts(
            [FamilyGroup::new(j, self.m[j].clone(), 1)],
            BigUint::zero(),
        ))
    }

    pub fn stage(&self, j: usize) -> Result<StageData> {
        Ok(StageData {
            j,
            m: self.m(j)?.clone(),
            n_coords: self.n_coords[j].clone(),
            k: self.k[j].clone(),
            q: self.q(j)?,
        })
    }

    pub fn map_counts(&self, i: usize, j: usize) -> Result<MapCounts> {
        self.check_pair(i, j)?;
        let (k_ij, r) = self.k_prefix[i].div_rem(&self.k_prefix[j]);
        debug_assert!(r.is_zero());
        let (mult, r) = self.m[i].div_rem(&self.m[j]);
        debug_assert!(r.is_zero());
        let l_ij = mult - &k_ij;
        Ok(MapCounts { i, j, k_ij, l_ij })
    }

    /// Image of a stage-`j` projection in stage `i`.
    pub fn pushforward(&self, i: usize, j: usize, p: &DisjointFamilySummary) -> Result<DisjointFamilySummary> {
        let counts = self.map_counts(i, j)?;
        if p.coordinates_used() > self.n_coords[j] {
            return Err(Error::StageMismatch(format!(
                "family uses {} coordinates but X_{j} has only {}",
                p.coordinates_used(),
                self.n_coords[j]
            )));
        }
        let groups = p
            .groups()
            .iter()
            .map(|g| FamilyGroup::new(g.cardinality, &g.set_count * &counts.k_ij, g.multiplicity));
        let trivial = &counts.k_ij * p.trivial_count() + &counts.l_ij * p.rank();
        Ok(DisjointFamilySummary::from_parts(groups, trivial))
    }

    /// `f_{i,j} = ⊕_{s=1}^{j} φ_{i,s}(q_s)`, the image of `Q_1 ⊕ ... ⊕ Q_j`
    /// at stage `i`.
    pub fn build_f(&self, i: usize, j: usize) -> Result<DisjointFamilySummary> {
        self.check_pair(i, j)?;
        let mut f = DisjointFamilySummary::empty();
        for s in 1..=j {
            f = f.direct_sum(&self.pushforward(i, s, &self.q(s)?)?);
        }
        Ok(f)
    }

    /// Number of trivial line bundles under `copies · f_{i,j}`:
    /// `Σ_s m_s k_{i,s} max(0, copies - s) + copies · Σ_s m_s l_{i,s}`.
    pub fn trivial_capacity(&self, i: usize, j: usize, copies: u64) -> Result<BigUint> {
        self.check_pair(i, j)?;
        let mut surplus = BigUint::zero();
        let mut evaluated = BigUint::zero();
        for s in 1..=j {
            let c = self.map_counts(i, s)?;
            let excess = copies.saturating_sub(s as u64);
            if excess > 0 {
                surplus += &self.m[s] * &c.k_ij * excess;
            }
            evaluated += &self.m[s] * &c.l_ij;
        }
        Ok(surplus + evaluated * copies)
    }

    /// `a_{i,j}`: trivial summands under `n · f_{i,j}`.
    pub fn a_count(&self, i: usize, j: usize, n: u64) -> Result<BigUint> {
        self.trivial_capacity(i, j, n)
    }

    /// `b_{i,j}`: trivial summands under `2n · f_{i,j}`.
    pub fn b_count(&self, i: usize, j: usize, n: u64) -> Result<BigUint> {
        self.trivial_capacity(i, j, 2 * n)
    }

    /// `a_{i,j} / m_i` as an exact rational.
    pub fn normalized_a(&self, i: usize, j: usize, n: u64) -> Result<BigRational> {
        let a = self.a_count(i, j, n)?;
        Ok(BigRational::new(a.into(), self.m[i].clone().into()))
    }
}
