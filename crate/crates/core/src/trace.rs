//! Growth of traces along the approximate unit `Q_1 ⊕ ... ⊕ Q_c`.
//!
//! On a stage algebra `C(X, K)` with `X` connected every trace is a positive
//! multiple of the rank, so trace values are tracked as rank multiples of
//! one symbolic positive weight `k`.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::{DisjointFamilySummary, FormalProjection, IndexSet};
use crate::tower::{Tower, TowerParams};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    /// The simple tower: summands `Q_j`, normalised so that `τ(E) = k`.
    Simple,
    /// Rank-one summands `p_j` over a fixed space: `τ(p) = k·rank(p)`.
    Nonsimple,
}

impl std::str::FromStr for TraceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "simple" => Ok(TraceMode::Simple),
            "nonsimple" => Ok(TraceMode::Nonsimple),
            other => Err(format!("unknown trace mode {other:?}")),
        }
    }
}

/// `value = coefficient · k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub stages: usize,
    #[serde(with = "crate::serde_big::biguint")]
    pub coefficient: BigUint,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ(sum of {} summands) = {}·k", self.stages, self.coefficient)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceGrowthReport {
    pub mode: TraceMode,
    pub unit_weight: String,
    /// Rank of `E` (simple mode) or of each `p_j` (nonsimple mode).
    pub unit_rank: u64,
    pub entries: Vec<TraceEntry>,
}

impl TraceGrowthReport {
    pub fn is_strictly_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].coefficient < w[1].coefficient)
    }

    /// Whether every entry equals `c · unit_rank · k`.
    pub fn is_linear(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.coefficient == BigUint::from(e.stages as u64 * self.unit_rank))
    }
}

pub fn trace_growth(params: &TowerParams, mode: TraceMode, max_stages: usize) -> Result<TraceGrowthReport> {
    if max_stages == 0 {
        return Err(Error::InvalidParams("at least one stage is required".into()));
    }
    let entries = match mode {
        TraceMode::Simple => simple_entries(params, max_stages)?,
        TraceMode::Nonsimple => nonsimple_entries(max_stages),
    };
    Ok(TraceGrowthReport {
        mode,
        unit_weight: "k".into(),
        unit_rank: 1,
        entries,
    })
}

fn simple_entries(params: &TowerParams, max_stages: usize) -> Result<Vec<TraceEntry>> {
    let tower = Tower::new(TowerParams {
        max_stage: params.max_stage.max(max_stages),
        ..params.clone()
    })?;
    let e1 = DisjointFamilySummary::from_parts([], BigUint::from(1u32));

    // τ_j(q_j) = τ_j(φ_{j,1}(e_1)) = τ(E) needs equal ranks at every stage
    for j in 1..=max_stages {
        let m = tower.m(j)?;
        let q_rank = tower.q(j)?.rank();
        let e_rank = tower.pushforward(j, 1, &e1)?.rank();
        if &q_rank != m || &e_rank != m {
            return Err(Error::Internal(format!(
                "rank mismatch at stage {j}: q_j {q_rank}, image of e_1 {e_rank}, m_j {m}"
            )));
        }
    }

    // at stage c the trace is τ(E)/m_c per unit of rank
    (1..=max_stages)
        .map(|c| {
            let f_rank = tower.build_f(c, c)?.rank();
            let (coefficient, rem) = f_rank.div_rem(tower.m(c)?);
            if !rem.is_zero() {
                return Err(Error::Internal(format!(
                    "rank of f_{{{c},{c}}} is not a multiple of m_{c}"
                )));
            }
            Ok(TraceEntry { stages: c, coefficient })
        })
        .collect()
}

fn nonsimple_entries(max_stages: usize) -> Vec<TraceEntry> {
    let mut partial = FormalProjection::empty();
    (1..=max_stages)
        .map(|c| {
            // p_c: a rank-one summand; the label only keeps summands apart
            partial.add_term(IndexSet::new([c as u64]).unwrap(), 1);
            TraceEntry {
                stages: c,
                coefficient: BigUint::from(partial.rank()),
            }
        })
        .collect()
}
