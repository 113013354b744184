//! Coordinate-level simulation of the first few stages.
//!
//! Coordinates of `X_j` are numbered `0..N_j`. Inside `X_{j+1}` the `l`-th
//! copy of `X_j` occupies `l·N_j .. (l+1)·N_j` and the fresh spheres follow
//! after all `k_j` copies. `q_j` partitions the last `j·m_j` coordinates of
//! `X_j` into consecutive blocks of size `j`.

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::projection::{CoordinateId, FormalProjection, IndexSet};
use crate::tower::Tower;

/// Default coordinate budget; the default tower reaches 1156 at stage 4.
pub const EXPLICIT_COORD_LIMIT: u64 = 2048;

#[derive(Clone, Debug)]
pub struct ExplicitTower {
    k: Vec<u64>,
    m: Vec<u64>,
    n_coords: Vec<u64>,
}

impl ExplicitTower {
    /// Writes out stages `1..=stages`, refusing when `X_stages` would have
    /// more than `coord_limit` spheres.
    pub fn new(tower: &Tower, stages: usize, coord_limit: u64) -> Result<Self> {
        if stages > tower.max_stage() {
            return Err(Error::StageOutOfRange {
                stage: stages,
                max: tower.max_stage(),
            });
        }
        let mut k = vec![0];
        let mut m = vec![0];
        let mut n_coords = vec![0];
        for j in 1..=stages {
            let n = tower.n_coords(j)?;
            let n = n.to_u64().filter(|&n| n <= coord_limit).ok_or(Error::SizeExceeded {
                what: "explicit coordinates",
                actual: n.to_usize().unwrap_or(usize::MAX),
                limit: coord_limit as usize,
            })?;
            n_coords.push(n);
            m.push(tower.m(j)?.to_u64().expect("bounded by coordinate count"));
            k.push(tower.params().k_seq.k(j).to_u64().unwrap_or(u64::MAX));
        }
        Ok(Self { k, m, n_coords })
    }

    pub fn stages(&self) -> usize {
        self.n_coords.len() - 1
    }

    pub fn n_coords(&self, j: usize) -> u64 {
        self.n_coords[j]
    }

    pub fn q(&self, j: usize) -> FormalProjection {
        let block = j as u64 * self.m[j];
        let start = self.n_coords[j] - block;
        FormalProjection::from_sets((0..self.m[j]).map(|alpha| {
            let first = start + alpha * j as u64;
            IndexSet::new(first..first + j as u64).unwrap()
        }))
    }

    /// `φ_j`: stage `j` to stage `j+1`.
    pub fn connect(&self, j: usize, p: &FormalProjection) -> Result<FormalProjection> {
        if j >= self.stages() {
            return Err(Error::StageOutOfRange {
                stage: j + 1,
                max: self.stages(),
            });
        }
        let n = self.n_coords[j];
        if let Some(c) = p.support().last() {
            if c.0 >= n {
                return Err(Error::StageMismatch(format!("coordinate {c} is not on X_{j}")));
            }
        }
        let mut out = FormalProjection::empty();
        for copy in 0..self.k[j] {
            let offset = copy * n;
            out = out.direct_sum(&p.relabel(|c| Some(CoordinateId(c.0 + offset)))?);
        }
        // the point evaluation: every summand becomes trivial
        out.add_term(IndexSet::trivial(), p.rank());
        Ok(out)
    }

    /// `φ_{i,j}` as the composition of single steps.
    pub fn push(&self, i: usize, j: usize, p: &FormalProjection) -> Result<FormalProjection> {
        if i < j {
            return Err(Error::StageMismatch(format!(
                "target stage {i} precedes source stage {j}"
            )));
        }
        let mut cur = p.clone();
        for s in j..i {
            cur = self.connect(s, &cur)?;
        }
        Ok(cur)
    }

    pub fn f(&self, i: usize, j: usize) -> Result<FormalProjection> {
        let mut out = FormalProjection::empty();
        for s in 1..=j {
            out = out.direct_sum(&self.push(i, s, &self.q(s))?);
        }
        Ok(out)
    }
}
