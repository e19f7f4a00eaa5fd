//! Formation cost terms: observability (`est`), collision barrier (`col`),
//! adjacency shape (`adj`) and camera overlap (`overlap`), plus the two
//! compositions used for formation design.

use crate::error::{Error, Result};
use crate::ranging::fisher;
use crate::se2::{FormationState, Vec2};
use crate::team::{FormationSpec, RangeGraph, SortedIds, TeamConfig};
use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Value returned for unobservable states and breached collision barriers.
pub const SATURATION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub adj: f64,
    pub overlap: f64,
    pub est: f64,
    pub col: f64,
    pub total: f64,
}

/// `-ln det(H^T R^-1 H)`, or [`SATURATION`] when the information matrix is
/// not positive definite.
pub fn j_est(x: &FormationState, team: &TeamConfig, graph: &RangeGraph) -> f64 {
    let Ok(f) = fisher(x, team, graph) else {
        return SATURATION;
    };
    if f.nrows() == 0 {
        return 0.0;
    }
    match Cholesky::new(f) {
        Some(chol) => {
            let l = chol.l_dirty();
            let log_det: f64 = (0..l.nrows()).map(|k| 2.0 * l[(k, k)].ln()).sum();
            if log_det.is_finite() {
                (-log_det).min(SATURATION)
            } else {
                SATURATION
            }
        }
        None => SATURATION,
    }
}

/// Barrier `(min{0, (|r|^2 - A^2) / (|r|^2 - d^2)})^2` for one pair.
/// Separations at or inside `d` return [`SATURATION`].
pub fn j_col_pair(x: &FormationState, m: usize, n: usize, activation: f64, collision: f64) -> Result<f64> {
    let r2 = x.relative_position(m, n)?.norm_squared();
    Ok(barrier(r2, activation, collision))
}

fn barrier(r2: f64, a: f64, d: f64) -> f64 {
    if r2 <= d * d {
        return SATURATION;
    }
    let v = ((r2 - a * a) / (r2 - d * d)).min(0.0);
    v * v
}

/// Sum of the barrier over all ordered pairs `m != n`.
pub fn j_col(x: &FormationState, spec: &FormationSpec) -> f64 {
    let n = x.num_robots();
    let mut total = 0.0;
    for a in 1..=n {
        let pa = x.position(a).expect("id in range");
        for b in a + 1..=n {
            let r2 = (pa - x.position(b).expect("id in range")).norm_squared();
            // each unordered pair appears twice in the ordered sum
            total += 2.0 * barrier(r2, spec.activation_radius, spec.collision_radius);
        }
    }
    total.min(SATURATION)
}

/// Target displacement of slot `m` from slot `n` (1-based, `n < m`):
/// `sum_{k=n}^{m-1} (r_{k+1} + r_k) n^(k)`.
pub fn desired_offset(spec: &FormationSpec, sorted: &SortedIds, n: usize, m: usize) -> Result<Vec2> {
    if !(1 <= n && n < m && m <= sorted.len()) {
        return Err(Error::IndexOrder { n, m });
    }
    let r = &sorted.radii;
    Ok((n..m).fold(Vec2::zeros(), |acc, k| {
        acc + spec.directions[k - 1] * (r[k] + r[k - 1])
    }))
}

fn slot_position(x: &FormationState, sorted: &SortedIds, slot: usize) -> Result<Vec2> {
    x.position(sorted.order[slot - 1])
}

pub fn j_adj(x: &FormationState, spec: &FormationSpec, sorted: &SortedIds) -> Result<f64> {
    let n = sorted.len();
    let positions = (1..=n).map(|s| slot_position(x, sorted, s)).collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for a in 1..=n {
        for b in a + 1..=n {
            let actual = positions[b - 1] - positions[a - 1];
            total += (actual - desired_offset(spec, sorted, a, b)?).norm_squared();
        }
    }
    Ok(total)
}

/// Target separation of slots `n < m`: `(1 - lambda)(2 sum_{k=n}^{m} r_k - r_n - r_m)`.
pub fn overlap_separation(spec: &FormationSpec, sorted: &SortedIds, n: usize, m: usize) -> f64 {
    let r = &sorted.radii;
    let chain: f64 = r[n - 1..m].iter().sum();
    (1.0 - spec.lambda) * (2.0 * chain - r[n - 1] - r[m - 1])
}

pub fn j_overlap(x: &FormationState, spec: &FormationSpec, sorted: &SortedIds) -> Result<f64> {
    let n = sorted.len();
    let mut total = 0.0;
    for a in 1..=n {
        for b in a + 1..=n {
            let (ra, rb) = (sorted.order[a - 1], sorted.order[b - 1]);
            if spec.overlap_exempt.contains(&ra) || spec.overlap_exempt.contains(&rb) {
                continue;
            }
            let r = slot_position(x, sorted, b)? - slot_position(x, sorted, a)?;
            let dist = r.norm();
            if dist <= 1e-9 {
                return Err(Error::DegeneratePair(a, b));
            }
            let unit = r / dist;
            total += (r - unit * overlap_separation(spec, sorted, a, b)).norm_squared();
        }
    }
    Ok(total)
}

/// Observability plus collision, weights fixed at one.
pub fn j_opt(x: &FormationState, team: &TeamConfig, graph: &RangeGraph, spec: &FormationSpec) -> CostBreakdown {
    let est = j_est(x, team, graph);
    let col = j_col(x, spec);
    CostBreakdown {
        est,
        col,
        total: est + col,
        ..Default::default()
    }
}

/// Weighted sum of all four terms.
pub fn j_cov(
    x: &FormationState,
    team: &TeamConfig,
    graph: &RangeGraph,
    spec: &FormationSpec,
    sorted: &SortedIds,
) -> CostBreakdown {
    let w = &spec.weights;
    let adj = j_adj(x, spec, sorted).unwrap_or(SATURATION);
    let overlap = j_overlap(x, spec, sorted).unwrap_or(SATURATION);
    let est = j_est(x, team, graph);
    let col = j_col(x, spec);
    CostBreakdown {
        adj,
        overlap,
        est,
        col,
        total: w.adj * adj + w.overlap * overlap + w.est * est + w.col * col,
    }
}

/// Which composite cost a formation is designed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Adj,
    Opt,
    Cov,
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostKind::Adj => "adj",
            CostKind::Opt => "opt",
            CostKind::Cov => "cov",
        })
    }
}

impl FromStr for CostKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adj" => Ok(CostKind::Adj),
            "opt" => Ok(CostKind::Opt),
            "cov" => Ok(CostKind::Cov),
            other => Err(Error::Invalid(format!("unknown cost '{other}' (expected adj, opt or cov)"))),
        }
    }
}

/// Everything needed to evaluate one of the composite costs on a state.
#[derive(Debug, Clone)]
pub struct Objective {
    pub kind: CostKind,
    pub team: TeamConfig,
    pub graph: RangeGraph,
    pub spec: FormationSpec,
    pub sorted: SortedIds,
}

impl Objective {
    pub fn breakdown(&self, x: &FormationState) -> CostBreakdown {
        match self.kind {
            CostKind::Adj => {
                let adj = j_adj(x, &self.spec, &self.sorted).unwrap_or(SATURATION);
                CostBreakdown {
                    adj,
                    total: adj,
                    ..Default::default()
                }
            }
            CostKind::Opt => j_opt(x, &self.team, &self.graph, &self.spec),
            CostKind::Cov => j_cov(x, &self.team, &self.graph, &self.spec, &self.sorted),
        }
    }

    pub fn value(&self, x: &FormationState) -> f64 {
        self.breakdown(x).total
    }
}
