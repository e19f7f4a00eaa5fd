//! End-to-end formation design: random multi-start, id sorting, descent.

use crate::assignment::sort_robot_ids;
use crate::costs::{CostBreakdown, CostKind, Objective};
use crate::error::Result;
use crate::optimizer::{best_restart, multistart, OptimizationTrace, OptimizerConfig};
use crate::se2::{FormationState, Pose2};
use crate::team::{mask_edges, FormationSpec, RangeGraph, SortedIds, TeamConfig};

/// Static inputs shared by every design run.
#[derive(Debug, Clone)]
pub struct DesignProblem {
    pub team: TeamConfig,
    pub graph: RangeGraph,
    pub spec: FormationSpec,
}

/// How the per-start objective is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignMode {
    Standard,
    /// The two end slots are GPS-equipped: their overlap terms are dropped and
    /// the range edges between them are removed.
    EndpointsGps,
}

#[derive(Debug, Clone)]
pub struct FormationDesign {
    pub kind: CostKind,
    pub state: FormationState,
    pub objective: Objective,
    pub breakdown: CostBreakdown,
    pub trace: OptimizationTrace,
    pub restart: usize,
    /// Robots flagged as GPS-equipped (empty in standard mode).
    pub gps_robots: Vec<usize>,
}

impl DesignProblem {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.spec.check_team(&self.team)
    }

    /// Objective for a given start; sorting uses the start state.
    pub fn objective_for(&self, kind: CostKind, x0: &FormationState, mode: DesignMode) -> Result<(Objective, Vec<usize>)> {
        let sorted = match kind {
            CostKind::Opt if mode == DesignMode::Standard => SortedIds::identity(&self.team),
            _ => sort_robot_ids(x0, &self.team, &self.spec.directions)?,
        };
        let mut graph = self.graph.clone();
        let mut spec = self.spec.clone();
        let mut gps = Vec::new();
        if mode == DesignMode::EndpointsGps {
            let (first, last) = (sorted.order[0], *sorted.order.last().expect("non-empty order"));
            graph = mask_edges(&graph, (first, last), &self.team)?;
            spec.overlap_exempt.insert(first);
            spec.overlap_exempt.insert(last);
            gps = vec![first, last];
        }
        Ok((
            Objective {
                kind,
                team: self.team.clone(),
                graph,
                spec,
                sorted,
            },
            gps,
        ))
    }

    pub fn design(&self, kind: CostKind, cfg: &OptimizerConfig, seed: u64, mode: DesignMode) -> Result<FormationDesign> {
        self.validate()?;
        let results = multistart(
            self.team.num_robots(),
            self.spec.collision_radius,
            cfg,
            seed,
            |x0| {
                let (objective, gps) = self.objective_for(kind, x0, mode)?;
                let cost_obj = objective.clone();
                Ok(((objective, gps), move |x: &FormationState| cost_obj.value(x)))
            },
        )?;
        let best = best_restart(&results).expect("at least one restart");
        let (objective, gps) = best.context.clone();
        let state = best.trace.final_state.clone();
        Ok(FormationDesign {
            kind,
            breakdown: objective.breakdown(&state),
            state,
            objective,
            trace: best.trace.clone(),
            restart: best.restart,
            gps_robots: gps,
        })
    }
}

/// The exact target formation of the adjacency term with every heading
/// aligned to Robot 1, slots in ascending id order.
pub fn constructed_formation(team: &TeamConfig, spec: &FormationSpec) -> FormationState {
    let sorted = SortedIds::identity(team);
    let poses = (2..=team.num_robots())
        .map(|m| {
            let offset = crate::costs::desired_offset(spec, &sorted, 1, m).expect("valid slots");
            Pose2::from_parts(0.0, offset)
        })
        .collect();
    FormationState::new(poses)
}
