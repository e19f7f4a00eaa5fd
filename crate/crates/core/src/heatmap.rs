//! Cost surfaces over one robot's position with everything else fixed.

use crate::costs::{j_adj, j_col, j_cov, j_est, j_opt, j_overlap, SATURATION};
use crate::error::{Error, Result};
use crate::scenario::HeatmapTerm;
use crate::se2::{FormationState, Pose2, Vec2};
use crate::team::{FormationSpec, RangeGraph, SortedIds, TeamConfig};

/// Inputs shared by every grid cell.
#[derive(Debug, Clone)]
pub struct Surface<'a> {
    pub team: &'a TeamConfig,
    pub graph: &'a RangeGraph,
    pub spec: &'a FormationSpec,
    pub sorted: &'a SortedIds,
    pub term: HeatmapTerm,
}

impl Surface<'_> {
    pub fn value(&self, x: &FormationState) -> f64 {
        let (team, graph, spec, sorted) = (self.team, self.graph, self.spec, self.sorted);
        match self.term {
            HeatmapTerm::Adj => j_adj(x, spec, sorted).unwrap_or(SATURATION),
            HeatmapTerm::Overlap => j_overlap(x, spec, sorted).unwrap_or(SATURATION),
            HeatmapTerm::Est => j_est(x, team, graph),
            HeatmapTerm::Col => j_col(x, spec),
            HeatmapTerm::Opt => j_opt(x, team, graph, spec).total,
            HeatmapTerm::Cov => j_cov(x, team, graph, spec, sorted).total,
        }
    }
}

/// Evaluates the surface with robot `robot` moved to each node of a
/// `resolution x resolution` grid over `[x0, x1] x [y0, y1]`, keeping its
/// heading. Rows are `[x, y, cost]`, `x` varying fastest.
pub fn cost_grid(
    surface: &Surface<'_>,
    base: &FormationState,
    robot: usize,
    x_range: [f64; 2],
    y_range: [f64; 2],
    resolution: usize,
) -> Result<Vec<[f64; 3]>> {
    if resolution < 2 {
        return Err(Error::Invalid("grid resolution must be at least 2".into()));
    }
    if robot < 2 || robot > base.num_robots() {
        return Err(Error::UnknownRobot(robot));
    }
    let heading = base.pose(robot)?.angle();
    let axis = |r: [f64; 2], k: usize| r[0] + (r[1] - r[0]) * k as f64 / (resolution - 1) as f64;
    let mut x = base.clone();
    let mut rows = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        let py = axis(y_range, j);
        for i in 0..resolution {
            let px = axis(x_range, i);
            x.poses[robot - 2] = Pose2::from_parts(heading, Vec2::new(px, py));
            rows.push([px, py, surface.value(&x)]);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::team::default_full_graph;

    #[test]
    fn collision_surface_vanishes_outside_activation_radius() {
        let team = TeamConfig::uniform(3, 0.5);
        let graph = default_full_graph(&team);
        let spec = FormationSpec::line(3, 0.25);
        let sorted = SortedIds::identity(&team);
        let base = FormationState::new(vec![Pose2::new(0.0, 1.0, 0.0), Pose2::new(0.0, 3.0, 0.0)]);
        let s = Surface { team: &team, graph: &graph, spec: &spec, sorted: &sorted, term: HeatmapTerm::Col };
        let rows = cost_grid(&s, &base, 2, [-3.0, 3.0], [-3.0, 3.0], 41).unwrap();
        assert_eq!(rows.len(), 41 * 41);
        for r in rows {
            let p = Vec2::new(r[0], r[1]);
            let near_fixed = p.norm() < 0.9 + 1e-9 || (p - Vec2::new(3.0, 0.0)).norm() < 0.9 + 1e-9;
            if !near_fixed {
                assert_eq!(r[2], 0.0);
            } else {
                assert!(r[2] > 0.0 || (p.norm() - 0.9).abs() < 1e-6 || ((p - Vec2::new(3.0, 0.0)).norm() - 0.9).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        let team = TeamConfig::uniform(2, 0.5);
        let graph = default_full_graph(&team);
        let spec = FormationSpec::line(2, 0.25);
        let sorted = SortedIds::identity(&team);
        let s = Surface { team: &team, graph: &graph, spec: &spec, sorted: &sorted, term: HeatmapTerm::Est };
        let base = FormationState::identity(2);
        assert!(cost_grid(&s, &base, 2, [0.0, 1.0], [0.0, 1.0], 1).is_err());
        assert!(cost_grid(&s, &base, 1, [0.0, 1.0], [0.0, 1.0], 3).is_err());
    }
}
