//! Inter-tag range model, its Jacobian under the right-perturbation
//! retraction, and the Fisher information `H^T R^-1 H`.

use crate::error::{Error, Result};
use crate::se2::{perp, FormationState, Pose2, Vec2};
use crate::team::{RangeGraph, TagLocation, TeamConfig};
use nalgebra::{DMatrix, DVector, Matrix2x3};

/// Stacked ranges in graph edge order.
pub type MeasurementVector = DVector<f64>;
/// `|E| x 3(N-1)` measurement Jacobian.
pub type JacobianMatrix = DMatrix<f64>;
/// `3(N-1) x 3(N-1)` Fisher information.
pub type FisherMatrix = DMatrix<f64>;

/// Ranges shorter than this have no defined gradient.
pub const MIN_RANGE: f64 = 1e-9;

/// Derivative of `T exp(dxi) o` with respect to `dxi = [phi, rho]` at zero:
/// `C [perp*o | I]`.
pub fn point_jacobian(pose: &Pose2, offset: &Vec2) -> Matrix2x3<f64> {
    let d_phi = perp() * offset;
    let mut local = Matrix2x3::zeros();
    local[(0, 0)] = d_phi.x;
    local[(1, 0)] = d_phi.y;
    local[(0, 1)] = 1.0;
    local[(1, 2)] = 1.0;
    pose.rot * local
}

/// Tag location in Robot 1's frame.
pub fn tag_position(x: &FormationState, team: &TeamConfig, tag: usize) -> Result<Vec2> {
    match team.tag(tag)? {
        TagLocation::Robot { robot, index } => {
            let pose = x.pose(robot)?;
            Ok(pose.transform(&team.robot(robot)?.tag_offsets[index]))
        }
        TagLocation::Landmark(l) => Ok(team.landmarks()[l]),
    }
}

pub fn predict_range(x: &FormationState, team: &TeamConfig, i: usize, j: usize) -> Result<f64> {
    Ok((tag_position(x, team, i)? - tag_position(x, team, j)?).norm())
}

pub fn predict_all(x: &FormationState, team: &TeamConfig, graph: &RangeGraph) -> Result<MeasurementVector> {
    let values = graph
        .edges()
        .map(|(i, j, _)| predict_range(x, team, i, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

pub fn jacobian(x: &FormationState, team: &TeamConfig, graph: &RangeGraph) -> Result<JacobianMatrix> {
    let mut h = DMatrix::zeros(graph.len(), x.dof());
    for (row, (i, j, _)) in graph.edges().enumerate() {
        let rho = tag_position(x, team, i)? - tag_position(x, team, j)?;
        let range = rho.norm();
        if range < MIN_RANGE {
            return Err(Error::SingularGeometry(i, j));
        }
        let u = rho.transpose() / range;
        for (tag, sign) in [(i, 1.0), (j, -1.0)] {
            if let TagLocation::Robot { robot, index } = team.tag(tag)? {
                if robot == 1 {
                    continue;
                }
                let pose = x.pose(robot)?;
                let offset = team.robot(robot)?.tag_offsets[index];
                let block = u * point_jacobian(&pose, &offset) * sign;
                let col = 3 * (robot - 2);
                for k in 0..3 {
                    h[(row, col + k)] += block[k];
                }
            }
        }
    }
    Ok(h)
}

pub fn fisher(x: &FormationState, team: &TeamConfig, graph: &RangeGraph) -> Result<FisherMatrix> {
    let mut h = jacobian(x, team, graph)?;
    for (row, (_, _, sigma)) in graph.edges().enumerate() {
        h.row_mut(row).scale_mut(1.0 / sigma);
    }
    let mut f = h.transpose() * h;
    // exact symmetry for downstream factorizations
    let n = f.nrows();
    for a in 0..n {
        for b in a + 1..n {
            let m = 0.5 * (f[(a, b)] + f[(b, a)]);
            f[(a, b)] = m;
            f[(b, a)] = m;
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::team::{default_full_graph, RobotSpec};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn team2() -> TeamConfig {
        TeamConfig::uniform(2, 0.5)
    }

    #[test]
    fn tag_position_examples() {
        let t = team2();
        let x = FormationState::new(vec![Pose2::new(0.0, 3.0, 0.0)]);
        assert_eq!(tag_position(&x, &t, 1).unwrap(), Vec2::new(0.17, -0.17));
        let p = tag_position(&x, &t, 4).unwrap();
        assert_abs_diff_eq!(p.x, 2.83, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.17, epsilon = 1e-15);

        let robots = vec![
            RobotSpec { id: 1, tag_offsets: vec![Vec2::zeros()], camera_radius: 0.5 },
            RobotSpec { id: 2, tag_offsets: vec![Vec2::new(1.0, 0.0)], camera_radius: 0.5 },
        ];
        let t1 = TeamConfig::new(robots).unwrap();
        let xr = FormationState::new(vec![Pose2::new(PI / 2.0, 1.0, 0.0)]);
        let q = tag_position(&xr, &t1, 2).unwrap();
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.y, 1.0, epsilon = 1e-15);
        assert_eq!(tag_position(&xr, &t1, 3), Err(Error::UnknownTag(3)));
    }

    #[test]
    fn predict_range_examples() {
        let t = team2();
        let coincident = FormationState::identity(2);
        assert_eq!(predict_range(&coincident, &t, 1, 3).unwrap(), 0.0);
        let x = FormationState::new(vec![Pose2::new(0.0, 3.0, 0.0)]);
        let r = predict_range(&x, &t, 1, 4).unwrap();
        assert_abs_diff_eq!(r, (2.66f64.powi(2) + 0.34f64.powi(2)).sqrt(), epsilon = 1e-14);
        assert_eq!(r, predict_range(&x, &t, 4, 1).unwrap());
    }

    #[test]
    fn predict_all_follows_graph_order() {
        let t = team2();
        let x = FormationState::new(vec![Pose2::new(0.4, 2.0, 1.0)]);
        assert_eq!(predict_all(&x, &t, &RangeGraph::empty()).unwrap().len(), 0);
        let g = default_full_graph(&t);
        let y = predict_all(&x, &t, &g).unwrap();
        assert_eq!(y.len(), 4);
        for (k, (i, j, _)) in g.edges().enumerate() {
            assert_eq!(y[k], predict_range(&x, &t, i, j).unwrap());
        }
    }

    #[test]
    fn jacobian_shape_and_singular_guard() {
        let t = TeamConfig::uniform(3, 0.5);
        let g = default_full_graph(&t);
        let x = FormationState::new(vec![Pose2::new(0.1, 2.0, 0.0), Pose2::new(-0.3, 0.0, 2.0)]);
        let h = jacobian(&x, &t, &g).unwrap();
        assert_eq!((h.nrows(), h.ncols()), (12, 6));
        let degenerate = FormationState::identity(3);
        assert!(matches!(jacobian(&degenerate, &t, &g), Err(Error::SingularGeometry(_, _))));
    }

    #[test]
    fn landmark_to_landmark_edge_has_zero_row() {
        let robots = vec![
            RobotSpec { id: 1, tag_offsets: vec![Vec2::zeros()], camera_radius: 0.5 },
            RobotSpec { id: 2, tag_offsets: vec![Vec2::zeros()], camera_radius: 0.5 },
        ];
        let t = TeamConfig::with_landmarks(robots, vec![Vec2::new(5.0, 0.0), Vec2::new(0.0, 5.0)]).unwrap();
        let mut g = RangeGraph::empty();
        g.insert(&t, 3, 4, 0.1).unwrap();
        g.insert(&t, 2, 3, 0.1).unwrap();
        let x = FormationState::new(vec![Pose2::new(0.2, 1.0, 1.0)]);
        let h = jacobian(&x, &t, &g).unwrap();
        assert!(h.row(1).iter().all(|v| *v == 0.0));
        assert!(h.row(0).iter().any(|v| *v != 0.0));
    }

    #[test]
    fn fisher_examples() {
        let t = team2();
        let x = FormationState::new(vec![Pose2::new(0.7, 1.3, 0.6)]);
        assert_eq!(fisher(&x, &t, &RangeGraph::empty()).unwrap(), DMatrix::zeros(3, 3));
        let g = default_full_graph(&t);
        let f1 = fisher(&x, &t, &g).unwrap();
        let f2 = fisher(&x, &t, &g.scaled(3.0)).unwrap();
        assert!((f1.clone() / 9.0 - f2).abs().max() < 1e-12);
        assert!((f1.clone() - f1.transpose()).abs().max() == 0.0);
    }
}
