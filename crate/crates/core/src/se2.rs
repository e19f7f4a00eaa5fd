//! SE(2) group arithmetic and the right-perturbation retraction on
//! `SE(2)^{N-1}`.
//!
//! Twists are ordered `[phi, rho_x, rho_y]` everywhere in the crate: in
//! [`FormationState::oplus`], in the measurement Jacobians of
//! [`crate::ranging`], and in the error state of the EKF.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix3, Vector2};

pub type Vec2 = Vector2<f64>;

/// Below this angle the `V(phi)` coefficients switch to their Taylor series.
pub const SMALL_ANGLE: f64 = 1e-7;

/// Number of compositions a [`PoseChain`] performs between re-projections onto SO(2).
pub const RENORMALIZE_EVERY: usize = 100;

/// The 90 degree rotation generator `[[0, -1], [1, 0]]`.
pub fn perp() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w <= -std::f64::consts::PI {
        w += two_pi;
    } else if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Coefficients `(sin(phi)/phi, (1 - cos(phi))/phi)` of `V(phi) = a*I + b*perp`.
fn v_coefficients(phi: f64) -> (f64, f64) {
    if phi.abs() < SMALL_ANGLE {
        (1.0 - phi * phi / 6.0, 0.5 * phi)
    } else {
        let h = (0.5 * phi).sin();
        (phi.sin() / phi, 2.0 * h * h / phi)
    }
}

/// Element of se(2), ordered `[phi, rho_x, rho_y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist2 {
    pub phi: f64,
    pub rho: Vec2,
}

impl Twist2 {
    pub fn new(phi: f64, rho_x: f64, rho_y: f64) -> Self {
        Self {
            phi,
            rho: Vec2::new(rho_x, rho_y),
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.phi, self.rho.x, self.rho.y]
    }

    pub fn norm(&self) -> f64 {
        (self.phi * self.phi + self.rho.norm_squared()).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            phi: self.phi * s,
            rho: self.rho * s,
        }
    }
}

/// Rigid planar transform `[[C, r], [0, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub rot: Matrix2<f64>,
    pub trans: Vec2,
}

impl Default for Pose2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose2 {
    pub fn identity() -> Self {
        Self {
            rot: Matrix2::identity(),
            trans: Vec2::zeros(),
        }
    }

    pub fn new(angle: f64, x: f64, y: f64) -> Self {
        Self {
            rot: rotation(angle),
            trans: Vec2::new(x, y),
        }
    }

    pub fn from_parts(angle: f64, trans: Vec2) -> Self {
        Self {
            rot: rotation(angle),
            trans,
        }
    }

    pub fn angle(&self) -> f64 {
        self.rot[(1, 0)].atan2(self.rot[(0, 0)])
    }

    pub fn exp(xi: &Twist2) -> Self {
        let (a, b) = v_coefficients(xi.phi);
        let v = Matrix2::identity() * a + perp() * b;
        Self {
            rot: rotation(xi.phi),
            trans: v * xi.rho,
        }
    }

    pub fn log(&self) -> Twist2 {
        let phi = self.angle();
        let (a, b) = v_coefficients(phi);
        let v_inv = (Matrix2::identity() * a - perp() * b) / (a * a + b * b);
        Twist2 {
            phi,
            rho: v_inv * self.trans,
        }
    }

    pub fn compose(&self, other: &Pose2) -> Pose2 {
        Pose2 {
            rot: self.rot * other.rot,
            trans: self.rot * other.trans + self.trans,
        }
    }

    pub fn inverse(&self) -> Pose2 {
        let rt = self.rot.transpose();
        Pose2 {
            rot: rt,
            trans: -(rt * self.trans),
        }
    }

    /// Applies the pose to a body-frame point.
    pub fn transform(&self, p: &Vec2) -> Vec2 {
        self.rot * p + self.trans
    }

    /// `self * exp(xi)`.
    pub fn retract(&self, xi: &Twist2) -> Pose2 {
        self.compose(&Pose2::exp(xi))
    }

    /// Projects the rotation block back onto SO(2) through its angle.
    pub fn renormalize(&mut self) {
        self.rot = rotation(self.angle());
    }

    /// Adjoint in `[phi, rho]` ordering: `T exp(xi) T^-1 = exp(Ad_T xi)`.
    pub fn adjoint(&self) -> Matrix3<f64> {
        let t = self.trans;
        let c = self.rot;
        Matrix3::new(
            1.0, 0.0, 0.0, //
            t.y, c[(0, 0)], c[(0, 1)], //
            -t.x, c[(1, 0)], c[(1, 1)],
        )
    }
}

/// Running composition that re-projects onto SO(2) every
/// [`RENORMALIZE_EVERY`] steps.
#[derive(Debug, Clone)]
pub struct PoseChain {
    pose: Pose2,
    since_renorm: usize,
}

impl PoseChain {
    pub fn new(start: Pose2) -> Self {
        Self {
            pose: start,
            since_renorm: 0,
        }
    }

    pub fn push(&mut self, step: &Pose2) {
        self.pose = self.pose.compose(step);
        self.since_renorm += 1;
        if self.since_renorm >= RENORMALIZE_EVERY {
            self.pose.renormalize();
            self.since_renorm = 0;
        }
    }

    pub fn pose(&self) -> &Pose2 {
        &self.pose
    }
}

/// Poses of robots `2..=N` relative to Robot 1. Robot 1 is the implicit identity.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationState {
    pub poses: Vec<Pose2>,
}

impl FormationState {
    pub fn new(poses: Vec<Pose2>) -> Self {
        Self { poses }
    }

    /// All followers at the identity.
    pub fn identity(num_robots: usize) -> Self {
        Self {
            poses: vec![Pose2::identity(); num_robots.saturating_sub(1)],
        }
    }

    pub fn num_robots(&self) -> usize {
        self.poses.len() + 1
    }

    /// Length of the flat perturbation vector, `3(N-1)`.
    pub fn dof(&self) -> usize {
        3 * self.poses.len()
    }

    /// Pose of robot `id` (1-based) relative to Robot 1.
    pub fn pose(&self, id: usize) -> Result<Pose2> {
        match id {
            1 => Ok(Pose2::identity()),
            p if p >= 2 && p <= self.num_robots() => Ok(self.poses[p - 2]),
            p => Err(Error::UnknownRobot(p)),
        }
    }

    pub fn position(&self, id: usize) -> Result<Vec2> {
        self.pose(id).map(|p| p.trans)
    }

    /// Right perturbation of every pose: `T_1p * exp(dxi_p)`.
    pub fn oplus(&self, dx: &[f64]) -> Result<FormationState> {
        if dx.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                found: dx.len(),
            });
        }
        let poses = self
            .poses
            .iter()
            .zip(dx.chunks_exact(3))
            .map(|(pose, d)| pose.retract(&Twist2::from_slice(d)))
            .collect();
        Ok(FormationState { poses })
    }

    /// Position of robot `p` relative to robot `q`, resolved in Robot 1's frame.
    pub fn relative_position(&self, p: usize, q: usize) -> Result<Vec2> {
        Ok(self.position(p)? - self.position(q)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn close(a: &Pose2, b: &Pose2, tol: f64) -> bool {
        (a.rot - b.rot).abs().max() < tol && (a.trans - b.trans).abs().max() < tol
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(Pose2::exp(&Twist2::zero()), Pose2::identity());
    }

    #[test]
    fn exp_pure_rotation() {
        let t = Pose2::exp(&Twist2::new(0.7, 0.0, 0.0));
        assert_abs_diff_eq!(t.angle(), 0.7, epsilon = 1e-15);
        assert_eq!(t.trans, Vec2::zeros());
    }

    #[test]
    fn exp_quarter_turn_with_translation() {
        // V(pi/2) = (2/pi) [[1, -1], [1, 1]] applied to (1, 0).
        let t = Pose2::exp(&Twist2::new(PI / 2.0, 1.0, 0.0));
        assert_abs_diff_eq!(t.trans.x, 2.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(t.trans.y, 2.0 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(t.angle(), PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn small_angle_branch_matches_closed_form() {
        for phi in [0.99e-7, -0.5e-7, 1e-9] {
            let (a, b) = v_coefficients(phi);
            let h = (0.5 * phi).sin();
            assert_abs_diff_eq!(a, phi.sin() / phi, epsilon = 1e-15);
            assert_abs_diff_eq!(b, 2.0 * h * h / phi, epsilon = 1e-15);
        }
    }

    #[test]
    fn log_examples() {
        let id = Pose2::identity().log();
        assert_eq!(id.to_array(), [0.0, 0.0, 0.0]);
        for xi in [Twist2::new(0.3, 1.0, -0.5), Twist2::new(PI / 2.0, 1.0, 0.0)] {
            let back = Pose2::exp(&xi).log();
            for (a, b) in back.to_array().iter().zip(xi.to_array()) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn group_laws() {
        let b = Pose2::new(0.4, 1.0, 2.0);
        assert!(close(&Pose2::identity().compose(&b), &b, 1e-15));
        assert_eq!(Pose2::identity().inverse(), Pose2::identity());
        let q = Pose2::exp(&Twist2::new(PI / 2.0, 0.0, 0.0));
        assert_abs_diff_eq!(q.compose(&q).angle().abs(), PI, epsilon = 1e-12);
        assert!(close(&b.compose(&b.inverse()), &Pose2::identity(), 1e-12));
    }

    #[test]
    fn adjoint_matches_conjugation() {
        let t = Pose2::new(0.8, 1.5, -0.3);
        let xi = Twist2::new(0.2, -0.4, 0.9);
        let lhs = t.compose(&Pose2::exp(&xi)).compose(&t.inverse());
        let v = t.adjoint() * nalgebra::Vector3::new(xi.phi, xi.rho.x, xi.rho.y);
        let rhs = Pose2::exp(&Twist2::new(v[0], v[1], v[2]));
        assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn oplus_examples() {
        let x = FormationState::new(vec![Pose2::new(0.3, 1.0, 2.0), Pose2::new(-1.0, 0.0, 4.0)]);
        assert_eq!(x.oplus(&[0.0; 6]).unwrap(), x);
        let single = FormationState::identity(2);
        let moved = single.oplus(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(moved.poses[0].trans, Vec2::new(1.0, 0.0));
        assert_eq!(
            x.oplus(&[0.0; 5]),
            Err(Error::DimensionMismatch {
                expected: 6,
                found: 5
            })
        );
    }

    #[test]
    fn oplus_then_negated_perturbation_restores_state() {
        let x = FormationState::new(vec![Pose2::new(0.5, 1.0, -1.0)]);
        let dx = [0.3, -0.7, 0.4];
        let neg: Vec<f64> = dx.iter().map(|v| -v).collect();
        let back = x.oplus(&dx).unwrap().oplus(&neg).unwrap();
        assert!(close(&back.poses[0], &x.poses[0], 1e-14));
    }

    #[test]
    fn successive_perturbations_commute_to_first_order() {
        // (x (+) a) (+) b differs from x (+) (a + b) by O(h^2).
        let x = FormationState::new(vec![Pose2::new(0.5, 1.0, -1.0)]);
        let mut ratios = Vec::new();
        for h in [1e-2, 1e-3] {
            let a = [h, 2.0 * h, -h];
            let b = [-0.5 * h, h, 3.0 * h];
            let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
            let seq = x.oplus(&a).unwrap().oplus(&b).unwrap();
            let joint = x.oplus(&sum).unwrap();
            let err = joint.poses[0].inverse().compose(&seq.poses[0]).log().norm();
            ratios.push(err / (h * h));
        }
        assert!(ratios[0] > 0.0 && (ratios[0] / ratios[1] - 1.0).abs() < 0.05);
    }

    #[test]
    fn relative_position_examples() {
        let x = FormationState::new(vec![Pose2::new(0.0, 3.0, 4.0), Pose2::new(1.0, 3.0, 0.0), Pose2::new(0.0, 1.0, 1.0)]);
        assert_eq!(x.relative_position(2, 2).unwrap(), Vec2::zeros());
        assert_eq!(x.relative_position(2, 1).unwrap(), Vec2::new(3.0, 4.0));
        assert_eq!(x.relative_position(3, 4).unwrap(), Vec2::new(2.0, -1.0));
        assert_eq!(x.relative_position(9, 1), Err(Error::UnknownRobot(9)));
    }

    #[test]
    fn pose_chain_keeps_rotation_orthonormal() {
        let step = Pose2::new(0.123456789, 0.01, -0.02);
        let mut chain = PoseChain::new(Pose2::identity());
        for _ in 0..10_000 {
            chain.push(&step);
        }
        let r = chain.pose().rot;
        assert!((r.determinant() - 1.0).abs() < 1e-9);
        assert!((r.transpose() * r - Matrix2::identity()).abs().max() < 1e-9);
    }

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(0.5), 0.5);
    }
}
