//! Error-state EKF over global robot poses and static landmarks.
//!
//! The error of robot `p` is defined by `T_true = T_est * exp(dxi_p)`, so
//! the pose blocks of the covariance share the `[phi, rho]` ordering of the
//! ranging Jacobians. Landmark errors are additive and their blocks are
//! appended in the order the landmarks get initialised.

use crate::ranging::point_jacobian;
use crate::se2::{Pose2, Twist2, Vec2};
use nalgebra::{DMatrix, DVector, Matrix2, Matrix3};

/// Chi-square gate for one degree of freedom.
pub const RANGE_GATE: f64 = 13.8;
/// Chi-square gate for two degrees of freedom.
pub const GPS_GATE: f64 = 18.4;

/// One end of a range measurement, as seen by the filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    /// Tag at `offset` on robot `robot` (0-based index into the poses).
    Tag { robot: usize, offset: Vec2 },
    Landmark(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Applied,
    /// Rejected by the innovation gate.
    Gated,
    /// An endpoint has no state yet.
    Skipped,
}

#[derive(Debug, Clone)]
pub struct EkfState {
    pub poses: Vec<Pose2>,
    landmarks: Vec<Option<(Vec2, usize)>>,
    pub covariance: DMatrix<f64>,
}

impl EkfState {
    /// Robot poses with a diagonal prior `[var_phi, var_x, var_y]` per robot.
    /// `num_landmarks` slots are reserved but hold no state until initialised.
    pub fn new(poses: Vec<Pose2>, prior: [f64; 3], num_landmarks: usize) -> Self {
        let n = 3 * poses.len();
        let mut covariance = DMatrix::zeros(n, n);
        for k in 0..n {
            covariance[(k, k)] = prior[k % 3];
        }
        Self {
            poses,
            landmarks: vec![None; num_landmarks],
            covariance,
        }
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn landmark(&self, l: usize) -> Option<Vec2> {
        self.landmarks[l].map(|(m, _)| m)
    }

    pub fn landmark_covariance(&self, l: usize) -> Option<Matrix2<f64>> {
        self.landmarks[l].map(|(_, c)| self.covariance.fixed_view::<2, 2>(c, c).into_owned())
    }

    pub fn pose_covariance(&self, robot: usize) -> Matrix3<f64> {
        self.covariance.fixed_view::<3, 3>(3 * robot, 3 * robot).into_owned()
    }

    pub fn is_initialized(&self, l: usize) -> bool {
        self.landmarks[l].is_some()
    }

    /// Appends landmark `l` with no cross-correlation to the existing state.
    pub fn add_landmark(&mut self, l: usize, mean: Vec2, cov: Matrix2<f64>) {
        assert!(self.landmarks[l].is_none(), "landmark {l} initialised twice");
        let n = self.dim();
        let mut grown = DMatrix::zeros(n + 2, n + 2);
        grown.view_mut((0, 0), (n, n)).copy_from(&self.covariance);
        grown.fixed_view_mut::<2, 2>(n, n).copy_from(&cov);
        self.covariance = grown;
        self.landmarks[l] = Some((mean, n));
    }

    /// Propagates every pose by `T exp(dt u)`. `input_cov` is the covariance
    /// of one body-frame velocity sample.
    pub fn predict(&mut self, inputs: &[Twist2], input_cov: &Matrix3<f64>, dt: f64) {
        let n = self.dim();
        let mut f = DMatrix::identity(n, n);
        for (k, (pose, u)) in self.poses.iter_mut().zip(inputs).enumerate() {
            let step = Pose2::exp(&u.scale(dt));
            *pose = pose.compose(&step);
            pose.renormalize();
            f.fixed_view_mut::<3, 3>(3 * k, 3 * k).copy_from(&step.inverse().adjoint());
        }
        let mut p = &f * &self.covariance * f.transpose();
        let q = input_cov * (dt * dt);
        for k in 0..self.poses.len() {
            let mut block = p.fixed_view_mut::<3, 3>(3 * k, 3 * k);
            block += q;
        }
        self.covariance = p;
        self.symmetrize();
    }

    fn endpoint_position(&self, e: &Endpoint) -> Option<Vec2> {
        match *e {
            Endpoint::Tag { robot, offset } => Some(self.poses[robot].transform(&offset)),
            Endpoint::Landmark(l) => self.landmark(l),
        }
    }

    /// Sparse Jacobian entries `(column, d position / d error)` of an endpoint.
    fn endpoint_jacobian(&self, e: &Endpoint) -> Vec<(usize, [f64; 2])> {
        match *e {
            Endpoint::Tag { robot, offset } => {
                let j = point_jacobian(&self.poses[robot], &offset);
                (0..3).map(|k| (3 * robot + k, [j[(0, k)], j[(1, k)]])).collect()
            }
            Endpoint::Landmark(l) => {
                let c = self.landmarks[l].expect("initialised").1;
                vec![(c, [1.0, 0.0]), (c + 1, [0.0, 1.0])]
            }
        }
    }

    /// Predicted range between two endpoints, if both have state.
    pub fn predict_range(&self, a: &Endpoint, b: &Endpoint) -> Option<f64> {
        Some((self.endpoint_position(a)? - self.endpoint_position(b)?).norm())
    }

    pub fn update_range(&mut self, a: &Endpoint, b: &Endpoint, measured: f64, sigma: f64) -> UpdateOutcome {
        let (Some(pa), Some(pb)) = (self.endpoint_position(a), self.endpoint_position(b)) else {
            return UpdateOutcome::Skipped;
        };
        let d = pa - pb;
        let range = d.norm();
        if range < crate::ranging::MIN_RANGE {
            return UpdateOutcome::Skipped;
        }
        let u = d / range;
        let mut h: Vec<(usize, f64)> = Vec::with_capacity(8);
        for (sign, e) in [(1.0, a), (-1.0, b)] {
            for (col, g) in self.endpoint_jacobian(e) {
                h.push((col, sign * (u.x * g[0] + u.y * g[1])));
            }
        }
        let n = self.dim();
        let mut ph = DVector::zeros(n);
        for &(col, v) in &h {
            ph.axpy(v, &self.covariance.column(col), 1.0);
        }
        let s = h.iter().map(|&(col, v)| v * ph[col]).sum::<f64>() + sigma * sigma;
        let innovation = measured - range;
        if innovation * innovation / s > RANGE_GATE {
            return UpdateOutcome::Gated;
        }
        let correction = &ph * (innovation / s);
        self.covariance.ger(-1.0 / s, &ph, &ph, 1.0);
        self.symmetrize();
        self.apply(&correction);
        UpdateOutcome::Applied
    }

    /// Position fix on robot 0.
    pub fn update_gps(&mut self, measured: &Vec2, sigma: f64) -> UpdateOutcome {
        let pose = self.poses[0];
        let n = self.dim();
        let mut h = DMatrix::zeros(2, n);
        h.fixed_view_mut::<2, 2>(0, 1).copy_from(&pose.rot);
        let ph = &self.covariance * h.transpose();
        let s = &h * &ph + DMatrix::identity(2, 2) * (sigma * sigma);
        let Some(s_inv) = s.clone().try_inverse() else {
            return UpdateOutcome::Skipped;
        };
        let innovation = DVector::from_column_slice((measured - pose.trans).as_slice());
        let nis = (innovation.transpose() * &s_inv * &innovation)[(0, 0)];
        if nis > GPS_GATE {
            return UpdateOutcome::Gated;
        }
        let k = &ph * s_inv;
        let correction = &k * innovation;
        self.covariance -= &k * ph.transpose();
        self.symmetrize();
        self.apply(&correction);
        UpdateOutcome::Applied
    }

    fn apply(&mut self, dx: &DVector<f64>) {
        for (k, pose) in self.poses.iter_mut().enumerate() {
            let xi = Twist2::new(dx[3 * k], dx[3 * k + 1], dx[3 * k + 2]);
            *pose = pose.retract(&xi);
        }
        for (mean, c) in self.landmarks.iter_mut().flatten() {
            mean.x += dx[*c];
            mean.y += dx[*c + 1];
        }
    }

    fn symmetrize(&mut self) {
        let n = self.dim();
        for a in 0..n {
            for b in a + 1..n {
                let m = 0.5 * (self.covariance[(a, b)] + self.covariance[(b, a)]);
                self.covariance[(a, b)] = m;
                self.covariance[(b, a)] = m;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::SymmetricEigen;

    fn two_robots() -> EkfState {
        EkfState::new(vec![Pose2::identity(), Pose2::new(0.3, 2.0, 0.5)], [0.01, 0.04, 0.04], 1)
    }

    fn min_eig(p: &DMatrix<f64>) -> f64 {
        SymmetricEigen::new(p.clone()).eigenvalues.min()
    }

    fn tag(robot: usize) -> Endpoint {
        Endpoint::Tag {
            robot,
            offset: Vec2::new(0.17, -0.17),
        }
    }

    #[test]
    fn zero_input_without_noise_changes_nothing() {
        let mut s = two_robots();
        let before = s.clone();
        s.predict(&[Twist2::zero(), Twist2::zero()], &Matrix3::zeros(), 0.01);
        assert_eq!(s.poses, before.poses);
        assert_eq!(s.covariance, before.covariance);
    }

    #[test]
    fn straight_line_prediction() {
        let mut s = EkfState::new(vec![Pose2::identity()], [0.0; 3], 0);
        for _ in 0..100 {
            s.predict(&[Twist2::new(0.0, 0.5, 0.0)], &Matrix3::zeros(), 0.01);
        }
        assert_abs_diff_eq!(s.poses[0].trans.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.poses[0].trans.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn prediction_never_shrinks_trace() {
        let mut s = two_robots();
        let q = Matrix3::from_diagonal(&nalgebra::Vector3::new(1e-4, 1e-2, 1e-2));
        let mut last = s.covariance.trace();
        for k in 0..200 {
            let w = 0.01 * k as f64;
            s.predict(&[Twist2::new(w, 1.0, 0.2), Twist2::new(-w, 0.3, 0.0)], &q, 0.01);
            let tr = s.covariance.trace();
            assert!(tr >= last - 1e-12);
            last = tr;
        }
    }

    #[test]
    fn exact_range_leaves_mean_and_contracts_covariance() {
        let mut s = two_robots();
        let z = s.predict_range(&tag(0), &tag(1)).unwrap();
        let before = s.clone();
        assert_eq!(s.update_range(&tag(0), &tag(1), z, 0.1), UpdateOutcome::Applied);
        assert_eq!(s.poses, before.poses);
        assert!(s.covariance.trace() < before.covariance.trace());
        assert!(min_eig(&s.covariance) > -1e-8);
        assert!((&s.covariance - s.covariance.transpose()).abs().max() < 1e-9);
    }

    #[test]
    fn large_innovation_is_gated() {
        let mut s = two_robots();
        let z = s.predict_range(&tag(0), &tag(1)).unwrap();
        assert_eq!(s.update_range(&tag(0), &tag(1), z + 5.0, 0.1), UpdateOutcome::Gated);
        assert_eq!(s.update_gps(&Vec2::new(10.0, 0.0), 0.1), UpdateOutcome::Gated);
    }

    #[test]
    fn uninitialised_landmark_is_skipped() {
        let mut s = two_robots();
        assert_eq!(s.update_range(&tag(0), &Endpoint::Landmark(0), 1.0, 0.1), UpdateOutcome::Skipped);
    }

    #[test]
    fn gps_variance_settles_below_measurement_variance() {
        // Static scalar Kalman filter with process noise q and measurement
        // noise r: P+ = P r / (P + r), P- = P+ + q.
        let sigma = 0.1;
        let q = 1e-6;
        let mut s = EkfState::new(vec![Pose2::identity()], [0.01, 1.0, 1.0], 0);
        let input_cov = Matrix3::from_diagonal(&nalgebra::Vector3::new(0.0, q / 1e-4, q / 1e-4));
        let mut scalar = 1.0;
        for _ in 0..500 {
            s.predict(&[Twist2::zero()], &input_cov, 0.01);
            scalar += q;
            let z = s.poses[0].trans;
            s.update_gps(&z, sigma);
            scalar = scalar * sigma * sigma / (scalar + sigma * sigma);
        }
        let var_x = s.pose_covariance(0)[(1, 1)];
        assert!(var_x <= sigma * sigma);
        assert_abs_diff_eq!(var_x, scalar, epsilon = 1e-12);
    }

    #[test]
    fn gps_bounds_leader_drift() {
        let q = Matrix3::from_diagonal(&nalgebra::Vector3::new(1e-4, 1e-2, 1e-2));
        let mut with = EkfState::new(vec![Pose2::identity()], [0.0; 3], 0);
        let mut without = with.clone();
        let mut traces = Vec::new();
        for k in 0..4000 {
            let u = [Twist2::new(0.1, 1.0, 0.0)];
            with.predict(&u, &q, 0.01);
            without.predict(&u, &q, 0.01);
            if k % 2 == 0 {
                let z = with.poses[0].trans;
                with.update_gps(&z, 0.1);
            }
            if k % 1000 == 999 {
                traces.push((with.pose_covariance(0).trace(), without.pose_covariance(0).trace()));
            }
        }
        for w in traces.windows(2) {
            assert!(w[1].1 > w[0].1);
        }
        assert!(traces.iter().all(|t| t.0 < 0.05));
        assert!(traces.last().unwrap().1 > 10.0 * traces.last().unwrap().0);
    }

    #[test]
    fn repeated_landmark_ranges_shrink_its_covariance() {
        let mut s = EkfState::new(vec![Pose2::identity(), Pose2::new(0.0, 1.0, 0.0)], [1e-6; 3], 1);
        s.add_landmark(0, Vec2::new(0.5, 2.0), Matrix2::identity() * 0.25);
        let offsets = [Vec2::new(0.17, -0.17), Vec2::new(-0.17, 0.17)];
        let mut last = s.landmark_covariance(0).unwrap().trace();
        for _ in 0..20 {
            for robot in 0..2 {
                for o in offsets {
                    let e = Endpoint::Tag { robot, offset: o };
                    let z = s.predict_range(&e, &Endpoint::Landmark(0)).unwrap();
                    s.update_range(&e, &Endpoint::Landmark(0), z, 0.1);
                    let tr = s.landmark_covariance(0).unwrap().trace();
                    assert!(tr < last);
                    last = tr;
                }
            }
        }
    }
}
