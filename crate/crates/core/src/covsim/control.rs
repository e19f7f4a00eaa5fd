//! Leader-follower velocity control resolved in each robot's body frame.

use crate::se2::{wrap_angle, FormationState, Pose2, Twist2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlGains {
    /// Leader attraction to the active waypoint (1/s).
    pub k_wp: f64,
    /// Follower attraction to its formation slot (1/s).
    pub k_form: f64,
    pub k_heading: f64,
    /// Cap on the norm of each translational term (m/s).
    pub speed_cap: f64,
}

impl Default for ControlGains {
    fn default() -> Self {
        Self {
            k_wp: 0.8,
            k_form: 1.2,
            k_heading: 2.0,
            speed_cap: 1.0,
        }
    }
}

/// Scales `v` down to norm `cap` if it is longer.
pub fn saturate(v: Vec2, cap: f64) -> Vec2 {
    let n = v.norm();
    if n > cap {
        v * (cap / n)
    } else {
        v
    }
}

/// Where robot `id` should be, given the leader pose and the desired formation.
pub fn slot_pose(leader: &Pose2, x_des: &FormationState, id: usize) -> Pose2 {
    leader.compose(&x_des.pose(id).expect("id within formation"))
}

/// Body-frame commands `[omega, v_x, v_y]` for every robot.
///
/// The leader's waypoint velocity is shared by the whole team as a feed
/// forward term. Followers add a saturated correction toward their slot and
/// every robot turns toward the heading the formation assigns it, the
/// leader holding heading zero.
pub fn control_step(goal: &Vec2, truth: &[Pose2], x_des: &FormationState, gains: &ControlGains) -> Vec<Twist2> {
    let leader = truth[0];
    let u_wp = saturate((goal - leader.trans) * gains.k_wp, gains.speed_cap);
    truth
        .iter()
        .enumerate()
        .map(|(k, pose)| {
            let (v_global, heading_goal) = if k == 0 {
                (u_wp, 0.0)
            } else {
                let slot = slot_pose(&leader, x_des, k + 1);
                let correction = saturate((slot.trans - pose.trans) * gains.k_form, gains.speed_cap);
                (u_wp + correction, slot.angle())
            };
            let v_body = pose.rot.transpose() * v_global;
            let omega = gains.k_heading * wrap_angle(heading_goal - pose.angle());
            Twist2 { phi: omega, rho: v_body }
        })
        .collect()
}

/// Largest follower distance from its slot.
pub fn formation_error(truth: &[Pose2], x_des: &FormationState) -> f64 {
    let leader = truth[0];
    (1..truth.len())
        .map(|k| (slot_pose(&leader, x_des, k + 1).trans - truth[k].trans).norm())
        .fold(0.0, f64::max)
}
