//! SE(2) basics: exponential and logarithm, composition, the adjoint and the
//! right-perturbation retraction used by the optimizer.

use formation_core::se2::{FormationState, Pose2, Twist2};
use std::f64::consts::FRAC_PI_2;

fn main() {
    let xi = Twist2::new(FRAC_PI_2, 1.0, 0.0);
    let t = Pose2::exp(&xi);
    println!("exp([pi/2, 1, 0]) -> angle {:.4}, translation ({:.4}, {:.4})", t.angle(), t.trans.x, t.trans.y);
    let back = t.log();
    println!("log of that       -> [{:.4}, {:.4}, {:.4}]", back.phi, back.rho.x, back.rho.y);

    let a = Pose2::new(0.3, 1.0, 2.0);
    let b = Pose2::new(-1.1, 0.5, -0.4);
    let ab = a.compose(&b);
    println!("a * b             -> angle {:.4}, translation ({:.4}, {:.4})", ab.angle(), ab.trans.x, ab.trans.y);
    let id = a.compose(&a.inverse());
    println!("a * a^-1          -> angle {:.1e}, |t| {:.1e}", id.angle(), id.trans.norm());

    // The adjoint moves a twist from the body frame of `a` to the world frame.
    let local = Twist2::new(0.2, 0.1, -0.3);
    let world = a.adjoint() * nalgebra::Vector3::from(local.to_array());
    let lhs = a.compose(&Pose2::exp(&local)).compose(&a.inverse());
    let rhs = Pose2::exp(&Twist2::new(world[0], world[1], world[2]));
    println!("adjoint identity error {:.2e}", (lhs.trans - rhs.trans).norm());

    // Two followers relative to Robot 1, perturbed on the right.
    let x = FormationState::new(vec![Pose2::new(0.0, 1.0, 0.0), Pose2::new(FRAC_PI_2, 0.0, 1.0)]);
    let dx = [0.1, 0.2, 0.0, 0.0, 0.0, 0.5];
    let moved = x.oplus(&dx).unwrap();
    for id in 2..=3 {
        let p = moved.pose(id).unwrap();
        println!("robot {id} after oplus -> angle {:.3}, position ({:.3}, {:.3})", p.angle(), p.trans.x, p.trans.y);
    }
}
