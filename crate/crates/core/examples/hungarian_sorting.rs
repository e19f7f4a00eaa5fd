//! Assigning robots to formation slots: the Hungarian solver on its own,
//! then the id sorting applied to a scrambled start.

use formation_core::assignment::{assignment_cost, hungarian, sort_robot_ids};
use formation_core::se2::{FormationState, Pose2};
use formation_core::team::{FormationSpec, TeamConfig};
use nalgebra::DMatrix;

fn main() {
    let c = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0]);
    let assign = hungarian(&c).unwrap();
    println!("rows -> cols {:?}, cost {}", assign, assignment_cost(&c, &assign));

    // Robots 2..5 start in reverse order along the line they should form.
    let team = TeamConfig::uniform(5, 0.5);
    let spec = FormationSpec::line(5, 0.25);
    let x = FormationState::new(vec![
        Pose2::new(0.0, 4.1, 0.2),
        Pose2::new(0.0, 2.9, -0.1),
        Pose2::new(0.0, 2.2, 0.0),
        Pose2::new(0.0, 0.8, 0.3),
    ]);
    let sorted = sort_robot_ids(&x, &team, &spec.directions).unwrap();
    println!("slot order {:?}", sorted.order);
}
