//! The three coverage-study formations for five robots: the constructed
//! line, the observability optimum and the coverage optimum, with their
//! observability cost and camera sweep width.

use formation_core::commands::standard_formations;
use formation_core::costs::j_est;
use formation_core::covsim::formation_sweep_width;
use formation_core::scenario::Scenario;

fn main() {
    let sc = Scenario::preset("sim5").unwrap();
    for f in standard_formations(&sc, sc.seed).unwrap() {
        println!(
            "{}: J_est {:8.3}, sweep width {:.3} m, sorted ids {:?}",
            f.label,
            j_est(&f.state, &sc.team, &sc.graph),
            formation_sweep_width(&f.state, &sc.team).unwrap(),
            f.sorted_ids
        );
        for id in 2..=f.state.num_robots() {
            let p = f.state.pose(id).unwrap();
            println!("  robot {id}: ({:6.3}, {:6.3}) heading {:6.3}", p.trans.x, p.trans.y, p.angle());
        }
    }
}
