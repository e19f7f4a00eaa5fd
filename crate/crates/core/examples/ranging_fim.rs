//! Range predictions, the measurement Jacobian and the Fisher information
//! for a few three-robot geometries, ranked by `J_est = -ln det F`.

use formation_core::costs::j_est;
use formation_core::ranging::{fisher, jacobian, predict_all};
use formation_core::se2::{FormationState, Pose2};
use formation_core::team::{default_full_graph, TeamConfig};

fn main() {
    let team = TeamConfig::uniform(3, 0.5);
    let graph = default_full_graph(&team);
    println!("{} tags, {} range edges", team.num_tags(), graph.len());

    let geometries = [
        ("collinear", FormationState::new(vec![Pose2::new(0.0, 1.0, 0.0), Pose2::new(0.0, 2.0, 0.0)])),
        ("triangle", FormationState::new(vec![Pose2::new(0.0, 1.0, 0.0), Pose2::new(0.0, 0.5, 0.87)])),
        ("rotated triangle", FormationState::new(vec![Pose2::new(2.1, 1.0, 0.0), Pose2::new(-1.0, 0.5, 0.87)])),
        ("spread out", FormationState::new(vec![Pose2::new(0.0, 4.0, 0.0), Pose2::new(0.0, 2.0, 3.5)])),
    ];
    for (name, x) in &geometries {
        let y = predict_all(x, &team, &graph).unwrap();
        let h = jacobian(x, &team, &graph).unwrap();
        let f = fisher(x, &team, &graph).unwrap();
        let eig = nalgebra::SymmetricEigen::new(f).eigenvalues;
        println!(
            "{name:>17}: mean range {:.3} m, H {}x{}, min FIM eigenvalue {:.3e}, J_est {:.3}",
            y.mean(),
            h.nrows(),
            h.ncols(),
            eig.min(),
            j_est(x, &team, &graph)
        );
    }
}
