//! One noisy coverage run of the coverage-optimal formation with EKF-SLAM,
//! plus a trajectory dump for plotting.

use formation_core::commands::design_formation;
use formation_core::costs::CostKind;
use formation_core::covsim::run_coverage_sim;
use formation_core::output::trajectory_csv;
use formation_core::scenario::Scenario;

fn main() {
    let sc = Scenario::preset("sim5").unwrap();
    let f = design_formation(&sc, CostKind::Cov, sc.seed).unwrap();
    let out = run_coverage_sim(&sc.sim, &sc.team, &sc.graph, &f.state, 10).unwrap();
    let m = &out.metrics;
    println!("coverage time       {:?} s", m.coverage_time);
    println!("inter-robot att RMSE {:.4} rad", m.interrobot_att_rmse);
    println!("inter-robot pos RMSE {:.4} m", m.interrobot_pos_rmse);
    println!("landmark errors      {:?}", m.landmark_errors);
    println!("3-sigma containment  {:?}", m.nees_containment);
    println!("range updates {} (gated {}), gps updates {}", m.range_updates, m.gated_updates, m.gps_updates);
    let path = std::env::temp_dir().join("coverage_sim_trajectory.csv");
    std::fs::write(&path, trajectory_csv(&out.trajectory)).unwrap();
    println!("wrote {}", path.display());
}
