use formation_core::optimizer::{random_state, restart_rng};
use formation_core::ranging::{jacobian, predict_all};
use formation_core::se2::FormationState;
use formation_core::team::{default_full_graph, RangeGraph, TeamConfig};
use rand::Rng;

fn central_difference(x: &FormationState, team: &TeamConfig, graph: &RangeGraph, h: f64) -> nalgebra::DMatrix<f64> {
    let mut out = nalgebra::DMatrix::zeros(graph.len(), x.dof());
    let mut dx = vec![0.0; x.dof()];
    for k in 0..x.dof() {
        dx[k] = h;
        let plus = predict_all(&x.oplus(&dx).unwrap(), team, graph).unwrap();
        dx[k] = -h;
        let minus = predict_all(&x.oplus(&dx).unwrap(), team, graph).unwrap();
        dx[k] = 0.0;
        out.set_column(k, &((plus - minus) / (2.0 * h)));
    }
    out
}

#[test]
fn analytic_jacobian_matches_finite_differences() {
    let mut rng = restart_rng(2024, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=5);
        let team = TeamConfig::uniform(n, 0.5);
        let graph = default_full_graph(&team);
        let x = random_state(&mut rng, n, 3.0, 0.6);
        let analytic = jacobian(&x, &team, &graph).unwrap();
        let numeric = central_difference(&x, &team, &graph, 1e-6);
        worst = worst.max((analytic - numeric).abs().max());
    }
    assert!(worst < 1e-5, "max abs error {worst:e}");
}

#[test]
fn unranged_robot_has_zero_columns() {
    // Only Robot 1 and Robot 2 range; Robot 3 enters no row.
    let team = TeamConfig::uniform(3, 0.5);
    let mut graph = RangeGraph::empty();
    graph.insert(&team, 1, 3, 0.1).unwrap();
    graph.insert(&team, 2, 4, 0.1).unwrap();
    let mut rng = restart_rng(5, 0);
    let x = random_state(&mut rng, 3, 3.0, 0.6);
    let h = jacobian(&x, &team, &graph).unwrap();
    assert_eq!((h.nrows(), h.ncols()), (2, 6));
    assert!(h.columns(3, 3).iter().all(|v| *v == 0.0));
    assert!(h.columns(0, 3).iter().any(|v| *v != 0.0));
}
