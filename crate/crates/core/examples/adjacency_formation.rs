//! Shaping a formation with the adjacency cost alone: a line and a V for
//! nine robots, each reached by multi-start momentum descent.

use formation_core::costs::CostKind;
use formation_core::design::{DesignMode, DesignProblem};
use formation_core::optimizer::OptimizerConfig;
use formation_core::se2::Vec2;
use formation_core::team::{default_full_graph, FormationSpec, TeamConfig};

fn show(name: &str, problem: &DesignProblem) {
    let cfg = OptimizerConfig { restarts: 4, ..Default::default() };
    let d = problem.design(CostKind::Adj, &cfg, 7, DesignMode::Standard).unwrap();
    println!("{name}: J_adj {:.2e} after {} iterations, slots {:?}", d.breakdown.adj, d.trace.iterations(), d.objective.sorted.order);
    for &id in &d.objective.sorted.order {
        let p = d.state.position(id).unwrap();
        println!("  robot {id}: ({:6.3}, {:6.3})", p.x, p.y);
    }
}

fn main() {
    let n = 9;
    let team = TeamConfig::uniform(n, 0.5);
    let graph = default_full_graph(&team);
    let line = FormationSpec::line(n, 0.25);
    show("line", &DesignProblem { team: team.clone(), graph: graph.clone(), spec: line });

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let half = (n - 1) / 2;
    let dirs = (0..n - 1)
        .map(|k| if k < half { Vec2::new(s, s) } else { Vec2::new(s, -s) })
        .collect();
    let v = FormationSpec::new(dirs, 0.25).unwrap();
    show("V", &DesignProblem { team, graph, spec: v });
}
