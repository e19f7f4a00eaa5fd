//! Seven robots under a bridge: five camera robots in a near line and two
//! GPS robots at the ends, which neither range to each other nor count
//! toward camera overlap.

use formation_core::costs::CostKind;
use formation_core::design::DesignMode;
use formation_core::scenario::Scenario;

fn main() {
    let sc = Scenario::preset("bridge7").unwrap();
    let d = sc.design_problem().design(CostKind::Cov, &sc.optimizer, sc.seed, DesignMode::EndpointsGps).unwrap();
    println!("GPS robots {:?}; range edges kept {} of {}", d.gps_robots, d.objective.graph.len(), sc.graph.len());
    println!("breakdown {:?}", d.breakdown);
    for &id in &d.objective.sorted.order {
        let p = d.state.position(id).unwrap();
        let tag = if d.gps_robots.contains(&id) { "gps" } else { "camera" };
        println!("  robot {id} ({tag:>6}): ({:6.3}, {:6.3})", p.x, p.y);
    }
}
