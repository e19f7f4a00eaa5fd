//! Overlap cost of a two-robot team scanned around Robot 1; the minimum
//! sits on a ring at `(1 - lambda)(r_1 + r_2)`. Writes the grid as CSV.

use formation_core::heatmap::{cost_grid, Surface};
use formation_core::output::heatmap_csv;
use formation_core::scenario::HeatmapTerm;
use formation_core::se2::{FormationState, Pose2};
use formation_core::team::{default_full_graph, FormationSpec, SortedIds, TeamConfig};

fn main() {
    let team = TeamConfig::uniform(2, 0.5);
    let graph = default_full_graph(&team);
    let spec = FormationSpec::line(2, 0.25);
    let sorted = SortedIds::identity(&team);
    let surface = Surface { team: &team, graph: &graph, spec: &spec, sorted: &sorted, term: HeatmapTerm::Overlap };
    let base = FormationState::new(vec![Pose2::new(0.0, 1.0, 0.0)]);
    let rows = cost_grid(&surface, &base, 2, [-2.0, 2.0], [-2.0, 2.0], 81).unwrap();

    let best = rows.iter().filter(|r| r[0] > 0.0 && r[1].abs() < 1e-12).min_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
    println!("minimum along +x at {:.3} m (expected 0.75)", best[0]);

    let path = std::env::temp_dir().join("overlap_heatmap.csv");
    std::fs::write(&path, heatmap_csv(&rows)).unwrap();
    println!("wrote {} rows to {}", rows.len(), path.display());
}
