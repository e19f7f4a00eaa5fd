//! Scenario documents: a bundled preset and an inline TOML with overrides.

use formation_core::scenario::{preset_names, Scenario};

fn main() {
    println!("presets: {:?}", preset_names());
    let doc = r#"
        name = "four-in-a-v"
        seed = 3

        [team]
        count = 4
        camera_radius = 0.6

        [graph]
        sigma = 0.05
        mask = [[1, 4]]

        [formation]
        directions = [[1, 1], [1, 0], [1, -1]]
        lambda = 0.3

        [sim]
        area = [8.0, 12.0]
        trials = 25
    "#;
    let sc = Scenario::from_toml_str(doc, "inline").unwrap();
    println!("{}: {} robots, {} edges, directions {:?}", sc.name, sc.team.num_robots(), sc.graph.len(), sc.spec.directions);
    match Scenario::from_toml_str("[team]\ncount = 3\n[formation]\ndirections = [[1, 0]]\n", "broken") {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }
}
