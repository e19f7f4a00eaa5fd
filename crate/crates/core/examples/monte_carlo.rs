//! Monte Carlo comparison of the three coverage-study formations.
//! `cargo run --release --example monte_carlo -- 100` reproduces the full study.

use formation_core::commands::{cmd_montecarlo, standard_formations};
use formation_core::scenario::Scenario;

fn main() {
    let trials = std::env::args().nth(1).map_or(10, |a| a.parse().expect("trial count"));
    let sc = Scenario::preset("sim5").unwrap();
    let formations = standard_formations(&sc, sc.seed).unwrap();
    let out = std::env::temp_dir().join("formation_monte_carlo");
    let report = cmd_montecarlo(&sc, &formations, trials, sc.seed, &out, false).unwrap();
    print!("{}", report.table);
    println!("per-trial records in {}", report.metrics_path.display());
}
