//! Rasterised cross-check of the swept band: a point at lateral offset `x`
//! is covered when some camera disk reaches it.

use formation_core::commands::design_formation;
use formation_core::costs::CostKind;
use formation_core::covsim::formation_sweep_width;
use formation_core::scenario::Scenario;
use formation_core::se2::FormationState;
use formation_core::team::TeamConfig;

fn rasterised_width(x: &FormationState, team: &TeamConfig, cell: f64) -> f64 {
    let disks: Vec<(f64, f64)> = (1..=x.num_robots())
        .map(|id| (x.position(id).unwrap().x, team.robot(id).unwrap().camera_radius))
        .collect();
    let lo = disks.iter().map(|(c, r)| c - r).fold(f64::INFINITY, f64::min);
    let hi = disks.iter().map(|(c, r)| c + r).fold(f64::NEG_INFINITY, f64::max);
    let cells = ((hi - lo) / cell).ceil() as usize;
    let mut best = 0usize;
    let mut run = 0usize;
    for k in 0..cells {
        let s = lo + (k as f64 + 0.5) * cell;
        if disks.iter().any(|(c, r)| (s - c).abs() <= *r) {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best as f64 * cell
}

#[test]
fn coverage_formation_band_matches_raster() {
    let sc = Scenario::preset("sim5").unwrap();
    let f = design_formation(&sc, CostKind::Cov, sc.seed).unwrap();
    let exact = formation_sweep_width(&f.state, &sc.team).unwrap();
    let raster = rasterised_width(&f.state, &sc.team, 0.01);
    assert!((exact - raster).abs() <= 0.02, "exact {exact} raster {raster}");
}

#[test]
fn gapped_team_uses_widest_band() {
    let team = TeamConfig::uniform(3, 0.5);
    let x = FormationState::new(vec![
        formation_core::se2::Pose2::new(0.0, 0.9, 0.0),
        formation_core::se2::Pose2::new(0.0, 3.0, 0.0),
    ]);
    let exact = formation_sweep_width(&x, &team).unwrap();
    assert!((exact - 1.9).abs() < 1e-12);
    assert!((rasterised_width(&x, &team, 0.01) - exact).abs() <= 0.02);
}
