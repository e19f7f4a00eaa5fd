//! Scenario documents: one TOML file describing the team, range graph,
//! formation shape, optimizer, simulation and heatmap settings.
//!
//! Every section except `team`/`robots` is optional. Unknown keys are
//! rejected, and semantic errors name the offending field path.

use crate::costs::CostKind;
use crate::covsim::landmark::InitRules;
use crate::covsim::{ControlGains, RangeSchedule, SimConfig};
use crate::design::{DesignMode, DesignProblem};
use crate::error::{Error, Result};
use crate::optimizer::OptimizerConfig;
use crate::se2::Vec2;
use crate::team::{
    full_graph_with_sigma, mask_edges, CostWeights, FormationSpec, RangeGraph, RobotSpec, TeamConfig,
    DEFAULT_ACTIVATION_RADIUS, DEFAULT_COLLISION_RADIUS, DEFAULT_RANGE_SIGMA, DEFAULT_TAG_OFFSETS, SIM_CAMERA_RADIUS,
};
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::Path;

const PRESETS: [(&str, &str); 3] = [
    ("sim5", include_str!("../presets/sim5.toml")),
    ("bridge7", include_str!("../presets/bridge7.toml")),
    ("exp3plus2", include_str!("../presets/exp3plus2.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    seed: Option<u64>,
    team: Option<RawTeam>,
    robots: Option<Vec<RawRobot>>,
    #[serde(default)]
    graph: RawGraph,
    formation: Option<RawFormation>,
    #[serde(default)]
    optimizer: RawOptimizer,
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    heatmap: RawHeatmap,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTeam {
    count: usize,
    camera_radius: Option<f64>,
    tag_offsets: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobot {
    camera_radius: Option<f64>,
    tag_offsets: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGraph {
    full: bool,
    sigma: f64,
    mask: Vec<[usize; 2]>,
    edges: Vec<(usize, usize, f64)>,
}

impl Default for RawGraph {
    fn default() -> Self {
        Self {
            full: true,
            sigma: DEFAULT_RANGE_SIGMA,
            mask: Vec::new(),
            edges: Vec::new(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFormation {
    directions: Option<Vec<[f64; 2]>>,
    lambda: Option<f64>,
    exempt: Option<Vec<usize>>,
    activation_radius: Option<f64>,
    collision_radius: Option<f64>,
    gps_endpoints: Option<bool>,
    weights: Option<RawWeights>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    adj: Option<f64>,
    overlap: Option<f64>,
    est: Option<f64>,
    col: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    alpha: Option<f64>,
    beta: Option<f64>,
    tol: Option<f64>,
    max_iters: Option<usize>,
    fd_step: Option<f64>,
    restarts: Option<usize>,
    init_box: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSim {
    area: Option<[f64; 2]>,
    dt: Option<f64>,
    range_rate: Option<f64>,
    range_schedule: Option<String>,
    gps_rate: Option<f64>,
    gps_sigma: Option<f64>,
    range_sigma: Option<f64>,
    sigma_omega: Option<f64>,
    sigma_v: Option<f64>,
    landmarks: Option<Vec<[f64; 2]>>,
    detection_radius: Option<f64>,
    waypoint_tolerance: Option<f64>,
    formation_tolerance: Option<f64>,
    max_time: Option<f64>,
    init_pos_sigma: Option<f64>,
    init_att_sigma: Option<f64>,
    inject_noise: Option<bool>,
    gps_enabled: Option<bool>,
    trials: Option<usize>,
    gains: Option<RawGains>,
    landmark_init: Option<RawInit>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGains {
    k_wp: Option<f64>,
    k_form: Option<f64>,
    k_heading: Option<f64>,
    speed_cap: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInit {
    min_samples: Option<usize>,
    min_baseline: Option<f64>,
    min_spread: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawHeatmap {
    robot: Option<usize>,
    term: Option<String>,
    x: Option<[f64; 2]>,
    y: Option<[f64; 2]>,
    resolution: Option<usize>,
}

/// Cost surface drawn by the heatmap command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapTerm {
    Adj,
    Overlap,
    Est,
    Col,
    Opt,
    Cov,
}

impl std::str::FromStr for HeatmapTerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "adj" => HeatmapTerm::Adj,
            "overlap" => HeatmapTerm::Overlap,
            "est" => HeatmapTerm::Est,
            "col" => HeatmapTerm::Col,
            "opt" => HeatmapTerm::Opt,
            "cov" => HeatmapTerm::Cov,
            other => {
                return Err(Error::Invalid(format!(
                    "unknown heatmap term '{other}' (expected adj, overlap, est, col, opt or cov)"
                )))
            }
        })
    }
}

impl From<CostKind> for HeatmapTerm {
    fn from(k: CostKind) -> Self {
        match k {
            CostKind::Adj => HeatmapTerm::Adj,
            CostKind::Opt => HeatmapTerm::Opt,
            CostKind::Cov => HeatmapTerm::Cov,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSpec {
    /// Robot whose position is swept; the others stay put.
    pub robot: usize,
    pub term: HeatmapTerm,
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Samples per axis.
    pub resolution: usize,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub team: TeamConfig,
    pub graph: RangeGraph,
    pub spec: FormationSpec,
    /// Design with the two end slots GPS-equipped (exempt and masked).
    pub gps_endpoints: bool,
    pub optimizer: OptimizerConfig,
    pub sim: SimConfig,
    pub trials: usize,
    pub heatmap: HeatmapSpec,
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(path, format!("must be a positive number, got {v}")))
    }
}

fn to_vecs(v: &[[f64; 2]]) -> Vec<Vec2> {
    v.iter().map(|p| Vec2::new(p[0], p[1])).collect()
}

impl Scenario {
    /// Parses a scenario document; `origin` names it in error messages.
    pub fn from_toml_str(src: &str, origin: &str) -> Result<Self> {
        let raw: RawScenario = toml::from_str(src).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let line = src[..s.start.min(src.len())].matches('\n').count() + 1;
                    format!("{origin}:{line}")
                })
                .unwrap_or_else(|| origin.to_string());
            Error::config(at, e.message().to_string())
        })?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_toml_str(&src, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let src = preset_source(name).ok_or_else(|| {
            Error::config("preset", format!("unknown preset '{name}' (available: {})", preset_names().join(", ")))
        })?;
        Self::from_toml_str(src, &format!("preset:{name}"))
    }

    fn from_raw(raw: RawScenario) -> Result<Self> {
        let robots = match (raw.team, raw.robots) {
            (Some(_), Some(_)) => return Err(Error::config("team", "give either [team] or [[robots]], not both")),
            (None, None) => return Err(Error::config("team", "missing; add a [team] table or [[robots]] entries")),
            (Some(t), None) => {
                if t.count == 0 {
                    return Err(Error::config("team.count", "must be at least 1"));
                }
                let radius = positive("team.camera_radius", t.camera_radius.unwrap_or(SIM_CAMERA_RADIUS))?;
                let tags = t.tag_offsets.map(|v| to_vecs(&v)).unwrap_or_else(|| to_vecs(&DEFAULT_TAG_OFFSETS));
                if tags.is_empty() {
                    return Err(Error::config("team.tag_offsets", "each robot needs at least one tag"));
                }
                (1..=t.count)
                    .map(|id| RobotSpec {
                        id,
                        tag_offsets: tags.clone(),
                        camera_radius: radius,
                    })
                    .collect::<Vec<_>>()
            }
            (None, Some(list)) => list
                .into_iter()
                .enumerate()
                .map(|(k, r)| {
                    let radius = positive(&format!("robots[{k}].camera_radius"), r.camera_radius.unwrap_or(SIM_CAMERA_RADIUS))?;
                    let tags = r.tag_offsets.map(|v| to_vecs(&v)).unwrap_or_else(|| to_vecs(&DEFAULT_TAG_OFFSETS));
                    if tags.is_empty() {
                        return Err(Error::config(format!("robots[{k}].tag_offsets"), "each robot needs at least one tag"));
                    }
                    Ok(RobotSpec {
                        id: k + 1,
                        tag_offsets: tags,
                        camera_radius: radius,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        if robots.is_empty() {
            return Err(Error::config("robots", "at least one robot is required"));
        }
        let team = TeamConfig::new(robots).map_err(|e| Error::config("team", e.to_string()))?;
        let n = team.num_robots();

        let g = raw.graph;
        positive("graph.sigma", g.sigma)?;
        let mut graph = if g.full { full_graph_with_sigma(&team, g.sigma) } else { RangeGraph::empty() };
        for (k, &(i, j, sigma)) in g.edges.iter().enumerate() {
            graph
                .insert(&team, i, j, sigma)
                .map_err(|e| Error::config(format!("graph.edges[{k}]"), e.to_string()))?;
        }
        for (k, pair) in g.mask.iter().enumerate() {
            graph = mask_edges(&graph, (pair[0], pair[1]), &team)
                .map_err(|e| Error::config(format!("graph.mask[{k}]"), e.to_string()))?;
        }

        let f = raw.formation.unwrap_or(RawFormation {
            directions: None,
            lambda: None,
            exempt: None,
            activation_radius: None,
            collision_radius: None,
            gps_endpoints: None,
            weights: None,
        });
        let directions = match f.directions {
            None => vec![Vec2::new(1.0, 0.0); n - 1],
            Some(list) => {
                if list.len() + 1 != n {
                    return Err(Error::config(
                        "formation.directions",
                        format!("expected {} entries for {} robots, found {}", n - 1, n, list.len()),
                    ));
                }
                list.iter()
                    .enumerate()
                    .map(|(k, d)| {
                        let v = Vec2::new(d[0], d[1]);
                        let norm = v.norm();
                        if !(norm > 1e-12 && norm.is_finite()) {
                            return Err(Error::config(format!("formation.directions[{k}]"), "must be a nonzero vector"));
                        }
                        Ok(v / norm)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        let lambda = f.lambda.unwrap_or(0.25);
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::config("formation.lambda", format!("must lie in [0, 1], got {lambda}")));
        }
        let mut exempt = BTreeSet::new();
        for (k, id) in f.exempt.unwrap_or_default().into_iter().enumerate() {
            if id == 0 || id > n {
                return Err(Error::config(format!("formation.exempt[{k}]"), format!("robot {id} does not exist")));
            }
            exempt.insert(id);
        }
        let w = f.weights.unwrap_or(RawWeights {
            adj: None,
            overlap: None,
            est: None,
            col: None,
        });
        let d = CostWeights::default();
        let weights = CostWeights {
            adj: w.adj.unwrap_or(d.adj),
            overlap: w.overlap.unwrap_or(d.overlap),
            est: w.est.unwrap_or(d.est),
            col: w.col.unwrap_or(d.col),
        };
        let spec = FormationSpec {
            directions,
            lambda,
            overlap_exempt: exempt,
            activation_radius: f.activation_radius.unwrap_or(DEFAULT_ACTIVATION_RADIUS),
            collision_radius: f.collision_radius.unwrap_or(DEFAULT_COLLISION_RADIUS),
            weights,
        };
        spec.validate().map_err(|e| Error::config("formation", e.to_string()))?;
        let gps_endpoints = f.gps_endpoints.unwrap_or(false);
        if gps_endpoints && n < 3 {
            return Err(Error::config("formation.gps_endpoints", "needs at least 3 robots"));
        }

        let o = raw.optimizer;
        let od = OptimizerConfig::default();
        let optimizer = OptimizerConfig {
            alpha: o.alpha.unwrap_or(od.alpha),
            beta: o.beta.unwrap_or(od.beta),
            tol: o.tol.unwrap_or(od.tol),
            max_iters: o.max_iters.unwrap_or(od.max_iters),
            fd_step: o.fd_step.unwrap_or(od.fd_step),
            restarts: o.restarts.unwrap_or(od.restarts),
            init_box: o.init_box.unwrap_or(od.init_box),
        };
        optimizer.validate().map_err(|e| Error::config("optimizer", e.to_string()))?;

        let s = raw.sim;
        let sd = SimConfig::default();
        let gd = sd.gains;
        let gains = s.gains.map_or(gd, |g| ControlGains {
            k_wp: g.k_wp.unwrap_or(gd.k_wp),
            k_form: g.k_form.unwrap_or(gd.k_form),
            k_heading: g.k_heading.unwrap_or(gd.k_heading),
            speed_cap: g.speed_cap.unwrap_or(gd.speed_cap),
        });
        let id = sd.landmark_init;
        let landmark_init = s.landmark_init.map_or(id, |i| InitRules {
            min_samples: i.min_samples.unwrap_or(id.min_samples),
            min_baseline: i.min_baseline.unwrap_or(id.min_baseline),
            min_spread: i.min_spread.unwrap_or(id.min_spread),
        });
        let range_schedule = match s.range_schedule.as_deref() {
            None | Some("round_robin") => RangeSchedule::RoundRobin,
            Some("all_pairs") => RangeSchedule::AllPairs,
            Some(other) => {
                return Err(Error::config(
                    "sim.range_schedule",
                    format!("unknown schedule '{other}' (expected round_robin or all_pairs)"),
                ))
            }
        };
        let area = s.area.unwrap_or([sd.area_width, sd.area_height]);
        let seed = raw.seed.unwrap_or(0);
        let sim = SimConfig {
            area_width: area[0],
            area_height: area[1],
            dt: s.dt.unwrap_or(sd.dt),
            range_rate: s.range_rate.unwrap_or(sd.range_rate),
            range_schedule,
            gps_rate: s.gps_rate.unwrap_or(sd.gps_rate),
            gps_sigma: s.gps_sigma.unwrap_or(sd.gps_sigma),
            range_sigma: s.range_sigma.unwrap_or(sd.range_sigma),
            sigma_omega: s.sigma_omega.unwrap_or(sd.sigma_omega),
            sigma_v: s.sigma_v.unwrap_or(sd.sigma_v),
            landmarks: s.landmarks.map(|v| to_vecs(&v)).unwrap_or(sd.landmarks),
            detection_radius: s.detection_radius.unwrap_or(sd.detection_radius),
            waypoint_tolerance: s.waypoint_tolerance.unwrap_or(sd.waypoint_tolerance),
            formation_tolerance: s.formation_tolerance.unwrap_or(sd.formation_tolerance),
            gains,
            max_time: s.max_time.unwrap_or(sd.max_time),
            init_pos_sigma: s.init_pos_sigma.unwrap_or(sd.init_pos_sigma),
            init_att_sigma: s.init_att_sigma.unwrap_or(sd.init_att_sigma),
            inject_noise: s.inject_noise.unwrap_or(sd.inject_noise),
            gps_enabled: s.gps_enabled.unwrap_or(sd.gps_enabled),
            landmark_init,
            seed,
        };
        sim.validate()?;
        let trials = s.trials.unwrap_or(100);
        if trials == 0 {
            return Err(Error::config("sim.trials", "must be at least 1"));
        }

        let h = raw.heatmap;
        let heatmap = HeatmapSpec {
            robot: h.robot.unwrap_or(2.min(n)),
            term: match h.term {
                Some(t) => t.parse().map_err(|e: Error| Error::config("heatmap.term", e.to_string()))?,
                None => HeatmapTerm::Cov,
            },
            x: h.x.unwrap_or([-3.0, 3.0]),
            y: h.y.unwrap_or([-3.0, 3.0]),
            resolution: h.resolution.unwrap_or(61),
        };
        if heatmap.robot < 2 || heatmap.robot > n {
            return Err(Error::config("heatmap.robot", format!("must name a follower in 2..={n}")));
        }
        if heatmap.resolution < 2 {
            return Err(Error::config("heatmap.resolution", "must be at least 2"));
        }
        if !(heatmap.x[0] < heatmap.x[1] && heatmap.y[0] < heatmap.y[1]) {
            return Err(Error::config("heatmap", "ranges must be increasing [min, max] pairs"));
        }

        Ok(Scenario {
            name: raw.name.unwrap_or_else(|| "scenario".into()),
            seed,
            team,
            graph,
            spec,
            gps_endpoints,
            optimizer,
            sim,
            trials,
            heatmap,
        })
    }

    pub fn design_problem(&self) -> DesignProblem {
        DesignProblem {
            team: self.team.clone(),
            graph: self.graph.clone(),
            spec: self.spec.clone(),
        }
    }

    pub fn design_mode(&self) -> DesignMode {
        if self.gps_endpoints {
            DesignMode::EndpointsGps
        } else {
            DesignMode::Standard
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for name in preset_names() {
            let s = Scenario::preset(name).unwrap();
            assert_eq!(s.spec.directions.len() + 1, s.team.num_robots(), "{name}");
        }
        let sim5 = Scenario::preset("sim5").unwrap();
        assert_eq!(sim5.team.num_robots(), 5);
        assert_eq!(sim5.graph.len(), 40);
        let bridge = Scenario::preset("bridge7").unwrap();
        assert!(bridge.gps_endpoints);
        assert!((bridge.spec.directions[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minimal_document_uses_defaults() {
        let s = Scenario::from_toml_str("[team]\ncount = 3\n", "t").unwrap();
        assert_eq!(s.spec.directions, vec![Vec2::new(1.0, 0.0); 2]);
        assert_eq!(s.optimizer, OptimizerConfig::default());
        assert_eq!(s.graph.len(), 12);
        assert_eq!(s.trials, 100);
    }

    #[test]
    fn wrong_direction_count_names_the_field() {
        let err = Scenario::from_toml_str("[team]\ncount = 3\n[formation]\ndirections = [[1.0, 0.0]]\n", "t").unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "formation.directions"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Scenario::from_toml_str("[team]\ncount = 3\n[sim]\nspeed = 2.0\n", "t").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert!(err.to_string().contains("speed"));
    }

    #[test]
    fn mask_and_exempt_are_checked() {
        let bad_mask = "[team]\ncount = 3\n[graph]\nmask = [[1, 9]]\n";
        assert!(matches!(Scenario::from_toml_str(bad_mask, "t"), Err(Error::Config { path, .. }) if path == "graph.mask[0]"));
        let bad_exempt = "[team]\ncount = 3\n[formation]\nexempt = [4]\n";
        assert!(matches!(Scenario::from_toml_str(bad_exempt, "t"), Err(Error::Config { path, .. }) if path == "formation.exempt[0]"));
        let masked = Scenario::from_toml_str("[team]\ncount = 3\n[graph]\nmask = [[1, 3]]\n", "t").unwrap();
        assert_eq!(masked.graph.len(), 8);
    }

    #[test]
    fn directions_are_normalized() {
        let s = Scenario::from_toml_str("[team]\ncount = 2\n[formation]\ndirections = [[3.0, 4.0]]\n", "t").unwrap();
        assert!((s.spec.directions[0] - Vec2::new(0.6, 0.8)).norm() < 1e-15);
    }
}
