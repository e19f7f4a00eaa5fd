//! File formats: formation JSON, per-trial metrics as JSON lines, summary
//! JSON, and plot-ready CSV for heatmaps and trajectories.
//!
//! Floating point values in JSON are written with 17 significant digits so
//! that every `f64` reads back to the same bits.

use crate::costs::{CostBreakdown, CostKind};
use crate::covsim::montecarlo::{Aggregate, MetricSummary, Spread, TrialRecord};
use crate::covsim::sim::TrajectoryRow;
use crate::error::{Error, Result};
use crate::se2::{FormationState, Pose2};
use nalgebra::Matrix2;
use serde_json::{json, Map, Number, Value};
use std::fmt::Write as _;
use std::path::Path;

pub const FORMATION_FORMAT: &str = "formation-v1";

/// JSON number with 17 significant digits; non-finite values become `null`.
pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let text = format!("{v:.16e}");
    Value::Number(text.parse::<Number>().expect("formatted float is a JSON number"))
}

fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

fn get<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::config(format!("{ctx}.{key}"), "missing"))
}

fn get_f64(v: &Value, key: &str, ctx: &str) -> Result<f64> {
    get(v, key, ctx)?
        .as_f64()
        .ok_or_else(|| Error::config(format!("{ctx}.{key}"), "expected a number"))
}

fn get_usize(v: &Value, key: &str, ctx: &str) -> Result<usize> {
    get(v, key, ctx)?
        .as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::config(format!("{ctx}.{key}"), "expected a non-negative integer"))
}

fn usize_list(v: &Value, key: &str, ctx: &str) -> Result<Vec<usize>> {
    get(v, key, ctx)?
        .as_array()
        .ok_or_else(|| Error::config(format!("{ctx}.{key}"), "expected an array"))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| Error::config(format!("{ctx}.{key}"), "expected integers"))
        })
        .collect()
}

/// A designed formation together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationFile {
    /// Short id used in metrics output.
    pub label: String,
    pub cost: CostKind,
    pub scenario: String,
    pub seed: u64,
    pub state: FormationState,
    pub sorted_ids: Vec<usize>,
    pub gps_robots: Vec<usize>,
    pub breakdown: CostBreakdown,
    pub converged: bool,
    pub iterations: usize,
    /// Winning restart, `None` for formations built without descent.
    pub restart: Option<usize>,
    pub diagnostic: Option<String>,
}

impl FormationFile {
    pub fn to_json(&self) -> Value {
        let mut poses = vec![json!({
            "id": 1, "theta": num(0.0), "x": num(0.0), "y": num(0.0),
            "rotation": [num(1.0), num(0.0), num(0.0), num(1.0)],
        })];
        for (k, p) in self.state.poses.iter().enumerate() {
            poses.push(json!({
                "id": k + 2,
                "theta": num(p.angle()),
                "x": num(p.trans.x),
                "y": num(p.trans.y),
                "rotation": [num(p.rot[(0, 0)]), num(p.rot[(0, 1)]), num(p.rot[(1, 0)]), num(p.rot[(1, 1)])],
            }));
        }
        let b = &self.breakdown;
        json!({
            "format": FORMATION_FORMAT,
            "label": self.label,
            "cost": self.cost.to_string(),
            "scenario": self.scenario,
            "seed": self.seed,
            "num_robots": self.state.num_robots(),
            "poses": poses,
            "sorted_ids": self.sorted_ids,
            "gps_robots": self.gps_robots,
            "breakdown": {
                "adj": num(b.adj), "overlap": num(b.overlap), "est": num(b.est),
                "col": num(b.col), "total": num(b.total),
            },
            "converged": self.converged,
            "iterations": self.iterations,
            "restart": self.restart,
            "diagnostic": self.diagnostic,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ctx = "formation";
        if get(v, "format", ctx)?.as_str() != Some(FORMATION_FORMAT) {
            return Err(Error::config("formation.format", format!("expected \"{FORMATION_FORMAT}\"")));
        }
        let cost: CostKind = get(v, "cost", ctx)?
            .as_str()
            .ok_or_else(|| Error::config("formation.cost", "expected a string"))?
            .parse()?;
        let n = get_usize(v, "num_robots", ctx)?;
        let poses_v = get(v, "poses", ctx)?
            .as_array()
            .ok_or_else(|| Error::config("formation.poses", "expected an array"))?;
        if poses_v.len() != n || n == 0 {
            return Err(Error::config("formation.poses", format!("expected {n} poses, found {}", poses_v.len())));
        }
        let mut poses = Vec::with_capacity(n - 1);
        for (k, p) in poses_v.iter().enumerate() {
            let pctx = format!("formation.poses[{k}]");
            if get_usize(p, "id", &pctx)? != k + 1 {
                return Err(Error::config(format!("{pctx}.id"), "poses must be listed by ascending id from 1"));
            }
            if k == 0 {
                continue;
            }
            let x = get_f64(p, "x", &pctx)?;
            let y = get_f64(p, "y", &pctx)?;
            let pose = match p.get("rotation").and_then(Value::as_array) {
                Some(r) if r.len() == 4 => {
                    let e = r
                        .iter()
                        .map(|c| c.as_f64().ok_or_else(|| Error::config(format!("{pctx}.rotation"), "expected numbers")))
                        .collect::<Result<Vec<_>>>()?;
                    Pose2 {
                        rot: Matrix2::new(e[0], e[1], e[2], e[3]),
                        trans: crate::se2::Vec2::new(x, y),
                    }
                }
                _ => Pose2::new(get_f64(p, "theta", &pctx)?, x, y),
            };
            poses.push(pose);
        }
        let b = get(v, "breakdown", ctx)?;
        let breakdown = CostBreakdown {
            adj: get_f64(b, "adj", "formation.breakdown").unwrap_or(f64::NAN),
            overlap: get_f64(b, "overlap", "formation.breakdown").unwrap_or(f64::NAN),
            est: get_f64(b, "est", "formation.breakdown").unwrap_or(f64::NAN),
            col: get_f64(b, "col", "formation.breakdown").unwrap_or(f64::NAN),
            total: get_f64(b, "total", "formation.breakdown").unwrap_or(f64::NAN),
        };
        Ok(Self {
            label: get(v, "label", ctx)?.as_str().unwrap_or("formation").to_string(),
            cost,
            scenario: v.get("scenario").and_then(Value::as_str).unwrap_or("").to_string(),
            seed: v.get("seed").and_then(Value::as_u64).unwrap_or(0),
            state: FormationState::new(poses),
            sorted_ids: usize_list(v, "sorted_ids", ctx)?,
            gps_robots: usize_list(v, "gps_robots", ctx)?,
            breakdown,
            converged: v.get("converged").and_then(Value::as_bool).unwrap_or(false),
            iterations: v.get("iterations").and_then(Value::as_u64).unwrap_or(0) as usize,
            restart: v.get("restart").and_then(Value::as_u64).map(|r| r as usize),
            diagnostic: v.get("diagnostic").and_then(Value::as_str).map(str::to_string),
        })
    }

    pub fn to_string_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string_pretty())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&v)
    }
}

pub fn trial_json(r: &TrialRecord) -> Value {
    let m = &r.metrics;
    json!({
        "formation": r.formation,
        "trial": r.trial,
        "seed": r.seed,
        "completed": m.completed(),
        "diverged": m.diverged,
        "coverage_time": opt_num(m.coverage_time),
        "interrobot_att_rmse": num(m.interrobot_att_rmse),
        "interrobot_pos_rmse": num(m.interrobot_pos_rmse),
        "landmark_errors": m.landmark_errors.iter().map(|e| opt_num(*e)).collect::<Vec<_>>(),
        "nees_containment": opt_num(m.nees_containment),
        "post_init_steps": m.post_init_steps,
        "range_updates": m.range_updates,
        "gated_updates": m.gated_updates,
        "gps_updates": m.gps_updates,
    })
}

/// One compact JSON object per line.
pub fn metrics_jsonl(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(&trial_json(r)).expect("serializable"));
        out.push('\n');
    }
    out
}

fn spread_json(s: &Option<Spread>) -> Value {
    match s {
        Some(s) => json!({"median": num(s.median), "p25": num(s.p25), "p75": num(s.p75), "count": s.count}),
        None => Value::Null,
    }
}

fn summary_json(m: &MetricSummary) -> Value {
    json!({"kept": spread_json(&m.kept), "raw": spread_json(&m.raw)})
}

pub fn aggregate_json(a: &Aggregate) -> Value {
    let mut map = Map::new();
    map.insert("formation".into(), json!(a.formation));
    map.insert("trials".into(), json!(a.trials));
    map.insert("incomplete".into(), json!(a.incomplete));
    map.insert("diverged".into(), json!(a.diverged));
    map.insert("coverage_time".into(), summary_json(&a.coverage_time));
    map.insert(
        "landmark_errors".into(),
        Value::Array(a.landmark_errors.iter().map(summary_json).collect()),
    );
    map.insert("mean_landmark_error".into(), summary_json(&a.mean_landmark_error));
    map.insert("interrobot_att_rmse".into(), summary_json(&a.interrobot_att_rmse));
    map.insert("interrobot_pos_rmse".into(), summary_json(&a.interrobot_pos_rmse));
    map.insert("nees_containment".into(), summary_json(&a.nees_containment));
    Value::Object(map)
}

/// `x,y,cost` rows.
pub fn heatmap_csv(rows: &[[f64; 3]]) -> String {
    let mut out = String::from("x,y,cost\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r[0], r[1], r[2]);
    }
    out
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("time");
    let (robots, landmarks) = rows.first().map_or((0, 0), |r| (r.truth.len(), r.landmarks.len()));
    for p in 1..=robots {
        for k in ["truth_x", "truth_y", "truth_theta", "est_x", "est_y", "est_theta"] {
            let _ = write!(out, ",{k}_{p}");
        }
    }
    for l in 1..=landmarks {
        for k in ["lm_x", "lm_y", "lm_3sigma_x", "lm_3sigma_y"] {
            let _ = write!(out, ",{k}_{l}");
        }
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{}", r.time);
        for (t, e) in r.truth.iter().zip(&r.estimate) {
            let _ = write!(
                out,
                ",{},{},{},{},{},{}",
                t.trans.x,
                t.trans.y,
                t.angle(),
                e.trans.x,
                e.trans.y,
                e.angle()
            );
        }
        for l in &r.landmarks {
            match l {
                Some((m, s)) => {
                    let _ = write!(out, ",{},{},{},{}", m.x, m.y, s.x, s.y);
                }
                None => out.push_str(",,,,"),
            }
        }
        out.push('\n');
    }
    out
}
