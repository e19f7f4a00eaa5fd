//! Batch commands behind the `formation` binary. Each one reads a
//! [`Scenario`], writes its results under an output directory and reports
//! whether the run fully succeeded.

use crate::costs::CostKind;
use crate::covsim::montecarlo::{aggregate, monte_carlo, percent_reduction, Aggregate, MetricSummary};
use crate::covsim::sim::{run_coverage_sim, SimOutcome};
use crate::design::{constructed_formation, DesignMode, FormationDesign};
use crate::error::{Error, Result};
use crate::heatmap::{cost_grid, Surface};
use crate::output::{aggregate_json, heatmap_csv, metrics_jsonl, trajectory_csv, trial_json, FormationFile};
use crate::scenario::{HeatmapTerm, Scenario};
use crate::team::SortedIds;
use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Trajectory samples are kept every this many truth steps.
pub const TRAJECTORY_DECIMATION: usize = 10;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn from_design(sc: &Scenario, d: &FormationDesign, seed: u64) -> FormationFile {
    FormationFile {
        label: d.kind.to_string(),
        cost: d.kind,
        scenario: sc.name.clone(),
        seed,
        state: d.state.clone(),
        sorted_ids: d.objective.sorted.order.clone(),
        gps_robots: d.gps_robots.clone(),
        breakdown: d.breakdown,
        converged: d.trace.converged,
        iterations: d.trace.iterations(),
        restart: Some(d.restart),
        diagnostic: d.trace.diagnostic.clone(),
    }
}

/// Multi-start design of the scenario's formation under `cost`.
pub fn design_formation(sc: &Scenario, cost: CostKind, seed: u64) -> Result<FormationFile> {
    let d = sc.design_problem().design(cost, &sc.optimizer, seed, sc.design_mode())?;
    Ok(from_design(sc, &d, seed))
}

/// The exact adjacency target: slots in id order, headings aligned with Robot 1.
pub fn constructed_adjacency(sc: &Scenario) -> Result<FormationFile> {
    let problem = sc.design_problem();
    problem.validate()?;
    let state = constructed_formation(&sc.team, &sc.spec);
    let (objective, gps) = problem.objective_for(CostKind::Adj, &state, DesignMode::Standard)?;
    let objective = crate::costs::Objective {
        sorted: SortedIds::identity(&sc.team),
        ..objective
    };
    Ok(FormationFile {
        label: "adj".into(),
        cost: CostKind::Adj,
        scenario: sc.name.clone(),
        seed: 0,
        breakdown: objective.breakdown(&state),
        sorted_ids: objective.sorted.order.clone(),
        gps_robots: gps,
        state,
        converged: true,
        iterations: 0,
        restart: None,
        diagnostic: Some("constructed from the adjacency targets".into()),
    })
}

/// The three formations compared in the coverage study: the constructed
/// straight line, the observability optimum and the coverage optimum.
pub fn standard_formations(sc: &Scenario, seed: u64) -> Result<Vec<FormationFile>> {
    Ok(vec![
        constructed_adjacency(sc)?,
        design_formation(sc, CostKind::Opt, seed)?,
        design_formation(sc, CostKind::Cov, seed)?,
    ])
}

/// Writes `formation_<cost>.json`; the flag is false when descent did not converge.
pub fn cmd_optimize(sc: &Scenario, cost: CostKind, seed: u64, out: &Path) -> Result<(FormationFile, PathBuf, bool)> {
    ensure_dir(out)?;
    let f = design_formation(sc, cost, seed)?;
    let path = out.join(format!("formation_{cost}.json"));
    f.write(&path)?;
    let ok = f.converged;
    Ok((f, path, ok))
}

/// Cost surface over robot `sc.heatmap.robot`, around `formation` or, if
/// none is given, around the constructed adjacency formation.
pub fn cmd_heatmap(sc: &Scenario, term: HeatmapTerm, formation: Option<&FormationFile>, out: &Path) -> Result<PathBuf> {
    ensure_dir(out)?;
    let (state, sorted) = match formation {
        Some(f) => (f.state.clone(), SortedIds::new(f.sorted_ids.clone(), &sc.team)?),
        None => (constructed_formation(&sc.team, &sc.spec), SortedIds::identity(&sc.team)),
    };
    if state.num_robots() != sc.team.num_robots() {
        return Err(Error::config("formation", "robot count differs from the scenario team"));
    }
    let surface = Surface {
        team: &sc.team,
        graph: &sc.graph,
        spec: &sc.spec,
        sorted: &sorted,
        term,
    };
    let h = &sc.heatmap;
    let rows = cost_grid(&surface, &state, h.robot, h.x, h.y, h.resolution)?;
    let name = format!("heatmap_{}_robot{}.csv", term_name(term), h.robot);
    let path = out.join(name);
    write(&path, &heatmap_csv(&rows))?;
    Ok(path)
}

fn term_name(t: HeatmapTerm) -> &'static str {
    match t {
        HeatmapTerm::Adj => "adj",
        HeatmapTerm::Overlap => "overlap",
        HeatmapTerm::Est => "est",
        HeatmapTerm::Col => "col",
        HeatmapTerm::Opt => "opt",
        HeatmapTerm::Cov => "cov",
    }
}

/// One seeded coverage run. Writes `metrics_<label>.jsonl` and optionally
/// `trajectory_<label>.csv`.
pub fn cmd_simulate(sc: &Scenario, formation: &FormationFile, seed: u64, out: &Path, dump: bool) -> Result<SimOutcome> {
    ensure_dir(out)?;
    check_team(sc, formation)?;
    let cfg = crate::covsim::SimConfig { seed, ..sc.sim.clone() };
    let every = if dump { TRAJECTORY_DECIMATION } else { 0 };
    let outcome = run_coverage_sim(&cfg, &sc.team, &sc.graph, &formation.state, every)?;
    let record = crate::covsim::TrialRecord {
        formation: formation.label.clone(),
        trial: 0,
        seed,
        metrics: outcome.metrics.clone(),
    };
    let mut line = serde_json::to_string(&trial_json(&record)).expect("serializable");
    line.push('\n');
    write(&out.join(format!("metrics_{}.jsonl", formation.label)), &line)?;
    if dump {
        write(&out.join(format!("trajectory_{}.csv", formation.label)), &trajectory_csv(&outcome.trajectory))?;
    }
    Ok(outcome)
}

fn check_team(sc: &Scenario, f: &FormationFile) -> Result<()> {
    if f.state.num_robots() != sc.team.num_robots() {
        return Err(Error::config(
            format!("formation '{}'", f.label),
            format!("has {} robots, scenario has {}", f.state.num_robots(), sc.team.num_robots()),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MonteCarloReport {
    pub aggregates: Vec<Aggregate>,
    /// Index into `aggregates` of the reference formation.
    pub baseline: usize,
    pub table: String,
    pub metrics_path: PathBuf,
    pub summary_path: PathBuf,
    pub comparison_path: PathBuf,
}

impl MonteCarloReport {
    /// True when every trial of every formation finished its sweep.
    pub fn complete(&self) -> bool {
        self.aggregates.iter().all(|a| a.incomplete == 0)
    }
}

fn kept_median(m: &MetricSummary) -> Option<f64> {
    m.kept.map(|s| s.median)
}

/// Rows of the comparison table: metric name and accessor.
fn comparison_rows(landmarks: usize) -> Vec<(String, Box<dyn Fn(&Aggregate) -> Option<f64>>)> {
    let mut rows: Vec<(String, Box<dyn Fn(&Aggregate) -> Option<f64>>)> = Vec::new();
    for l in 0..landmarks {
        rows.push((
            format!("landmark_{} error", l + 1),
            Box::new(move |a: &Aggregate| a.landmark_errors.get(l).and_then(kept_median)),
        ));
    }
    rows.push(("inter-robot att. RMSE".into(), Box::new(|a: &Aggregate| kept_median(&a.interrobot_att_rmse))));
    rows.push(("inter-robot pos. RMSE".into(), Box::new(|a: &Aggregate| kept_median(&a.interrobot_pos_rmse))));
    rows.push(("coverage time".into(), Box::new(|a: &Aggregate| kept_median(&a.coverage_time))));
    rows
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.digits$}"))
}

/// Runs `trials` seeded simulations per formation and writes
/// `metrics.jsonl`, `summary.json` and `comparison.csv`. Reductions are
/// relative to the first formation designed against the adjacency cost, or
/// to the first formation if there is none.
pub fn cmd_montecarlo(
    sc: &Scenario,
    formations: &[FormationFile],
    trials: usize,
    seed: u64,
    out: &Path,
    dump: bool,
) -> Result<MonteCarloReport> {
    if formations.is_empty() {
        return Err(Error::config("formations", "at least one formation is required"));
    }
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    ensure_dir(out)?;
    let mut all = Vec::new();
    let mut aggregates = Vec::new();
    for f in formations {
        check_team(sc, f)?;
        let records = monte_carlo(&sc.sim, &sc.team, &sc.graph, &f.state, &f.label, trials, seed)?;
        aggregates.push(aggregate(&f.label, &records));
        if dump {
            let cfg = crate::covsim::SimConfig {
                seed: records[0].seed,
                ..sc.sim.clone()
            };
            let run = run_coverage_sim(&cfg, &sc.team, &sc.graph, &f.state, TRAJECTORY_DECIMATION)?;
            write(&out.join(format!("trajectory_{}.csv", f.label)), &trajectory_csv(&run.trajectory))?;
        }
        all.extend(records);
    }
    let baseline = formations.iter().position(|f| f.cost == CostKind::Adj).unwrap_or(0);

    let metrics_path = out.join("metrics.jsonl");
    write(&metrics_path, &metrics_jsonl(&all))?;

    let summary = Value::Object(
        [
            ("scenario".to_string(), Value::String(sc.name.clone())),
            ("seed".to_string(), Value::from(seed)),
            ("trials".to_string(), Value::from(trials)),
            ("baseline".to_string(), Value::String(formations[baseline].label.clone())),
            (
                "formations".to_string(),
                Value::Array(aggregates.iter().map(aggregate_json).collect()),
            ),
        ]
        .into_iter()
        .collect(),
    );
    let summary_path = out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).expect("serializable");
    text.push('\n');
    write(&summary_path, &text)?;

    let landmarks = sc.sim.landmarks.len();
    let rows = comparison_rows(landmarks);
    let base = &aggregates[baseline];
    let mut csv = String::from("metric");
    let mut table = format!("{:<24}", "median (kept trials)");
    for a in &aggregates {
        let _ = write!(csv, ",{0}_median,{0}_reduction_pct", a.formation);
        let _ = write!(table, "{:>12}{:>10}", a.formation, "red.%");
    }
    csv.push('\n');
    table.push('\n');
    for (name, get) in &rows {
        let _ = write!(csv, "{name}");
        let _ = write!(table, "{name:<24}");
        let b = get(base);
        for a in &aggregates {
            let v = get(a);
            let red = b.zip(v).map(|(b, v)| percent_reduction(b, v));
            let _ = write!(csv, ",{},{}", v.map_or(String::new(), |x| format!("{x:.17e}")), red.map_or(String::new(), |x| format!("{x:.17e}")));
            let _ = write!(table, "{:>12}{:>10}", fmt_opt(v, 4), fmt_opt(red, 1));
        }
        csv.push('\n');
        table.push('\n');
    }
    for a in &aggregates {
        let _ = writeln!(
            table,
            "{}: {} trials, {} kept, {} diverged, {} incomplete",
            a.formation,
            a.trials,
            a.kept(),
            a.diverged,
            a.incomplete
        );
    }
    let comparison_path = out.join("comparison.csv");
    write(&comparison_path, &csv)?;
    Ok(MonteCarloReport {
        aggregates,
        baseline,
        table,
        metrics_path,
        summary_path,
        comparison_path,
    })
}

/// Coverage design with GPS-equipped end slots; writes `formation_bridge.json`.
pub fn cmd_bridge_demo(sc: &Scenario, seed: u64, out: &Path) -> Result<(FormationFile, PathBuf, bool)> {
    ensure_dir(out)?;
    let d = sc.design_problem().design(CostKind::Cov, &sc.optimizer, seed, DesignMode::EndpointsGps)?;
    let mut f = from_design(sc, &d, seed);
    f.label = "bridge".into();
    let path = out.join("formation_bridge.json");
    f.write(&path)?;
    let ok = f.converged;
    Ok((f, path, ok))
}
