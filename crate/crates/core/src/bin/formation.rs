use clap::{Args, Parser, Subcommand};
use formation_core::commands;
use formation_core::costs::CostKind;
use formation_core::output::FormationFile;
use formation_core::scenario::{preset_names, HeatmapTerm, Scenario};
use formation_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Formation design and coverage evaluation for range-localized robot teams.
#[derive(Parser)]
#[command(name = "formation", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled scenario (sim5, bridge7, exp3plus2). Defaults to sim5.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for restarts and trials.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Design a formation by multi-start descent.
    Optimize {
        #[arg(long, value_parser = parse_cost)]
        cost: CostKind,
    },
    /// Sweep one robot over a grid and write the cost surface.
    Heatmap {
        /// adj, overlap, est, col, opt or cov; defaults to the scenario's term.
        #[arg(long)]
        term: Option<String>,
        #[arg(long, value_parser = parse_cost, conflicts_with = "term")]
        cost: Option<CostKind>,
        /// Formation to hold fixed; defaults to the constructed adjacency formation.
        #[arg(long)]
        formation: Option<PathBuf>,
    },
    /// Run one coverage simulation.
    Simulate {
        #[arg(long)]
        formation: PathBuf,
        #[arg(long)]
        dump_trajectories: bool,
    },
    /// Monte Carlo comparison of several formations.
    Montecarlo {
        /// Formation files; when omitted the adj, opt and cov formations are designed first.
        #[arg(long, num_args = 1..)]
        formations: Vec<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        dump_trajectories: bool,
    },
    /// Coverage design with GPS-equipped end robots.
    BridgeDemo,
    /// List the bundled scenarios.
    Presets,
}

fn parse_cost(s: &str) -> Result<CostKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Config(String),
    Incomplete(String),
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg_err = |e: Error| Failure::Config(e.to_string());
    if let Some(jobs) = cli.common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    if let Command::Presets = cli.command {
        for name in preset_names() {
            println!("{name}");
        }
        return Ok(());
    }
    let scenario = match (&cli.common.config, &cli.common.preset) {
        (Some(path), _) => Scenario::load(path),
        (None, Some(name)) => Scenario::preset(name),
        (None, None) => Scenario::preset("sim5"),
    }
    .map_err(cfg_err)?;
    let seed = cli.common.seed.unwrap_or(scenario.seed);
    let out = &cli.common.out;
    match cli.command {
        Command::Optimize { cost } => {
            let (f, path, ok) = commands::cmd_optimize(&scenario, cost, seed, out).map_err(cfg_err)?;
            println!("wrote {} (total cost {:.6}, {} iterations)", path.display(), f.breakdown.total, f.iterations);
            if !ok {
                return Err(Failure::Incomplete(f.diagnostic.unwrap_or_else(|| "descent did not converge".into())));
            }
        }
        Command::Heatmap { term, cost, formation } => {
            let term = match (term, cost) {
                (Some(t), _) => t.parse::<HeatmapTerm>().map_err(cfg_err)?,
                (None, Some(c)) => HeatmapTerm::from(c),
                (None, None) => scenario.heatmap.term,
            };
            let f = formation.map(|p| FormationFile::read(&p)).transpose().map_err(cfg_err)?;
            let path = commands::cmd_heatmap(&scenario, term, f.as_ref(), out).map_err(cfg_err)?;
            println!("wrote {}", path.display());
        }
        Command::Simulate { formation, dump_trajectories } => {
            let f = FormationFile::read(&formation).map_err(cfg_err)?;
            let o = commands::cmd_simulate(&scenario, &f, seed, out, dump_trajectories).map_err(cfg_err)?;
            let m = &o.metrics;
            match m.coverage_time {
                Some(t) => println!(
                    "{}: coverage {t:.2} s, att RMSE {:.4} rad, pos RMSE {:.4} m, landmarks {:?}",
                    f.label, m.interrobot_att_rmse, m.interrobot_pos_rmse, m.landmark_errors
                ),
                None => return Err(Failure::Incomplete(format!("{}: sweep incomplete at max_time", f.label))),
            }
        }
        Command::Montecarlo { formations, trials, dump_trajectories } => {
            let files = if formations.is_empty() {
                commands::standard_formations(&scenario, seed).map_err(cfg_err)?
            } else {
                formations
                    .iter()
                    .map(|p| FormationFile::read(p))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(cfg_err)?
            };
            let trials = trials.unwrap_or(scenario.trials);
            let report = commands::cmd_montecarlo(&scenario, &files, trials, seed, out, dump_trajectories).map_err(cfg_err)?;
            print!("{}", report.table);
            println!("wrote {}", report.metrics_path.display());
            if !report.complete() {
                return Err(Failure::Incomplete("some trials did not finish the sweep".into()));
            }
        }
        Command::BridgeDemo => {
            let (f, path, ok) = commands::cmd_bridge_demo(&scenario, seed, out).map_err(cfg_err)?;
            println!("wrote {} (GPS robots {:?}, sorted ids {:?})", path.display(), f.gps_robots, f.sorted_ids);
            if !ok {
                return Err(Failure::Incomplete(f.diagnostic.unwrap_or_else(|| "descent did not converge".into())));
            }
        }
        Command::Presets => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Incomplete(msg)) => {
            eprintln!("incomplete: {msg}");
            ExitCode::from(2)
        }
    }
}
