//! Independent seeded trials and their order statistics.

use super::sim::{run_coverage_sim, SimConfig, SimMetrics};
use crate::error::Result;
use crate::se2::FormationState;
use crate::team::{RangeGraph, TeamConfig};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub formation: String,
    pub trial: usize,
    pub seed: u64,
    pub metrics: SimMetrics,
}

/// Seed of trial `k`: the first word of ChaCha stream `k + 1` under the
/// master seed, so trials never share a stream however they are scheduled.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial as u64 + 1);
    rng.next_u64()
}

/// Runs `trials` coverage simulations in parallel; records come back in trial order.
pub fn monte_carlo(
    cfg: &SimConfig,
    team: &TeamConfig,
    graph: &RangeGraph,
    x_des: &FormationState,
    formation: &str,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<TrialRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(master_seed, trial);
            let cfg = SimConfig { seed, ..cfg.clone() };
            let metrics = run_coverage_sim(&cfg, team, graph, x_des, 0)?.metrics;
            Ok(TrialRecord {
                formation: formation.to_string(),
                trial,
                seed,
                metrics,
            })
        })
        .collect()
}

/// Linear-interpolation percentile (`q` in `[0, 1]`) of unsorted data.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
    pub count: usize,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        Some(Self {
            median: median(values)?,
            p25: percentile(values, 0.25)?,
            p75: percentile(values, 0.75)?,
            count: values.len(),
        })
    }
}

/// Order statistics of one metric, over the kept trials and over every
/// completed trial including diverged ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub kept: Option<Spread>,
    pub raw: Option<Spread>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub formation: String,
    pub trials: usize,
    pub incomplete: usize,
    pub diverged: usize,
    pub coverage_time: MetricSummary,
    pub landmark_errors: Vec<MetricSummary>,
    pub mean_landmark_error: MetricSummary,
    pub interrobot_att_rmse: MetricSummary,
    pub interrobot_pos_rmse: MetricSummary,
    pub nees_containment: MetricSummary,
}

impl Aggregate {
    /// Trials that finished the sweep without diverging.
    pub fn kept(&self) -> usize {
        self.trials - self.incomplete - self.diverged
    }
}

fn summarize<F: Fn(&SimMetrics) -> Option<f64>>(records: &[TrialRecord], f: F) -> MetricSummary {
    let completed = records.iter().filter(|r| r.metrics.completed());
    let raw: Vec<f64> = completed.clone().filter_map(|r| f(&r.metrics)).collect();
    let kept: Vec<f64> = completed.filter(|r| !r.metrics.diverged).filter_map(|r| f(&r.metrics)).collect();
    MetricSummary {
        kept: Spread::of(&kept),
        raw: Spread::of(&raw),
    }
}

/// Summarises records of a single formation. Incomplete sweeps are left out
/// of every statistic; diverged ones only of the `kept` statistics.
pub fn aggregate(formation: &str, records: &[TrialRecord]) -> Aggregate {
    let landmarks = records.iter().map(|r| r.metrics.landmark_errors.len()).max().unwrap_or(0);
    Aggregate {
        formation: formation.to_string(),
        trials: records.len(),
        incomplete: records.iter().filter(|r| !r.metrics.completed()).count(),
        diverged: records.iter().filter(|r| r.metrics.completed() && r.metrics.diverged).count(),
        coverage_time: summarize(records, |m| m.coverage_time),
        landmark_errors: (0..landmarks)
            .map(|l| summarize(records, |m| m.landmark_errors.get(l).copied().flatten()))
            .collect(),
        mean_landmark_error: summarize(records, |m| m.mean_landmark_error()),
        interrobot_att_rmse: summarize(records, |m| Some(m.interrobot_att_rmse)),
        interrobot_pos_rmse: summarize(records, |m| Some(m.interrobot_pos_rmse)),
        nees_containment: summarize(records, |m| m.nees_containment),
    }
}

/// `100 (baseline - value) / baseline`.
pub fn percent_reduction(baseline: f64, value: f64) -> f64 {
    100.0 * (baseline - value) / baseline
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentiles() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&v), Some(2.5));
        assert_eq!(percentile(&v, 0.0), Some(1.0));
        assert_eq!(percentile(&v, 1.0), Some(4.0));
        assert_eq!(median(&[7.0]), Some(7.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn self_reduction_is_zero() {
        assert_eq!(percent_reduction(0.3, 0.3), 0.0);
        assert!((percent_reduction(2.0, 1.0) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn trial_seeds_are_distinct_and_stable() {
        let seeds: Vec<u64> = (0..50).map(|k| trial_seed(9, k)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 50);
        assert_eq!(seeds[3], trial_seed(9, 3));
        assert_ne!(trial_seed(9, 0), trial_seed(10, 0));
    }
}
