//! Delayed landmark initialisation by range trilateration.

use crate::se2::Vec2;
use nalgebra::{Matrix2, SymmetricEigen};

/// Covariance inflation applied to the trilateration normal equations.
pub const INIT_INFLATION: f64 = 10.0;
/// Largest accepted condition number of the position scatter.
pub const MAX_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSample {
    /// Estimated position of the measuring tag.
    pub from: Vec2,
    pub range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitRules {
    pub min_samples: usize,
    /// Largest pairwise distance between sample positions must exceed this (m).
    pub min_baseline: f64,
    /// Smallest principal standard deviation of the sample positions (m).
    pub min_spread: f64,
}

impl Default for InitRules {
    fn default() -> Self {
        Self {
            min_samples: 3,
            min_baseline: 0.5,
            min_spread: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trilateration {
    Solved { position: Vec2, covariance: Matrix2<f64> },
    TooFewSamples,
    ShortBaseline,
    IllConditioned,
}

/// Linear least squares on differenced squared ranges, then Gauss-Newton on
/// the range residuals. The returned covariance is
/// `INIT_INFLATION * sigma^2 (J^T J)^-1` at the solution.
pub fn trilaterate(samples: &[RangeSample], sigma: f64, rules: &InitRules) -> Trilateration {
    if samples.len() < rules.min_samples.max(3) {
        return Trilateration::TooFewSamples;
    }
    let baseline = samples
        .iter()
        .enumerate()
        .flat_map(|(k, a)| samples[k + 1..].iter().map(move |b| (a.from - b.from).norm()))
        .fold(0.0, f64::max);
    if baseline <= rules.min_baseline {
        return Trilateration::ShortBaseline;
    }
    let m = samples.len() as f64;
    let mean = samples.iter().fold(Vec2::zeros(), |acc, s| acc + s.from) / m;
    let mean_sq = samples.iter().map(|s| s.from.norm_squared() - s.range * s.range).sum::<f64>() / m;
    let mut ata = Matrix2::zeros();
    let mut atb = Vec2::zeros();
    for s in samples {
        let a = (s.from - mean) * 2.0;
        let b = s.from.norm_squared() - s.range * s.range - mean_sq;
        ata += a * a.transpose();
        atb += a * b;
    }
    let eig = SymmetricEigen::new(ata);
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Trilateration::IllConditioned;
    }
    // ata = 4 * sum (p - mean)(p - mean)^T
    if (lo / (4.0 * m)).sqrt() < rules.min_spread {
        return Trilateration::IllConditioned;
    }
    let mut x = ata.try_inverse().expect("well conditioned") * atb;
    let mut jtj = Matrix2::zeros();
    for _ in 0..50 {
        jtj = Matrix2::zeros();
        let mut jtr = Vec2::zeros();
        for s in samples {
            let d = x - s.from;
            let r = d.norm();
            if r < 1e-12 {
                continue;
            }
            let u = d / r;
            jtj += u * u.transpose();
            jtr += u * (r - s.range);
        }
        let Some(inv) = jtj.try_inverse() else {
            return Trilateration::IllConditioned;
        };
        let step = inv * jtr;
        x -= step;
        if step.norm() < 1e-13 * (1.0 + x.norm()) {
            break;
        }
    }
    match jtj.try_inverse() {
        Some(inv) => Trilateration::Solved {
            position: x,
            covariance: inv * (INIT_INFLATION * sigma * sigma),
        },
        None => Trilateration::IllConditioned,
    }
}
