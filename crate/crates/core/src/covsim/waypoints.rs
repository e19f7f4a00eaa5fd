//! Square-wave sweep planning and the camera footprint it is spaced by.

use crate::error::{Error, Result};
use crate::se2::{FormationState, Vec2};
use crate::team::TeamConfig;

/// Corner sequence of a boustrophedon sweep over `[0, width] x [0, height]`.
///
/// Legs run along `y`. There are `ceil(width / sweep)` of them, with
/// centres spread evenly from `sweep / 2` to `width - sweep / 2` (a single
/// leg sits in the middle). Each leg contributes two corners, alternating
/// between the bottom and top edges.
pub fn generate_waypoints(width: f64, height: f64, sweep: f64) -> Result<Vec<Vec2>> {
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::Invalid("area dimensions must be > 0".into()));
    }
    if !(sweep > 0.0) {
        return Err(Error::Invalid("sweep width must be > 0".into()));
    }
    if sweep > width {
        return Err(Error::Invalid(format!("sweep width {sweep} exceeds area width {width}")));
    }
    let legs = ((width / sweep) - 1e-9).ceil().max(1.0) as usize;
    let centres: Vec<f64> = if legs == 1 {
        vec![0.5 * width]
    } else {
        let span = width - sweep;
        (0..legs).map(|k| 0.5 * sweep + span * k as f64 / (legs - 1) as f64).collect()
    };
    let mut corners = Vec::with_capacity(2 * legs);
    for (k, c) in centres.into_iter().enumerate() {
        let (a, b) = if k % 2 == 0 { (0.0, height) } else { (height, 0.0) };
        corners.push(Vec2::new(c, a));
        corners.push(Vec2::new(c, b));
    }
    Ok(corners)
}

/// Camera footprint band across the sweep direction, in Robot 1's frame.
///
/// Each robot covers `[x - r, x + r]` once projected on the `x` axis. The
/// band is the widest gap-free run of that union; sweep legs spaced by its
/// width tile the area without holes.
pub fn sweep_band(x: &FormationState, team: &TeamConfig) -> Result<(f64, f64)> {
    let mut intervals = (1..=team.num_robots())
        .map(|id| {
            let p = x.position(id)?;
            let r = team.robot(id)?.camera_radius;
            Ok((p.x - r, p.x + r))
        })
        .collect::<Result<Vec<_>>>()?;
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = intervals[0];
    let mut current = intervals[0];
    for &(lo, hi) in &intervals[1..] {
        if lo <= current.1 {
            current.1 = current.1.max(hi);
        } else {
            current = (lo, hi);
        }
        if current.1 - current.0 > best.1 - best.0 {
            best = current;
        }
    }
    Ok(best)
}

pub fn formation_sweep_width(x: &FormationState, team: &TeamConfig) -> Result<f64> {
    let (lo, hi) = sweep_band(x, team)?;
    Ok(hi - lo)
}
