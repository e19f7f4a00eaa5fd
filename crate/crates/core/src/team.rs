//! Fleet description: tag geometry, camera footprints, the range graph and
//! the user-facing formation specification.

use crate::error::{Error, Result};
use crate::se2::Vec2;
use std::collections::{BTreeMap, BTreeSet};

/// Tag offsets of the two-tag airframes, in the body frame (m).
pub const DEFAULT_TAG_OFFSETS: [[f64; 2]; 2] = [[0.17, -0.17], [-0.17, 0.17]];
/// Camera footprint radius used for the coverage scenarios (m).
pub const SIM_CAMERA_RADIUS: f64 = 0.5;
/// Camera footprint radius of the three-quadcopter geometry (m).
pub const EXPERIMENT_CAMERA_RADIUS: f64 = 0.7;
/// Ranging noise standard deviation shared by every edge unless overridden (m).
pub const DEFAULT_RANGE_SIGMA: f64 = 0.1;
/// Collision activation radius `A` (m).
pub const DEFAULT_ACTIVATION_RADIUS: f64 = 0.9;
/// Collision radius `d` (m).
pub const DEFAULT_COLLISION_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct RobotSpec {
    pub id: usize,
    pub tag_offsets: Vec<Vec2>,
    pub camera_radius: f64,
}

/// Where a global tag id lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagLocation {
    Robot { robot: usize, index: usize },
    /// Static tag with a known position in Robot 1's frame.
    Landmark(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeamConfig {
    robots: Vec<RobotSpec>,
    landmarks: Vec<Vec2>,
    tags: Vec<TagLocation>,
}

impl TeamConfig {
    pub fn new(robots: Vec<RobotSpec>) -> Result<Self> {
        Self::with_landmarks(robots, Vec::new())
    }

    /// Team plus static tags whose positions are known in Robot 1's frame.
    /// Landmark tag ids follow the robot tag ids.
    pub fn with_landmarks(robots: Vec<RobotSpec>, landmarks: Vec<Vec2>) -> Result<Self> {
        if robots.is_empty() {
            return Err(Error::Invalid("team needs at least one robot".into()));
        }
        let mut tags = Vec::new();
        for (k, r) in robots.iter().enumerate() {
            if r.id != k + 1 {
                return Err(Error::Invalid(format!(
                    "robot ids must be consecutive from 1; position {} holds id {}",
                    k, r.id
                )));
            }
            if !(r.camera_radius > 0.0) {
                return Err(Error::Invalid(format!("robot {}: camera radius must be > 0", r.id)));
            }
            if r.tag_offsets.is_empty() {
                return Err(Error::Invalid(format!("robot {}: at least one tag required", r.id)));
            }
            for (a, oa) in r.tag_offsets.iter().enumerate() {
                if r.tag_offsets[..a].iter().any(|ob| (oa - ob).norm() < 1e-12) {
                    return Err(Error::Invalid(format!("robot {}: duplicate tag offset", r.id)));
                }
                tags.push(TagLocation::Robot { robot: r.id, index: a });
            }
        }
        tags.extend((0..landmarks.len()).map(TagLocation::Landmark));
        Ok(Self {
            robots,
            landmarks,
            tags,
        })
    }

    /// `n` identical robots carrying the default two-tag layout.
    pub fn uniform(n: usize, camera_radius: f64) -> Self {
        let offsets: Vec<Vec2> = DEFAULT_TAG_OFFSETS.iter().map(|o| Vec2::new(o[0], o[1])).collect();
        let robots = (1..=n)
            .map(|id| RobotSpec {
                id,
                tag_offsets: offsets.clone(),
                camera_radius,
            })
            .collect();
        Self::new(robots).expect("uniform team is valid")
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn num_tags(&self) -> usize {
        self.tags.len()
    }

    pub fn robots(&self) -> &[RobotSpec] {
        &self.robots
    }

    pub fn landmarks(&self) -> &[Vec2] {
        &self.landmarks
    }

    pub fn robot(&self, id: usize) -> Result<&RobotSpec> {
        id.checked_sub(1)
            .and_then(|k| self.robots.get(k))
            .ok_or(Error::UnknownRobot(id))
    }

    pub fn radii(&self) -> Vec<f64> {
        self.robots.iter().map(|r| r.camera_radius).collect()
    }

    pub fn tag(&self, tag: usize) -> Result<TagLocation> {
        tag.checked_sub(1)
            .and_then(|k| self.tags.get(k))
            .copied()
            .ok_or(Error::UnknownTag(tag))
    }

    /// Robot carrying `tag`, or `None` for landmark tags.
    pub fn tag_owner(&self, tag: usize) -> Result<Option<usize>> {
        Ok(match self.tag(tag)? {
            TagLocation::Robot { robot, .. } => Some(robot),
            TagLocation::Landmark(_) => None,
        })
    }

    /// Global tag ids mounted on robot `id`.
    pub fn tags_of(&self, id: usize) -> Result<Vec<usize>> {
        self.robot(id)?;
        Ok(self
            .tags
            .iter()
            .enumerate()
            .filter(|(_, t)| matches!(t, TagLocation::Robot { robot, .. } if *robot == id))
            .map(|(k, _)| k + 1)
            .collect())
    }

    pub fn tag_offset(&self, tag: usize) -> Result<Option<Vec2>> {
        Ok(match self.tag(tag)? {
            TagLocation::Robot { robot, index } => Some(self.robots[robot - 1].tag_offsets[index]),
            TagLocation::Landmark(_) => None,
        })
    }
}

/// Range measurement edges between tags, keyed `(min id, max id)` so that
/// iteration order is lexicographic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RangeGraph {
    edges: BTreeMap<(usize, usize), f64>,
}

impl RangeGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, team: &TeamConfig, i: usize, j: usize, sigma: f64) -> Result<()> {
        if i == j {
            return Err(Error::Invalid(format!("self edge on tag {i}")));
        }
        let (oi, oj) = (team.tag_owner(i)?, team.tag_owner(j)?);
        if oi.is_some() && oi == oj {
            return Err(Error::Invalid(format!("tags {i} and {j} are on the same robot")));
        }
        if !(sigma > 0.0) {
            return Err(Error::Invalid(format!("edge ({i}, {j}): sigma must be > 0")));
        }
        self.edges.insert((i.min(j), i.max(j)), sigma);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&(i.min(j), i.max(j)))
    }

    pub fn sigma(&self, i: usize, j: usize) -> Option<f64> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Edges `(i, j, sigma)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &s)| (i, j, s))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            edges: self.edges.iter().map(|(k, s)| (*k, s * factor)).collect(),
        }
    }
}

/// Every tag pair across distinct robots with `sigma` = 0.1 m.
pub fn default_full_graph(team: &TeamConfig) -> RangeGraph {
    full_graph_with_sigma(team, DEFAULT_RANGE_SIGMA)
}

pub fn full_graph_with_sigma(team: &TeamConfig, sigma: f64) -> RangeGraph {
    let mut g = RangeGraph::empty();
    for p in 1..=team.num_robots() {
        for q in p + 1..=team.num_robots() {
            for i in team.tags_of(p).expect("valid robot") {
                for j in team.tags_of(q).expect("valid robot") {
                    g.insert(team, i, j, sigma).expect("cross-robot edge is valid");
                }
            }
        }
    }
    g
}

/// Removes every edge joining robot `pair.0` to robot `pair.1`.
pub fn mask_edges(graph: &RangeGraph, pair: (usize, usize), team: &TeamConfig) -> Result<RangeGraph> {
    let a = team.tags_of(pair.0)?;
    let b = team.tags_of(pair.1)?;
    let edges = graph
        .edges
        .iter()
        .filter(|(&(i, j), _)| !((a.contains(&i) && b.contains(&j)) || (a.contains(&j) && b.contains(&i))))
        .map(|(k, s)| (*k, *s))
        .collect();
    Ok(RangeGraph { edges })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    pub adj: f64,
    pub overlap: f64,
    pub est: f64,
    pub col: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            adj: 1.0,
            overlap: 1.0,
            est: 1.0,
            col: 1.0,
        }
    }
}

impl CostWeights {
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            adj: self.adj * s,
            overlap: self.overlap * s,
            est: self.est * s,
            col: self.col * s,
        }
    }
}

/// User-defined shape of the formation and the collision barrier constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationSpec {
    /// Unit vector from sorted slot `k` to slot `k+1`, in Robot 1's frame.
    pub directions: Vec<Vec2>,
    /// Fraction of the adjacent radial distance that camera footprints overlap.
    pub lambda: f64,
    /// Robot ids whose overlap terms are forced to zero against every partner.
    pub overlap_exempt: BTreeSet<usize>,
    pub activation_radius: f64,
    pub collision_radius: f64,
    pub weights: CostWeights,
}

impl FormationSpec {
    pub fn new(directions: Vec<Vec2>, lambda: f64) -> Result<Self> {
        let spec = Self {
            directions,
            lambda,
            overlap_exempt: BTreeSet::new(),
            activation_radius: DEFAULT_ACTIVATION_RADIUS,
            collision_radius: DEFAULT_COLLISION_RADIUS,
            weights: CostWeights::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// All `n - 1` directions along +x.
    pub fn line(n: usize, lambda: f64) -> Self {
        Self::new(vec![Vec2::new(1.0, 0.0); n.saturating_sub(1)], lambda).expect("valid line spec")
    }

    pub fn validate(&self) -> Result<()> {
        for (k, d) in self.directions.iter().enumerate() {
            if (d.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::Invalid(format!("direction {} is not a unit vector", k + 1)));
            }
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Invalid("lambda must lie in [0, 1]".into()));
        }
        if !(self.collision_radius > 0.0 && self.collision_radius < self.activation_radius) {
            return Err(Error::Invalid("need 0 < d < A".into()));
        }
        let w = &self.weights;
        if [w.adj, w.overlap, w.est, w.col].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Invalid("cost weights must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn check_team(&self, team: &TeamConfig) -> Result<()> {
        if self.directions.len() + 1 != team.num_robots() {
            return Err(Error::Invalid(format!(
                "expected {} directions for {} robots, found {}",
                team.num_robots() - 1,
                team.num_robots(),
                self.directions.len()
            )));
        }
        for id in &self.overlap_exempt {
            team.robot(*id)?;
        }
        Ok(())
    }
}

/// Slot order `P_s` (first element always Robot 1) and the matching radii.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedIds {
    pub order: Vec<usize>,
    pub radii: Vec<f64>,
}

impl SortedIds {
    pub fn new(order: Vec<usize>, team: &TeamConfig) -> Result<Self> {
        let n = team.num_robots();
        let mut seen = vec![false; n + 1];
        if order.len() != n || order.first() != Some(&1) {
            return Err(Error::Invalid("sorted order must start with robot 1 and cover the team".into()));
        }
        for &id in &order {
            if id == 0 || id > n || seen[id] {
                return Err(Error::Invalid(format!("sorted order is not a permutation (id {id})")));
            }
            seen[id] = true;
        }
        let radii = order.iter().map(|&id| team.robots[id - 1].camera_radius).collect();
        Ok(Self { order, radii })
    }

    /// Ascending robot ids.
    pub fn identity(team: &TeamConfig) -> Self {
        Self::new((1..=team.num_robots()).collect(), team).expect("identity order is valid")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Slot (1-based) occupied by robot `id`.
    pub fn slot_of(&self, id: usize) -> Option<usize> {
        self.order.iter().position(|&r| r == id).map(|k| k + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_graph_counts() {
        assert_eq!(default_full_graph(&TeamConfig::uniform(2, 0.5)).len(), 4);
        assert_eq!(default_full_graph(&TeamConfig::uniform(3, 0.5)).len(), 12);
        for n in 2..9 {
            assert_eq!(default_full_graph(&TeamConfig::uniform(n, 0.5)).len(), 4 * n * (n - 1) / 2);
        }
    }

    #[test]
    fn full_graph_sigma_default() {
        let g = default_full_graph(&TeamConfig::uniform(3, 0.5));
        assert!(g.edges().all(|(_, _, s)| s == 0.1));
    }

    #[test]
    fn mask_examples() {
        let t7 = TeamConfig::uniform(7, 0.5);
        let g7 = default_full_graph(&t7);
        assert_eq!(mask_edges(&g7, (1, 2), &t7).unwrap().len(), 80);

        let t2 = TeamConfig::uniform(2, 0.5);
        assert!(mask_edges(&default_full_graph(&t2), (1, 2), &t2).unwrap().is_empty());

        let t3 = TeamConfig::uniform(3, 0.5);
        let g3 = default_full_graph(&t3);
        let m = mask_edges(&g3, (2, 3), &t3).unwrap();
        assert_eq!(m.len(), 8);
        assert_eq!(mask_edges(&m, (2, 3), &t3).unwrap(), m);
        assert_eq!(mask_edges(&m, (3, 2), &t3).unwrap(), m);
        assert_eq!(mask_edges(&g3, (1, 9), &t3), Err(Error::UnknownRobot(9)));
    }

    #[test]
    fn graph_rejects_invalid_edges() {
        let t = TeamConfig::uniform(2, 0.5);
        let mut g = RangeGraph::empty();
        assert!(g.insert(&t, 1, 1, 0.1).is_err());
        assert!(g.insert(&t, 1, 2, 0.1).is_err());
        assert!(g.insert(&t, 1, 3, 0.0).is_err());
        assert!(g.insert(&t, 1, 7, 0.1).is_err());
        g.insert(&t, 4, 1, 0.2).unwrap();
        assert_eq!(g.edges().next(), Some((1, 4, 0.2)));
    }

    #[test]
    fn team_validation() {
        let bad = RobotSpec {
            id: 2,
            tag_offsets: vec![Vec2::zeros()],
            camera_radius: 0.5,
        };
        assert!(TeamConfig::new(vec![bad]).is_err());
        let dup = RobotSpec {
            id: 1,
            tag_offsets: vec![Vec2::zeros(), Vec2::zeros()],
            camera_radius: 0.5,
        };
        assert!(TeamConfig::new(vec![dup]).is_err());
        let t = TeamConfig::uniform(3, 0.5);
        assert_eq!(t.tags_of(2).unwrap(), vec![3, 4]);
        assert_eq!(t.tag(5).unwrap(), TagLocation::Robot { robot: 3, index: 0 });
    }

    #[test]
    fn spec_validation() {
        assert!(FormationSpec::new(vec![Vec2::new(1.0, 1.0)], 0.25).is_err());
        assert!(FormationSpec::new(vec![Vec2::new(1.0, 0.0)], 1.5).is_err());
        let mut s = FormationSpec::line(3, 0.25);
        s.collision_radius = 1.0;
        assert!(s.validate().is_err());
        assert!(FormationSpec::line(3, 0.25).check_team(&TeamConfig::uniform(4, 0.5)).is_err());
    }

    #[test]
    fn sorted_ids_radii_follow_order() {
        let robots = (1..=3)
            .map(|id| RobotSpec {
                id,
                tag_offsets: vec![Vec2::zeros()],
                camera_radius: id as f64,
            })
            .collect();
        let t = TeamConfig::new(robots).unwrap();
        let s = SortedIds::new(vec![1, 3, 2], &t).unwrap();
        assert_eq!(s.radii, vec![1.0, 3.0, 2.0]);
        assert_eq!(s.slot_of(3), Some(2));
        assert!(SortedIds::new(vec![2, 1, 3], &t).is_err());
        assert!(SortedIds::new(vec![1, 1, 3], &t).is_err());
    }
}
