//! Discretized best responses: a bitmask dynamic program for the patroller
//! against a mixed attack, and grid minimization for the attacker against a
//! randomized periodic patrol.

use std::collections::HashMap;

use crate::attack::{MixedAttack, Spatial};
use crate::error::{Error, Result};
use crate::eval::{intercept_mixed_patrol, PatrolPath};
use crate::interval::Interval;
use crate::network::{ArcIx, MetricNetwork, NetPoint};
use crate::patrol::MixedPatrol;
use crate::ratio::{divides, rat, ratio_string, to_f64, zero, Ratio};
use crate::tour::Segment;

pub const BITMASK_LIMIT: usize = 22;

/// Space/time discretization. Unit speed forces dx = dt; both must divide
/// every arc length and alpha so grid walks stay on grid.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub dx: Ratio,
    pub dt: Ratio,
    pub horizon: Ratio,
    /// Cells each spread-out start-time distribution is split into; more
    /// cells tighten the DP upper bound at the cost of bitmask width.
    pub temporal_cells: u32,
}

impl GridSpec {
    pub fn uniform(step: Ratio, horizon: Ratio) -> Self {
        GridSpec {
            dx: step.clone(),
            dt: step,
            horizon,
            temporal_cells: 4,
        }
    }

    pub fn with_temporal_cells(mut self, cells: u32) -> Self {
        self.temporal_cells = cells.max(1);
        self
    }

    pub fn validate(&self, net: &MetricNetwork, alpha: &Ratio) -> Result<()> {
        if self.dx <= zero() || self.dx != self.dt {
            return Err(Error::GridStepMismatch("dx = dt > 0 required".into()));
        }
        for a in net.arcs() {
            if !divides(&self.dx, &a.length) {
                return Err(Error::GridStepMismatch(format!(
                    "arc {} of length {}",
                    a.id,
                    ratio_string(&a.length)
                )));
            }
        }
        if !divides(&self.dt, alpha) {
            return Err(Error::GridStepMismatch(format!(
                "alpha = {}",
                ratio_string(alpha)
            )));
        }
        if self.horizon <= zero() || !divides(&self.dt, &self.horizon) {
            return Err(Error::GridStepMismatch("horizon".into()));
        }
        Ok(())
    }
}

/// Grid points with unit-speed adjacency; each edge remembers the arc
/// segment it runs along.
pub struct Grid {
    pub points: Vec<NetPoint>,
    pub adj: Vec<Vec<(usize, ArcIx, Ratio, Ratio)>>,
    index: HashMap<String, usize>,
}

impl Grid {
    pub fn build(net: &MetricNetwork, step: &Ratio) -> Result<Grid> {
        let mut points = Vec::new();
        let mut index = HashMap::new();
        for n in 0..net.node_count() {
            index.insert(net.point_label(&NetPoint::Node(n)), points.len());
            points.push(NetPoint::Node(n));
        }
        let mut adj: Vec<Vec<(usize, ArcIx, Ratio, Ratio)>> = vec![Vec::new(); points.len()];
        for arc in 0..net.arc_count() {
            let len = &net.arc(arc).length;
            let cells = (len / step).to_integer();
            let mut prev_ix: Option<usize> = None;
            let mut off = zero();
            let mut k = num::BigInt::from(0u32);
            loop {
                let p = net.canonical(&NetPoint::on(arc, off.clone()))?;
                let label = net.point_label(&p);
                let ix = *index.entry(label).or_insert_with(|| {
                    adj.push(Vec::new());
                    points.push(p);
                    points.len() - 1
                });
                if let Some(prev) = prev_ix {
                    let prev_off = &off - step;
                    adj[prev].push((ix, arc, prev_off.clone(), off.clone()));
                    adj[ix].push((prev, arc, off.clone(), prev_off));
                }
                if k == cells {
                    break;
                }
                k += 1u32;
                off += step;
                prev_ix = Some(ix);
            }
        }
        Ok(Grid { points, adj, index })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn find(&self, net: &MetricNetwork, p: &NetPoint) -> Result<usize> {
        let p = net.canonical(p)?;
        self.index
            .get(&net.point_label(&p))
            .copied()
            .ok_or_else(|| Error::GridStepMismatch(format!("point {}", net.point_label(&p))))
    }
}

/// Where a discretized atom is intercepted: standing at a grid point, or
/// traversing a grid edge (for region chunks, whose interior has measure).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomTarget {
    Point(usize),
    Edge(ArcIx, Ratio),
}

/// One discretized attack component. A Point atom is credited by presence
/// at a time in its window: the open interval (begin, end) when the start
/// time is spread out (a graze at the boundary intercepts zero measure), or
/// the closed interval for a temporal atom. An Edge atom is credited by a
/// traversal overlapping (begin, end) in positive measure.
#[derive(Debug, Clone)]
pub struct WindowAtom {
    pub weight: Ratio,
    pub target: AtomTarget,
    pub begin: Ratio,
    pub end: Ratio,
    pub closed: bool,
}

/// Relax a mixed attack to window atoms: temporal spreads split into
/// grid-aligned cells carrying their exact conditional weights, and regions
/// split across grid-cell edges. The DP value over these atoms upper-bounds
/// the interception probability of any grid patrol; the slack shrinks as
/// the grid refines.
pub fn discretize_attack(
    net: &MetricNetwork,
    grid: &Grid,
    attack: &MixedAttack,
    step: &Ratio,
    temporal_cells: u32,
) -> Result<Vec<WindowAtom>> {
    let alpha = &attack.alpha;
    let mut atoms = Vec::new();
    for c in &attack.components {
        let (s0, s1) = c.temporal.support();
        match &c.spatial {
            Spatial::Atom(p) => {
                let point = grid.find(net, p)?;
                if s0 == s1 {
                    atoms.push(WindowAtom {
                        weight: c.weight.clone(),
                        target: AtomTarget::Point(point),
                        begin: s0,
                        end: s1 + alpha,
                        closed: true,
                    });
                    continue;
                }
                // Grid-aligned temporal cells of exact conditional weight.
                let spread = &s1 - &s0;
                let cell = ((&spread / (rat(temporal_cells as i64) * step)).ceil()
                    .max(Ratio::from_integer(1.into())))
                    * step;
                let mut lo = s0.clone();
                while lo < s1 {
                    let hi = (&lo + &cell).min(s1.clone());
                    let mass = c.temporal.probability_in(&lo, &hi);
                    if mass > zero() {
                        atoms.push(WindowAtom {
                            weight: &c.weight * mass,
                            target: AtomTarget::Point(point),
                            begin: lo.clone(),
                            end: &hi + alpha,
                            closed: false,
                        });
                    }
                    lo = hi;
                }
            }
            Spatial::UniformRegion(r) => {
                if s0 != s1 {
                    return Err(Error::InvalidParameter(
                        "region attacks with non-atomic start times are not supported".into(),
                    ));
                }
                let measure = r.measure();
                for (arc, lo, hi) in &r.intervals {
                    let mut cell_lo = (lo / step).floor() * step;
                    while &cell_lo < hi {
                        let cell_hi = &cell_lo + step;
                        let chunk = Interval::new(lo.clone(), hi.clone())
                            .intersect(&Interval::new(cell_lo.clone(), cell_hi.clone()));
                        if let Some(chunk) = chunk {
                            if chunk.length() > zero() {
                                atoms.push(WindowAtom {
                                    weight: &c.weight * chunk.length() / &measure,
                                    target: AtomTarget::Edge(*arc, cell_lo.clone()),
                                    begin: s0.clone(),
                                    end: &s1 + alpha,
                                    closed: false,
                                });
                            }
                        }
                        cell_lo = cell_hi;
                    }
                }
            }
        }
    }
    if atoms.len() > BITMASK_LIMIT {
        return Err(Error::TooManyComponents(atoms.len(), BITMASK_LIMIT));
    }
    Ok(atoms)
}

/// Best discretized patrol against a mixed attack: dynamic programming over
/// (grid position, set of atoms already intercepted) per time step. The
/// value certifies an upper bound for grid patrols; the returned path
/// attains it.
pub fn best_response_patrol(
    net: &MetricNetwork,
    attack: &MixedAttack,
    spec: &GridSpec,
) -> Result<(PatrolPath, Ratio)> {
    spec.validate(net, &attack.alpha)?;
    let grid = Grid::build(net, &spec.dx)?;
    let atoms = discretize_attack(net, &grid, attack, &spec.dx, spec.temporal_cells)?;
    let steps = (&spec.horizon / &spec.dt).to_integer();
    let steps: usize = steps
        .try_into()
        .map_err(|_| Error::InvalidParameter("horizon too large".into()))?;

    // Atoms credited by standing at pos at time t.
    let hit = |t: &Ratio, pos: usize| -> u32 {
        let mut mask = 0u32;
        for (i, a) in atoms.iter().enumerate() {
            let here = a.target == AtomTarget::Point(pos);
            let in_window = if a.closed {
                &a.begin <= t && t <= &a.end
            } else {
                &a.begin < t && t < &a.end
            };
            if here && in_window {
                mask |= 1 << i;
            }
        }
        mask
    };
    // Atoms credited by traversing a grid edge over (t - dt, t): the move
    // must overlap the window in positive measure.
    let edge_hit = |t: &Ratio, arc: ArcIx, cell_lo: &Ratio| -> u32 {
        let mut mask = 0u32;
        let t_start = t - &spec.dt;
        for (i, a) in atoms.iter().enumerate() {
            if let AtomTarget::Edge(ea, elo) = &a.target {
                if *ea == arc && elo == cell_lo && t_start < a.end && t > &a.begin {
                    mask |= 1 << i;
                }
            }
        }
        mask
    };
    let weight_of = |mask: u32| -> Ratio {
        atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .fold(zero(), |acc, (_, a)| acc + &a.weight)
    };

    // layers[t]: state -> predecessor state (for path recovery).
    type State = (usize, u32);
    let mut layers: Vec<HashMap<State, State>> = Vec::with_capacity(steps + 1);
    let mut frontier: HashMap<State, State> = HashMap::new();
    let t0 = zero();
    for pos in 0..grid.len() {
        let st = (pos, hit(&t0, pos));
        frontier.insert(st, st);
    }
    layers.push(frontier);
    let mut t = zero();
    for _ in 0..steps {
        t += &spec.dt;
        let prev: Vec<State> = layers.last().unwrap().keys().copied().collect();
        let mut next: HashMap<State, State> = HashMap::new();
        for st @ (pos, mask) in prev {
            let mut push = |npos: usize, extra: u32| {
                let nmask = mask | extra | hit(&t, npos);
                next.entry((npos, nmask)).or_insert(st);
            };
            push(pos, 0);
            for (npos, arc, from_off, to_off) in &grid.adj[pos] {
                let cell_lo = from_off.clone().min(to_off.clone());
                push(*npos, edge_hit(&t, *arc, &cell_lo));
            }
        }
        // Dominance pruning: a mask subsumed at the same position is dead.
        let mut by_pos: HashMap<usize, Vec<u32>> = HashMap::new();
        for (pos, mask) in next.keys() {
            by_pos.entry(*pos).or_default().push(*mask);
        }
        next.retain(|(pos, mask), _| {
            !by_pos[pos]
                .iter()
                .any(|other| other != mask && other & mask == *mask)
        });
        layers.push(next);
    }

    let (&best_state, _) = layers
        .last()
        .unwrap()
        .iter()
        .max_by(|a, b| weight_of(a.0 .1).cmp(&weight_of(b.0 .1)))
        .ok_or_else(|| Error::LpFailure("empty DP frontier".into()))?;
    let value = weight_of(best_state.1);

    // Walk predecessors back to time 0, then emit segments forward:
    // layers[t] maps each state to its predecessor in layers[t-1].
    let mut trajectory = vec![best_state];
    for tix in (1..layers.len()).rev() {
        let cur = trajectory[trajectory.len() - 1];
        let pred = layers[tix][&cur];
        trajectory.push(pred);
    }
    trajectory.reverse();
    let mut states_path: Vec<usize> = trajectory.iter().map(|(pos, _)| *pos).collect();
    if states_path.is_empty() {
        states_path.push(0);
    }
    let mut segments = Vec::new();
    let mut now = zero();
    for w in states_path.windows(2) {
        let t1 = &now + &spec.dt;
        if w[0] == w[1] {
            segments.push(Segment::Pause {
                at: grid.points[w[0]].clone(),
                t0: now.clone(),
                t1: t1.clone(),
            });
        } else {
            let (_, arc, from_off, to_off) = grid.adj[w[0]]
                .iter()
                .find(|(n, _, _, _)| *n == w[1])
                .cloned()
                .ok_or_else(|| Error::LpFailure("broken DP trajectory".into()))?;
            segments.push(Segment::Move {
                arc,
                from_off,
                to_off,
                t0: now.clone(),
                t1: t1.clone(),
            });
        }
        now = t1;
    }
    let start = grid.points[states_path[0]].clone();
    Ok((PatrolPath::from_segments(start, segments, now), value))
}

/// Worst pure attack on the grid against a randomized periodic patrol. The
/// uniform phase makes the payoff independent of tau, so tau = 0 is scanned
/// per point and reported.
pub fn best_response_attack(
    net: &MetricNetwork,
    patrol: &MixedPatrol,
    alpha: &Ratio,
    spec: &GridSpec,
) -> Result<(NetPoint, Ratio, Ratio)> {
    spec.validate(net, alpha)?;
    let grid = Grid::build(net, &spec.dx)?;
    let tau = zero();
    let mut best: Option<(NetPoint, Ratio)> = None;
    for p in &grid.points {
        let v = intercept_mixed_patrol(net, patrol, p, &tau, alpha)?;
        if best.as_ref().map_or(true, |(_, bv)| &v < bv) {
            best = Some((p.clone(), v));
        }
    }
    let (point, value) = best.ok_or(Error::EmptyMatrix)?;
    Ok((point, tau, value))
}

/// Default DP horizon: twice the latest attack end time (optimal attacks
/// end by 4 mu anyway).
pub fn default_horizon(attack: &MixedAttack) -> Ratio {
    rat(2) * attack.horizon()
}

/// Convenience: f64 view of a DP value for reporting.
pub fn value_f64(v: &Ratio) -> f64 {
    to_f64(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{attack_611, attack_fig8_tree, e_attack, AttackComponent, Temporal};
    use crate::fixtures;
    use crate::patrol::randomized_periodic;
    use crate::ratio::frac;
    use crate::tour::double_cover_tour;

    #[test]
    fn grid_shapes() {
        let net = fixtures::network("star-2166").unwrap();
        let grid = Grid::build(&net, &frac(1, 2)).unwrap();
        // mu = 15 at half steps: 30 cells, 31 points counting both ends.
        assert_eq!(grid.len(), 31);
        let center = grid
            .find(&net, &NetPoint::Node(net.node_by_id("A").unwrap()))
            .unwrap();
        assert_eq!(grid.adj[center].len(), 4);
        let spec = GridSpec::uniform(frac(1, 3), rat(2));
        assert!(spec.validate(&net, &rat(6)).is_ok());
        let bad = GridSpec::uniform(frac(2, 5), rat(2));
        assert!(matches!(
            bad.validate(&net, &rat(6)),
            Err(Error::GridStepMismatch(_))
        ));
    }

    #[test]
    fn single_atom_is_always_caught() {
        let net = fixtures::network("star-611").unwrap();
        let alpha = rat(4);
        let attack = crate::attack::MixedAttack::new(
            alpha,
            vec![AttackComponent {
                weight: rat(1),
                spatial: crate::attack::Spatial::Atom(NetPoint::Node(
                    net.node_by_id("9").unwrap(),
                )),
                temporal: Temporal::Atom(rat(8)),
            }],
        )
        .unwrap();
        let spec = GridSpec::uniform(rat(1), rat(16));
        let (path, value) = best_response_patrol(&net, &attack, &spec).unwrap();
        assert_eq!(value, rat(1));
        let visits = path.visit_set(&net, &NetPoint::Node(net.node_by_id("9").unwrap())).unwrap();
        assert!(!visits.intervals().is_empty());
    }

    #[test]
    fn e_attack_star_2166_capped() {
        let net = fixtures::network("star-2166").unwrap();
        let attack = e_attack(&net, &rat(6)).unwrap();
        let spec = GridSpec::uniform(rat(1), default_horizon(&attack));
        let (_, value) = best_response_patrol(&net, &attack, &spec).unwrap();
        // Window relaxation still cannot beat v* = 1/4 by much; the exact
        // cap is checked in the acceptance suite against the relaxed value.
        assert!(value >= frac(1, 4), "value {}", ratio_string(&value));
        assert!(value <= frac(1, 4) + frac(1, 10), "value {}", ratio_string(&value));
    }

    #[test]
    fn attack_611_capped() {
        let net = fixtures::network("star-611").unwrap();
        let alpha = rat(6);
        let attack = attack_611(&net, &alpha).unwrap();
        let spec =
            GridSpec::uniform(rat(1), default_horizon(&attack)).with_temporal_cells(6);
        let (_, value) = best_response_patrol(&net, &attack, &spec).unwrap();
        let cap = frac(3, 7);
        assert!(value >= cap.clone(), "value {}", ratio_string(&value));
        assert!(value <= cap + frac(3, 20), "value {}", ratio_string(&value));
    }

    #[test]
    fn fig8_capped() {
        let net = fixtures::network("fig8-tree").unwrap();
        let attack = attack_fig8_tree(&net, &rat(6)).unwrap();
        let spec =
            GridSpec::uniform(rat(1), default_horizon(&attack)).with_temporal_cells(6);
        let (_, value) = best_response_patrol(&net, &attack, &spec).unwrap();
        assert!(value >= frac(1, 2));
        assert!(value <= frac(1, 2) + frac(1, 5), "value {}", ratio_string(&value));
    }

    #[test]
    fn attacker_best_response_flat_on_circle() {
        let net = fixtures::network("circle").unwrap();
        let patrol = randomized_periodic(double_cover_tour(&net).unwrap());
        let spec = GridSpec::uniform(frac(1, 4), rat(1));
        let (_, _, value) = best_response_attack(&net, &patrol, &frac(1, 4), &spec).unwrap();
        assert_eq!(value, frac(1, 4));
    }

    #[test]
    fn attacker_finds_the_gap() {
        // A tour that only walks the spine of the dog tree leaves its
        // leaves unvisited; the attacker best response lands on a leaf.
        let net = fixtures::network("dog-tree").unwrap();
        let a = net.node_by_id("A").unwrap();
        let spine_ab = net.arc_by_id("spine-ab").unwrap();
        let spine_bc = net.arc_by_id("spine-bc").unwrap();
        let mut b = crate::tour::TourBuilder::new(&net, NetPoint::Node(a)).unwrap();
        b.move_full(spine_ab, true).unwrap();
        b.move_full(spine_bc, true).unwrap();
        b.move_full(spine_bc, false).unwrap();
        b.move_full(spine_ab, false).unwrap();
        let tour = b.finish().unwrap();
        let patrol = randomized_periodic(tour);
        let spec = GridSpec::uniform(rat(1), rat(1));
        let (point, _, value) = best_response_attack(&net, &patrol, &rat(1), &spec).unwrap();
        assert_eq!(value, zero());
        assert!(matches!(point, NetPoint::Node(n) if net.degree(n) == 1));
    }
}
