//! Exact interception evaluators: pure patrol paths against mixed attacks,
//! randomized periodic patrols against pure attacks, coverage measures, and
//! Monte Carlo cross-checks.

use num::FromPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::attack::{MixedAttack, Region, Spatial, Temporal};
use crate::error::{Error, Result};
use crate::interval::{CircularSet, Interval, IntervalSet};
use crate::network::{ArcIx, MetricNetwork, NetPoint};
use crate::patrol::MixedPatrol;
use crate::ratio::{rat, to_f64, zero, Ratio};
use crate::tour::{Segment, TimedTour};

/// An aperiodic unit-speed walk over an absolute time range [0, end].
/// Unlike a tour it need not close up; the 6-1-1 counter-patrol is one.
#[derive(Debug, Clone)]
pub struct PatrolPath {
    start: NetPoint,
    segments: Vec<Segment>,
    end: Ratio,
}

impl PatrolPath {
    pub(crate) fn from_segments(start: NetPoint, segments: Vec<Segment>, end: Ratio) -> PatrolPath {
        PatrolPath {
            start,
            segments,
            end,
        }
    }

    pub fn start(&self) -> &NetPoint {
        &self.start
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn end_time(&self) -> &Ratio {
        &self.end
    }

    /// Repeat a periodic tour from time 0 until it covers [0, horizon].
    pub fn unroll(tour: &TimedTour, horizon: &Ratio) -> PatrolPath {
        let period = tour.period().clone();
        let mut segments = Vec::new();
        let mut base = zero();
        while &base < horizon {
            for s in tour.segments() {
                segments.push(shift_segment(s, &base));
            }
            base += &period;
        }
        PatrolPath {
            start: tour.start().clone(),
            segments,
            end: base,
        }
    }

    /// All times in [0, end] at which the path occupies p.
    pub fn visit_set(&self, net: &MetricNetwork, p: &NetPoint) -> Result<IntervalSet> {
        let p = net.canonical(p)?;
        let mut set = IntervalSet::new();
        for s in &self.segments {
            match s {
                Segment::Pause { at, t0, t1 } => {
                    if net.canonical(at)? == p {
                        set.insert(Interval::new(t0.clone(), t1.clone()));
                    }
                }
                Segment::Move {
                    arc,
                    from_off,
                    to_off,
                    t0,
                    ..
                } => {
                    let (lo, hi) = if from_off <= to_off {
                        (from_off, to_off)
                    } else {
                        (to_off, from_off)
                    };
                    let offsets: Vec<Ratio> = match &p {
                        NetPoint::On { arc: pa, offset } if pa == arc => vec![offset.clone()],
                        NetPoint::Node(n) => {
                            let a = net.arc(*arc);
                            let mut v = Vec::new();
                            if a.from == *n {
                                v.push(zero());
                            }
                            if a.to == *n {
                                v.push(a.length.clone());
                            }
                            v
                        }
                        _ => Vec::new(),
                    };
                    for off in offsets {
                        if &off < lo || &off > hi {
                            continue;
                        }
                        let t = if from_off <= to_off {
                            t0 + (&off - from_off)
                        } else {
                            t0 + (from_off - &off)
                        };
                        set.insert(Interval::point(t));
                    }
                }
            }
        }
        Ok(set)
    }
}

fn shift_segment(s: &Segment, by: &Ratio) -> Segment {
    match s {
        Segment::Move {
            arc,
            from_off,
            to_off,
            t0,
            t1,
        } => Segment::Move {
            arc: *arc,
            from_off: from_off.clone(),
            to_off: to_off.clone(),
            t0: t0 + by,
            t1: t1 + by,
        },
        Segment::Pause { at, t0, t1 } => Segment::Pause {
            at: at.clone(),
            t0: t0 + by,
            t1: t1 + by,
        },
    }
}

/// Builds a PatrolPath by pausing and traversing whole arcs.
pub struct PathBuilder<'a> {
    net: &'a MetricNetwork,
    start: NetPoint,
    at: NetPoint,
    now: Ratio,
    segments: Vec<Segment>,
}

impl<'a> PathBuilder<'a> {
    pub fn new(net: &'a MetricNetwork, start: NetPoint) -> Result<Self> {
        let start = net.canonical(&start)?;
        Ok(PathBuilder {
            net,
            at: start.clone(),
            start,
            now: zero(),
            segments: Vec::new(),
        })
    }

    pub fn pause_until(&mut self, t: Ratio) -> Result<()> {
        if t < self.now {
            return Err(Error::InvalidParameter("pause into the past".into()));
        }
        if t > self.now {
            self.segments.push(Segment::Pause {
                at: self.at.clone(),
                t0: self.now.clone(),
                t1: t.clone(),
            });
            self.now = t;
        }
        Ok(())
    }

    pub fn traverse(&mut self, arc: ArcIx, fwd: bool) -> Result<()> {
        let a = self.net.arc(arc);
        let (entry, exit) = if fwd { (a.from, a.to) } else { (a.to, a.from) };
        if self.at != NetPoint::Node(entry) {
            return Err(Error::InvalidParameter(format!(
                "not at node {} to traverse arc {}",
                self.net.node(entry).id,
                a.id
            )));
        }
        let (from_off, to_off) = if fwd {
            (zero(), a.length.clone())
        } else {
            (a.length.clone(), zero())
        };
        let t1 = &self.now + &a.length;
        self.segments.push(Segment::Move {
            arc,
            from_off,
            to_off,
            t0: self.now.clone(),
            t1: t1.clone(),
        });
        self.now = t1;
        self.at = NetPoint::Node(exit);
        Ok(())
    }

    pub fn finish(self) -> PatrolPath {
        PatrolPath {
            start: self.start,
            segments: self.segments,
            end: self.now,
        }
    }
}

/// Length of the image of the path over [a, b], optionally intersected with
/// a region. Image, not trace: retraced ground counts once.
pub fn covered_length(
    net: &MetricNetwork,
    path: &PatrolPath,
    a: &Ratio,
    b: &Ratio,
    region: Option<&Region>,
) -> Ratio {
    let mut per_arc: Vec<IntervalSet> = vec![IntervalSet::new(); net.arc_count()];
    for s in &path.segments {
        if let Segment::Move {
            arc,
            from_off,
            to_off,
            t0,
            t1,
        } = s
        {
            let lo_t = a.clone().max(t0.clone());
            let hi_t = b.clone().min(t1.clone());
            if lo_t > hi_t {
                continue;
            }
            let off_at = |t: &Ratio| -> Ratio {
                if to_off >= from_off {
                    from_off + (t - t0)
                } else {
                    from_off - (t - t0)
                }
            };
            let (o1, o2) = (off_at(&lo_t), off_at(&hi_t));
            per_arc[*arc].insert(Interval::new(o1.clone().min(o2.clone()), o1.max(o2)));
        }
    }
    match region {
        None => per_arc.iter().fold(zero(), |acc, s| acc + s.measure()),
        Some(r) => {
            let mut total = zero();
            for (arc, lo, hi) in &r.intervals {
                total += per_arc[*arc]
                    .intersect_interval(&Interval::new(lo.clone(), hi.clone()))
                    .measure();
            }
            total
        }
    }
}

/// Exact interception probability of a pure patrol path against a mixed
/// attack. For an unnormalized attack this is the raw weighted total.
pub fn intercept_pure_patrol(
    net: &MetricNetwork,
    path: &PatrolPath,
    attack: &MixedAttack,
) -> Result<Ratio> {
    if path.end < attack.horizon() {
        return Err(Error::InvalidParameter(format!(
            "path ends at {} before the attack horizon {}",
            crate::ratio::ratio_string(&path.end),
            crate::ratio::ratio_string(&attack.horizon())
        )));
    }
    let alpha = &attack.alpha;
    let mut total = zero();
    for c in &attack.components {
        let p = match (&c.spatial, &c.temporal) {
            (Spatial::Atom(x), temporal) => {
                // tau intercepts iff some visit meets [tau, tau+alpha]:
                // tau in the alpha-dilation of the visit set.
                let visits = path.visit_set(net, x)?;
                let mut dilated = IntervalSet::new();
                for iv in visits.intervals() {
                    dilated.insert(Interval::new(&iv.lo - alpha, iv.hi.clone()));
                }
                dilated
                    .intervals()
                    .iter()
                    .fold(zero(), |acc, iv| acc + temporal.probability_in(&iv.lo, &iv.hi))
            }
            (Spatial::UniformRegion(r), Temporal::Atom(tau)) => {
                covered_length(net, path, tau, &(tau + alpha), Some(r)) / r.measure()
            }
            (Spatial::UniformRegion(_), _) => {
                return Err(Error::InvalidParameter(
                    "region attacks with non-atomic start times are not supported".into(),
                ))
            }
        };
        total += &c.weight * p;
    }
    Ok(total)
}

/// The Delta-measure set Y of Theorem 2 for one (x, tau) pure attack:
/// phases Delta at which some of the m offset patrollers intercepts.
pub fn interception_phases(
    net: &MetricNetwork,
    patrol: &MixedPatrol,
    x: &NetPoint,
    tau: &Ratio,
    alpha: &Ratio,
) -> Result<CircularSet> {
    let period = patrol.tour.period().clone();
    let visits = patrol.tour.visit_intervals(net, x)?;
    let mut y = CircularSet::new(period.clone());
    for i in 0..patrol.m {
        let shift = tau + rat(i as i64) * &period / rat(patrol.m as i64);
        for iv in &visits {
            y.insert(&iv.lo - &shift - alpha, &iv.hi - &shift);
        }
    }
    Ok(y)
}

/// Exact interception probability of a randomized periodic patrol (uniform
/// phase, m offset patrollers) against the pure attack (x, tau).
pub fn intercept_mixed_patrol(
    net: &MetricNetwork,
    patrol: &MixedPatrol,
    x: &NetPoint,
    tau: &Ratio,
    alpha: &Ratio,
) -> Result<Ratio> {
    let y = interception_phases(net, patrol, x, tau, alpha)?;
    Ok(y.measure() / patrol.tour.period())
}

/// The section 6.1 counter-patrol on the 6-1-1 star for alpha >= 8: hold
/// node 2, sweep the short arcs, then commit to the long arc and wait.
pub fn counter_patrol_611(net: &MetricNetwork, alpha: &Ratio) -> Result<PatrolPath> {
    if alpha < &rat(8) {
        return Err(Error::InvalidParameter(
            "counter-patrol requires alpha >= 8".into(),
        ));
    }
    let c1 = net.arc_by_id("c1")?;
    let c2 = net.arc_by_id("c2")?;
    let c9 = net.arc_by_id("c9")?;
    let n2 = NetPoint::Node(net.node_by_id("2")?);
    let mut b = PathBuilder::new(net, n2)?;
    b.pause_until(alpha - rat(1))?;
    b.traverse(c2, false)?;
    b.traverse(c1, true)?;
    b.traverse(c1, false)?;
    b.traverse(c2, true)?;
    b.traverse(c2, false)?;
    b.traverse(c9, true)?;
    b.pause_until(rat(2) * alpha + rat(2))?;
    Ok(b.finish())
}

// ---------------------------------------------------------------------------
// Monte Carlo cross-checks

fn approx_ratio(x: f64) -> Ratio {
    Ratio::from_f64(x).unwrap_or_else(zero)
}

/// Empirical interception frequency of a pure path against sampled attacks.
pub fn monte_carlo_pure(
    net: &MetricNetwork,
    path: &PatrolPath,
    attack: &MixedAttack,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = &attack.alpha;
    let total_weight = to_f64(&attack.total_weight());
    let mut hits = 0usize;
    for _ in 0..n {
        let mut pick = rng.gen::<f64>() * total_weight;
        let mut chosen = &attack.components[0];
        for c in &attack.components {
            pick -= to_f64(&c.weight);
            chosen = c;
            if pick <= 0.0 {
                break;
            }
        }
        let x = match &chosen.spatial {
            Spatial::Atom(p) => p.clone(),
            Spatial::UniformRegion(r) => {
                let mut u = rng.gen::<f64>() * to_f64(&r.measure());
                let mut pt = None;
                for (arc, lo, hi) in &r.intervals {
                    let len = to_f64(&(hi - lo));
                    if u <= len {
                        pt = Some(NetPoint::on(*arc, lo + approx_ratio(u)));
                        break;
                    }
                    u -= len;
                }
                pt.unwrap_or(NetPoint::Node(0))
            }
        };
        let tau = approx_ratio(chosen.temporal.sample_from(rng.gen::<f64>()));
        let visits = path.visit_set(net, &x)?;
        let hit = visits
            .intervals()
            .iter()
            .any(|iv| iv.hi >= tau && iv.lo <= &tau + alpha);
        if hit {
            hits += 1;
        }
    }
    // Report in the attack's own (possibly unnormalized) measure.
    Ok(hits as f64 / n as f64 * total_weight)
}

/// Empirical interception frequency of a randomized periodic patrol against
/// one pure attack, sampling the phase Delta.
pub fn monte_carlo_mixed(
    net: &MetricNetwork,
    patrol: &MixedPatrol,
    x: &NetPoint,
    tau: &Ratio,
    alpha: &Ratio,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = interception_phases(net, patrol, x, tau, alpha)?;
    let period = to_f64(patrol.tour.period());
    let mut hits = 0usize;
    for _ in 0..n {
        let delta = approx_ratio(rng.gen::<f64>() * period);
        if y.contains(&delta) {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}
