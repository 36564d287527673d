//! Tour constructions: tree CPTs, paired-passage Eulerian tours, the
//! double-cover tour S2, the leaf-pause variant, and exact visit-separation
//! analysis used to certify interception guarantees.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::network::{ArcIx, MetricNetwork, NetPoint, NodeIx, Passage};
use crate::ratio::{parse_ratio, rat, ratio_string, rem_euclid, zero, Ratio};

/// One leg of a tour: a unit-speed traversal of (part of) an arc, or a pause.
/// Offsets are measured from the arc's `from` endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Move {
        arc: ArcIx,
        from_off: Ratio,
        to_off: Ratio,
        t0: Ratio,
        t1: Ratio,
    },
    Pause {
        at: NetPoint,
        t0: Ratio,
        t1: Ratio,
    },
}

impl Segment {
    pub fn t0(&self) -> &Ratio {
        match self {
            Segment::Move { t0, .. } | Segment::Pause { t0, .. } => t0,
        }
    }

    pub fn t1(&self) -> &Ratio {
        match self {
            Segment::Move { t1, .. } | Segment::Pause { t1, .. } => t1,
        }
    }
}

/// A closed unit-speed path of period L, represented as a segment list
/// starting and ending at the same point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedTour {
    start: NetPoint,
    segments: Vec<Segment>,
    period: Ratio,
}

impl TimedTour {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn period(&self) -> &Ratio {
        &self.period
    }

    pub fn start(&self) -> &NetPoint {
        &self.start
    }

    /// How many times each arc is traversed (partial traversals count by
    /// covered fraction; full traversals add 1).
    pub fn arc_cover_counts(&self, net: &MetricNetwork) -> Vec<Ratio> {
        let mut counts = vec![zero(); net.arc_count()];
        for s in &self.segments {
            if let Segment::Move {
                arc,
                from_off,
                to_off,
                ..
            } = s
            {
                let covered = if to_off >= from_off {
                    to_off - from_off
                } else {
                    from_off - to_off
                };
                counts[*arc] += covered / &net.arc(*arc).length;
            }
        }
        counts
    }

    /// Position at time t (reduced mod the period).
    pub fn position_at(&self, net: &MetricNetwork, t: &Ratio) -> NetPoint {
        let t = rem_euclid(t, &self.period);
        for s in &self.segments {
            if &t < s.t0() || &t > s.t1() {
                continue;
            }
            return match s {
                Segment::Pause { at, .. } => at.clone(),
                Segment::Move {
                    arc,
                    from_off,
                    to_off,
                    t0,
                    ..
                } => {
                    let elapsed = &t - t0;
                    let off = if to_off >= from_off {
                        from_off + elapsed
                    } else {
                        from_off - elapsed
                    };
                    net.canonical(&NetPoint::on(*arc, off)).unwrap()
                }
            };
        }
        self.start.clone()
    }

    /// Visit times of a point within one period, as closed intervals
    /// (degenerate for instantaneous passes), normalized to [0, L).
    pub fn visit_intervals(&self, net: &MetricNetwork, p: &NetPoint) -> Result<Vec<Interval>> {
        let p = net.canonical(p)?;
        let mut set = crate::interval::IntervalSet::new();
        let mut push = |lo: Ratio, hi: Ratio| {
            // A degenerate visit at exactly t = L is the time-0 visit.
            if lo == hi && lo == self.period {
                set.insert(Interval::point(zero()));
            } else {
                set.insert(Interval::new(lo, hi));
            }
        };
        for s in &self.segments {
            match s {
                Segment::Pause { at, t0, t1 } => {
                    if net.canonical(at)? == p {
                        push(t0.clone(), t1.clone());
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
                    let offsets_here: Vec<Ratio> = match &p {
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
                    for off in offsets_here {
                        if &off < lo || &off > hi {
                            continue;
                        }
                        let t = if from_off <= to_off {
                            t0 + (&off - from_off)
                        } else {
                            t0 + (from_off - &off)
                        };
                        push(t.clone(), t);
                    }
                }
            }
        }
        Ok(set.intervals().to_vec())
    }

    pub fn to_doc(&self, net: &MetricNetwork) -> TourDoc {
        let mut breakpoints = Vec::new();
        let mut traversals = Vec::new();
        let point_doc = |p: &NetPoint| -> PointDoc {
            match p {
                NetPoint::Node(n) => PointDoc::Node {
                    node: net.node(*n).id.clone(),
                },
                NetPoint::On { arc, offset } => PointDoc::On {
                    arc: net.arc(*arc).id.clone(),
                    offset: ratio_string(offset),
                },
            }
        };
        breakpoints.push(BreakpointDoc {
            t: ratio_string(&zero()),
            at: point_doc(&self.start),
        });
        for s in &self.segments {
            match s {
                Segment::Pause { at, t1, .. } => breakpoints.push(BreakpointDoc {
                    t: ratio_string(t1),
                    at: point_doc(at),
                }),
                Segment::Move {
                    arc,
                    from_off,
                    to_off,
                    t1,
                    ..
                } => {
                    let a = net.arc(*arc);
                    let fwd = to_off >= from_off;
                    let full = (from_off == &zero() && to_off == &a.length)
                        || (to_off == &zero() && from_off == &a.length);
                    traversals.push(TraversalDoc {
                        arc: a.id.clone(),
                        dir: if fwd { "fwd" } else { "bwd" }.into(),
                        from: (!full).then(|| ratio_string(from_off)),
                        to: (!full).then(|| ratio_string(to_off)),
                    });
                    let end = net
                        .canonical(&NetPoint::on(*arc, to_off.clone()))
                        .unwrap();
                    breakpoints.push(BreakpointDoc {
                        t: ratio_string(t1),
                        at: point_doc(&end),
                    });
                }
            }
        }
        TourDoc {
            period: ratio_string(&self.period),
            breakpoints,
            traversals,
        }
    }

    pub fn from_doc(net: &MetricNetwork, doc: &TourDoc) -> Result<TimedTour> {
        if doc.breakpoints.is_empty() {
            return Err(Error::Parse("tour has no breakpoints".into()));
        }
        let point = |pd: &PointDoc| -> Result<NetPoint> {
            Ok(match pd {
                PointDoc::Node { node } => NetPoint::Node(net.node_by_id(node)?),
                PointDoc::On { arc, offset } => {
                    net.canonical(&NetPoint::on(net.arc_by_id(arc)?, parse_ratio(offset)?))?
                }
            })
        };
        let start = point(&doc.breakpoints[0].at)?;
        let mut b = TourBuilder::new(net, start)?;
        let mut trav = doc.traversals.iter();
        for w in doc.breakpoints.windows(2) {
            let t_next = parse_ratio(&w[1].t)?;
            let next = point(&w[1].at)?;
            if next == b.pos {
                let dt = &t_next - &b.t;
                if dt <= zero() {
                    return Err(Error::Parse("non-increasing breakpoint times".into()));
                }
                b.pause(dt);
            } else {
                let td = trav
                    .next()
                    .ok_or_else(|| Error::Parse("missing traversal for move".into()))?;
                let arc = net.arc_by_id(&td.arc)?;
                let a = net.arc(arc);
                let fwd = match td.dir.as_str() {
                    "fwd" => true,
                    "bwd" => false,
                    other => return Err(Error::Parse(format!("bad direction {other:?}"))),
                };
                let from_off = match &td.from {
                    Some(s) => parse_ratio(s)?,
                    None => a.end_offset(if fwd { 0 } else { 1 }),
                };
                let to_off = match &td.to {
                    Some(s) => parse_ratio(s)?,
                    None => a.end_offset(if fwd { 1 } else { 0 }),
                };
                b.move_partial(arc, from_off, to_off)?;
                if b.pos != next {
                    return Err(Error::Parse(
                        "traversal does not reach the next breakpoint".into(),
                    ));
                }
                if b.t != t_next {
                    return Err(Error::Parse("breakpoint time mismatch".into()));
                }
            }
        }
        let tour = b.finish()?;
        if ratio_string(&tour.period) != doc.period {
            let declared = parse_ratio(&doc.period)?;
            if declared != tour.period {
                return Err(Error::Parse("declared period mismatch".into()));
            }
        }
        Ok(tour)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TourDoc {
    pub period: String,
    pub breakpoints: Vec<BreakpointDoc>,
    pub traversals: Vec<TraversalDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BreakpointDoc {
    pub t: String,
    pub at: PointDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointDoc {
    Node { node: String },
    On { arc: String, offset: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraversalDoc {
    pub arc: String,
    pub dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
}

/// Incremental tour assembly with unit-speed bookkeeping.
pub struct TourBuilder<'a> {
    net: &'a MetricNetwork,
    start: NetPoint,
    pos: NetPoint,
    t: Ratio,
    segments: Vec<Segment>,
}

impl<'a> TourBuilder<'a> {
    pub fn new(net: &'a MetricNetwork, start: NetPoint) -> Result<Self> {
        let start = net.canonical(&start)?;
        Ok(TourBuilder {
            net,
            pos: start.clone(),
            start,
            t: zero(),
            segments: Vec::new(),
        })
    }

    pub fn position(&self) -> &NetPoint {
        &self.pos
    }

    /// Traverses the whole arc; `fwd` runs from `from` to `to`.
    pub fn move_full(&mut self, arc: ArcIx, fwd: bool) -> Result<()> {
        let len = self.net.arc(arc).length.clone();
        if fwd {
            self.move_partial(arc, zero(), len)
        } else {
            self.move_partial(arc, len, zero())
        }
    }

    pub fn move_partial(&mut self, arc: ArcIx, from_off: Ratio, to_off: Ratio) -> Result<()> {
        let here = self.net.canonical(&NetPoint::on(arc, from_off.clone()))?;
        if here != self.pos {
            // Loops reach both "endpoints" at the same node, so canonical
            // equality covers every legal case.
            return Err(Error::TourStuck(format!(
                "move on arc {} does not start at current position",
                self.net.arc(arc).id
            )));
        }
        if from_off == to_off {
            return Err(Error::TourStuck("zero-length move".into()));
        }
        let dist = if to_off >= from_off {
            &to_off - &from_off
        } else {
            &from_off - &to_off
        };
        let t1 = &self.t + dist;
        self.pos = self.net.canonical(&NetPoint::on(arc, to_off.clone()))?;
        self.segments.push(Segment::Move {
            arc,
            from_off,
            to_off,
            t0: self.t.clone(),
            t1: t1.clone(),
        });
        self.t = t1;
        Ok(())
    }

    pub fn pause(&mut self, duration: Ratio) {
        assert!(duration > zero());
        let t1 = &self.t + duration;
        self.segments.push(Segment::Pause {
            at: self.pos.clone(),
            t0: self.t.clone(),
            t1: t1.clone(),
        });
        self.t = t1;
    }

    pub fn finish(self) -> Result<TimedTour> {
        if self.pos != self.start || self.t <= zero() {
            return Err(Error::TourNotClosed);
        }
        Ok(TimedTour {
            start: self.start,
            segments: self.segments,
            period: self.t,
        })
    }
}

/// Depth-first closed patrol of a tree: every arc twice, once per direction,
/// period exactly 2 mu. Children are taken in arc-id order.
pub fn tree_cpt(net: &MetricNetwork, start: &NetPoint) -> Result<TimedTour> {
    tree_cpt_ordered(net, start, |ps| ps.to_vec())
}

/// Like [`tree_cpt`] but with a caller-chosen child order at every node; the
/// reorder callback receives the non-parent passages in arc-id order.
pub fn tree_cpt_ordered(
    net: &MetricNetwork,
    start: &NetPoint,
    reorder: impl Fn(&[Passage]) -> Vec<Passage> + Copy,
) -> Result<TimedTour> {
    if !net.is_tree() {
        return Err(Error::NotATree);
    }
    let start = net.canonical(start)?;
    match &start {
        NetPoint::Node(n) => {
            let mut b = TourBuilder::new(net, start.clone())?;
            cpt_from(net, &mut b, *n, None, reorder)?;
            b.finish()
        }
        NetPoint::On { arc, offset } => {
            let a = net.arc(*arc);
            let (from, to, len) = (a.from, a.to, a.length.clone());
            let mut b = TourBuilder::new(net, start.clone())?;
            b.move_partial(*arc, offset.clone(), len)?;
            cpt_from(net, &mut b, to, Some(*arc), reorder)?;
            b.move_full(*arc, false)?;
            cpt_from(net, &mut b, from, Some(*arc), reorder)?;
            b.move_partial(*arc, zero(), offset.clone())?;
            b.finish()
        }
    }
}

fn cpt_from(
    net: &MetricNetwork,
    b: &mut TourBuilder,
    node: NodeIx,
    parent_arc: Option<ArcIx>,
    reorder: impl Fn(&[Passage]) -> Vec<Passage> + Copy,
) -> Result<()> {
    let children: Vec<Passage> = net
        .passages(node)
        .iter()
        .copied()
        .filter(|p| Some(p.arc) != parent_arc)
        .collect();
    for p in reorder(&children) {
        let child = net.arc(p.arc).endpoint(1 - p.end);
        b.move_full(p.arc, p.end == 0)?;
        cpt_from(net, b, child, Some(p.arc), reorder)?;
        b.move_full(p.arc, p.end != 0)?;
    }
    Ok(())
}

/// Fixed-point-free involution on passages, each pair sharing its node.
#[derive(Debug, Clone)]
pub struct PassagePairing {
    map: HashMap<Passage, Passage>,
}

impl PassagePairing {
    pub fn new(net: &MetricNetwork, pairs: &[(Passage, Passage)]) -> Result<Self> {
        let mut map = HashMap::new();
        for &(p, q) in pairs {
            if p == q {
                return Err(Error::InvalidPairing("passage paired with itself".into()));
            }
            let node_of = |p: Passage| net.arc(p.arc).endpoint(p.end);
            if node_of(p) != node_of(q) {
                return Err(Error::InvalidPairing(
                    "paired passages at different nodes".into(),
                ));
            }
            if map.insert(p, q).is_some() || map.insert(q, p).is_some() {
                return Err(Error::InvalidPairing("passage paired twice".into()));
            }
        }
        let all: usize = (0..net.node_count()).map(|n| net.degree(n)).sum();
        if map.len() != all {
            return Err(Error::InvalidPairing(format!(
                "{} of {} passages paired",
                map.len(),
                all
            )));
        }
        Ok(PassagePairing { map })
    }

    pub fn pair(&self, p: Passage) -> Passage {
        self.map[&p]
    }
}

/// Builds one *-circuit by the five construction rules, marking arcs
/// traversed. Returns the departure-passage sequence.
fn star_circuit(
    net: &MetricNetwork,
    pairing: &PassagePairing,
    traversed: &mut Vec<bool>,
    start: NodeIx,
    first: Option<Passage>,
) -> Result<Vec<Passage>> {
    let mut circuit: Vec<Passage> = Vec::new();
    let mut node;
    let first_departure: Passage;

    match first {
        Some(p) => first_departure = p,
        None => {
            let p = net
                .passages(start)
                .iter()
                .copied()
                .find(|p| !traversed[p.arc])
                .ok_or_else(|| Error::TourStuck("no untraversed passage at start".into()))?;
            first_departure = p;
        }
    }
    let p_prime = pairing.pair(first_departure);

    let mut depart = first_departure;
    loop {
        if traversed[depart.arc] {
            return Err(Error::TourStuck("departing via traversed arc".into()));
        }
        traversed[depart.arc] = true;
        circuit.push(depart);
        node = net.arc(depart.arc).endpoint(1 - depart.end);
        let arrived = Passage {
            arc: depart.arc,
            end: 1 - depart.end,
        };

        let untraversed: Vec<Passage> = net
            .passages(node)
            .iter()
            .copied()
            .filter(|p| !traversed[p.arc])
            .collect();
        if untraversed.is_empty() {
            break;
        }
        let banned = pairing.pair(arrived);
        let candidates: Vec<Passage> = untraversed
            .iter()
            .copied()
            .filter(|&p| p != banned)
            .collect();

        // Rule 3: three untraversed passages with exactly one mutual pair.
        if untraversed.len() == 3 {
            let mut mutual: Vec<Passage> = Vec::new();
            for &p in &untraversed {
                if untraversed.contains(&pairing.pair(p)) {
                    mutual.push(p);
                }
            }
            if mutual.len() == 2 {
                let pick = mutual.iter().copied().min().unwrap();
                if pick == banned || pairing.pair(pick) != *mutual.iter().max().unwrap() {
                    // A mutual pair member equal to `banned` cannot happen
                    // (its pair would be untraversed = arriving passage).
                    return Err(Error::TourStuck("rule 3 conflict".into()));
                }
                depart = pick;
                continue;
            }
        }
        // Rule 4: back at the circuit start with two untraversed passages.
        if node == start && untraversed.len() == 2 && candidates.contains(&p_prime) {
            depart = p_prime;
            continue;
        }
        depart = candidates
            .first()
            .copied()
            .ok_or_else(|| Error::TourStuck("no admissible passage".into()))?;
    }
    if node != start {
        return Err(Error::TourNotClosed);
    }
    Ok(circuit)
}

/// Eulerian tour never entering and leaving a node via paired passages,
/// built circuit-by-circuit per the five rules plus the junction rules.
/// Returns the departure-passage sequence from `start`.
pub fn paired_euler_passages(
    net: &MetricNetwork,
    pairing: &PassagePairing,
    start: NodeIx,
) -> Result<Vec<Passage>> {
    if !net.is_eulerian() {
        return Err(Error::NotEulerian);
    }
    let mut traversed = vec![false; net.arc_count()];
    let mut tour = star_circuit(net, pairing, &mut traversed, start, None)?;

    while traversed.iter().any(|t| !t) {
        // Node sequence along the tour; find the first visit of a node with
        // untraversed passages.
        let nodes: Vec<NodeIx> = std::iter::once(start)
            .chain(tour.iter().map(|p| net.arc(p.arc).endpoint(1 - p.end)))
            .collect();
        let mut splice_at = None;
        'outer: for (i, &z) in nodes.iter().enumerate().take(tour.len()) {
            if net.passages(z).iter().any(|p| !traversed[p.arc]) {
                splice_at = Some((i, z));
                break 'outer;
            }
        }
        let (i, z) = splice_at.ok_or(Error::Disconnected)?;
        let a = tour[i]; // departure at this visit
        let b = if i == 0 {
            Passage {
                arc: tour[tour.len() - 1].arc,
                end: 1 - tour[tour.len() - 1].end,
            }
        } else {
            Passage {
                arc: tour[i - 1].arc,
                end: 1 - tour[i - 1].end,
            }
        };
        let a_pair = pairing.pair(a);
        let b_pair = pairing.pair(b);
        let d = if !traversed[a_pair.arc] {
            a_pair
        } else {
            net.passages(z)
                .iter()
                .copied()
                .find(|p| !traversed[p.arc] && *p != b_pair)
                .ok_or_else(|| Error::TourStuck("no admissible junction passage".into()))?
        };
        let sub = star_circuit(net, pairing, &mut traversed, z, Some(d))?;
        let e = Passage {
            arc: sub[sub.len() - 1].arc,
            end: 1 - sub[sub.len() - 1].end,
        };
        if pairing.pair(e) == a {
            return Err(Error::TourStuck("junction closing violates pairing".into()));
        }
        tour.splice(i..i, sub);
    }

    // Condition (*): scan every (arrive, leave) transition, including the
    // wrap-around at the start node.
    let m = tour.len();
    for i in 0..m {
        let arrive = Passage {
            arc: tour[i].arc,
            end: 1 - tour[i].end,
        };
        let leave = tour[(i + 1) % m];
        if pairing.pair(arrive) == leave {
            return Err(Error::TourStuck("condition (*) violated".into()));
        }
    }
    Ok(tour)
}

pub fn paired_euler_tour(
    net: &MetricNetwork,
    pairing: &PassagePairing,
    start: NodeIx,
) -> Result<TimedTour> {
    let passages = paired_euler_passages(net, pairing, start)?;
    let mut b = TourBuilder::new(net, NetPoint::Node(start))?;
    for p in passages {
        b.move_full(p.arc, p.end == 0)?;
    }
    b.finish()
}

/// The doubled network of Theorem 5's proof: every arc copied, leaf arcs
/// replaced by loops of double length at their inner node, with the pairing
/// that matches copies of the same original passage.
pub struct Doubled {
    pub net: MetricNetwork,
    pub pairing: PassagePairing,
    /// Per doubled arc: the original arc and whether it is a leaf loop.
    pub origin: Vec<(ArcIx, bool)>,
}

pub fn double_network(net: &MetricNetwork) -> Result<Doubled> {
    use crate::network::{ArcDoc, NetworkDoc, NodeDoc};

    let leaf: Vec<bool> = {
        let mut v = vec![false; net.node_count()];
        for &(_, n) in &net.leaf_arcs() {
            v[n] = true;
        }
        v
    };
    let mut doc = NetworkDoc {
        nodes: Vec::new(),
        arcs: Vec::new(),
    };
    for (i, n) in net.nodes().iter().enumerate() {
        if !leaf[i] {
            doc.nodes.push(NodeDoc {
                id: n.id.clone(),
                artificial: n.artificial,
            });
        }
    }
    if doc.nodes.is_empty() {
        return Err(Error::InvalidParameter(
            "network is a single arc; doubling removes every node".into(),
        ));
    }
    let mut origin = Vec::new();
    let mut names: Vec<(String, Option<String>)> = Vec::new();
    for (i, a) in net.arcs().iter().enumerate() {
        let from_leaf = leaf[a.from];
        let to_leaf = leaf[a.to];
        if from_leaf && to_leaf {
            return Err(Error::InvalidParameter(
                "network is a single arc; doubling removes every node".into(),
            ));
        }
        if from_leaf || to_leaf {
            let inner = if from_leaf { a.to } else { a.from };
            doc.arcs.push(ArcDoc {
                id: a.id.clone(),
                from: net.node(inner).id.clone(),
                to: net.node(inner).id.clone(),
                length: ratio_string(&(&a.length * rat(2))),
            });
            origin.push((i, true));
            names.push((a.id.clone(), None));
        } else {
            let copy = format!("{}'", a.id);
            for id in [&a.id, &copy] {
                doc.arcs.push(ArcDoc {
                    id: id.clone(),
                    from: net.node(a.from).id.clone(),
                    to: net.node(a.to).id.clone(),
                    length: ratio_string(&a.length),
                });
                origin.push((i, false));
            }
            names.push((a.id.clone(), Some(copy)));
        }
    }
    let dnet = MetricNetwork::from_doc(&doc)?;

    let mut pairs = Vec::new();
    for (base, copy) in &names {
        let b = dnet.arc_by_id(base)?;
        match copy {
            None => {
                // Leaf loop: its two ends both stand for the single original
                // passage at the inner node.
                pairs.push((Passage { arc: b, end: 0 }, Passage { arc: b, end: 1 }));
            }
            Some(c) => {
                let c = dnet.arc_by_id(c)?;
                pairs.push((Passage { arc: b, end: 0 }, Passage { arc: c, end: 0 }));
                pairs.push((Passage { arc: b, end: 1 }, Passage { arc: c, end: 1 }));
            }
        }
    }
    let pairing = PassagePairing::new(&dnet, &pairs)?;
    Ok(Doubled {
        net: dnet,
        pairing,
        origin,
    })
}

/// The tour S2: covers every arc twice with no consecutive reversal except at
/// leaf arcs, period exactly 2 mu (Theorem 5).
pub fn double_cover_tour(net: &MetricNetwork) -> Result<TimedTour> {
    // A single arc has no doubled form without degree-2 nodes; its only
    // double cover is out-and-back.
    if net.arc_count() == 1 && !net.arc(0).is_loop() {
        let mut b = TourBuilder::new(net, NetPoint::Node(net.arc(0).from))?;
        b.move_full(0, true)?;
        b.move_full(0, false)?;
        return b.finish();
    }
    let doubled = double_network(net)?;
    let start_id = doubled
        .net
        .nodes()
        .iter()
        .map(|n| n.id.clone())
        .min()
        .unwrap();
    let start = doubled.net.node_by_id(&start_id)?;
    let passages = paired_euler_passages(&doubled.net, &doubled.pairing, start)?;

    let orig_start = net.node_by_id(&start_id)?;
    let mut b = TourBuilder::new(net, NetPoint::Node(orig_start))?;
    for p in passages {
        let (orig_arc, is_leaf_loop) = doubled.origin[p.arc];
        if is_leaf_loop {
            let a = net.arc(orig_arc);
            let inner_is_from = net.degree(a.to) == 1;
            b.move_full(orig_arc, inner_is_from)?;
            b.move_full(orig_arc, !inner_is_from)?;
        } else {
            b.move_full(orig_arc, p.end == 0)?;
        }
    }
    b.finish()
}

/// Double cover for a two-node network with an odd number of parallel arcs:
/// traverse the arcs twice around in ascending length order, which alternates
/// the direction of each arc between the two rounds.
pub fn alternating_double_cover(net: &MetricNetwork) -> Result<TimedTour> {
    if net.node_count() != 2 || net.arcs().iter().any(|a| a.is_loop()) {
        return Err(Error::InvalidParameter(
            "alternating cover needs two nodes joined by parallel arcs".into(),
        ));
    }
    if net.arc_count() % 2 == 0 {
        return Err(Error::InvalidParameter(
            "alternating cover needs an odd number of arcs".into(),
        ));
    }
    let mut order: Vec<ArcIx> = (0..net.arc_count()).collect();
    order.sort_by(|&i, &j| {
        (&net.arc(i).length, &net.arc(i).id).cmp(&(&net.arc(j).length, &net.arc(j).id))
    });
    let start = if net.node(0).id <= net.node(1).id { 0 } else { 1 };
    let mut b = TourBuilder::new(net, NetPoint::Node(start))?;
    let mut here = start;
    for _round in 0..2 {
        for &arc in &order {
            let fwd = net.arc(arc).from == here;
            b.move_full(arc, fwd)?;
            here = net.arc(arc).endpoint(if fwd { 1 } else { 0 });
        }
    }
    b.finish()
}

/// S2 with a pause of length alpha inserted at every leaf-node visit; period
/// 2 mu + l alpha.
pub fn leaf_pause_tour(net: &MetricNetwork, alpha: &Ratio) -> Result<TimedTour> {
    if alpha <= &zero() {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let base = double_cover_tour(net)?;
    let leaves: Vec<NodeIx> = net.leaf_arcs().iter().map(|&(_, n)| n).collect();
    let mut b = TourBuilder::new(net, base.start().clone())?;
    for s in base.segments() {
        match s {
            Segment::Pause { t0, t1, .. } => b.pause(t1 - t0),
            Segment::Move {
                arc,
                from_off,
                to_off,
                ..
            } => {
                b.move_partial(*arc, from_off.clone(), to_off.clone())?;
                if let NetPoint::Node(n) = b.position() {
                    if leaves.contains(n) {
                        b.pause(alpha.clone());
                    }
                }
            }
        }
    }
    b.finish()
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub k: usize,
    /// Largest alpha0 such that every point has k visit times pairwise
    /// separated by at least alpha0 mod L. Exact.
    pub alpha0: Ratio,
    pub witness: NetPoint,
    pub period: Ratio,
}

/// Best achievable min pairwise circular gap using k of the given times.
fn sep_k(times: &[Ratio], k: usize, period: &Ratio) -> Option<Ratio> {
    if times.len() < k {
        return None;
    }
    if k <= 1 {
        return Some(period.clone());
    }
    let mut norm: Vec<Ratio> = times.iter().map(|t| rem_euclid(t, period)).collect();
    norm.sort();
    norm.dedup();
    if norm.len() < k {
        return Some(zero());
    }
    // Choose k of the sorted circular times maximizing the min consecutive
    // gap. Point counts are tiny (a handful of visits), so enumerate.
    let mut best: Option<Ratio> = None;
    let mut pick = vec![0usize; k];
    fn rec(
        norm: &[Ratio],
        period: &Ratio,
        k: usize,
        start: usize,
        pick: &mut Vec<usize>,
        depth: usize,
        best: &mut Option<Ratio>,
    ) {
        let n = norm.len();
        if depth == k {
            let mut min_gap: Option<Ratio> = None;
            for i in 0..k {
                let a = &norm[pick[i]];
                let b = &norm[pick[(i + 1) % k]];
                let gap = if i + 1 == k {
                    a.clone() // placeholder, replaced below
                } else {
                    b - a
                };
                let gap = if i + 1 == k {
                    period - a + b
                } else {
                    gap
                };
                min_gap = Some(match min_gap.take() {
                    Some(m) => m.min(gap),
                    None => gap,
                });
            }
            let m = min_gap.unwrap();
            if best.as_ref().map_or(true, |b| &m > b) {
                *best = Some(m);
            }
            return;
        }
        for i in start..n {
            pick[depth] = i;
            rec(norm, period, k, i + 1, pick, depth + 1, best);
        }
    }
    rec(&norm, period, k, 0, &mut pick, 0, &mut best);
    best
}

/// Visit times of a point collected for separation purposes: instantaneous
/// passes contribute their time; pauses contribute both endpoints.
fn separation_times(tour: &TimedTour, net: &MetricNetwork, p: &NetPoint) -> Result<Vec<Ratio>> {
    let mut times = Vec::new();
    for iv in tour.visit_intervals(net, p)? {
        times.push(iv.lo.clone());
        if iv.hi != iv.lo {
            times.push(iv.hi);
        }
    }
    Ok(times)
}

/// Exact minimum k-visit separation over all points of the network, using the
/// fact that between tour breakpoints, visit times vary affinely (slope +-1)
/// along each arc. An optional sample overlay re-checks the result at evenly
/// spaced points.
pub fn visit_separation(
    net: &MetricNetwork,
    tour: &TimedTour,
    k: usize,
    sample_density: Option<&Ratio>,
) -> Result<SeparationReport> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let period = tour.period().clone();
    let mut best: Option<(Ratio, NetPoint)> = None;
    let mut consider = |sep: Option<Ratio>, witness: NetPoint| -> Result<()> {
        let sep = sep.ok_or_else(|| Error::TooFewVisits {
            k,
            witness: net.point_label(&witness),
        })?;
        if best.as_ref().map_or(true, |(b, _)| &sep < b) {
            best = Some((sep, witness));
        }
        Ok(())
    };

    // Nodes and pause points: explicit visit-time lists.
    let mut special: Vec<NetPoint> = (0..net.node_count()).map(NetPoint::Node).collect();
    for s in tour.segments() {
        if let Segment::Pause { at, .. } = s {
            let at = net.canonical(at)?;
            if !special.contains(&at) {
                special.push(at);
            }
        }
    }
    for p in &special {
        let times = separation_times(tour, net, p)?;
        consider(sep_k(&times, k, &period), p.clone())?;
    }

    // Arc interiors: per cell of constant covering-segment set, minimize the
    // piecewise-linear separation over candidate offsets.
    for arc in 0..net.arc_count() {
        let len = net.arc(arc).length.clone();
        // Covering moves as (lo, hi, time-at-lo, slope), slope +1 for fwd.
        let mut covers: Vec<(Ratio, Ratio, Ratio, i32)> = Vec::new();
        let mut cuts: Vec<Ratio> = vec![zero(), len.clone()];
        for s in tour.segments() {
            match s {
                Segment::Move {
                    arc: a,
                    from_off,
                    to_off,
                    t0,
                    ..
                } if *a == arc => {
                    let (lo, hi, tlo, slope) = if from_off <= to_off {
                        (from_off.clone(), to_off.clone(), t0.clone(), 1)
                    } else {
                        (
                            to_off.clone(),
                            from_off.clone(),
                            t0 + (from_off - to_off),
                            -1,
                        )
                    };
                    cuts.push(lo.clone());
                    cuts.push(hi.clone());
                    covers.push((lo, hi, tlo, slope));
                }
                Segment::Pause {
                    at: NetPoint::On { arc: a, offset },
                    ..
                } if *a == arc => {
                    cuts.push(offset.clone());
                }
                _ => {}
            }
        }
        cuts.sort();
        cuts.dedup();
        for w in cuts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let active: Vec<&(Ratio, Ratio, Ratio, i32)> = covers
                .iter()
                .filter(|(lo, hi, _, _)| lo <= a && hi >= b)
                .collect();
            // Visit time at offset u: f(u) = tlo + slope*(u - lo).
            let eval = |u: &Ratio| -> Vec<Ratio> {
                active
                    .iter()
                    .map(|(lo, _, tlo, slope)| {
                        if *slope > 0 {
                            tlo + (u - lo)
                        } else {
                            tlo - (u - lo)
                        }
                    })
                    .collect()
            };
            if active.len() < k {
                let mid = (a + b) / rat(2);
                consider(None, NetPoint::on(arc, mid))?;
                continue;
            }
            // Candidate offsets where the separation profile can kink:
            // pairwise differences hitting multiples of L or L/2, and sums or
            // differences of two pairwise differences hitting multiples of L.
            let mut cands: Vec<Ratio> = vec![a.clone(), b.clone()];
            let n = active.len();
            let mut diffs: Vec<(Ratio, i32)> = Vec::new(); // (value at a, slope)
            let at_a = eval(a);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = &at_a[i] - &at_a[j];
                    let s = active[i].3 - active[j].3;
                    diffs.push((v, s));
                }
            }
            let add_roots = |v0: &Ratio, s: i32, target: &Ratio, cands: &mut Vec<Ratio>| {
                // Solve v0 + s*(u - a) = target for u in (a, b).
                if s == 0 {
                    return;
                }
                let u = a + (target - v0) / rat(s as i64);
                if &u > a && &u < b {
                    cands.push(u);
                }
            };
            let half = &period / rat(2);
            for (v0, s) in &diffs {
                for m in -2..=2 {
                    let t1 = &period * rat(m);
                    add_roots(v0, *s, &t1, &mut cands);
                    add_roots(v0, *s, &(&t1 + &half), &mut cands);
                }
            }
            for i in 0..diffs.len() {
                for j in (i + 1)..diffs.len() {
                    for sign in [1, -1] {
                        let v0 = &diffs[i].0 + rat(sign) * &diffs[j].0;
                        let s = diffs[i].1 + sign as i32 * diffs[j].1;
                        for m in -4..=4 {
                            add_roots(&v0, s, &(&period * rat(m)), &mut cands);
                        }
                    }
                }
            }
            cands.sort();
            cands.dedup();
            // Midpoints between consecutive candidates cover the open cells
            // of the refined partition.
            let mids: Vec<Ratio> = cands
                .windows(2)
                .map(|w| (&w[0] + &w[1]) / rat(2))
                .collect();
            for u in cands.iter().chain(mids.iter()) {
                // Cell-restricted visit times, even at cell endpoints: the
                // separation profile is continuous on the closed cell, so its
                // minimum there equals the infimum over the open cell. A node
                // at a cell endpoint may have extra visits, but those are
                // scored separately in the special-point pass; the infimum
                // over nearby regular points is what constrains alpha0.
                let times = eval(u);
                let point = net.canonical(&NetPoint::on(arc, u.clone()))?;
                consider(sep_k(&times, k, &period), point)?;
            }
        }
    }

    let (alpha0, witness) = best.ok_or_else(|| Error::InvalidParameter("empty tour".into()))?;

    if let Some(density) = sample_density {
        // Sanity overlay: sampled separations can never fall below the exact
        // minimum.
        for arc in 0..net.arc_count() {
            let len = net.arc(arc).length.clone();
            let mut u = zero();
            while u <= len {
                let p = net.canonical(&NetPoint::on(arc, u.clone()))?;
                let times = separation_times(tour, net, &p)?;
                if let Some(s) = sep_k(&times, k, &period) {
                    debug_assert!(s >= alpha0);
                    if s < alpha0 {
                        return Err(Error::SeparationNotMet {
                            required: ratio_string(&alpha0),
                            achieved: ratio_string(&s),
                        });
                    }
                }
                u += density.clone();
            }
        }
    }

    Ok(SeparationReport {
        k,
        alpha0,
        witness,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ratio::frac;

    #[test]
    fn cpt_of_single_arc() {
        let net = MetricNetwork::from_json(
            r#"{"nodes":[{"id":"A"},{"id":"B"}],
                "arcs":[{"id":"a","from":"A","to":"B","length":"3"}]}"#,
        )
        .unwrap();
        let tour = tree_cpt(&net, &NetPoint::Node(0)).unwrap();
        assert_eq!(*tour.period(), rat(6));
        assert_eq!(tour.segments().len(), 2);
    }

    #[test]
    fn cpt_star_and_dog() {
        let star = fixtures::network("star-2166").unwrap();
        let tour = tree_cpt(&star, &NetPoint::Node(star.node_by_id("A").unwrap())).unwrap();
        assert_eq!(*tour.period(), rat(30));
        for c in tour.arc_cover_counts(&star) {
            assert_eq!(c, rat(2));
        }

        let dog = fixtures::network("dog-tree").unwrap();
        let tour = tree_cpt(&dog, &NetPoint::Node(dog.node_by_id("B").unwrap())).unwrap();
        assert_eq!(*tour.period(), rat(18));
        for c in tour.arc_cover_counts(&dog) {
            assert_eq!(c, rat(2));
        }
    }

    #[test]
    fn cpt_from_regular_point() {
        let dog = fixtures::network("dog-tree").unwrap();
        let arc = dog.arc_by_id("spine-ab").unwrap();
        let start = NetPoint::on(arc, rat(1));
        let tour = tree_cpt(&dog, &start).unwrap();
        assert_eq!(*tour.period(), rat(18));
        for c in tour.arc_cover_counts(&dog) {
            assert_eq!(c, rat(2));
        }
        assert_eq!(tour.position_at(&dog, &rat(0)), start);
    }

    #[test]
    fn cpt_rejects_non_tree() {
        let k4 = fixtures::network("k4").unwrap();
        assert!(matches!(
            tree_cpt(&k4, &NetPoint::Node(0)),
            Err(Error::NotATree)
        ));
    }

    fn no_consecutive_reversal(net: &MetricNetwork, tour: &TimedTour) {
        let moves: Vec<(ArcIx, bool)> = tour
            .segments()
            .iter()
            .filter_map(|s| match s {
                Segment::Move {
                    arc,
                    from_off,
                    to_off,
                    ..
                } => Some((*arc, to_off > from_off)),
                _ => None,
            })
            .collect();
        let leaves: Vec<ArcIx> = net.leaf_arcs().iter().map(|&(a, _)| a).collect();
        for i in 0..moves.len() {
            let (a1, d1) = moves[i];
            let (a2, d2) = moves[(i + 1) % moves.len()];
            if a1 == a2 && d1 != d2 && !leaves.contains(&a1) {
                panic!("consecutive reversal on non-leaf arc {}", net.arc(a1).id);
            }
        }
    }

    #[test]
    fn double_cover_k4() {
        let k4 = fixtures::network("k4").unwrap();
        let tour = double_cover_tour(&k4).unwrap();
        assert_eq!(*tour.period(), rat(12));
        for c in tour.arc_cover_counts(&k4) {
            assert_eq!(c, rat(2));
        }
        no_consecutive_reversal(&k4, &tour);
        let sep = visit_separation(&k4, &tour, 2, Some(&frac(1, 4))).unwrap();
        assert!(sep.alpha0 >= rat(3), "alpha0 = {}", sep.alpha0);
    }

    #[test]
    fn double_cover_circle_same_direction() {
        let circle = fixtures::network("circle").unwrap();
        let tour = double_cover_tour(&circle).unwrap();
        assert_eq!(*tour.period(), rat(2));
        let dirs: Vec<bool> = tour
            .segments()
            .iter()
            .filter_map(|s| match s {
                Segment::Move {
                    from_off, to_off, ..
                } => Some(to_off > from_off),
                _ => None,
            })
            .collect();
        assert_eq!(dirs.len(), 2);
        assert_eq!(dirs[0], dirs[1]);
    }

    #[test]
    fn double_cover_line_and_single_arc() {
        let line = fixtures::network("line").unwrap();
        let tour = double_cover_tour(&line).unwrap();
        assert_eq!(*tour.period(), rat(2));
        for c in tour.arc_cover_counts(&line) {
            assert_eq!(c, rat(2));
        }

        let single = MetricNetwork::from_json(
            r#"{"nodes":[{"id":"A"},{"id":"B"}],
                "arcs":[{"id":"a","from":"A","to":"B","length":"1"}]}"#,
        )
        .unwrap();
        let tour = double_cover_tour(&single).unwrap();
        assert_eq!(*tour.period(), rat(2));
    }

    #[test]
    fn double_cover_trees_and_q5() {
        for name in ["dog-tree", "star-2166", "star-611", "fig8-tree", "q5", "three-arc"] {
            let net = fixtures::network(name).unwrap();
            let tour = double_cover_tour(&net).unwrap();
            assert_eq!(tour.period(), &(net.total_length() * rat(2)), "{name}");
            for c in tour.arc_cover_counts(&net) {
                assert_eq!(c, rat(2), "{name}");
            }
            no_consecutive_reversal(&net, &tour);
        }
    }

    #[test]
    fn alternating_cover_q5_separation() {
        let q5 = fixtures::network("q5").unwrap();
        let tour = alternating_double_cover(&q5).unwrap();
        assert_eq!(*tour.period(), rat(30));
        for c in tour.arc_cover_counts(&q5) {
            assert_eq!(c, rat(2));
        }
        let sep = visit_separation(&q5, &tour, 2, Some(&frac(1, 2))).unwrap();
        assert_eq!(sep.alpha0, rat(10));
    }

    #[test]
    fn leaf_pause_periods() {
        let star = fixtures::network("star-2166").unwrap();
        let tour = leaf_pause_tour(&star, &rat(6)).unwrap();
        assert_eq!(*tour.period(), rat(54));

        let dog = fixtures::network("dog-tree").unwrap();
        let tour = leaf_pause_tour(&dog, &rat(2)).unwrap();
        assert_eq!(*tour.period(), rat(28));

        let circle = fixtures::network("circle").unwrap();
        let tour = leaf_pause_tour(&circle, &rat(1)).unwrap();
        assert_eq!(*tour.period(), rat(2));
    }

    #[test]
    fn circle_single_traversal_separation() {
        let circle = fixtures::network("circle").unwrap();
        let mut b = TourBuilder::new(&circle, NetPoint::Node(0)).unwrap();
        b.move_full(0, true).unwrap();
        let tour = b.finish().unwrap();
        let sep = visit_separation(&circle, &tour, 1, Some(&frac(1, 8))).unwrap();
        assert_eq!(sep.alpha0, rat(1));
    }

    #[test]
    fn separation_detects_missing_visits() {
        let dog = fixtures::network("dog-tree").unwrap();
        let tour = tree_cpt(&dog, &NetPoint::Node(0)).unwrap();
        assert!(matches!(
            visit_separation(&dog, &tour, 3, None),
            Err(Error::TooFewVisits { .. })
        ));
    }

    #[test]
    fn tour_roundtrip_serialization() {
        let star = fixtures::network("star-611").unwrap();
        let tour = leaf_pause_tour(&star, &rat(4)).unwrap();
        let doc = tour.to_doc(&star);
        let json = serde_json::to_string(&doc).unwrap();
        let doc2: TourDoc = serde_json::from_str(&json).unwrap();
        let back = TimedTour::from_doc(&star, &doc2).unwrap();
        assert_eq!(back, tour);
    }

    #[test]
    fn visit_intervals_leaf_pause() {
        let star = fixtures::network("star-611").unwrap();
        let alpha = rat(6);
        let tour = leaf_pause_tour(&star, &alpha).unwrap();
        let leaf = NetPoint::Node(star.node_by_id("9").unwrap());
        let ivs = tour.visit_intervals(&star, &leaf).unwrap();
        assert_eq!(ivs.len(), 1);
        assert_eq!(ivs[0].length(), alpha);
    }
}
