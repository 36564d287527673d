//! Networks as metric/measure spaces: weighted multigraphs whose points
//! include arc interiors, with exact rational lengths throughout.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::{parse_ratio, rat, ratio_string, zero, Ratio};

pub type NodeIx = usize;
pub type ArcIx = usize;

#[derive(Debug, Clone)]
pub struct Node {
    pub id: String,
    pub artificial: bool,
}

#[derive(Debug, Clone)]
pub struct Arc {
    pub id: String,
    pub from: NodeIx,
    pub to: NodeIx,
    pub length: Ratio,
}

impl Arc {
    pub fn is_loop(&self) -> bool {
        self.from == self.to
    }

    pub fn endpoint(&self, end: u8) -> NodeIx {
        if end == 0 {
            self.from
        } else {
            self.to
        }
    }

    /// Offset of the given end measured from the `from` endpoint.
    pub fn end_offset(&self, end: u8) -> Ratio {
        if end == 0 {
            zero()
        } else {
            self.length.clone()
        }
    }
}

/// A passage is a (node, incident arc) pair; loops contribute two distinct
/// passage slots at their node, distinguished by `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Passage {
    pub arc: ArcIx,
    pub end: u8,
}

/// A location on the network: a node, or a regular point given by an arc and
/// an offset from the arc's `from` endpoint. Offsets 0 and `length`
/// canonicalize to the node form, so equality is decidable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NetPoint {
    Node(NodeIx),
    On { arc: ArcIx, offset: Ratio },
}

impl NetPoint {
    pub fn on(arc: ArcIx, offset: Ratio) -> Self {
        NetPoint::On { arc, offset }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub nodes: Vec<NodeDoc>,
    pub arcs: Vec<ArcDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    #[serde(default)]
    pub artificial: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArcDoc {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: String,
}

/// Immutable after construction; all invariants checked up front.
#[derive(Debug, Clone)]
pub struct MetricNetwork {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    adjacency: Vec<Vec<Passage>>,
    node_dist: Vec<Vec<Ratio>>,
    total: Ratio,
}

impl MetricNetwork {
    pub fn from_doc(doc: &NetworkDoc) -> Result<Self> {
        let mut node_ix = HashMap::new();
        let mut nodes = Vec::new();
        for n in &doc.nodes {
            if node_ix.insert(n.id.clone(), nodes.len()).is_some() {
                return Err(Error::DuplicateId(n.id.clone()));
            }
            nodes.push(Node {
                id: n.id.clone(),
                artificial: n.artificial,
            });
        }
        let mut arc_ids = HashSet::new();
        let mut arcs = Vec::new();
        for a in &doc.arcs {
            if !arc_ids.insert(a.id.clone()) {
                return Err(Error::DuplicateId(a.id.clone()));
            }
            let from = *node_ix
                .get(&a.from)
                .ok_or_else(|| Error::UnknownNode(a.from.clone()))?;
            let to = *node_ix
                .get(&a.to)
                .ok_or_else(|| Error::UnknownNode(a.to.clone()))?;
            let length = parse_ratio(&a.length)?;
            if length <= zero() {
                return Err(Error::NonPositiveLength(a.id.clone()));
            }
            arcs.push(Arc {
                id: a.id.clone(),
                from,
                to,
                length,
            });
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, a) in arcs.iter().enumerate() {
            adjacency[a.from].push(Passage { arc: i, end: 0 });
            adjacency[a.to].push(Passage { arc: i, end: 1 });
        }
        for slots in &mut adjacency {
            slots.sort_by(|p, q| {
                (&arcs[p.arc].id, p.end).cmp(&(&arcs[q.arc].id, q.end))
            });
        }

        // Degree-2 nodes are rejected unless artificial, or unless the two
        // passages are the two ends of a single loop (the circle network).
        for (i, slots) in adjacency.iter().enumerate() {
            if slots.len() == 2 && !nodes[i].artificial {
                let same_loop = slots[0].arc == slots[1].arc && arcs[slots[0].arc].is_loop();
                if !same_loop {
                    return Err(Error::IllegalDegreeTwo(nodes[i].id.clone()));
                }
            }
        }

        let total = arcs.iter().fold(zero(), |acc, a| acc + &a.length);

        let mut net = MetricNetwork {
            nodes,
            arcs,
            adjacency,
            node_dist: Vec::new(),
            total,
        };
        net.check_connected()?;
        net.node_dist = (0..net.nodes.len()).map(|s| net.dijkstra(s, None)).collect();
        Ok(net)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: NetworkDoc =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn to_doc(&self) -> NetworkDoc {
        NetworkDoc {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.clone(),
                    artificial: n.artificial,
                })
                .collect(),
            arcs: self
                .arcs
                .iter()
                .map(|a| ArcDoc {
                    id: a.id.clone(),
                    from: self.nodes[a.from].id.clone(),
                    to: self.nodes[a.to].id.clone(),
                    length: ratio_string(&a.length),
                })
                .collect(),
        }
    }

    fn check_connected(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Parse("network has no nodes".into()));
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for p in &self.adjacency[n] {
                let other = self.arcs[p.arc].endpoint(1 - p.end);
                if !seen[other] {
                    seen[other] = true;
                    stack.push(other);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    /// Single-source shortest path over nodes; `skip_arc` excludes one arc,
    /// which is how per-arc circuit lengths are computed for the girth.
    fn dijkstra(&self, source: NodeIx, skip_arc: Option<ArcIx>) -> Vec<Ratio> {
        let inf = &self.total * rat(4) + rat(1);
        let mut dist = vec![inf.clone(); self.nodes.len()];
        dist[source] = zero();
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((zero(), source)));
        while let Some(Reverse((d, n))) = heap.pop() {
            if d > dist[n] {
                continue;
            }
            for p in &self.adjacency[n] {
                if Some(p.arc) == skip_arc {
                    continue;
                }
                let arc = &self.arcs[p.arc];
                let other = arc.endpoint(1 - p.end);
                let nd = &d + &arc.length;
                if nd < dist[other] {
                    dist[other] = nd.clone();
                    heap.push(Reverse((nd, other)));
                }
            }
        }
        dist
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, ix: ArcIx) -> &Arc {
        &self.arcs[ix]
    }

    pub fn node(&self, ix: NodeIx) -> &Node {
        &self.nodes[ix]
    }

    pub fn passages(&self, node: NodeIx) -> &[Passage] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeIx) -> usize {
        self.adjacency[node].len()
    }

    pub fn node_by_id(&self, id: &str) -> Result<NodeIx> {
        self.nodes
            .iter()
            .position(|n| n.id == id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn arc_by_id(&self, id: &str) -> Result<ArcIx> {
        self.arcs
            .iter()
            .position(|a| a.id == id)
            .ok_or_else(|| Error::UnknownArc(id.to_string()))
    }

    /// Total length mu = lambda(Q).
    pub fn total_length(&self) -> &Ratio {
        &self.total
    }

    pub fn is_eulerian(&self) -> bool {
        (0..self.nodes.len()).all(|n| self.degree(n) % 2 == 0)
    }

    pub fn is_tree(&self) -> bool {
        // Connectivity already holds, so tree == |arcs| = |nodes| - 1.
        self.arcs.len() + 1 == self.nodes.len()
    }

    /// All degree-1 nodes with their unique incident arcs.
    pub fn leaf_arcs(&self) -> Vec<(ArcIx, NodeIx)> {
        (0..self.nodes.len())
            .filter(|&n| self.degree(n) == 1)
            .map(|n| (self.adjacency[n][0].arc, n))
            .collect()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_arcs().len()
    }

    /// Minimum circuit length; `None` means no circuits (infinite girth).
    /// Loops count as circuits of their own length.
    pub fn girth(&self) -> Option<Ratio> {
        let inf = &self.total * rat(4) + rat(1);
        let mut best: Option<Ratio> = None;
        for (i, a) in self.arcs.iter().enumerate() {
            let candidate = if a.is_loop() {
                a.length.clone()
            } else {
                let dist = self.dijkstra(a.from, Some(i));
                let d = dist[a.to].clone();
                if d >= inf {
                    continue;
                }
                d + &a.length
            };
            best = Some(match best {
                Some(b) => b.min(candidate),
                None => candidate,
            });
        }
        best
    }

    /// min(girth, twice the shortest leaf arc length); equals the girth when
    /// there are no leaf arcs.
    pub fn generalized_girth(&self) -> Option<Ratio> {
        let leaf_min = self
            .leaf_arcs()
            .iter()
            .map(|&(a, _)| &self.arcs[a].length * rat(2))
            .min();
        match (self.girth(), leaf_min) {
            (Some(g), Some(l)) => Some(g.min(l)),
            (Some(g), None) => Some(g),
            (None, Some(l)) => Some(l),
            (None, None) => None,
        }
    }

    /// Normalizes offsets 0 and `length` to the node form.
    pub fn canonical(&self, p: &NetPoint) -> Result<NetPoint> {
        match p {
            NetPoint::Node(n) => {
                if *n < self.nodes.len() {
                    Ok(p.clone())
                } else {
                    Err(Error::PointOffNetwork(format!("node index {n}")))
                }
            }
            NetPoint::On { arc, offset } => {
                if *arc >= self.arcs.len() {
                    return Err(Error::PointOffNetwork(format!("arc index {arc}")));
                }
                let a = &self.arcs[*arc];
                if offset < &zero() || offset > &a.length {
                    return Err(Error::OffsetOutOfBounds(a.id.clone()));
                }
                if offset == &zero() {
                    Ok(NetPoint::Node(a.from))
                } else if offset == &a.length {
                    Ok(NetPoint::Node(a.to))
                } else {
                    Ok(p.clone())
                }
            }
        }
    }

    pub fn node_distance(&self, a: NodeIx, b: NodeIx) -> Ratio {
        self.node_dist[a][b].clone()
    }

    /// Shortest-path metric d(p, q).
    pub fn distance(&self, p: &NetPoint, q: &NetPoint) -> Result<Ratio> {
        let p = self.canonical(p)?;
        let q = self.canonical(q)?;
        Ok(match (&p, &q) {
            (NetPoint::Node(a), NetPoint::Node(b)) => self.node_distance(*a, *b),
            (NetPoint::Node(n), NetPoint::On { arc, offset })
            | (NetPoint::On { arc, offset }, NetPoint::Node(n)) => {
                let a = &self.arcs[*arc];
                let via_from = self.node_distance(*n, a.from) + offset;
                let via_to = self.node_distance(*n, a.to) + (&a.length - offset);
                via_from.min(via_to)
            }
            (
                NetPoint::On {
                    arc: a1,
                    offset: o1,
                },
                NetPoint::On {
                    arc: a2,
                    offset: o2,
                },
            ) => {
                let arc1 = &self.arcs[*a1];
                let arc2 = &self.arcs[*a2];
                let mut best: Option<Ratio> = None;
                if a1 == a2 {
                    let direct = if o1 >= o2 { o1 - o2 } else { o2 - o1 };
                    best = Some(direct);
                }
                for (e1, c1) in [(arc1.from, o1.clone()), (arc1.to, &arc1.length - o1)] {
                    for (e2, c2) in [(arc2.from, o2.clone()), (arc2.to, &arc2.length - o2)] {
                        let d = &c1 + self.node_distance(e1, e2) + &c2;
                        best = Some(match best {
                            Some(b) => b.min(d),
                            None => d,
                        });
                    }
                }
                best.unwrap()
            }
        })
    }

    pub fn point_label(&self, p: &NetPoint) -> String {
        match p {
            NetPoint::Node(n) => self.nodes[*n].id.clone(),
            NetPoint::On { arc, offset } => {
                format!("{}@{}", self.arcs[*arc].id, ratio_string(offset))
            }
        }
    }

    /// Quotient network merging points p and q into a single node; arcs are
    /// split at regular points as needed. Total length is preserved, and all
    /// pairwise distances weakly decrease.
    pub fn identify_points(&self, p: &NetPoint, q: &NetPoint) -> Result<MetricNetwork> {
        let p = self.canonical(p)?;
        let q = self.canonical(q)?;
        if p == q {
            return Err(Error::IdentifyEqualPoints);
        }
        let merged_id = format!("{}~{}", self.point_label(&p), self.point_label(&q));

        // Split requests per arc, sorted by offset.
        let mut splits: HashMap<ArcIx, Vec<Ratio>> = HashMap::new();
        for pt in [&p, &q] {
            if let NetPoint::On { arc, offset } = pt {
                splits.entry(*arc).or_default().push(offset.clone());
            }
        }
        for offs in splits.values_mut() {
            offs.sort();
        }

        let split_node_id = |arc: &Arc, offset: &Ratio| -> String {
            format!("{}@{}", arc.id, ratio_string(offset))
        };
        let maps_to_merged = |pt: &NetPoint, arc_ix: ArcIx, offset: &Ratio| -> bool {
            matches!(pt, NetPoint::On { arc, offset: o } if *arc == arc_ix && o == offset)
        };

        let mut doc = NetworkDoc {
            nodes: Vec::new(),
            arcs: Vec::new(),
        };
        // The merged node may end up with degree 2 (identifying the endpoints
        // of a single arc), so it is flagged artificial.
        doc.nodes.push(NodeDoc {
            id: merged_id.clone(),
            artificial: true,
        });
        for (ix, n) in self.nodes.iter().enumerate() {
            let is_merged = p == NetPoint::Node(ix) || q == NetPoint::Node(ix);
            if !is_merged {
                doc.nodes.push(NodeDoc {
                    id: n.id.clone(),
                    artificial: n.artificial,
                });
            }
        }
        let node_name = |ix: NodeIx| -> String {
            if p == NetPoint::Node(ix) || q == NetPoint::Node(ix) {
                merged_id.clone()
            } else {
                self.nodes[ix].id.clone()
            }
        };

        for (ix, arc) in self.arcs.iter().enumerate() {
            match splits.get(&ix) {
                None => doc.arcs.push(ArcDoc {
                    id: arc.id.clone(),
                    from: node_name(arc.from),
                    to: node_name(arc.to),
                    length: ratio_string(&arc.length),
                }),
                Some(offs) => {
                    // Intermediate split nodes: merged if the split point is
                    // p or q (it always is here, by construction).
                    let mut cuts: Vec<(Ratio, String)> = Vec::new();
                    cuts.push((zero(), node_name(arc.from)));
                    for off in offs {
                        let name = if maps_to_merged(&p, ix, off) || maps_to_merged(&q, ix, off)
                        {
                            merged_id.clone()
                        } else {
                            split_node_id(arc, off)
                        };
                        cuts.push((off.clone(), name));
                    }
                    cuts.push((arc.length.clone(), node_name(arc.to)));
                    for (k, win) in cuts.windows(2).enumerate() {
                        doc.arcs.push(ArcDoc {
                            id: format!("{}:{}", arc.id, k),
                            from: win[0].1.clone(),
                            to: win[1].1.clone(),
                            length: ratio_string(&(&win[1].0 - &win[0].0)),
                        });
                    }
                }
            }
        }
        MetricNetwork::from_doc(&doc)
    }
}

impl fmt::Display for MetricNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "network({} nodes, {} arcs, mu={})",
            self.nodes.len(),
            self.arcs.len(),
            ratio_string(&self.total)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::frac;

    fn three_arc_net() -> MetricNetwork {
        MetricNetwork::from_json(
            r#"{"nodes":[{"id":"A"},{"id":"B"}],
                "arcs":[{"id":"a","from":"A","to":"B","length":"1"},
                        {"id":"b","from":"A","to":"B","length":"1"},
                        {"id":"c","from":"A","to":"B","length":"1"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn three_arc_basics() {
        let net = three_arc_net();
        assert_eq!(*net.total_length(), rat(3));
        assert_eq!(net.girth(), Some(rat(2)));
        assert!(!net.is_eulerian());
        assert!(net.leaf_arcs().is_empty());
    }

    #[test]
    fn circle_loop_allowed() {
        let net = MetricNetwork::from_json(
            r#"{"nodes":[{"id":"A"}],
                "arcs":[{"id":"o","from":"A","to":"A","length":"1"}]}"#,
        )
        .unwrap();
        assert_eq!(*net.total_length(), rat(1));
        assert_eq!(net.girth(), Some(rat(1)));
        assert!(net.is_eulerian());
    }

    #[test]
    fn degree_two_rejected_without_flag() {
        let err = MetricNetwork::from_json(
            r#"{"nodes":[{"id":"A"},{"id":"B"},{"id":"C"}],
                "arcs":[{"id":"a","from":"A","to":"B","length":"1"},
                        {"id":"b","from":"B","to":"C","length":"1"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::IllegalDegreeTwo(_)));

        let ok = MetricNetwork::from_json(
            r#"{"nodes":[{"id":"A"},{"id":"B","artificial":true},{"id":"C"}],
                "arcs":[{"id":"a","from":"A","to":"B","length":"0.5"},
                        {"id":"b","from":"B","to":"C","length":"0.5"}]}"#,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            MetricNetwork::from_json(
                r#"{"nodes":[{"id":"A"},{"id":"B"}],
                    "arcs":[{"id":"a","from":"A","to":"B","length":"0"}]}"#
            ),
            Err(Error::NonPositiveLength(_))
        ));
        assert!(matches!(
            MetricNetwork::from_json(
                r#"{"nodes":[{"id":"A"},{"id":"B"},{"id":"C"},{"id":"D"}],
                    "arcs":[{"id":"a","from":"A","to":"B","length":"1"},
                            {"id":"b","from":"C","to":"D","length":"1"}]}"#
            ),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn distances() {
        let net = three_arc_net();
        let a = net.node_by_id("A").unwrap();
        let b = net.node_by_id("B").unwrap();
        assert_eq!(net.node_distance(a, b), rat(1));
        let arc_a = net.arc_by_id("a").unwrap();
        let arc_b = net.arc_by_id("b").unwrap();
        let p = NetPoint::on(arc_a, frac(1, 2));
        let q = NetPoint::on(arc_b, frac(1, 2));
        assert_eq!(net.distance(&p, &p).unwrap(), rat(0));
        assert_eq!(net.distance(&p, &q).unwrap(), rat(1));
        // Same arc, direct route.
        let r = NetPoint::on(arc_a, frac(1, 4));
        assert_eq!(net.distance(&p, &r).unwrap(), frac(1, 4));
    }

    #[test]
    fn canonicalization() {
        let net = three_arc_net();
        let arc_a = net.arc_by_id("a").unwrap();
        let at_zero = net.canonical(&NetPoint::on(arc_a, rat(0))).unwrap();
        assert_eq!(at_zero, NetPoint::Node(net.node_by_id("A").unwrap()));
        let at_len = net.canonical(&NetPoint::on(arc_a, rat(1))).unwrap();
        assert_eq!(at_len, NetPoint::Node(net.node_by_id("B").unwrap()));
        assert!(net.canonical(&NetPoint::on(arc_a, rat(2))).is_err());
    }

    #[test]
    fn identify_line_endpoints_gives_circle() {
        let line = MetricNetwork::from_json(
            r#"{"nodes":[{"id":"L"},{"id":"C","artificial":true},{"id":"R"}],
                "arcs":[{"id":"a","from":"L","to":"C","length":"0.5"},
                        {"id":"b","from":"C","to":"R","length":"0.5"}]}"#,
        )
        .unwrap();
        let l = NetPoint::Node(line.node_by_id("L").unwrap());
        let r = NetPoint::Node(line.node_by_id("R").unwrap());
        let circle = line.identify_points(&l, &r).unwrap();
        assert_eq!(*circle.total_length(), rat(1));
        assert!(circle.is_eulerian());
        assert_eq!(circle.girth(), Some(rat(1)));
    }

    #[test]
    fn identify_regular_points_preserves_length_and_shrinks_metric() {
        // Theta network: two nodes joined by three arcs of length 2.
        let net = MetricNetwork::from_json(
            r#"{"nodes":[{"id":"A"},{"id":"B"}],
                "arcs":[{"id":"a","from":"A","to":"B","length":"2"},
                        {"id":"b","from":"A","to":"B","length":"2"},
                        {"id":"c","from":"A","to":"B","length":"2"}]}"#,
        )
        .unwrap();
        let c = NetPoint::on(net.arc_by_id("a").unwrap(), rat(1));
        let d = NetPoint::on(net.arc_by_id("b").unwrap(), rat(1));
        let merged = net.identify_points(&c, &d).unwrap();
        assert_eq!(*merged.total_length(), rat(6));
        assert_eq!(merged.girth(), Some(rat(2)));
        // Distance between the old midpoints is now 0; spot-check shrinkage
        // between the original nodes.
        let a_old = NetPoint::Node(net.node_by_id("A").unwrap());
        let b_old = NetPoint::Node(net.node_by_id("B").unwrap());
        let a_new = NetPoint::Node(merged.node_by_id("A").unwrap());
        let b_new = NetPoint::Node(merged.node_by_id("B").unwrap());
        assert!(
            merged.distance(&a_new, &b_new).unwrap() <= net.distance(&a_old, &b_old).unwrap()
        );
        assert!(net.identify_points(&c, &c).is_err());
    }
}
