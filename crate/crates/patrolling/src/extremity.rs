//! The extremity set E of a tree: points whose removal leaves a component of
//! mass under alpha/2, its components, the Leaf Condition, and the
//! conjectured game value v*.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{ArcIx, MetricNetwork, NetPoint, NodeIx};
use crate::ratio::{one, rat, ratio_string, zero, Ratio};

/// One connected component E_j of the open set E: a maximal open offset
/// interval inside a single arc.
#[derive(Debug, Clone)]
pub struct EComponent {
    pub arc: ArcIx,
    pub lo: Ratio,
    pub hi: Ratio,
    /// Leaf node contained in the component's closure, when there is one.
    pub leaf: Option<NodeIx>,
}

impl EComponent {
    pub fn length(&self) -> Ratio {
        &self.hi - &self.lo
    }
}

/// A component of the closure E-bar: E components whose closures meet,
/// merged through shared nodes or touching interval endpoints.
#[derive(Debug, Clone)]
pub struct ClosureComponent {
    /// Indices into `ExtremityProfile::components`.
    pub members: Vec<usize>,
    /// Nodes contained in the closure.
    pub nodes: Vec<NodeIx>,
}

#[derive(Debug, Clone)]
pub struct ExtremityProfile {
    pub alpha: Ratio,
    /// Per arc: maximal open intervals of E, sorted, disjoint and
    /// non-touching (a shared endpoint separates two components).
    pub regions: Vec<Vec<(Ratio, Ratio)>>,
    pub components: Vec<EComponent>,
    pub closure_components: Vec<ClosureComponent>,
    pub lambda_e: Ratio,
    /// M = max_j e_j (zero when E is empty).
    pub m_max: Ratio,
    pub leaf_condition: bool,
    /// A point in the symmetric difference when the Leaf Condition fails.
    pub leaf_condition_witness: Option<NetPoint>,
    /// v* = alpha / (mu + lambda(E)), clamped to 1.
    pub v_star: Ratio,
}

impl ExtremityProfile {
    /// Closed complement intervals of E within each arc. Carries the full
    /// length mu - lambda(E).
    pub fn complement_regions(&self, net: &MetricNetwork) -> Vec<Vec<(Ratio, Ratio)>> {
        let mut out = Vec::with_capacity(net.arc_count());
        for (arc, ivs) in self.regions.iter().enumerate() {
            let len = net.arc(arc).length.clone();
            let mut rest = Vec::new();
            let mut cursor = zero();
            for (lo, hi) in ivs {
                if lo > &cursor {
                    rest.push((cursor.clone(), lo.clone()));
                }
                cursor = hi.clone();
            }
            if cursor < len {
                rest.push((cursor, len));
            }
            out.push(rest);
        }
        out
    }

    pub fn lambda_e_complement(&self, net: &MetricNetwork) -> Ratio {
        net.total_length() - &self.lambda_e
    }
}

/// Mass of the component containing `node` after deleting `arc`.
fn hang_mass(net: &MetricNetwork, node: NodeIx, skip_arc: ArcIx) -> Ratio {
    let mut total = zero();
    let mut seen = vec![false; net.node_count()];
    let mut stack = vec![node];
    seen[node] = true;
    while let Some(n) = stack.pop() {
        for p in net.passages(n) {
            if p.arc == skip_arc {
                continue;
            }
            let a = net.arc(p.arc);
            let other = a.endpoint(1 - p.end);
            if !seen[other] {
                seen[other] = true;
                total += &a.length;
                stack.push(other);
            }
        }
    }
    total
}

pub fn extremity_set(net: &MetricNetwork, alpha: &Ratio) -> Result<ExtremityProfile> {
    if !net.is_tree() {
        return Err(Error::NotATree);
    }
    if alpha <= &zero() {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let half = alpha / rat(2);
    let mu = net.total_length().clone();

    // Per arc: a regular point at offset t splits the tree into masses
    // hang(from) + t and hang(to) + (len - t); it is in E when either is
    // strictly under alpha/2.
    let mut regions: Vec<Vec<(Ratio, Ratio)>> = Vec::with_capacity(net.arc_count());
    for (i, a) in net.arcs().iter().enumerate() {
        let len = a.length.clone();
        let hang_from = hang_mass(net, a.from, i);
        let hang_to = hang_mass(net, a.to, i);
        // Near the from end: t < alpha/2 - hang_from.
        let near_from_hi = (&half - &hang_from).min(len.clone()).max(zero());
        // Near the to end: t > len - (alpha/2 - hang_to).
        let near_to_lo = (&len - (&half - &hang_to)).max(zero()).min(len.clone());
        let mut ivs = Vec::new();
        if near_from_hi > zero() && near_to_lo < len && near_to_lo < near_from_hi {
            // The two end regions overlap: the whole interior is E.
            ivs.push((zero(), len));
        } else {
            if near_from_hi > zero() {
                ivs.push((zero(), near_from_hi));
            }
            if near_to_lo < len {
                ivs.push((near_to_lo, len));
            }
        }
        regions.push(ivs);
    }

    let leaf_nodes: Vec<NodeIx> = net.leaf_arcs().iter().map(|&(_, n)| n).collect();
    let mut components = Vec::new();
    for (arc, ivs) in regions.iter().enumerate() {
        for (lo, hi) in ivs {
            let a = net.arc(arc);
            let mut leaf = None;
            if lo == &zero() && leaf_nodes.contains(&a.from) {
                leaf = Some(a.from);
            }
            if hi == &a.length && leaf_nodes.contains(&a.to) {
                leaf = Some(a.to);
            }
            components.push(EComponent {
                arc,
                lo: lo.clone(),
                hi: hi.clone(),
                leaf,
            });
        }
    }

    let lambda_e = components.iter().fold(zero(), |acc, c| acc + c.length());
    let m_max = components
        .iter()
        .map(|c| c.length())
        .max()
        .unwrap_or_else(zero);

    // Closure components via union-find over E components.
    let mut parent: Vec<usize> = (0..components.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let closure_nodes = |c: &EComponent| -> Vec<NodeIx> {
        let a = net.arc(c.arc);
        let mut v = Vec::new();
        if c.lo == zero() {
            v.push(a.from);
        }
        if c.hi == a.length {
            v.push(a.to);
        }
        v
    };
    for i in 0..components.len() {
        for j in (i + 1)..components.len() {
            let shared_node = closure_nodes(&components[i])
                .iter()
                .any(|n| closure_nodes(&components[j]).contains(n));
            let touching = components[i].arc == components[j].arc
                && (components[i].hi == components[j].lo
                    || components[j].hi == components[i].lo);
            if shared_node || touching {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut closure_components: Vec<ClosureComponent> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; components.len()];
    for i in 0..components.len() {
        let r = find(&mut parent, i);
        let slot = match root_of[r] {
            Some(s) => s,
            None => {
                closure_components.push(ClosureComponent {
                    members: Vec::new(),
                    nodes: Vec::new(),
                });
                root_of[r] = Some(closure_components.len() - 1);
                closure_components.len() - 1
            }
        };
        closure_components[slot].members.push(i);
        for n in closure_nodes(&components[i]) {
            if !closure_components[slot].nodes.contains(&n) {
                closure_components[slot].nodes.push(n);
            }
        }
    }

    // Leaf Condition: E is exactly the union over leaf arcs of the open
    // sub-arc within alpha/2 of the leaf node.
    let mut leaf_condition = true;
    let mut witness = None;
    for (arc, ivs) in regions.iter().enumerate() {
        let a = net.arc(arc);
        let mut expected: Vec<(Ratio, Ratio)> = Vec::new();
        if leaf_nodes.contains(&a.from) {
            expected.push((zero(), half.clone().min(a.length.clone())));
        }
        if leaf_nodes.contains(&a.to) {
            let lo = (&a.length - &half).max(zero());
            expected.push((lo, a.length.clone()));
        }
        // A short arc with two leaf ends can only be the single-arc network,
        // which the degree rule excludes; expected intervals never overlap.
        expected.sort_by(|x, y| x.0.cmp(&y.0));
        if *ivs != expected {
            leaf_condition = false;
            if witness.is_none() {
                witness = Some(symmetric_difference_point(arc, ivs, &expected));
            }
        }
    }

    let v_star = (alpha / (&mu + &lambda_e)).min(one());

    Ok(ExtremityProfile {
        alpha: alpha.clone(),
        regions,
        components,
        closure_components,
        lambda_e,
        m_max,
        leaf_condition,
        leaf_condition_witness: witness,
        v_star,
    })
}

/// Any point of (union(a) symmetric-difference union(b)), as a NetPoint.
fn symmetric_difference_point(
    arc: ArcIx,
    a: &[(Ratio, Ratio)],
    b: &[(Ratio, Ratio)],
) -> NetPoint {
    let in_set = |ivs: &[(Ratio, Ratio)], t: &Ratio| ivs.iter().any(|(lo, hi)| lo < t && t < hi);
    let mut cuts: Vec<Ratio> = Vec::new();
    for (lo, hi) in a.iter().chain(b.iter()) {
        cuts.push(lo.clone());
        cuts.push(hi.clone());
    }
    cuts.sort();
    cuts.dedup();
    for w in cuts.windows(2) {
        let mid = (&w[0] + &w[1]) / rat(2);
        if in_set(a, &mid) != in_set(b, &mid) {
            return NetPoint::on(arc, mid);
        }
    }
    // Differences at the outermost pieces.
    let mid = match (a.first(), b.first()) {
        (Some((lo, hi)), _) | (_, Some((lo, hi))) => (lo + hi) / rat(2),
        _ => zero(),
    };
    NetPoint::on(arc, mid)
}

/// Conjectured game value v* = alpha/(mu + lambda(E)), clamped to 1.
pub fn conjectured_value(net: &MetricNetwork, alpha: &Ratio) -> Result<Ratio> {
    Ok(extremity_set(net, alpha)?.v_star)
}

/// Serializable report for the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremityDoc {
    pub alpha: String,
    pub lambda_e: String,
    pub component_count: usize,
    pub closure_component_count: usize,
    pub leaf_condition: bool,
    pub v_star: String,
    pub regions: Vec<RegionDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionDoc {
    pub arc: String,
    pub intervals: Vec<[String; 2]>,
}

impl ExtremityProfile {
    pub fn to_doc(&self, net: &MetricNetwork) -> ExtremityDoc {
        ExtremityDoc {
            alpha: ratio_string(&self.alpha),
            lambda_e: ratio_string(&self.lambda_e),
            component_count: self.components.len(),
            closure_component_count: self.closure_components.len(),
            leaf_condition: self.leaf_condition,
            v_star: ratio_string(&self.v_star),
            regions: self
                .regions
                .iter()
                .enumerate()
                .filter(|(_, ivs)| !ivs.is_empty())
                .map(|(arc, ivs)| RegionDoc {
                    arc: net.arc(arc).id.clone(),
                    intervals: ivs
                        .iter()
                        .map(|(lo, hi)| [ratio_string(lo), ratio_string(hi)])
                        .collect(),
                })
                .collect(),
        }
    }
}
