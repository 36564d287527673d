//! Mixed attack strategies and their guaranteed interception caps: uniform,
//! independent, the E-attack, the 6-1-1 attack and the figure-8 tree attack.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremity::extremity_set;
use crate::network::{ArcIx, MetricNetwork, NetPoint};
use crate::ratio::{one, parse_ratio, rat, ratio_string, zero, Ratio};

/// A union of arc intervals with positive total length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub intervals: Vec<(ArcIx, Ratio, Ratio)>,
}

impl Region {
    pub fn measure(&self) -> Ratio {
        self.intervals
            .iter()
            .fold(zero(), |acc, (_, lo, hi)| acc + (hi - lo))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Spatial {
    Atom(NetPoint),
    UniformRegion(Region),
}

/// Distribution of the attack start time tau.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Temporal {
    Atom(Ratio),
    UniformInterval(Ratio, Ratio),
    /// Continuous cdf given by (y, F(y)) knots, nondecreasing from 0 to 1.
    PiecewiseLinearCdf(Vec<(Ratio, Ratio)>),
}

impl Temporal {
    pub fn validate(&self) -> Result<()> {
        match self {
            Temporal::Atom(_) => Ok(()),
            Temporal::UniformInterval(a, b) => {
                if a < b {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("empty time interval".into()))
                }
            }
            Temporal::PiecewiseLinearCdf(knots) => {
                if knots.len() < 2
                    || knots[0].1 != zero()
                    || knots[knots.len() - 1].1 != one()
                    || knots.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 > w[1].1)
                {
                    return Err(Error::InvalidParameter("malformed cdf".into()));
                }
                Ok(())
            }
        }
    }

    pub fn cdf(&self, t: &Ratio) -> Ratio {
        match self {
            Temporal::Atom(at) => {
                if t >= at {
                    one()
                } else {
                    zero()
                }
            }
            Temporal::UniformInterval(a, b) => {
                if t <= a {
                    zero()
                } else if t >= b {
                    one()
                } else {
                    (t - a) / (b - a)
                }
            }
            Temporal::PiecewiseLinearCdf(knots) => {
                if t <= &knots[0].0 {
                    return zero();
                }
                for w in knots.windows(2) {
                    if t <= &w[1].0 {
                        let frac = (t - &w[0].0) / (&w[1].0 - &w[0].0);
                        return &w[0].1 + frac * (&w[1].1 - &w[0].1);
                    }
                }
                one()
            }
        }
    }

    /// P(tau in [a, b]), closed interval; atoms on the boundary count.
    pub fn probability_in(&self, a: &Ratio, b: &Ratio) -> Ratio {
        if a > b {
            return zero();
        }
        match self {
            Temporal::Atom(at) => {
                if a <= at && at <= b {
                    one()
                } else {
                    zero()
                }
            }
            _ => self.cdf(b) - self.cdf(a),
        }
    }

    /// Support bounds of tau.
    pub fn support(&self) -> (Ratio, Ratio) {
        match self {
            Temporal::Atom(at) => (at.clone(), at.clone()),
            Temporal::UniformInterval(a, b) => (a.clone(), b.clone()),
            Temporal::PiecewiseLinearCdf(knots) => {
                (knots[0].0.clone(), knots[knots.len() - 1].0.clone())
            }
        }
    }

    /// Inverse-cdf sample from a uniform draw in [0, 1).
    pub fn sample_from(&self, u: f64) -> f64 {
        use crate::ratio::to_f64;
        match self {
            Temporal::Atom(at) => to_f64(at),
            Temporal::UniformInterval(a, b) => {
                let (a, b) = (to_f64(a), to_f64(b));
                a + u * (b - a)
            }
            Temporal::PiecewiseLinearCdf(knots) => {
                for w in knots.windows(2) {
                    let (f0, f1) = (to_f64(&w[0].1), to_f64(&w[1].1));
                    if u <= f1 {
                        let (y0, y1) = (to_f64(&w[0].0), to_f64(&w[1].0));
                        if f1 == f0 {
                            return y0;
                        }
                        return y0 + (u - f0) / (f1 - f0) * (y1 - y0);
                    }
                }
                to_f64(&knots[knots.len() - 1].0)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttackComponent {
    pub weight: Ratio,
    pub spatial: Spatial,
    pub temporal: Temporal,
}

/// A mixed attack: a finite mixture of spatial x temporal components.
#[derive(Debug, Clone)]
pub struct MixedAttack {
    pub alpha: Ratio,
    pub components: Vec<AttackComponent>,
}

impl MixedAttack {
    pub fn new(alpha: Ratio, components: Vec<AttackComponent>) -> Result<Self> {
        if alpha <= zero() {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        let total = components
            .iter()
            .fold(zero(), |acc, c| acc + &c.weight);
        if total != one() {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {}, not 1",
                ratio_string(&total)
            )));
        }
        for c in &components {
            if c.weight < zero() {
                return Err(Error::InvalidParameter("negative weight".into()));
            }
            c.temporal.validate()?;
            if let Spatial::UniformRegion(r) = &c.spatial {
                if r.measure() <= zero() {
                    return Err(Error::InvalidParameter("empty region".into()));
                }
            }
        }
        Ok(MixedAttack { alpha, components })
    }

    /// Skips the weight normalization check. Used only to reproduce formula
    /// strategies outside their validity range in regression analysis.
    pub fn new_unchecked(alpha: Ratio, components: Vec<AttackComponent>) -> Self {
        MixedAttack { alpha, components }
    }

    pub fn total_weight(&self) -> Ratio {
        self.components
            .iter()
            .fold(zero(), |acc, c| acc + &c.weight)
    }

    /// Latest possible end time tau + alpha over all components.
    pub fn horizon(&self) -> Ratio {
        self.components
            .iter()
            .map(|c| c.temporal.support().1 + &self.alpha)
            .max()
            .unwrap_or_else(zero)
    }
}

// ---------------------------------------------------------------------------
// Constructors

/// Attack a uniformly random point of the whole network at time M. No patrol
/// intercepts with probability above alpha/mu (Lemma 1).
pub fn uniform_attack(net: &MetricNetwork, alpha: &Ratio, m_time: &Ratio) -> Result<MixedAttack> {
    let region = Region {
        intervals: (0..net.arc_count())
            .map(|a| (a, zero(), net.arc(a).length.clone()))
            .collect(),
    };
    MixedAttack::new(
        alpha.clone(),
        vec![AttackComponent {
            weight: one(),
            spatial: Spatial::UniformRegion(region),
            temporal: Temporal::Atom(m_time.clone()),
        }],
    )
}

pub fn uniform_attack_bound(net: &MetricNetwork, alpha: &Ratio) -> Ratio {
    (alpha / net.total_length()).min(one())
}

#[derive(Debug, Clone)]
pub struct IndependentAttackSpec {
    pub points: Vec<NetPoint>,
    /// Per-arc intervals of W, the set within alpha/2 of the points.
    pub w_regions: Vec<Vec<(Ratio, Ratio)>>,
    pub lambda_w_complement: Ratio,
    pub p: Ratio,
    /// V <= alpha / (lambda(W^c) + l alpha).
    pub bound: Ratio,
}

/// The independent attack of Theorem 1: atoms on an alpha-separated point set
/// I mixed with a uniform attack on the complement of its alpha/2
/// neighbourhood W.
pub fn independent_attack(
    net: &MetricNetwork,
    points: &[NetPoint],
    alpha: &Ratio,
) -> Result<(MixedAttack, IndependentAttackSpec)> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty point set".into()));
    }
    let points: Vec<NetPoint> = points
        .iter()
        .map(|p| net.canonical(p))
        .collect::<Result<_>>()?;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = net.distance(&points[i], &points[j])?;
            if &d < alpha {
                return Err(Error::NotIndependent(
                    net.point_label(&points[i]),
                    net.point_label(&points[j]),
                ));
            }
        }
    }
    let half = alpha / rat(2);
    // W per arc: for each point, the offsets within alpha/2 form a union of
    // end segments plus (for a point on this arc) a centered interval; the
    // sublevel set of a min of linear ramps is the union of their sublevels.
    let mut w_regions: Vec<Vec<(Ratio, Ratio)>> = Vec::with_capacity(net.arc_count());
    let mut lambda_w = zero();
    for arc in 0..net.arc_count() {
        let a = net.arc(arc);
        let len = a.length.clone();
        let mut set = crate::interval::IntervalSet::new();
        for x in &points {
            let d_from = net.distance(&NetPoint::Node(a.from), x)?;
            let d_to = net.distance(&NetPoint::Node(a.to), x)?;
            if &d_from < &half {
                set.insert(crate::interval::Interval::new(
                    zero(),
                    (&half - &d_from).min(len.clone()),
                ));
            }
            if &d_to < &half {
                set.insert(crate::interval::Interval::new(
                    (&len - (&half - &d_to)).max(zero()),
                    len.clone(),
                ));
            }
            if let NetPoint::On { arc: xa, offset } = x {
                if *xa == arc {
                    set.insert(crate::interval::Interval::new(
                        (offset - &half).max(zero()),
                        (offset + &half).min(len.clone()),
                    ));
                }
            }
        }
        lambda_w += set.measure();
        w_regions.push(
            set.intervals()
                .iter()
                .map(|iv| (iv.lo.clone(), iv.hi.clone()))
                .collect(),
        );
    }
    let lambda_wc = net.total_length() - &lambda_w;
    let l = rat(points.len() as i64);
    let denom = &lambda_wc + &l * alpha;
    let p = &l * alpha / &denom;
    let bound = (alpha / &denom).min(one());

    let mut components = Vec::new();
    for x in &points {
        components.push(AttackComponent {
            weight: &p / &l,
            spatial: Spatial::Atom(x.clone()),
            temporal: Temporal::UniformInterval(zero(), alpha.clone()),
        });
    }
    if lambda_wc > zero() {
        let mut intervals = Vec::new();
        for (arc, ivs) in w_regions.iter().enumerate() {
            let len = net.arc(arc).length.clone();
            let mut cursor = zero();
            for (lo, hi) in ivs {
                if lo > &cursor {
                    intervals.push((arc, cursor.clone(), lo.clone()));
                }
                cursor = hi.clone();
            }
            if cursor < len {
                intervals.push((arc, cursor, len));
            }
        }
        components.push(AttackComponent {
            weight: one() - &p,
            spatial: Spatial::UniformRegion(Region { intervals }),
            temporal: Temporal::Atom(half),
        });
    }
    let attack = MixedAttack::new(alpha.clone(), components)?;
    Ok((
        attack,
        IndependentAttackSpec {
            points,
            w_regions,
            lambda_w_complement: lambda_wc,
            p,
            bound,
        },
    ))
}

/// The E-attack (Def. 15): uniform on E^c at time M = max e_j, plus an atom
/// at each extremity leaf with start time uniform on [M - e_j, M + e_j].
/// Requires the Leaf Condition; caps interception at v*.
pub fn e_attack(net: &MetricNetwork, alpha: &Ratio) -> Result<MixedAttack> {
    let profile = extremity_set(net, alpha)?;
    if !profile.leaf_condition {
        let witness = profile
            .leaf_condition_witness
            .map(|p| net.point_label(&p))
            .unwrap_or_default();
        return Err(Error::LeafConditionFails(witness));
    }
    let denom = net.total_length() + &profile.lambda_e;
    let m = profile.m_max.clone();
    let mut components = Vec::new();
    for c in &profile.components {
        let leaf = c.leaf.ok_or_else(|| {
            Error::LeafConditionFails("extremity component without a leaf".into())
        })?;
        let e_j = c.length();
        components.push(AttackComponent {
            weight: rat(2) * &e_j / &denom,
            spatial: Spatial::Atom(NetPoint::Node(leaf)),
            temporal: Temporal::UniformInterval(&m - &e_j, &m + &e_j),
        });
    }
    let lambda_ec = profile.lambda_e_complement(net);
    if lambda_ec > zero() {
        let intervals = profile
            .complement_regions(net)
            .into_iter()
            .enumerate()
            .flat_map(|(arc, ivs)| ivs.into_iter().map(move |(lo, hi)| (arc, lo, hi)))
            .collect();
        components.push(AttackComponent {
            weight: &lambda_ec / &denom,
            spatial: Spatial::UniformRegion(Region { intervals }),
            temporal: Temporal::Atom(m),
        });
    }
    MixedAttack::new(alpha.clone(), components)
}

pub fn e_attack_bound(net: &MetricNetwork, alpha: &Ratio) -> Result<Ratio> {
    Ok(extremity_set(net, alpha)?.v_star)
}

fn require_star_611(net: &MetricNetwork) -> Result<()> {
    let ok = net.is_tree()
        && net.node_count() == 4
        && ["1", "2", "9"].iter().all(|id| {
            net.node_by_id(id)
                .map(|n| net.degree(n) == 1)
                .unwrap_or(false)
        })
        && *net.total_length() == rat(8);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "network is not the 6-1-1 star".into(),
        ))
    }
}

fn attack_611_components(net: &MetricNetwork, alpha: &Ratio) -> Result<Vec<AttackComponent>> {
    require_star_611(net)?;
    let theta = rat(2) * (rat(8) + alpha);
    let mut components = Vec::new();
    // Left: atoms at the two short leaves, start uniform on [1, 1 + alpha].
    for id in ["1", "2"] {
        components.push(AttackComponent {
            weight: alpha / &theta,
            spatial: Spatial::Atom(NetPoint::Node(net.node_by_id(id)?)),
            temporal: Temporal::UniformInterval(one(), one() + alpha),
        });
    }
    // Middle: uniform on E^c at time alpha/2 or alpha/2 + 2, equiprobably.
    let lambda_ec = (rat(8) - alpha).max(zero());
    if lambda_ec > zero() {
        let profile = extremity_set(net, alpha)?;
        let intervals: Vec<(ArcIx, Ratio, Ratio)> = profile
            .complement_regions(net)
            .into_iter()
            .enumerate()
            .flat_map(|(arc, ivs)| ivs.into_iter().map(move |(lo, hi)| (arc, lo, hi)))
            .collect();
        for t in [alpha / rat(2), alpha / rat(2) + rat(2)] {
            components.push(AttackComponent {
                weight: &lambda_ec / &theta,
                spatial: Spatial::UniformRegion(Region {
                    intervals: intervals.clone(),
                }),
                temporal: Temporal::Atom(t),
            });
        }
    }
    // Right: atom at the long leaf with the piecewise-linear start cdf.
    let knots = vec![
        (zero(), zero()),
        (rat(2), one() / alpha),
        (alpha.clone(), one() / alpha + (alpha - rat(2)) / alpha),
        (alpha + rat(2), one()),
    ];
    components.push(AttackComponent {
        weight: rat(2) * alpha / &theta,
        spatial: Spatial::Atom(NetPoint::Node(net.node_by_id("9")?)),
        temporal: Temporal::PiecewiseLinearCdf(knots),
    });
    Ok(components)
}

/// The 6-1-1 attack (Def. 19), valid for 4 <= alpha <= 8 where it caps
/// interception at 2 alpha / theta with theta = 2(8 + alpha).
pub fn attack_611(net: &MetricNetwork, alpha: &Ratio) -> Result<MixedAttack> {
    if alpha < &rat(4) || alpha > &rat(8) {
        return Err(Error::InvalidParameter(
            "6-1-1 attack requires 4 <= alpha <= 8".into(),
        ));
    }
    MixedAttack::new(alpha.clone(), attack_611_components(net, alpha)?)
}

/// The literal Def. 19 formula outside its validity range: for alpha > 8 the
/// middle attacks vanish and the weights no longer normalize, which is
/// exactly what the regression against the counter-patrol demonstrates.
pub fn attack_611_formula(net: &MetricNetwork, alpha: &Ratio) -> Result<MixedAttack> {
    Ok(MixedAttack::new_unchecked(
        alpha.clone(),
        attack_611_components(net, alpha)?,
    ))
}

pub fn attack_611_bound(alpha: &Ratio) -> Ratio {
    rat(2) * alpha / (rat(2) * (rat(8) + alpha))
}

/// The figure-8 tree attack of section 6.2, fixed at alpha = 6: leaf atoms
/// with weights 6/24, 6/24, 8/24, 4/24 capping interception at 1/2.
pub fn attack_fig8_tree(net: &MetricNetwork, alpha: &Ratio) -> Result<MixedAttack> {
    let ok = net.is_tree()
        && net.node_count() == 7
        && *net.total_length() == rat(6)
        && ["1", "2", "5", "6", "7"].iter().all(|id| {
            net.node_by_id(id)
                .map(|n| net.degree(n) == 1)
                .unwrap_or(false)
        });
    if !ok {
        return Err(Error::InvalidParameter(
            "network is not the unit-arc figure-8 tree".into(),
        ));
    }
    if alpha != &rat(6) {
        return Err(Error::InvalidParameter(
            "figure-8 tree attack is defined for alpha = 6".into(),
        ));
    }
    let atom = |id: &str| -> Result<Spatial> {
        Ok(Spatial::Atom(NetPoint::Node(net.node_by_id(id)?)))
    };
    let components = vec![
        AttackComponent {
            weight: frac_of(6, 24),
            spatial: atom("1")?,
            temporal: Temporal::UniformInterval(zero(), rat(6)),
        },
        AttackComponent {
            weight: frac_of(6, 24),
            spatial: atom("2")?,
            temporal: Temporal::UniformInterval(zero(), rat(6)),
        },
        AttackComponent {
            weight: frac_of(8, 24),
            spatial: atom("6")?,
            temporal: Temporal::PiecewiseLinearCdf(vec![
                (zero(), zero()),
                (rat(2), frac_of(2, 8)),
                (rat(4), frac_of(6, 8)),
                (rat(6), one()),
            ]),
        },
        AttackComponent {
            weight: frac_of(4, 24),
            spatial: atom("7")?,
            temporal: Temporal::UniformInterval(one(), rat(5)),
        },
    ];
    MixedAttack::new(alpha.clone(), components)
}

fn frac_of(n: i64, d: i64) -> Ratio {
    rat(n) / rat(d)
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackDoc {
    pub alpha: String,
    pub components: Vec<AttackComponentDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackComponentDoc {
    pub weight: String,
    pub spatial: SpatialDoc,
    pub temporal: TemporalDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SpatialDoc {
    Atom { at: crate::tour::PointDoc },
    Region { intervals: Vec<RegionIntervalDoc> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionIntervalDoc {
    pub arc: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TemporalDoc {
    Atom { t: String },
    Uniform { from: String, to: String },
    Cdf { knots: Vec<[String; 2]> },
}

impl MixedAttack {
    pub fn to_doc(&self, net: &MetricNetwork) -> AttackDoc {
        let point_doc = |p: &NetPoint| -> crate::tour::PointDoc {
            match p {
                NetPoint::Node(n) => crate::tour::PointDoc::Node {
                    node: net.node(*n).id.clone(),
                },
                NetPoint::On { arc, offset } => crate::tour::PointDoc::On {
                    arc: net.arc(*arc).id.clone(),
                    offset: ratio_string(offset),
                },
            }
        };
        AttackDoc {
            alpha: ratio_string(&self.alpha),
            components: self
                .components
                .iter()
                .map(|c| AttackComponentDoc {
                    weight: ratio_string(&c.weight),
                    spatial: match &c.spatial {
                        Spatial::Atom(p) => SpatialDoc::Atom { at: point_doc(p) },
                        Spatial::UniformRegion(r) => SpatialDoc::Region {
                            intervals: r
                                .intervals
                                .iter()
                                .map(|(arc, lo, hi)| RegionIntervalDoc {
                                    arc: net.arc(*arc).id.clone(),
                                    from: ratio_string(lo),
                                    to: ratio_string(hi),
                                })
                                .collect(),
                        },
                    },
                    temporal: match &c.temporal {
                        Temporal::Atom(t) => TemporalDoc::Atom {
                            t: ratio_string(t),
                        },
                        Temporal::UniformInterval(a, b) => TemporalDoc::Uniform {
                            from: ratio_string(a),
                            to: ratio_string(b),
                        },
                        Temporal::PiecewiseLinearCdf(knots) => TemporalDoc::Cdf {
                            knots: knots
                                .iter()
                                .map(|(y, f)| [ratio_string(y), ratio_string(f)])
                                .collect(),
                        },
                    },
                })
                .collect(),
        }
    }

    pub fn from_doc(net: &MetricNetwork, doc: &AttackDoc) -> Result<Self> {
        let point = |pd: &crate::tour::PointDoc| -> Result<NetPoint> {
            Ok(match pd {
                crate::tour::PointDoc::Node { node } => NetPoint::Node(net.node_by_id(node)?),
                crate::tour::PointDoc::On { arc, offset } => {
                    net.canonical(&NetPoint::on(net.arc_by_id(arc)?, parse_ratio(offset)?))?
                }
            })
        };
        let components = doc
            .components
            .iter()
            .map(|c| -> Result<AttackComponent> {
                Ok(AttackComponent {
                    weight: parse_ratio(&c.weight)?,
                    spatial: match &c.spatial {
                        SpatialDoc::Atom { at } => Spatial::Atom(point(at)?),
                        SpatialDoc::Region { intervals } => Spatial::UniformRegion(Region {
                            intervals: intervals
                                .iter()
                                .map(|iv| -> Result<(ArcIx, Ratio, Ratio)> {
                                    Ok((
                                        net.arc_by_id(&iv.arc)?,
                                        parse_ratio(&iv.from)?,
                                        parse_ratio(&iv.to)?,
                                    ))
                                })
                                .collect::<Result<_>>()?,
                        }),
                    },
                    temporal: match &c.temporal {
                        TemporalDoc::Atom { t } => Temporal::Atom(parse_ratio(t)?),
                        TemporalDoc::Uniform { from, to } => {
                            Temporal::UniformInterval(parse_ratio(from)?, parse_ratio(to)?)
                        }
                        TemporalDoc::Cdf { knots } => Temporal::PiecewiseLinearCdf(
                            knots
                                .iter()
                                .map(|[y, f]| -> Result<(Ratio, Ratio)> {
                                    Ok((parse_ratio(y)?, parse_ratio(f)?))
                                })
                                .collect::<Result<_>>()?,
                        ),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MixedAttack::new(parse_ratio(&doc.alpha)?, components)
    }
}
