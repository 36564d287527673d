//! Mixed patrol strategies: randomized periodic tours, multi-patroller
//! offsets, the E-patrolling tour for trees, and certified interception
//! guarantees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremity::{extremity_set, ClosureComponent, ExtremityProfile};
use crate::network::{MetricNetwork, NetPoint};
use crate::ratio::{one, rat, ratio_string, zero, Ratio};
use crate::tour::{
    tree_cpt, tree_cpt_ordered, visit_separation, Segment, TimedTour, TourBuilder, TourDoc,
};

/// A tour started at a uniformly random phase, possibly shared by m
/// patrollers offset by L/m from one another.
#[derive(Debug, Clone)]
pub struct MixedPatrol {
    pub tour: TimedTour,
    pub m: usize,
}

pub fn randomized_periodic(tour: TimedTour) -> MixedPatrol {
    MixedPatrol { tour, m: 1 }
}

pub fn multi_patroller(patrol: MixedPatrol, m: usize) -> Result<MixedPatrol> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    Ok(MixedPatrol {
        tour: patrol.tour,
        m,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatrolDoc {
    #[serde(flatten)]
    pub tour: TourDoc,
    pub m: usize,
    pub offset: String,
}

impl MixedPatrol {
    pub fn to_doc(&self, net: &MetricNetwork) -> PatrolDoc {
        PatrolDoc {
            tour: self.tour.to_doc(net),
            m: self.m,
            offset: "uniform".into(),
        }
    }

    pub fn from_doc(net: &MetricNetwork, doc: &PatrolDoc) -> Result<Self> {
        if doc.offset != "uniform" {
            return Err(Error::Parse(format!(
                "unsupported offset distribution {:?}",
                doc.offset
            )));
        }
        if doc.m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        Ok(MixedPatrol {
            tour: TimedTour::from_doc(net, &doc.tour)?,
            m: doc.m,
        })
    }
}

/// Interception probability certified by Theorem 2: with k visits to every
/// point pairwise separated by at least m alpha (mod L), m patrollers
/// intercept with probability at least min(1, m k alpha / L).
pub fn patrol_guarantee(
    net: &MetricNetwork,
    patrol: &MixedPatrol,
    alpha: &Ratio,
    k: usize,
) -> Result<Ratio> {
    if alpha <= &zero() {
        return Err(Error::InvalidParameter("alpha must be positive".into()));
    }
    let period = patrol.tour.period().clone();
    let m = rat(patrol.m as i64);
    // With offsets L/m apart, a window of length alpha >= L/m guarantees a
    // visit whenever every point is covered at all.
    if &m * alpha >= period {
        visit_separation(net, &patrol.tour, 1, None)?;
        return Ok(one());
    }
    let report = visit_separation(net, &patrol.tour, k, None)?;
    let required = &m * alpha;
    if report.alpha0 < required {
        return Err(Error::SeparationNotMet {
            required: ratio_string(&required),
            achieved: ratio_string(&report.alpha0),
        });
    }
    Ok((m * rat(k as i64) * alpha / period).min(one()))
}

/// Largest k for which the tour separates k visits by at least alpha; the
/// best Theorem 2 guarantee is then k alpha / L.
pub fn best_cover_order(net: &MetricNetwork, tour: &TimedTour, alpha: &Ratio) -> usize {
    let mut k = 0;
    loop {
        match visit_separation(net, tour, k + 1, None) {
            Ok(rep) if &rep.alpha0 >= alpha => k += 1,
            _ => return k,
        }
    }
}

/// A contiguous portion of a tour, replayable elsewhere.
#[derive(Debug, Clone)]
enum Piece {
    Move {
        arc: usize,
        from_off: Ratio,
        to_off: Ratio,
    },
    Pause {
        duration: Ratio,
    },
}

fn extract_path(tour: &TimedTour, t_a: &Ratio, t_b: &Ratio) -> Vec<Piece> {
    let mut out = Vec::new();
    for s in tour.segments() {
        let (t0, t1) = (s.t0(), s.t1());
        let lo = t_a.clone().max(t0.clone());
        let hi = t_b.clone().min(t1.clone());
        if lo >= hi {
            continue;
        }
        match s {
            Segment::Pause { .. } => out.push(Piece::Pause {
                duration: &hi - &lo,
            }),
            Segment::Move {
                arc,
                from_off,
                to_off,
                ..
            } => {
                let off_at = |t: &Ratio| -> Ratio {
                    if to_off >= from_off {
                        from_off + (t - t0)
                    } else {
                        from_off - (t - t0)
                    }
                };
                out.push(Piece::Move {
                    arc: *arc,
                    from_off: off_at(&lo),
                    to_off: off_at(&hi),
                });
            }
        }
    }
    out
}

fn apply_pieces(b: &mut TourBuilder, pieces: &[Piece]) -> Result<()> {
    for p in pieces {
        match p {
            Piece::Pause { duration } => b.pause(duration.clone()),
            Piece::Move {
                arc,
                from_off,
                to_off,
            } => b.move_partial(*arc, from_off.clone(), to_off.clone())?,
        }
    }
    Ok(())
}

/// Time windows during which the tour is inside the closed component, merged
/// across touching segments.
fn component_windows(
    net: &MetricNetwork,
    tour: &TimedTour,
    profile: &ExtremityProfile,
    comp: &ClosureComponent,
) -> Vec<(Ratio, Ratio)> {
    let member_ivs: Vec<(usize, Ratio, Ratio)> = comp
        .members
        .iter()
        .map(|&i| {
            let c = &profile.components[i];
            (c.arc, c.lo.clone(), c.hi.clone())
        })
        .collect();
    let point_inside = |p: &NetPoint| -> bool {
        match p {
            NetPoint::Node(n) => comp.nodes.contains(n),
            NetPoint::On { arc, offset } => member_ivs
                .iter()
                .any(|(a, lo, hi)| a == arc && lo <= offset && offset <= hi),
        }
    };
    let mut windows: Vec<(Ratio, Ratio)> = Vec::new();
    for s in tour.segments() {
        match s {
            Segment::Pause { at, t0, t1 } => {
                if point_inside(&net.canonical(at).unwrap()) {
                    windows.push((t0.clone(), t1.clone()));
                }
            }
            Segment::Move {
                arc,
                from_off,
                to_off,
                t0,
                t1,
            } => {
                let (span_lo, span_hi) = if from_off <= to_off {
                    (from_off, to_off)
                } else {
                    (to_off, from_off)
                };
                for (a, lo, hi) in &member_ivs {
                    if a != arc {
                        continue;
                    }
                    let clo = lo.clone().max(span_lo.clone());
                    let chi = hi.clone().min(span_hi.clone());
                    if clo > chi {
                        continue;
                    }
                    let t_of = |off: &Ratio| -> Ratio {
                        if from_off <= to_off {
                            t0 + (off - from_off)
                        } else {
                            t0 + (from_off - off)
                        }
                    };
                    let (wa, wb) = (t_of(&clo), t_of(&chi));
                    let (wa, wb) = if wa <= wb { (wa, wb) } else { (wb, wa) };
                    windows.push((wa.max(t0.clone()), wb.min(t1.clone())));
                }
            }
        }
    }
    windows.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(Ratio, Ratio)> = Vec::new();
    for (lo, hi) in windows {
        match merged.last_mut() {
            Some((_, mhi)) if lo <= *mhi => {
                if hi > *mhi {
                    *mhi = hi;
                }
            }
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// The E-patrolling tour S^E (Lemma 12): a component-coherent CPT with each
/// local component tour repeated, of period exactly 2(mu + lambda(E)); every
/// point gets two visits at least alpha apart.
pub fn e_patrolling_tour(net: &MetricNetwork, alpha: &Ratio) -> Result<TimedTour> {
    let profile = extremity_set(net, alpha)?;

    let first_node = || -> NetPoint {
        let id = net.nodes().iter().map(|n| n.id.clone()).min().unwrap();
        NetPoint::Node(net.node_by_id(&id).unwrap())
    };
    // E-bar = Q: the plain CPT already visits every point twice at times at
    // least alpha apart (Theorem 2 with k = 1 still gives alpha/2mu = v*).
    if profile.lambda_e == *net.total_length() {
        return tree_cpt(net, &first_node());
    }

    // Start at the midpoint of the longest segment outside E.
    let complement = profile.complement_regions(net);
    let mut best: Option<(Ratio, usize, Ratio)> = None; // (length, arc, midpoint)
    for (arc, ivs) in complement.iter().enumerate() {
        for (lo, hi) in ivs {
            let len = hi - lo;
            let mid = (lo + hi) / rat(2);
            if best.as_ref().map_or(true, |(bl, _, _)| &len > bl) {
                best = Some((len, arc, mid));
            }
        }
    }
    let (_, start_arc, start_mid) = best.unwrap();
    let start = NetPoint::on(start_arc, start_mid);

    // Component-coherent CPT: at a node inside a component of E-bar, prefer
    // untraversed passages staying in that component.
    let stays_in_component = |p: &crate::network::Passage| -> bool {
        let node = net.arc(p.arc).endpoint(p.end);
        profile.closure_components.iter().any(|c| {
            c.nodes.contains(&node)
                && c.members.iter().any(|&i| {
                    let ec = &profile.components[i];
                    ec.arc == p.arc
                        && ((p.end == 0 && ec.lo == zero())
                            || (p.end == 1 && ec.hi == net.arc(p.arc).length))
                })
        })
    };
    let base = tree_cpt_ordered(net, &start, |children| {
        let mut inside: Vec<_> = children
            .iter()
            .copied()
            .filter(stays_in_component)
            .collect();
        let outside: Vec<_> = children
            .iter()
            .copied()
            .filter(|p| !stays_in_component(p))
            .collect();
        inside.extend(outside);
        inside
    })?;

    // For every component: one contiguous window [t1, t2]; insert a replay of
    // it either immediately (large components) or at the next return to the
    // component (small ones, where the return gap is at least alpha).
    let half = alpha / rat(2);
    let mut splices: Vec<(Ratio, Vec<Piece>)> = Vec::new();
    for comp in &profile.closure_components {
        let windows = component_windows(net, &base, &profile, comp);
        if windows.len() != 1 {
            return Err(Error::TourStuck(format!(
                "component toured in {} windows",
                windows.len()
            )));
        }
        let (t1, t2) = windows[0].clone();
        let comp_len: Ratio = comp
            .members
            .iter()
            .fold(zero(), |acc, &i| acc + profile.components[i].length());
        let pieces = extract_path(&base, &t1, &t2);
        if comp_len >= half {
            splices.push((t2, pieces));
        } else {
            // Next visit to the component after t2 is at its boundary node.
            let mut t3: Option<Ratio> = None;
            for &n in &comp.nodes {
                for iv in base.visit_intervals(net, &NetPoint::Node(n))? {
                    if iv.lo > t2 && t3.as_ref().map_or(true, |t| &iv.lo < t) {
                        t3 = Some(iv.lo.clone());
                    }
                }
            }
            let t3 = t3.ok_or_else(|| {
                Error::TourStuck("no return to small extremity component".into())
            })?;
            if &t3 - &t2 < *alpha {
                return Err(Error::TourStuck(
                    "return gap below alpha at small component".into(),
                ));
            }
            splices.push((t3, pieces));
        }
    }
    splices.sort_by(|a, b| a.0.cmp(&b.0));

    // Replay the base tour, inserting each splice at its base-tour time.
    let mut b = TourBuilder::new(net, start)?;
    let mut si = 0;
    for s in base.segments() {
        let mut t_cur = s.t0().clone();
        let t_end = s.t1().clone();
        while si < splices.len() && splices[si].0 <= t_cur {
            apply_pieces(&mut b, &splices[si].1)?;
            si += 1;
        }
        loop {
            let next_split = splices
                .get(si)
                .map(|(t, _)| t.clone())
                .filter(|t| t < &t_end);
            let upto = next_split.clone().unwrap_or_else(|| t_end.clone());
            if upto > t_cur {
                apply_pieces(&mut b, &extract_path(&base, &t_cur, &upto))?;
                t_cur = upto;
            }
            match next_split {
                Some(_) => {
                    apply_pieces(&mut b, &splices[si].1)?;
                    si += 1;
                }
                None => break,
            }
        }
    }
    while si < splices.len() {
        apply_pieces(&mut b, &splices[si].1)?;
        si += 1;
    }
    let tour = b.finish()?;

    let expected = (net.total_length() + &profile.lambda_e) * rat(2);
    if *tour.period() != expected {
        return Err(Error::TourStuck(format!(
            "E-patrolling period {} differs from {}",
            ratio_string(tour.period()),
            ratio_string(&expected)
        )));
    }
    Ok(tour)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ratio::frac;

    #[test]
    fn e_patrolling_star_2166() {
        let net = fixtures::network("star-2166").unwrap();
        let alpha = rat(6);
        let tour = e_patrolling_tour(&net, &alpha).unwrap();
        assert_eq!(*tour.period(), rat(48));
        let sep = visit_separation(&net, &tour, 2, Some(&frac(1, 2))).unwrap();
        assert!(sep.alpha0 >= alpha, "alpha0 = {}", sep.alpha0);
        let g = patrol_guarantee(&net, &randomized_periodic(tour), &alpha, 2).unwrap();
        assert_eq!(g, frac(1, 4));
    }

    #[test]
    fn e_patrolling_matches_leaf_pause_below_girth() {
        // For alpha <= g*, lambda(E) = l alpha / 2, so both tours have the
        // same period 2 mu + l alpha.
        for name in ["dog-tree", "star-2166", "star-611"] {
            let net = fixtures::network(name).unwrap();
            let gstar = net.generalized_girth().unwrap();
            let alpha = &gstar * frac(3, 4);
            let tour = e_patrolling_tour(&net, &alpha).unwrap();
            let l = rat(net.leaf_count() as i64);
            let expected = net.total_length() * rat(2) + l * &alpha;
            assert_eq!(*tour.period(), expected, "{name}");
            let sep = visit_separation(&net, &tour, 2, None).unwrap();
            assert!(sep.alpha0 >= alpha, "{name}: alpha0 = {}", sep.alpha0);
        }
    }

    #[test]
    fn e_patrolling_collapses_to_cpt() {
        let fig8 = fixtures::network("fig8-tree").unwrap();
        let tour = e_patrolling_tour(&fig8, &rat(6)).unwrap();
        assert_eq!(*tour.period(), rat(12));
        // Whole tree extremal: the certificate is k=1, separation L >= alpha.
        let sep = visit_separation(&fig8, &tour, 1, None).unwrap();
        assert!(sep.alpha0 >= rat(6));
    }

    #[test]
    fn e_patrolling_star_611_range() {
        let net = fixtures::network("star-611").unwrap();
        for alpha in [rat(4), rat(5), rat(6), rat(7)] {
            let tour = e_patrolling_tour(&net, &alpha).unwrap();
            assert_eq!(*tour.period(), rat(16) + rat(2) * &alpha);
            let sep = visit_separation(&net, &tour, 2, None).unwrap();
            assert!(sep.alpha0 >= alpha, "alpha={alpha}: alpha0={}", sep.alpha0);
        }
        // At alpha = 8 the whole tree is extremal and S^E is the plain CPT.
        let tour = e_patrolling_tour(&net, &rat(8)).unwrap();
        assert_eq!(*tour.period(), rat(16));
    }

    #[test]
    fn e_patrolling_dog_tree_deferred_insertion() {
        // At alpha = 5 the tail component has length 1 < alpha/2, forcing
        // the non-consecutive replay.
        let net = fixtures::network("dog-tree").unwrap();
        let alpha = rat(5);
        let tour = e_patrolling_tour(&net, &alpha).unwrap();
        assert_eq!(*tour.period(), rat(30));
        let sep = visit_separation(&net, &tour, 2, Some(&frac(1, 4))).unwrap();
        assert!(sep.alpha0 >= alpha, "alpha0 = {}", sep.alpha0);
    }

    #[test]
    fn guarantee_requires_certificate() {
        let net = fixtures::network("star-2166").unwrap();
        let cpt = tree_cpt(&net, &NetPoint::Node(0)).unwrap();
        // Leaves are visited only once per CPT period; k=2 must fail.
        assert!(matches!(
            patrol_guarantee(&net, &randomized_periodic(cpt), &rat(6), 2),
            Err(Error::TooFewVisits { .. }) | Err(Error::SeparationNotMet { .. })
        ));
    }

    #[test]
    fn multi_patroller_guarantees() {
        let circle = fixtures::network("circle").unwrap();
        let mut b = TourBuilder::new(&circle, NetPoint::Node(0)).unwrap();
        b.move_full(0, true).unwrap();
        let tour = b.finish().unwrap();
        let two = multi_patroller(randomized_periodic(tour), 2).unwrap();
        // alpha = 1/4: 2 * 1 * (1/4) / 1 = 1/2.
        assert_eq!(
            patrol_guarantee(&circle, &two, &frac(1, 4), 1).unwrap(),
            frac(1, 2)
        );
        // alpha = 3/4: offsets cover the circle, certain interception.
        assert_eq!(
            patrol_guarantee(&circle, &two, &frac(3, 4), 1).unwrap(),
            rat(1)
        );
        assert!(multi_patroller(randomized_periodic(two.tour.clone()), 0).is_err());
    }

    #[test]
    fn q5_three_patrollers() {
        let q5 = fixtures::network("q5").unwrap();
        let tour = crate::tour::alternating_double_cover(&q5).unwrap();
        let p3 = multi_patroller(randomized_periodic(tour), 3).unwrap();
        // Separation 10 supports m alpha up to 10: alpha=10/3 exactly fails
        // m*alpha <= 10? 3*(10/3)=10 <= 10, so the guarantee stands.
        let alpha = frac(10, 3);
        let g = patrol_guarantee(&q5, &p3, &alpha, 2).unwrap();
        assert_eq!(g, rat(3) * rat(2) * alpha / rat(30));
        assert!(matches!(
            patrol_guarantee(&q5, &p3, &frac(7, 2), 2),
            Err(Error::SeparationNotMet { .. })
        ));
    }

    #[test]
    fn best_cover_order_examples() {
        let circle = fixtures::network("circle").unwrap();
        let tour = crate::tour::double_cover_tour(&circle).unwrap();
        assert_eq!(best_cover_order(&circle, &tour, &frac(1, 2)), 2);
        assert_eq!(best_cover_order(&circle, &tour, &rat(2)), 1);
    }
}
