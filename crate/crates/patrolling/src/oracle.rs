//! Independent approximation of the game value on small instances: a
//! discretized zero-sum game grown by double oracle, plus a closed-form
//! bracket assembled from certified patrol guarantees and attack caps.

use std::collections::HashMap;

use crate::attack::{e_attack_bound, independent_attack, uniform_attack_bound, AttackComponent,
    MixedAttack, Spatial, Temporal};
use crate::best_response::{best_response_patrol, Grid, GridSpec};
use crate::error::{Error, Result};
use crate::eval::{intercept_mixed_patrol, PatrolPath};
use crate::matrix_game::solve_matrix_game;
use crate::network::{MetricNetwork, NetPoint};
use crate::patrol::{best_cover_order, e_patrolling_tour, MixedPatrol};
use crate::ratio::{one, rat, to_f64, zero, Ratio};
use crate::tour::{double_cover_tour, leaf_pause_tour, tree_cpt, TimedTour};

const SUPPORT_CUTOFF: f64 = 1e-9;

/// A patroller pure strategy in the restricted game: a randomized periodic
/// tour (uniform phase) or a deterministic grid walk.
pub enum PatrollerStrategy {
    Tour(TimedTour),
    Walk(PatrolPath),
}

/// Attacker pure strategy: grid point index and start time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackCell {
    pub point: usize,
    pub tau: Ratio,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub lower: f64,
    pub upper: f64,
    pub restricted_value: f64,
    pub iterations: usize,
    pub rows: usize,
    pub cols: usize,
    pub converged: bool,
}

pub struct DiscreteGame<'a> {
    net: &'a MetricNetwork,
    alpha: Ratio,
    spec: GridSpec,
    grid: Grid,
    taus: Vec<Ratio>,
}

impl<'a> DiscreteGame<'a> {
    pub fn new(net: &'a MetricNetwork, alpha: &Ratio, spec: GridSpec) -> Result<Self> {
        spec.validate(net, alpha)?;
        let grid = Grid::build(net, &spec.dx)?;
        // Optimal attacks end by 4 mu, so tau ranges over [0, 4 mu - alpha].
        // Start times sit at cell midpoints: sharing the patroller's grid
        // would align window endpoints with visits and inflate the value.
        let tau_max = (rat(4) * net.total_length() - alpha).max(zero());
        let mut taus = Vec::new();
        let mut t = &spec.dt / rat(2);
        while t <= tau_max {
            taus.push(t.clone());
            t += &spec.dt;
        }
        Ok(DiscreteGame {
            net,
            alpha: alpha.clone(),
            spec,
            grid,
            taus,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn payoff(
        &self,
        row: &PatrollerStrategy,
        col: &AttackCell,
        tour_cache: &mut HashMap<(usize, usize), f64>,
        row_ix: usize,
    ) -> Result<f64> {
        let x = &self.grid.points[col.point];
        match row {
            PatrollerStrategy::Tour(tour) => {
                // The uniform phase makes tour payoffs tau-invariant.
                if let Some(&v) = tour_cache.get(&(row_ix, col.point)) {
                    return Ok(v);
                }
                let patrol = MixedPatrol {
                    tour: tour.clone(),
                    m: 1,
                };
                let v = to_f64(&intercept_mixed_patrol(
                    self.net, &patrol, x, &zero(), &self.alpha,
                )?);
                tour_cache.insert((row_ix, col.point), v);
                Ok(v)
            }
            PatrollerStrategy::Walk(path) => {
                let visits = path.visit_set(self.net, x)?;
                let end = &col.tau + &self.alpha;
                let hit = visits
                    .intervals()
                    .iter()
                    .any(|iv| iv.hi >= col.tau && iv.lo <= end);
                Ok(if hit { 1.0 } else { 0.0 })
            }
        }
    }
}

fn seed_rows(net: &MetricNetwork, alpha: &Ratio) -> Vec<PatrollerStrategy> {
    let mut rows = Vec::new();
    if let Ok(t) = double_cover_tour(net) {
        rows.push(PatrollerStrategy::Tour(t));
    }
    if net.leaf_count() > 0 {
        if let Ok(t) = leaf_pause_tour(net, alpha) {
            rows.push(PatrollerStrategy::Tour(t));
        }
    }
    if net.is_tree() {
        if let Ok(t) = tree_cpt(net, &NetPoint::Node(0)) {
            rows.push(PatrollerStrategy::Tour(t));
        }
        if let Ok(t) = e_patrolling_tour(net, alpha) {
            rows.push(PatrollerStrategy::Tour(t));
        }
    }
    rows
}

/// Grow a restricted game by alternating best responses until the bracket
/// closes to eps or the iteration cap is hit.
pub fn solve_double_oracle(
    game: &DiscreteGame,
    eps: f64,
    max_iter: usize,
) -> Result<OracleReport> {
    let mut rows = seed_rows(game.net, &game.alpha);
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no seed patrols".into()));
    }
    // Seed columns: every grid point at the earliest start time.
    let tau0 = game.taus.first().cloned().unwrap_or_else(zero);
    let mut cols: Vec<AttackCell> = (0..game.grid.len())
        .map(|p| AttackCell {
            point: p,
            tau: tau0.clone(),
        })
        .collect();

    let mut tour_cache: HashMap<(usize, usize), f64> = HashMap::new();
    let mut matrix: Vec<Vec<f64>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut line = Vec::with_capacity(cols.len());
        for c in &cols {
            line.push(game.payoff(r, c, &mut tour_cache, i)?);
        }
        matrix.push(line);
    }

    let mut lower = 0.0f64;
    let mut upper = 1.0f64;
    let mut restricted_value = 0.0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let sol = solve_matrix_game(&matrix)?;
        restricted_value = sol.value;

        // Attacker best response to the current patroller mix: exact grid
        // minimum; certifies a lower bound on the discretized value. The
        // per-point minimizers are all admitted so start times spread fast.
        let tau_invariant = rows.iter().enumerate().all(|(i, r)| {
            sol.row_mix[i] <= SUPPORT_CUTOFF || matches!(r, PatrollerStrategy::Tour(_))
        });
        let mut best_col: Option<(AttackCell, f64)> = None;
        let mut per_point: Vec<(AttackCell, f64)> = Vec::with_capacity(game.grid.len());
        for p in 0..game.grid.len() {
            let mut point_best: Option<(AttackCell, f64)> = None;
            for tau in &game.taus {
                let cell = AttackCell {
                    point: p,
                    tau: tau.clone(),
                };
                let mut v = 0.0;
                for (i, r) in rows.iter().enumerate() {
                    if sol.row_mix[i] > SUPPORT_CUTOFF {
                        v += sol.row_mix[i] * game.payoff(r, &cell, &mut tour_cache, i)?;
                    }
                }
                if point_best.as_ref().map_or(true, |(_, bv)| v < *bv) {
                    point_best = Some((cell, v));
                }
                if tau_invariant {
                    break;
                }
            }
            let pb = point_best.ok_or(Error::EmptyMatrix)?;
            if best_col.as_ref().map_or(true, |(_, bv)| pb.1 < *bv) {
                best_col = Some(pb.clone());
            }
            per_point.push(pb);
        }
        let (_, attack_value) = best_col.ok_or(Error::EmptyMatrix)?;
        lower = lower.max(attack_value);

        // Patroller best response to the attacker mix: bitmask DP against
        // the support, atomized exactly; certifies an upper bound.
        let mut support: Vec<(usize, f64)> = sol
            .col_mix
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > SUPPORT_CUTOFF)
            .map(|(j, w)| (j, *w))
            .collect();
        support.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let kept: Vec<(usize, f64)> = support
            .iter()
            .take(crate::best_response::BITMASK_LIMIT)
            .cloned()
            .collect();
        let dropped: f64 = support
            .iter()
            .skip(crate::best_response::BITMASK_LIMIT)
            .map(|(_, w)| w)
            .sum();
        let components: Vec<AttackComponent> = kept
            .iter()
            .map(|(j, w)| AttackComponent {
                weight: Ratio::from_float(*w).unwrap_or_else(zero),
                spatial: Spatial::Atom(game.grid.points[cols[*j].point].clone()),
                temporal: Temporal::Atom(cols[*j].tau.clone()),
            })
            .collect();
        let attack_mix = MixedAttack::new_unchecked(game.alpha.clone(), components);
        let mut spec = game.spec.clone();
        let needed = attack_mix.horizon();
        if spec.horizon < needed {
            let steps = ((&needed - &spec.horizon) / &spec.dt).ceil();
            spec.horizon = &spec.horizon + steps * &spec.dt;
        }
        let (walk, dp_value) = best_response_patrol(game.net, &attack_mix, &spec)?;
        let patrol_value = to_f64(&dp_value) + dropped;
        upper = upper.min(patrol_value);

        let mut grew = false;
        for (cell, _) in per_point {
            if !cols.contains(&cell) {
                for (i, r) in rows.iter().enumerate() {
                    let v = game.payoff(r, &cell, &mut tour_cache, i)?;
                    matrix[i].push(v);
                }
                cols.push(cell);
                grew = true;
            }
        }
        if patrol_value > restricted_value + eps {
            let row = PatrollerStrategy::Walk(walk);
            let ix = rows.len();
            let mut line = Vec::with_capacity(cols.len());
            for c in &cols {
                line.push(game.payoff(&row, c, &mut tour_cache, ix)?);
            }
            matrix.push(line);
            rows.push(row);
            grew = true;
        }
        if upper - lower <= eps || !grew {
            converged = upper - lower <= eps + 1e-12;
            break;
        }
    }

    Ok(OracleReport {
        lower,
        upper,
        restricted_value,
        iterations,
        rows: rows.len(),
        cols: cols.len(),
        converged,
    })
}

/// Closed-form bracket: best certified patrol guarantee against best attack
/// cap, with the conjectured formula alongside.
#[derive(Debug, Clone)]
pub struct ValueBracket {
    pub lower: Ratio,
    pub upper: Ratio,
    pub lower_witness: String,
    pub upper_witness: String,
}

pub fn value_bracket(net: &MetricNetwork, alpha: &Ratio) -> Result<ValueBracket> {
    let mut lower = zero();
    let mut lower_witness = String::from("none");
    let consider = |tour: TimedTour, name: &str, lower: &mut Ratio, w: &mut String| {
        let k = best_cover_order(net, &tour, alpha);
        if k > 0 {
            let g = (rat(k as i64) * alpha / tour.period()).min(one());
            if g > *lower {
                *lower = g;
                *w = name.to_string();
            }
        }
    };
    if let Ok(t) = double_cover_tour(net) {
        consider(t, "double-cover", &mut lower, &mut lower_witness);
    }
    if net.leaf_count() > 0 {
        if let Ok(t) = leaf_pause_tour(net, alpha) {
            consider(t, "leaf-pause", &mut lower, &mut lower_witness);
        }
    }
    if net.is_tree() {
        if let Ok(t) = e_patrolling_tour(net, alpha) {
            consider(t, "e-patrolling", &mut lower, &mut lower_witness);
        }
    }

    let mut upper = uniform_attack_bound(net, alpha);
    let mut upper_witness = String::from("uniform");
    if let Ok(b) = e_attack_bound(net, alpha) {
        if b < upper {
            upper = b;
            upper_witness = "e-attack".into();
        }
    }
    if net.leaf_count() > 0 {
        let leaves: Vec<NetPoint> = net
            .leaf_arcs()
            .iter()
            .map(|&(_, n)| NetPoint::Node(n))
            .collect();
        if let Ok((_, spec)) = independent_attack(net, &leaves, alpha) {
            if spec.bound < upper {
                upper = spec.bound;
                upper_witness = "independent".into();
            }
        }
    }
    Ok(ValueBracket {
        lower,
        upper,
        lower_witness,
        upper_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ratio::frac;

    #[test]
    fn bracket_dog_tree_tight() {
        let net = fixtures::network("dog-tree").unwrap();
        for alpha in [rat(1), rat(2)] {
            let b = value_bracket(&net, &alpha).unwrap();
            // V = alpha / (9 + 5 alpha / 2).
            let expected = &alpha / (rat(9) + frac(5, 2) * &alpha);
            assert_eq!(b.lower, expected);
            assert_eq!(b.upper, expected);
        }
    }

    #[test]
    fn bracket_k4_and_circle() {
        let k4 = fixtures::network("k4").unwrap();
        let b = value_bracket(&k4, &rat(3)).unwrap();
        assert_eq!(b.lower, frac(1, 2));
        assert_eq!(b.upper, frac(1, 2));
        let circle = fixtures::network("circle").unwrap();
        let b = value_bracket(&circle, &frac(1, 2)).unwrap();
        assert_eq!(b.lower, frac(1, 2));
        assert_eq!(b.upper, frac(1, 2));
    }

    #[test]
    fn bracket_star_2166() {
        let net = fixtures::network("star-2166").unwrap();
        let b = value_bracket(&net, &rat(6)).unwrap();
        assert_eq!(b.lower, frac(1, 4));
        assert_eq!(b.upper, frac(1, 4));
        assert_eq!(b.lower_witness, "e-patrolling");
        assert_eq!(b.upper_witness, "e-attack");
    }

    #[test]
    fn oracle_circle_half() {
        let net = fixtures::network("circle").unwrap();
        let game = DiscreteGame::new(&net, &frac(1, 2), GridSpec::uniform(frac(1, 4), rat(4)))
            .unwrap();
        let report = solve_double_oracle(&game, 0.05, 40).unwrap();
        assert!(report.lower <= 0.5 + 0.05, "lower {}", report.lower);
        assert!(report.upper >= 0.5 - 0.05, "upper {}", report.upper);
        assert!(
            report.upper - report.lower <= 0.1,
            "bracket [{}, {}]",
            report.lower,
            report.upper
        );
    }

    #[test]
    fn oracle_line_third() {
        let net = fixtures::network("line").unwrap();
        let game = DiscreteGame::new(&net, &frac(1, 2), GridSpec::uniform(frac(1, 4), rat(4)))
            .unwrap();
        let report = solve_double_oracle(&game, 0.05, 40).unwrap();
        let target = 1.0 / 3.0;
        assert!(report.lower <= target + 0.05, "lower {}", report.lower);
        assert!(report.upper >= target - 0.05, "upper {}", report.upper);
    }
}
