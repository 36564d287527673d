//! Randomized property suites over generated networks, plus cross-checks
//! between the exact evaluators and Monte Carlo. Each suite prints one pass
//! line (visible with `--nocapture`).

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use patrolling::attack::e_attack;
use patrolling::best_response::{best_response_patrol, GridSpec};
use patrolling::eval::{intercept_mixed_patrol, interception_phases, monte_carlo_mixed};
use patrolling::extremity::extremity_set;
use patrolling::fixtures;
use patrolling::network::NetPoint;
use patrolling::patrol::{e_patrolling_tour, multi_patroller, randomized_periodic, MixedPatrol};
use patrolling::ratio::{frac, one, rat, to_f64, zero, Ratio};
use patrolling::tour::{
    alternating_double_cover, double_cover_tour, leaf_pause_tour, visit_separation, Segment,
    TimedTour,
};
use patrolling::MetricNetwork;

fn pass(n: u32, msg: &str) {
    println!("[acceptance] criterion {n:02}: PASS - {msg}");
}

// ---------------------------------------------------------------------------
// Random network generation (JSON documents, exact rational lengths)

const LENGTHS: [&str; 6] = ["1/2", "1", "3/2", "2", "5/2", "3"];

fn random_tree_json(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut edges: Vec<(usize, usize, &str)> = Vec::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        edges.push((parent, i, LENGTHS[rng.gen_range(0..LENGTHS.len())]));
    }
    network_json(n, &edges)
}

fn random_network_json(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut edges: Vec<(usize, usize, &str)> = Vec::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        edges.push((parent, i, LENGTHS[rng.gen_range(0..LENGTHS.len())]));
    }
    for _ in 0..rng.gen_range(0..=3) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            edges.push((a, b, LENGTHS[rng.gen_range(0..LENGTHS.len())]));
        }
    }
    network_json(n, &edges)
}

fn network_json(n: usize, edges: &[(usize, usize, &str)]) -> String {
    let mut degree = vec![0usize; n];
    for &(a, b, _) in edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let nodes: Vec<String> = (0..n)
        .map(|i| {
            if degree[i] == 2 {
                format!(r#"{{"id":"n{i}","artificial":true}}"#)
            } else {
                format!(r#"{{"id":"n{i}"}}"#)
            }
        })
        .collect();
    let arcs: Vec<String> = edges
        .iter()
        .enumerate()
        .map(|(k, (a, b, len))| {
            format!(r#"{{"id":"e{k}","from":"n{a}","to":"n{b}","length":"{len}"}}"#)
        })
        .collect();
    format!(
        r#"{{"nodes":[{}],"arcs":[{}]}}"#,
        nodes.join(","),
        arcs.join(",")
    )
}

fn random_point(rng: &mut ChaCha8Rng, net: &MetricNetwork) -> NetPoint {
    let arc = rng.gen_range(0..net.arc_count());
    let len = net.arc(arc).length.clone();
    let off = len * frac(rng.gen_range(0..=16), 16);
    net.canonical(&NetPoint::on(arc, off)).unwrap()
}

fn assert_no_nonleaf_reversal(net: &MetricNetwork, tour: &TimedTour) {
    let moves: Vec<(usize, bool)> = tour
        .segments()
        .iter()
        .filter_map(|s| match s {
            Segment::Move {
                arc,
                from_off,
                to_off,
                ..
            } => Some((*arc, from_off < to_off)),
            Segment::Pause { .. } => None,
        })
        .collect();
    let leaf_arcs: Vec<usize> = net.leaf_arcs().iter().map(|&(a, _)| a).collect();
    for i in 0..moves.len() {
        let (a1, f1) = moves[i];
        let (a2, f2) = moves[(i + 1) % moves.len()];
        if a1 == a2 && f1 != f2 {
            assert!(leaf_arcs.contains(&a1), "non-leaf arc {a1} reversed");
        }
    }
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_10_interception_certificate() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    // (network, tour, alpha, k) triples whose separation certificate holds.
    let k4 = fixtures::network("k4").unwrap();
    let q5 = fixtures::network("q5").unwrap();
    let dog = fixtures::network("dog-tree").unwrap();
    let cases: Vec<(&MetricNetwork, TimedTour, Ratio, usize)> = vec![
        (&k4, double_cover_tour(&k4).unwrap(), rat(3), 2),
        (&q5, alternating_double_cover(&q5).unwrap(), rat(10), 2),
        (&dog, leaf_pause_tour(&dog, &rat(2)).unwrap(), rat(2), 2),
    ];
    let mut checked = 0usize;
    for (net, tour, alpha, k) in &cases {
        let sep = visit_separation(net, tour, *k, None).unwrap();
        assert!(sep.alpha0 >= *alpha, "certificate violated: {}", sep.alpha0);
        let period = tour.period().clone();
        let guarantee = (rat(*k as i64) * alpha / &period).min(one());
        let patrol = randomized_periodic(tour.clone());
        for _ in 0..170 {
            let x = random_point(&mut rng, net);
            let tau = &period * frac(rng.gen_range(0..24), 8);
            let p = intercept_mixed_patrol(net, &patrol, &x, &tau, alpha).unwrap();
            assert!(p >= guarantee, "p={p} < {guarantee}");
            // Each visit interval [lo, hi] contributes at most alpha + (hi -
            // lo) to the interception phase set.
            let y = interception_phases(net, &patrol, &x, &tau, alpha).unwrap();
            let cap = tour
                .visit_intervals(net, &x)
                .unwrap()
                .iter()
                .fold(zero(), |acc, iv| acc + alpha + &iv.hi - &iv.lo);
            assert!(y.measure() <= cap);
            checked += 1;
        }
    }
    assert!(checked >= 500);

    // m patrollers phased L/m apart scale the guarantee, clamped at 1,
    // when the visit times are equally spaced: a single sweep of the circle.
    let circle = fixtures::network("circle").unwrap();
    let arc = circle.arc_by_id("loop").unwrap();
    let sweep = {
        let mut b =
            patrolling::tour::TourBuilder::new(&circle, NetPoint::Node(0)).unwrap();
        b.move_full(arc, true).unwrap();
        b.finish().unwrap()
    };
    for (alpha, m) in [(frac(1, 4), 2usize), (frac(3, 4), 2)] {
        let patrol = multi_patroller(randomized_periodic(sweep.clone()), m).unwrap();
        let expected = (rat(m as i64) * &alpha / rat(1)).min(one());
        for _ in 0..50 {
            let x = random_point(&mut rng, &circle);
            let tau = frac(rng.gen_range(0..24), 8);
            let p = intercept_mixed_patrol(&circle, &patrol, &x, &tau, &alpha).unwrap();
            assert!(p >= expected, "m={m}: p={p} < {expected}");
            let y = interception_phases(&circle, &patrol, &x, &tau, &alpha).unwrap();
            assert!(y.measure() <= rat(m as i64) * &alpha);
        }
    }
    pass(10, "separation certificate implies interception >= k*alpha/L at 550 random attacks; m scales it");
}

#[test]
fn criterion_11_double_cover_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..200 {
        let n = rng.gen_range(2..=8);
        let json = random_network_json(&mut rng, n);
        let net = MetricNetwork::from_json(&json).unwrap();
        let tour = double_cover_tour(&net).unwrap_or_else(|e| panic!("case {case}: {e}\n{json}"));
        assert_eq!(
            *tour.period(),
            rat(2) * net.total_length(),
            "case {case}: period"
        );
        for (a, c) in tour.arc_cover_counts(&net).iter().enumerate() {
            assert_eq!(*c, rat(2), "case {case}: arc {a} covered {c} times");
        }
        assert_no_nonleaf_reversal(&net, &tour);
    }
    pass(11, "200 random networks: double cover has length 2*mu, covers twice, reverses only at leaves");
}

#[test]
fn criterion_12_extremity_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..200 {
        // n >= 3 keeps the two leaf segments of any arc from overlapping.
        let n = rng.gen_range(3..=10);
        let net = MetricNetwork::from_json(&random_tree_json(&mut rng, n)).unwrap();
        let g_star = net.generalized_girth().expect("trees have finite g*");
        let l = rat(net.leaf_count() as i64);
        let quarters = rng.gen_range(1..=4);
        let alpha = &g_star * frac(quarters, 4);
        let prof = extremity_set(&net, &alpha).unwrap();
        // Below the generalized girth, E is exactly the alpha/2 leaf ends.
        assert_eq!(prof.lambda_e, &l * &alpha / rat(2), "case {case}");
        assert_eq!(prof.components.len(), net.leaf_count(), "case {case}");
        for c in &prof.components {
            assert_eq!(c.length(), &alpha / rat(2), "case {case}: side mass");
        }
        assert!(prof.leaf_condition, "case {case}");
        // Monotone in alpha: E(alpha/2) sits inside E(alpha).
        let smaller = extremity_set(&net, &(&alpha / rat(2))).unwrap();
        for (arc, ivs) in smaller.regions.iter().enumerate() {
            for (lo, hi) in ivs {
                let mid = (lo + hi) / rat(2);
                assert!(
                    prof.regions[arc].iter().any(|(l, h)| l <= &mid && &mid <= h),
                    "case {case}: monotonicity"
                );
            }
        }
    }
    pass(12, "200 random trees: lambda(E) = l*alpha/2 below g*, components carry alpha/2, E monotone");
}

#[test]
fn criterion_13_e_patrolling_certificate() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0usize;
    let mut case = 0usize;
    while checked < 100 {
        case += 1;
        let n = rng.gen_range(3..=8);
        let net = MetricNetwork::from_json(&random_tree_json(&mut rng, n)).unwrap();
        let g_star = net.generalized_girth().unwrap();
        let alpha = &g_star * frac(rng.gen_range(1..=4), 4);
        let prof = extremity_set(&net, &alpha).unwrap();
        if prof.lambda_e == *net.total_length() {
            // E covers the whole tree; the local-tour construction
            // degenerates to a plain postman tour.
            continue;
        }
        let tour = e_patrolling_tour(&net, &alpha).unwrap();
        assert_eq!(
            *tour.period(),
            rat(2) * (net.total_length() + &prof.lambda_e),
            "case {case}: period"
        );
        let sep = visit_separation(&net, &tour, 2, None).unwrap();
        assert!(
            sep.alpha0 >= alpha,
            "case {case}: separation {} < {alpha}",
            sep.alpha0
        );
        checked += 1;
    }
    pass(13, "100 random trees: e-patrolling period 2(mu+lambda(E)) with 2-separation >= alpha");
}

// ---------------------------------------------------------------------------
// Cross-checks and invariants beyond the numbered criteria

#[test]
fn monte_carlo_agrees_with_exact() {
    let dog = fixtures::network("dog-tree").unwrap();
    let alpha = rat(2);
    let patrol = randomized_periodic(leaf_pause_tour(&dog, &alpha).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..4 {
        let x = random_point(&mut rng, &dog);
        let tau = frac(rng.gen_range(0..40), 4);
        let exact = to_f64(&intercept_mixed_patrol(&dog, &patrol, &x, &tau, &alpha).unwrap());
        let n = 4000;
        let est = monte_carlo_mixed(&dog, &patrol, &x, &tau, &alpha, n, 1000 + trial).unwrap();
        let sigma = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!(
            (est - exact).abs() <= 3.0 * sigma + 0.005,
            "trial {trial}: exact {exact} vs mc {est}"
        );
    }
}

#[test]
fn dp_tightens_under_refinement() {
    // More start-time cells can only sharpen the certified upper bound.
    let star = fixtures::network("star-2166").unwrap();
    let attack = e_attack(&star, &rat(6)).unwrap();
    let mut prev: Option<Ratio> = None;
    for cells in [1u32, 2, 4] {
        let spec = GridSpec::uniform(rat(1), rat(24)).with_temporal_cells(cells);
        let (_, v) = best_response_patrol(&star, &attack, &spec).unwrap();
        if let Some(p) = &prev {
            assert!(v <= *p, "cells={cells}: {v} > {p}");
        }
        prev = Some(v);
    }
}

#[test]
fn multi_patroller_rejects_zero() {
    let dog = fixtures::network("dog-tree").unwrap();
    let patrol = randomized_periodic(double_cover_tour(&dog).unwrap());
    assert!(multi_patroller(MixedPatrol { ..patrol }, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Distances on generated trees form a metric.
    #[test]
    fn distance_is_a_metric(seed in 0u64..10_000, n in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = MetricNetwork::from_json(&random_tree_json(&mut rng, n)).unwrap();
        let p = random_point(&mut rng, &net);
        let q = random_point(&mut rng, &net);
        let r = random_point(&mut rng, &net);
        let dpq = net.distance(&p, &q).unwrap();
        let dqp = net.distance(&q, &p).unwrap();
        prop_assert_eq!(&dpq, &dqp);
        prop_assert!(dpq >= zero());
        if p == q {
            prop_assert_eq!(&dpq, &zero());
        }
        let via = net.distance(&p, &r).unwrap() + net.distance(&r, &q).unwrap();
        prop_assert!(dpq <= via);
    }

    /// Network documents round-trip through JSON.
    #[test]
    fn network_json_roundtrip(seed in 0u64..10_000, n in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let json = random_network_json(&mut rng, n);
        let net = MetricNetwork::from_json(&json).unwrap();
        let doc = serde_json::to_string(&net.to_doc()).unwrap();
        let back = MetricNetwork::from_json(&doc).unwrap();
        prop_assert_eq!(net.total_length(), back.total_length());
        prop_assert_eq!(net.node_count(), back.node_count());
        prop_assert_eq!(net.arc_count(), back.arc_count());
    }
}
