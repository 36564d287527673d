//! Command-line front end: batch analysis of patrolling games on metric
//! networks. Every subcommand is a pure function of its inputs and `--seed`;
//! all numeric output is dual-format (exact rational plus decimal).
//!
//! Exit codes: 0 success, 1 invalid input or domain error, 2 usage error,
//! 3 certified lower bound exceeds certified upper bound (CI tripwire).

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use patrolling::attack::{
    attack_611, attack_611_bound, attack_611_formula, attack_fig8_tree, e_attack, e_attack_bound,
    independent_attack, uniform_attack, uniform_attack_bound, MixedAttack, Spatial,
};
use patrolling::best_response::{best_response_attack, best_response_patrol, GridSpec};
use patrolling::error::Error;
use patrolling::eval::{intercept_mixed_patrol, intercept_pure_patrol, PatrolPath};
use patrolling::extremity::extremity_set;
use patrolling::fixtures;
use patrolling::network::NetPoint;
use patrolling::oracle::{solve_double_oracle, value_bracket, DiscreteGame};
use patrolling::patrol::{
    best_cover_order, e_patrolling_tour, multi_patroller, randomized_periodic, MixedPatrol,
    PatrolDoc,
};
use patrolling::ratio::{one, parse_ratio, rat, ratio_string, to_f64, zero, Ratio};
use patrolling::tour::{
    alternating_double_cover, double_cover_tour, leaf_pause_tour, tree_cpt, TimedTour, TourDoc,
};
use patrolling::MetricNetwork;

#[derive(Parser)]
#[command(
    name = "patrolling",
    version,
    about = "Patrolling games on metric networks: tours, attacks, evaluation, game value"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Seed for Monte Carlo subcommands; ignored elsewhere.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TourKind {
    /// Chinese postman tour of a tree (depth-first, length 2 mu).
    Cpt,
    /// Tour covering every arc twice with no non-leaf reversal.
    DoubleCover,
    /// Double cover alternating between the two copies of each arc.
    Alternating,
    /// Double cover pausing for alpha at every leaf (requires --alpha).
    LeafPause,
    /// CPT with repeated local tours of the extremity complement (tree,
    /// requires --alpha).
    EPatrolling,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttackKind {
    /// Uniform point on the whole network, fixed start time.
    Uniform,
    /// Atoms on the leaf nodes mixed with uniform on the complement of
    /// their alpha/2 neighbourhood.
    Independent,
    /// Attack concentrated on the extremity set E (tree, Leaf Condition).
    EAttack,
    /// Hand-built optimal attack on the 6-1-1 star, 4 <= alpha <= 8.
    S611,
    /// The same formulas without the alpha <= 8 guard (diagnostics only;
    /// weights no longer sum to 1 above 8).
    S611Formula,
    /// Hand-built attack on the figure-8 tree at alpha = 6.
    Fig8,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structural summary of a network: length, leaves, girth, Euler/tree.
    Analyze {
        /// Fixture name or path to a network JSON file.
        #[arg(long)]
        net: String,
    },
    /// Construct a closed patrol tour and report its guarantee.
    Tour {
        #[arg(long)]
        net: String,
        #[arg(long, value_enum)]
        kind: TourKind,
        /// Attack duration, e.g. 3 or 1/2.
        #[arg(long, value_parser = parse_ratio_arg)]
        alpha: Option<Ratio>,
        /// Write the tour document to this file.
        #[arg(long)]
        out: Option<String>,
    },
    /// The extremity set E(Q, alpha) of a tree.
    Extremity {
        #[arg(long)]
        net: String,
        #[arg(long, value_parser = parse_ratio_arg)]
        alpha: Option<Ratio>,
        /// Inclusive sweep start:end:step, e.g. 1:8:1.
        #[arg(long, conflicts_with = "alpha")]
        alpha_sweep: Option<String>,
    },
    /// A randomized periodic patrol (tour + uniform phase + m patrollers).
    Patrol {
        #[arg(long)]
        net: String,
        #[arg(long, value_enum)]
        kind: TourKind,
        #[arg(long, value_parser = parse_ratio_arg)]
        alpha: Option<Ratio>,
        /// Number of patrollers, phased L/m apart.
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Construct a mixed attack and report its certified cap.
    Attack {
        #[arg(long)]
        net: String,
        #[arg(long, value_enum)]
        kind: AttackKind,
        #[arg(long, value_parser = parse_ratio_arg)]
        alpha: Ratio,
        /// Start time for the uniform attack.
        #[arg(long, value_parser = parse_ratio_arg, default_value = "0")]
        time: Ratio,
        #[arg(long)]
        out: Option<String>,
    },
    /// Interception probability of a patrol document against an attack
    /// document.
    Evaluate {
        #[arg(long)]
        net: String,
        /// Patrol JSON (tour or patrol document).
        #[arg(long)]
        patrol: String,
        /// Attack JSON.
        #[arg(long)]
        attack: String,
        /// Monte Carlo sample count; omit for exact evaluation.
        #[arg(long)]
        mc: Option<usize>,
        /// Evaluate the deterministic phase-0 path instead of the
        /// randomized patrol.
        #[arg(long)]
        pure: bool,
    },
    /// Discretized best response: patroller DP against an attack file, or
    /// attacker grid scan against a patrol file.
    BestResponse {
        #[arg(long)]
        net: String,
        #[arg(long, value_parser = parse_ratio_arg)]
        dx: Ratio,
        /// Attack JSON; computes the best patrol walk against it.
        #[arg(long, conflicts_with = "patrol")]
        attack: Option<String>,
        /// Patrol JSON; computes the worst grid attack against it.
        #[arg(long)]
        patrol: Option<String>,
        /// DP horizon; defaults to twice the attack horizon.
        #[arg(long, value_parser = parse_ratio_arg)]
        horizon: Option<Ratio>,
        /// Cells each spread-out start-time distribution is split into.
        #[arg(long, default_value_t = 4)]
        cells: u32,
        /// Needed with --patrol (the attack file carries alpha otherwise).
        #[arg(long, value_parser = parse_ratio_arg)]
        alpha: Option<Ratio>,
    },
    /// Double-oracle bracket of the discretized game value.
    Oracle {
        #[arg(long)]
        net: String,
        #[arg(long, value_parser = parse_ratio_arg)]
        alpha: Ratio,
        /// Grid step (space = time).
        #[arg(long, value_parser = parse_ratio_arg)]
        dx: Ratio,
        #[arg(long, default_value_t = 0.02)]
        eps: f64,
        #[arg(long, default_value_t = 40)]
        max_iter: usize,
        /// DP horizon for patroller best responses; defaults to 4 mu.
        #[arg(long, value_parser = parse_ratio_arg)]
        horizon: Option<Ratio>,
        #[arg(long, default_value_t = 4)]
        cells: u32,
    },
    /// Closed-form value bracket from certified guarantees and attack caps.
    Value {
        #[arg(long)]
        net: String,
        #[arg(long, value_parser = parse_ratio_arg)]
        alpha: Ratio,
    },
    /// List the named example networks, print one, or write them out.
    Fixtures {
        /// Print this fixture's JSON instead of the list.
        #[arg(long)]
        name: Option<String>,
        /// Write every fixture to this directory.
        #[arg(long)]
        out: Option<String>,
    },
}

fn parse_ratio_arg(s: &str) -> Result<Ratio, String> {
    parse_ratio(s).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// Report plumbing

fn num(r: &Ratio) -> Value {
    json!({ "rational": ratio_string(r), "decimal": format!("{:.12}", to_f64(r)) })
}

fn num_f64(x: f64) -> Value {
    json!({ "rational": null, "decimal": format!("{x:.12}") })
}

fn opt_num(r: &Option<Ratio>) -> Value {
    match r {
        Some(r) => num(r),
        None => Value::Null,
    }
}

/// FNV-1a of the canonical input description, so reports carry a stable
/// digest of what produced them.
fn digest(inputs: &Value) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in inputs.to_string().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn report(command: &str, inputs: Value, outputs: Value) -> Value {
    json!({
        "command": command,
        "inputs": inputs,
        "digest": digest(&inputs),
        "outputs": outputs,
    })
}

fn is_dual(v: &Value) -> Option<String> {
    let o = v.as_object()?;
    if o.len() == 2 && o.contains_key("rational") && o.contains_key("decimal") {
        let dec = o["decimal"].as_str().unwrap_or("?");
        return Some(match o["rational"].as_str() {
            Some(rat) => format!("{rat} ({dec})"),
            None => dec.to_string(),
        });
    }
    None
}

fn print_table(v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                if let Some(s) = is_dual(val) {
                    println!("{pad}{k}: {s}");
                } else {
                    match val {
                        Value::Object(_) | Value::Array(_) if !is_flat(val) => {
                            println!("{pad}{k}:");
                            print_table(val, indent + 1);
                        }
                        _ => println!("{pad}{k}: {}", flat(val)),
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if is_flat(item) {
                    println!("{pad}- {}", flat(item));
                } else {
                    println!("{pad}-");
                    print_table(item, indent + 1);
                }
            }
        }
        other => println!("{pad}{}", flat(other)),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(|i| i.is_string() || i.is_number()),
        Value::Object(_) => is_dual(v).is_some(),
        _ => true,
    }
}

fn flat(v: &Value) -> String {
    if let Some(s) = is_dual(v) {
        return s;
    }
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(flat).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Subcommand handlers

fn build_tour(net: &MetricNetwork, kind: TourKind, alpha: Option<&Ratio>) -> Result<TimedTour, Error> {
    let need_alpha = || {
        alpha
            .cloned()
            .ok_or_else(|| Error::InvalidParameter("this tour kind requires --alpha".into()))
    };
    match kind {
        TourKind::Cpt => tree_cpt(net, &NetPoint::Node(0)),
        TourKind::DoubleCover => double_cover_tour(net),
        TourKind::Alternating => alternating_double_cover(net),
        TourKind::LeafPause => leaf_pause_tour(net, &need_alpha()?),
        TourKind::EPatrolling => e_patrolling_tour(net, &need_alpha()?),
    }
}

fn tour_summary(net: &MetricNetwork, tour: &TimedTour, alpha: Option<&Ratio>, m: usize) -> Value {
    let mut out = json!({
        "period": num(tour.period()),
        "segments": tour.segments().len(),
    });
    if let Some(alpha) = alpha {
        let k = best_cover_order(net, tour, alpha);
        let g = if k == 0 {
            zero()
        } else {
            (rat(m as i64) * rat(k as i64) * alpha / tour.period()).min(one())
        };
        out["cover_order"] = json!(k);
        out["guarantee"] = num(&g);
    }
    out
}

fn cmd_analyze(net: &MetricNetwork) -> Value {
    json!({
        "nodes": net.node_count(),
        "arcs": net.arc_count(),
        "total_length": num(net.total_length()),
        "leaf_count": net.leaf_count(),
        "girth": opt_num(&net.girth()),
        "generalized_girth": opt_num(&net.generalized_girth()),
        "eulerian": net.is_eulerian(),
        "tree": net.is_tree(),
    })
}

fn cmd_tour(
    net: &MetricNetwork,
    kind: TourKind,
    alpha: Option<&Ratio>,
    out: Option<&str>,
) -> Result<Value, Error> {
    let tour = build_tour(net, kind, alpha)?;
    let doc = tour.to_doc(net);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    }
    let mut v = tour_summary(net, &tour, alpha, 1);
    v["tour"] = serde_json::to_value(&doc)?;
    Ok(v)
}

fn parse_sweep(spec: &str) -> Result<Vec<Ratio>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "sweep must be start:end:step, got {spec:?}"
        )));
    }
    let (start, end, step) = (
        parse_ratio(parts[0])?,
        parse_ratio(parts[1])?,
        parse_ratio(parts[2])?,
    );
    if step <= zero() {
        return Err(Error::InvalidParameter("sweep step must be positive".into()));
    }
    let mut out = Vec::new();
    let mut a = start;
    while a <= end {
        out.push(a.clone());
        a += &step;
    }
    Ok(out)
}

fn cmd_extremity(
    net: &MetricNetwork,
    alpha: Option<&Ratio>,
    sweep: Option<&str>,
) -> Result<Value, Error> {
    match (alpha, sweep) {
        (Some(alpha), None) => {
            let prof = extremity_set(net, alpha)?;
            let mut v = serde_json::to_value(prof.to_doc(net))?;
            v["lambda_e"] = num(&prof.lambda_e);
            v["v_star"] = num(&prof.v_star);
            Ok(v)
        }
        (None, Some(spec)) => {
            let mut rows = Vec::new();
            let mut counts = Vec::new();
            for alpha in parse_sweep(spec)? {
                let prof = extremity_set(net, &alpha)?;
                counts.push(prof.components.len());
                rows.push(json!({
                    "alpha": num(&alpha),
                    "components": prof.components.len(),
                    "lambda_e": num(&prof.lambda_e),
                    "leaf_condition": prof.leaf_condition,
                    "v_star": num(&prof.v_star),
                }));
            }
            Ok(json!({ "component_counts": counts, "sweep": rows }))
        }
        _ => Err(Error::InvalidParameter(
            "provide exactly one of --alpha or --alpha-sweep".into(),
        )),
    }
}

fn cmd_patrol(
    net: &MetricNetwork,
    kind: TourKind,
    alpha: Option<&Ratio>,
    m: usize,
    out: Option<&str>,
) -> Result<Value, Error> {
    let tour = build_tour(net, kind, alpha)?;
    let patrol = multi_patroller(randomized_periodic(tour), m)?;
    let doc = patrol.to_doc(net);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    }
    let mut v = tour_summary(net, &patrol.tour, alpha, m);
    v["m"] = json!(m);
    v["patrol"] = serde_json::to_value(&doc)?;
    Ok(v)
}

fn cmd_attack(
    net: &MetricNetwork,
    kind: AttackKind,
    alpha: &Ratio,
    time: &Ratio,
    out: Option<&str>,
) -> Result<Value, Error> {
    let (attack, bound) = match kind {
        AttackKind::Uniform => (
            uniform_attack(net, alpha, time)?,
            uniform_attack_bound(net, alpha),
        ),
        AttackKind::Independent => {
            let leaves: Vec<NetPoint> = net
                .leaf_arcs()
                .iter()
                .map(|&(_, n)| NetPoint::Node(n))
                .collect();
            let (attack, spec) = independent_attack(net, &leaves, alpha)?;
            (attack, spec.bound)
        }
        AttackKind::EAttack => (e_attack(net, alpha)?, e_attack_bound(net, alpha)?),
        AttackKind::S611 => (attack_611(net, alpha)?, attack_611_bound(alpha)),
        AttackKind::S611Formula => (attack_611_formula(net, alpha)?, attack_611_bound(alpha)),
        AttackKind::Fig8 => (attack_fig8_tree(net, alpha)?, parse_ratio("1/2")?),
    };
    let doc = attack.to_doc(net);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(json!({
        "components": attack.components.len(),
        "total_weight": num(&attack.total_weight()),
        "bound": num(&bound),
        "attack": serde_json::to_value(&doc)?,
    }))
}

/// Reads a patrol file as either a full patrol document or a bare tour.
fn read_patrol(net: &MetricNetwork, path: &str) -> Result<MixedPatrol, Error> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(doc) = serde_json::from_str::<PatrolDoc>(&text) {
        if let Ok(p) = MixedPatrol::from_doc(net, &doc) {
            return Ok(p);
        }
    }
    let doc: TourDoc = serde_json::from_str(&text)?;
    Ok(randomized_periodic(TimedTour::from_doc(net, &doc)?))
}

fn read_attack(net: &MetricNetwork, path: &str) -> Result<MixedAttack, Error> {
    let text = std::fs::read_to_string(path)?;
    let doc = serde_json::from_str(&text)?;
    MixedAttack::from_doc(net, &doc)
}

fn approx_ratio(x: f64) -> Ratio {
    rat((x * 1e6).round() as i64) / rat(1_000_000)
}

fn cmd_evaluate(
    net: &MetricNetwork,
    patrol_file: &str,
    attack_file: &str,
    mc: Option<usize>,
    pure: bool,
    seed: u64,
) -> Result<Value, Error> {
    let patrol = read_patrol(net, patrol_file)?;
    let attack = read_attack(net, attack_file)?;
    let alpha = attack.alpha.clone();

    if pure {
        // Deterministic phase-0 path, unrolled far enough to cover the
        // attack horizon.
        let horizon = attack.horizon();
        let path = PatrolPath::unroll(&patrol.tour, &horizon);
        let v = match mc {
            None => intercept_pure_patrol(net, &path, &attack)?,
            Some(n) => {
                let est = patrolling::eval::monte_carlo_pure(net, &path, &attack, n, seed)?;
                return Ok(json!({ "mode": "pure-mc", "samples": n, "value": num_f64(est) }));
            }
        };
        return Ok(json!({ "mode": "pure-exact", "value": num(&v) }));
    }

    match mc {
        None => {
            // The uniform phase makes per-point payoffs independent of the
            // start time, so spatial atoms evaluate exactly; region
            // components need --mc.
            let mut total = zero();
            for c in &attack.components {
                match &c.spatial {
                    Spatial::Atom(x) => {
                        total += &c.weight
                            * intercept_mixed_patrol(net, &patrol, x, &zero(), &alpha)?;
                    }
                    Spatial::UniformRegion(_) => {
                        return Err(Error::InvalidParameter(
                            "exact mixed evaluation needs spatial atoms; use --mc for region attacks"
                                .into(),
                        ));
                    }
                }
            }
            Ok(json!({ "mode": "mixed-exact", "value": num(&total) }))
        }
        Some(n) => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
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
                        let mut picked = None;
                        for (arc, lo, hi) in &r.intervals {
                            let len = to_f64(&(hi - lo));
                            if u <= len || picked.is_none() {
                                let off = lo + approx_ratio(u.clamp(0.0, len))
                                    .min(hi - lo);
                                picked = Some(NetPoint::on(*arc, off));
                            }
                            if u <= len {
                                break;
                            }
                            u -= len;
                        }
                        picked.unwrap()
                    }
                };
                let tau = approx_ratio(chosen.temporal.sample_from(rng.gen::<f64>()));
                let y = patrolling::eval::interception_phases(net, &patrol, &x, &tau, &alpha)?;
                let delta = approx_ratio(rng.gen::<f64>() * to_f64(patrol.tour.period()));
                if y.contains(&delta) {
                    hits += 1;
                }
            }
            let est = hits as f64 / n as f64 * total_weight;
            Ok(json!({ "mode": "mixed-mc", "samples": n, "value": num_f64(est) }))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_best_response(
    net: &MetricNetwork,
    dx: &Ratio,
    attack_file: Option<&str>,
    patrol_file: Option<&str>,
    horizon: Option<&Ratio>,
    cells: u32,
    alpha: Option<&Ratio>,
) -> Result<Value, Error> {
    match (attack_file, patrol_file) {
        (Some(path), None) => {
            let attack = read_attack(net, path)?;
            let h = horizon
                .cloned()
                .unwrap_or_else(|| patrolling::best_response::default_horizon(&attack));
            let spec = GridSpec::uniform(dx.clone(), h).with_temporal_cells(cells);
            let (walk, value) = best_response_patrol(net, &attack, &spec)?;
            Ok(json!({
                "side": "patroller",
                "value": num(&value),
                "walk_end": num(walk.end_time()),
                "walk_segments": walk.segments().len(),
            }))
        }
        (None, Some(path)) => {
            let alpha = alpha
                .cloned()
                .ok_or_else(|| Error::InvalidParameter("--patrol needs --alpha".into()))?;
            let patrol = read_patrol(net, path)?;
            let spec = GridSpec::uniform(dx.clone(), rat(4) * net.total_length());
            let (point, tau, value) = best_response_attack(net, &patrol, &alpha, &spec)?;
            Ok(json!({
                "side": "attacker",
                "value": num(&value),
                "point": net.point_label(&point),
                "tau": num(&tau),
            }))
        }
        _ => Err(Error::InvalidParameter(
            "provide exactly one of --attack or --patrol".into(),
        )),
    }
}

fn cmd_oracle(
    net: &MetricNetwork,
    alpha: &Ratio,
    dx: &Ratio,
    eps: f64,
    max_iter: usize,
    horizon: Option<&Ratio>,
    cells: u32,
) -> Result<(Value, bool), Error> {
    let h = horizon
        .cloned()
        .unwrap_or_else(|| rat(4) * net.total_length());
    let spec = GridSpec::uniform(dx.clone(), h).with_temporal_cells(cells);
    let game = DiscreteGame::new(net, alpha, spec)?;
    let report = solve_double_oracle(&game, eps, max_iter)?;
    let violated = report.lower > report.upper + 1e-9;
    Ok((
        json!({
            "lower": num_f64(report.lower),
            "upper": num_f64(report.upper),
            "restricted_value": num_f64(report.restricted_value),
            "iterations": report.iterations,
            "rows": report.rows,
            "cols": report.cols,
            "converged": report.converged,
        }),
        violated,
    ))
}

fn cmd_value(net: &MetricNetwork, alpha: &Ratio) -> Result<(Value, bool), Error> {
    let bracket = value_bracket(net, alpha)?;
    let violated = bracket.lower > bracket.upper;
    let mut v = json!({
        "lower": num(&bracket.lower),
        "upper": num(&bracket.upper),
        "lower_witness": bracket.lower_witness,
        "upper_witness": bracket.upper_witness,
        "pinned": bracket.lower == bracket.upper,
    });
    if net.is_tree() {
        if let Ok(prof) = extremity_set(net, alpha) {
            v["v_star"] = num(&prof.v_star);
        }
    }
    Ok((v, violated))
}

fn cmd_fixtures(name: Option<&str>, out: Option<&str>) -> Result<Value, Error> {
    if let Some(name) = name {
        let text = fixtures::json(name)?;
        return Ok(serde_json::from_str(text)?);
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        for &(name, text) in fixtures::FIXTURES {
            std::fs::write(format!("{dir}/{name}.json"), text)?;
        }
    }
    let rows: Vec<Value> = fixtures::FIXTURES
        .iter()
        .map(|&(name, _)| {
            let net = fixtures::network(name).expect("fixture parses");
            json!({
                "name": name,
                "total_length": num(net.total_length()),
                "nodes": net.node_count(),
                "arcs": net.arc_count(),
                "leaves": net.leaf_count(),
            })
        })
        .collect();
    Ok(json!({ "fixtures": rows }))
}

// ---------------------------------------------------------------------------

fn run(cli: &Cli) -> Result<(Value, bool), Error> {
    let r = |s: &Ratio| ratio_string(s);
    match &cli.cmd {
        Cmd::Analyze { net } => {
            let q = fixtures::resolve(net)?;
            Ok((
                report("analyze", json!({ "net": net }), cmd_analyze(&q)),
                false,
            ))
        }
        Cmd::Tour {
            net,
            kind,
            alpha,
            out,
        } => {
            let q = fixtures::resolve(net)?;
            let inputs = json!({ "net": net, "alpha": alpha.as_ref().map(r) });
            let v = cmd_tour(&q, *kind, alpha.as_ref(), out.as_deref())?;
            Ok((report("tour", inputs, v), false))
        }
        Cmd::Extremity {
            net,
            alpha,
            alpha_sweep,
        } => {
            let q = fixtures::resolve(net)?;
            let inputs =
                json!({ "net": net, "alpha": alpha.as_ref().map(r), "sweep": alpha_sweep });
            let v = cmd_extremity(&q, alpha.as_ref(), alpha_sweep.as_deref())?;
            Ok((report("extremity", inputs, v), false))
        }
        Cmd::Patrol {
            net,
            kind,
            alpha,
            m,
            out,
        } => {
            let q = fixtures::resolve(net)?;
            let inputs = json!({ "net": net, "alpha": alpha.as_ref().map(r), "m": m });
            let v = cmd_patrol(&q, *kind, alpha.as_ref(), *m, out.as_deref())?;
            Ok((report("patrol", inputs, v), false))
        }
        Cmd::Attack {
            net,
            kind,
            alpha,
            time,
            out,
        } => {
            let q = fixtures::resolve(net)?;
            let inputs = json!({ "net": net, "alpha": r(alpha), "time": r(time) });
            let v = cmd_attack(&q, *kind, alpha, time, out.as_deref())?;
            Ok((report("attack", inputs, v), false))
        }
        Cmd::Evaluate {
            net,
            patrol,
            attack,
            mc,
            pure,
        } => {
            let q = fixtures::resolve(net)?;
            let inputs = json!({
                "net": net, "patrol": patrol, "attack": attack,
                "mc": mc, "pure": pure, "seed": cli.seed,
            });
            let v = cmd_evaluate(&q, patrol, attack, *mc, *pure, cli.seed)?;
            Ok((report("evaluate", inputs, v), false))
        }
        Cmd::BestResponse {
            net,
            dx,
            attack,
            patrol,
            horizon,
            cells,
            alpha,
        } => {
            let q = fixtures::resolve(net)?;
            let inputs = json!({
                "net": net, "dx": r(dx), "attack": attack, "patrol": patrol,
                "horizon": horizon.as_ref().map(r), "cells": cells,
                "alpha": alpha.as_ref().map(r),
            });
            let v = cmd_best_response(
                &q,
                dx,
                attack.as_deref(),
                patrol.as_deref(),
                horizon.as_ref(),
                *cells,
                alpha.as_ref(),
            )?;
            Ok((report("best-response", inputs, v), false))
        }
        Cmd::Oracle {
            net,
            alpha,
            dx,
            eps,
            max_iter,
            horizon,
            cells,
        } => {
            let q = fixtures::resolve(net)?;
            let inputs = json!({
                "net": net, "alpha": r(alpha), "dx": r(dx), "eps": eps,
                "max_iter": max_iter, "horizon": horizon.as_ref().map(r),
                "cells": cells,
            });
            let (v, violated) = cmd_oracle(&q, alpha, dx, *eps, *max_iter, horizon.as_ref(), *cells)?;
            Ok((report("oracle", inputs, v), violated))
        }
        Cmd::Value { net, alpha } => {
            let q = fixtures::resolve(net)?;
            let inputs = json!({ "net": net, "alpha": r(alpha) });
            let (v, violated) = cmd_value(&q, alpha)?;
            Ok((report("value", inputs, v), violated))
        }
        Cmd::Fixtures { name, out } => {
            let inputs = json!({ "name": name, "out": out });
            let v = cmd_fixtures(name.as_deref(), out.as_deref())?;
            Ok((report("fixtures", inputs, v), false))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, violated)) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&value).unwrap()),
                Format::Table => print_table(&value, 0),
            }
            if violated {
                eprintln!("error: certified lower bound exceeds certified upper bound");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
