//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use common::{angle, Property};
use impulsegap::brackets::parse_bracket;
use impulsegap::cones::{qdq_certificate, SetDescriptor};
use impulsegap::example::{example_scenario, gap_process, reference_process};
use impulsegap::extremality::{search_multipliers, Classification, MultiplierSet, SearchConfig, SearchReport};
use impulsegap::processes::{cost, distance_d, is_feasible, strict_neighborhood_probe, ProbeConfig, Scenario};

// pinned tolerances
const FINAL_POINT_TOL: f64 = 1e-6;
const COST_TOL: f64 = 1e-9;
const ENERGY_TOL: f64 = 1e-8;
const D_TOL: f64 = 1e-10;
const RAY_ANGLE_TOL: f64 = 1e-3;
const RESIDUAL_TOL: f64 = 1e-6;
const GRID_ANGLE_TOL: f64 = 1e-4;
const QDQ_FINAL_RATIO: f64 = 0.02;
const QDQ_ORACLE_TOL: f64 = 1e-9;
const SPHERE_DIRECTIONS: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.pass &= took < limit;
    o.detail = format!("{}; {:.2}s (limit {}s)", o.detail, took.as_secs_f64(), limit.as_secs());
    o
}

fn with_grid(sc: &Scenario, n: usize) -> Scenario {
    let mut sc = sc.clone();
    sc.integrator.rel_step = 1.0 / n as f64;
    sc.integrator.max_step = None;
    sc
}

fn k_cone(sc: &Scenario) -> impulsegap::cones::PolyhedralCone {
    sc.target.clarke_tangent_cone(&[1.0, 0.0, 1.0]).unwrap()
}

fn ray(m: &MultiplierSet) -> Vec<f64> {
    vec![m.p0, m.p_terminal[0], m.p_terminal[1], m.pi]
}

fn criterion_1() -> Outcome {
    timed(Duration::from_secs(5), || {
        let sc = with_grid(&example_scenario(), 1000);
        let z = reference_process(&sc).unwrap();
        let err = common::dist(&z.final_point(), &[1.0, 0.0, 1.0]);
        let c = cost(&sc, &z).unwrap();
        let pass = err <= FINAL_POINT_TOL && (c - 1.0).abs() <= COST_TOL && is_feasible(&sc, &z).feasible;
        outcome(pass, format!("final point error {err:.1e}, cost {c}"))
    })
}

fn criterion_2() -> Outcome {
    let sc = example_scenario();
    let zbar = reference_process(&sc).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [1.0, 0.5, 0.25, 0.125] {
        let z = gap_process(&sc, r).unwrap();
        let feasible = is_feasible(&sc, &z).feasible;
        let de = (z.final_energy() - r).abs();
        let dd = (distance_d(&z, &zbar) - r).abs();
        let c = cost(&sc, &z).unwrap();
        let ce = (c - (1.0 - r) * (1.0 - r)).abs();
        let ok = feasible && de <= ENERGY_TOL && dd <= D_TOL && ce <= COST_TOL && c < 1.0;
        pass &= ok;
        parts.push(format!("r={r}: cost {c:.6}{}", if ok { "" } else { " (bad)" }));
    }
    outcome(pass, parts.join(", "))
}

/// Residual of the maximum principle on the reference for `(p0, p1, p2)` with
/// `pi = 0`, by hand: `p` is constant, `max H = max(p0 + p2, p1 + eta p2)` must
/// vanish along `x2 = s`, and transversality asks `p1 >= 2 lambda`.
fn hand_residual(p: [f64; 3], lambda: f64) -> f64 {
    let eta = |x2: f64| 0.5 * (std::f64::consts::PI * (x2 - 0.5)).sin() - 0.5;
    let mut worst: f64 = 0.0;
    for k in 0..=200 {
        let s = k as f64 / 200.0;
        worst = worst.max((p[0] + p[2]).max(p[1] + eta(s) * p[2]).abs());
    }
    worst + (2.0 * lambda - p[1]).max(0.0)
}

fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [rho * t.cos(), rho * t.sin(), z]
        })
        .collect()
}

fn search_at(n: usize) -> SearchReport {
    let sc = with_grid(&example_scenario(), n);
    let z = reference_process(&sc).unwrap();
    search_multipliers(&sc, &z, &k_cone(&sc), &SearchConfig::from_scenario(&sc)).unwrap()
}

fn criterion_3() -> Outcome {
    let expected = [-1.0, 0.0, 1.0, 0.0];
    let mut o = timed(Duration::from_secs(30), || {
        let r = search_at(1000);
        let abnormal = r.classification == Classification::Abnormal;
        let worst_angle = r.multipliers.iter().map(|m| angle(&ray(m), &expected)).fold(0.0, f64::max);
        let worst_res = r.reports.iter().map(|x| x.max_residual()).fold(0.0, f64::max);
        let zero_lambda = r.multipliers.iter().all(|m| m.lambda == 0.0);
        let pass = abnormal
            && !r.multipliers.is_empty()
            && zero_lambda
            && worst_angle <= RAY_ANGLE_TOL
            && !r.normal_feasible
            && worst_res <= RESIDUAL_TOL;
        outcome(
            pass,
            format!(
                "{}, angle {worst_angle:.1e}, max residual {worst_res:.1e}, lambda=1 feasible {}",
                r.classification.as_str(),
                r.normal_feasible
            ),
        )
    });
    // dense sphere oracle: the best direction sits on the ray and lambda = 1 stays infeasible
    let dirs = fibonacci_sphere(SPHERE_DIRECTIONS);
    let best = dirs
        .iter()
        .min_by(|a, b| hand_residual(**a, 0.0).total_cmp(&hand_residual(**b, 0.0)))
        .unwrap();
    let spacing = (4.0 * std::f64::consts::PI / SPHERE_DIRECTIONS as f64).sqrt();
    let oracle_angle = angle(&[best[0], best[1], best[2]], &expected[..3]);
    let normal_floor = dirs
        .iter()
        .flat_map(|d| [0.1, 1.0, 10.0, 100.0].map(|t| hand_residual(d.map(|x| t * x), 1.0)))
        .fold(f64::INFINITY, f64::min);
    // grid convergence of the returned ray
    let (a, b) = (search_at(1000), search_at(2000));
    let grid_angle = match (a.multipliers.first(), b.multipliers.first()) {
        (Some(x), Some(y)) => angle(&ray(x), &ray(y)),
        _ => f64::INFINITY,
    };
    o.pass &= oracle_angle <= 2.0 * spacing && normal_floor >= 1.0 && grid_angle <= GRID_ANGLE_TOL;
    o.detail = format!(
        "{}; sphere oracle angle {oracle_angle:.1e} (spacing {spacing:.1e}), lambda=1 floor {normal_floor:.2}, grid angle {grid_angle:.1e}",
        o.detail
    );
    o
}

fn criterion_4() -> Outcome {
    let sw = |s: &str| parse_bracket(s).unwrap().switch_number();
    let len = |s: &str| parse_bracket(s).unwrap().length();
    let switches = [sw("[[X3,X4],[[X5,X6],X7]]"), sw("[[X5,X6],X7]")];
    let lengths = [
        len("[[X1,X2],X3]"),
        len("[[X1,X2],[X3,X4]]"),
        len("[[[X1,X2],X3],X4]"),
        len("[[X2,X3],X4]"),
    ];
    let pass = switches == [28, 10] && lengths == [3, 4, 4, 3];
    outcome(pass, format!("switch numbers {switches:?}, lengths {lengths:?}"))
}

/// Deepest `[` nesting at which each letter occurs, read off the text.
fn text_depths(text: &str) -> std::collections::BTreeMap<u32, u32> {
    let mut out = std::collections::BTreeMap::new();
    let mut depth = 0u32;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            'X' => {
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                let e = out.entry(digits.parse().unwrap()).or_insert(0);
                *e = depth.max(*e);
            }
            _ => {}
        }
    }
    out
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    for k in 0..4u32 {
        let a = parse_bracket("[[[X3,X4],[X5,X6]],X7]").unwrap().required_smoothness(k);
        pass &= (3..=6).all(|l| a[&l] == 3 + k) && a[&7] == 1 + k;
        // X6 is the same field as X3
        let b = parse_bracket("[[X3,[X4,X5]],X6]").unwrap().relabel(&|l| if l == 6 { 3 } else { l });
        let b = b.required_smoothness(k);
        pass &= b[&3] == 2 + k && b[&4] == 3 + k && b[&5] == 3 + k;
        for text in ["[[[X3,X4],[X5,X6]],X7]", "[[X3,[X4,X5]],X3]"] {
            let oracle = text_depths(text);
            let got = parse_bracket(text).unwrap().required_smoothness(k);
            pass &= oracle.iter().all(|(l, d)| got[l] == d + k);
        }
    }
    outcome(pass, "classes 3+k/1+k and 2+k/3+k for k = 0..3".into())
}

fn criterion_6() -> Outcome {
    let suites: [&[Property]; 4] = [
        common::cones::ALL,
        common::fields::ALL,
        common::processes::ALL,
        common::extremality::ALL,
    ];
    let mut failed = Vec::new();
    let mut total = 0;
    for (name, prop) in suites.iter().flat_map(|s| s.iter()) {
        total += 1;
        if let Err(e) = prop() {
            failed.push(format!("{name}: {e}"));
        }
    }
    let detail = if failed.is_empty() {
        format!("{total} properties passed")
    } else {
        format!("{} of {total} failed: {}", failed.len(), failed.join("; "))
    };
    outcome(failed.is_empty(), detail)
}

fn criterion_7() -> Outcome {
    let ladder = [0.2, 0.1, 0.05, 0.025];
    let circle = SetDescriptor::sphere(vec![0.0, 0.0], 1.0);
    let cert = qdq_certificate(&circle, &[1.0, 0.0], &ladder, 64, 11).unwrap();
    let t = &cert.ratio_table;
    let decreasing = t.windows(2).all(|w| w[1] < w[0]);
    // closed form: the worst tangent point (1, delta) is at distance sqrt(1 + delta^2) - 1
    let oracle_err = ladder
        .iter()
        .zip(t)
        .map(|(d, r)| ((1.0 + d * d).sqrt() - 1.0) / d - r)
        .fold(0.0, |a: f64, e| a.max(e.abs()));
    let last = *t.last().unwrap();
    let pass = decreasing && last < QDQ_FINAL_RATIO && oracle_err <= QDQ_ORACLE_TOL;
    outcome(pass, format!("ratios {t:.5?}, oracle error {oracle_err:.1e}"))
}

fn criterion_8() -> Outcome {
    timed(Duration::from_secs(60), || {
        let sc = example_scenario();
        let cfg = ProbeConfig { seed: 7, ..ProbeConfig::default() };
        let z = gap_process(&sc, 0.5).unwrap();
        let gap = strict_neighborhood_probe(&sc, &z, 0.2, 2000, &cfg).unwrap();
        let zbar = reference_process(&sc).unwrap();
        let refp = strict_neighborhood_probe(&sc, &zbar, 0.2, 2000, &cfg).unwrap();
        let finds_self = refp.feasible_found && refp.best_cost.is_some_and(|c| (c - 1.0).abs() <= COST_TOL);
        let pass = !gap.feasible_found && gap.samples == 2000 && finds_self;
        outcome(
            pass,
            format!(
                "z_0.5 feasible samples {}, reference probe best cost {:?}",
                gap.feasible_count, refp.best_cost
            ),
        )
    })
}

fn main() {
    let criteria: [fn() -> Outcome; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    let mut all = true;
    for (i, c) in criteria.iter().enumerate() {
        let o = c();
        all &= o.pass;
        println!("criterion {}: {} {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
